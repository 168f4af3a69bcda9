use crate::error::{invalid, Result};

/// Ordinary least squares on `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Pairs used in the fit.
    pub points: usize,
    /// Pairs dropped because `y == 0`.
    pub excluded_zeros: usize,
}

/// Fits `ln y = intercept + slope ln x`. Pairs with `y == 0` are excluded and
/// counted; at least three positive pairs must remain.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return invalid("xs and ys differ in length");
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return invalid("fit inputs must be finite");
    }
    if xs.iter().any(|&x| x <= 0.0) || ys.iter().any(|&y| y < 0.0) {
        return invalid("fit needs positive xs and non-negative ys");
    }
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    let excluded_zeros = xs.len() - pairs.len();
    if pairs.len() < 3 {
        return invalid(format!("fit needs at least 3 positive pairs, got {}", pairs.len()));
    }
    let k = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pairs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("fit needs at least two distinct xs");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pairs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
        points: pairs.len(),
        excluded_zeros,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let xs = [8.0, 16.0, 32.0, 64.0, 128.0];
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 / x).collect();
        let f = fit_slope(&xs, &ys).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        let f = fit_slope(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zeros_are_excluded() {
        let f = fit_slope(&[1.0, 2.0, 4.0, 8.0], &[1.0, 0.0, 0.25, 0.125]).unwrap();
        assert_eq!(f.excluded_zeros, 1);
        assert_eq!(f.points, 3);
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!(fit_slope(&[1.0, 2.0, 4.0], &[1.0, 0.0, 0.5]).is_err());
        assert!(fit_slope(&[1.0, 2.0], &[1.0, 0.5]).is_err());
    }

    #[test]
    fn scale_only_moves_the_intercept() {
        let xs = [3.0, 5.0, 11.0, 40.0];
        let ys = [0.3, 0.21, 0.09, 0.05];
        let a = fit_slope(&xs, &ys).unwrap();
        let scaled: Vec<f64> = ys.iter().map(|y| 7.5 * y).collect();
        let b = fit_slope(&xs, &scaled).unwrap();
        assert!((a.slope - b.slope).abs() < 1e-12);
        assert!((b.intercept - a.intercept - 7.5f64.ln()).abs() < 1e-12);
    }
}
