use crate::dist::{DiscreteDistribution, Point};
use crate::error::{invalid, Result};

/// `N` draws in R^d, stored row-major in draw order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    dim: usize,
    values: Vec<f64>,
}

impl EmpiricalSample {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return invalid("sample length is not a multiple of the dimension");
        }
        Ok(EmpiricalSample { dim, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for x in self.iter() {
            for (a, b) in m.iter_mut().zip(x) {
                *a += b;
            }
        }
        let n = self.len() as f64;
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// The empirical law, each draw carrying mass `1 / N`.
    pub fn to_distribution(&self) -> Result<DiscreteDistribution> {
        if self.is_empty() {
            return invalid("empty sample");
        }
        let atoms = self
            .iter()
            .map(|x| Point::new(x.to_vec()).map(|p| (p, 1.0)))
            .collect::<Result<Vec<_>>>()?;
        DiscreteDistribution::from_weights(self.dim, atoms)
    }
}

/// Dvoretzky-Kiefer-Wolfowitz radius: with probability at least
/// `confidence`, the empirical CDF of `n` draws is within this sup-distance
/// of the true CDF.
pub fn dkw_bound(n: usize, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * n as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_law() {
        let s = EmpiricalSample::new(1, vec![0.0, 1.0, 1.0, 3.0]).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.mean(), vec![1.25]);
        let d = s.to_distribution().unwrap();
        assert_eq!(d.mass_at(&[1.0]), 0.5);
        assert!(EmpiricalSample::new(2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn dkw_radius() {
        // sqrt(ln(2000) / 200000)
        assert!((dkw_bound(100_000, 0.999) - 0.006_164_78).abs() < 1e-8);
    }
}
