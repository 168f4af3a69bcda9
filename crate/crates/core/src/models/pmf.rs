use std::fmt::Write;

use crate::dist::literal::{parse_f64, strip_comment};
use crate::dist::{convolve, poisson_truncation, power_exact, DiscreteDistribution, WithError, MASS_TOL};
use crate::error::{invalid, parse_err, Error, Result};

/// Probability mass function on `{0, 1, .., K}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerPmf {
    masses: Vec<f64>,
}

impl IntegerPmf {
    /// `masses[k] = P{mu = k}`; trailing zeros are trimmed.
    pub fn new(mut masses: Vec<f64>) -> Result<Self> {
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return invalid("pmf masses must be finite and non-negative");
        }
        while masses.last() == Some(&0.0) {
            masses.pop();
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return invalid(format!("pmf masses sum to {total:?}, expected 1"));
        }
        Ok(IntegerPmf { masses })
    }

    /// Point mass at `k`.
    pub fn point(k: usize) -> Self {
        let mut masses = vec![0.0; k + 1];
        masses[k] = 1.0;
        IntegerPmf { masses }
    }

    /// Poisson(alpha) truncated at the smallest `K` with tail at most `tol`,
    /// renormalized. Returns the pmf and the discarded tail.
    pub fn poisson(alpha: f64, tol: f64) -> Result<(Self, f64)> {
        let (mut w, tail) = poisson_truncation(alpha, tol)?;
        let total: f64 = w.iter().sum();
        for x in &mut w {
            *x /= total;
        }
        Ok((IntegerPmf { masses: w }, tail))
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn max_value(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn mass_at(&self, k: usize) -> f64 {
        self.masses.get(k).copied().unwrap_or(0.0)
    }

    /// `(k, mass)` for every `k` with positive mass.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.masses.iter().copied().enumerate().filter(|(_, m)| *m > 0.0)
    }

    pub fn mean(&self) -> f64 {
        self.support().map(|(k, m)| k as f64 * m).sum()
    }

    /// Parses `k mass` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut masses: Vec<f64> = Vec::new();
        let mut last = 1;
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            last = ln;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 {
                return parse_err(ln, "expected `k mass`");
            }
            let k: usize = toks[0].parse().map_err(|_| Error::Parse {
                line: ln,
                msg: format!("expected a non-negative integer, found {:?}", toks[0]),
            })?;
            let m = parse_f64(toks[1], ln)?;
            if masses.len() <= k {
                masses.resize(k + 1, 0.0);
            }
            masses[k] += m;
        }
        if masses.is_empty() {
            return parse_err(last, "no masses");
        }
        IntegerPmf::new(masses).map_err(|e| Error::Parse {
            line: last,
            msg: e.to_string(),
        })
    }

    pub fn to_literal(&self) -> String {
        let mut out = String::new();
        for (k, m) in self.support() {
            writeln!(out, "{k} {m:?}").unwrap();
        }
        out
    }
}

/// Law of `xi_1 + .. + xi_mu` for i.i.d. `xi_i ~ F` independent of
/// `mu ~ U`: `sum_k U{k} F^k`. Support values of `U` beyond the smallest `K`
/// with `P{mu > K} <= tol` are dropped and the remainder renormalized; the
/// dropped mass is the reported error bound.
pub fn random_sum(u: &IntegerPmf, f: &DiscreteDistribution, tol: f64) -> Result<WithError> {
    if !(0.0..1.0).contains(&tol) {
        return invalid(format!("tol must lie in [0, 1), got {tol:?}"));
    }
    let mut cum = 0.0;
    let mut kept = Vec::new();
    for (k, m) in u.support() {
        kept.push((k, m));
        cum += m;
        if cum >= 1.0 - tol {
            break;
        }
    }
    let dropped = (1.0 - cum).max(0.0);
    let mut term = DiscreteDistribution::identity(f.dim());
    let mut at = 0usize;
    let mut powers = Vec::with_capacity(kept.len());
    for &(k, m) in &kept {
        if k > at {
            let step = if k - at == 1 { f.clone() } else { power_exact(f, (k - at) as u64)? };
            term = convolve(&term, &step)?;
            at = k;
        }
        powers.push((m / cum, term.clone()));
    }
    let comps: Vec<(f64, &DiscreteDistribution)> = powers.iter().map(|(w, d)| (*w, d)).collect();
    let dist = mix_renormalized(&comps)?;
    Ok(WithError {
        dist,
        error_bound: dropped,
    })
}

/// Mixture whose weights were renormalized in floating point; absorbs the
/// last-ulp drift in the weight sum.
fn mix_renormalized(comps: &[(f64, &DiscreteDistribution)]) -> Result<DiscreteDistribution> {
    let total: f64 = comps.iter().map(|c| c.0).sum();
    let scaled: Vec<(f64, &DiscreteDistribution)> = comps.iter().map(|&(w, d)| (w / total, d)).collect();
    DiscreteDistribution::mix(&scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{compound_poisson, total_variation};

    fn delta1() -> DiscreteDistribution {
        DiscreteDistribution::from_pairs(1, &[(&[1.0], 1.0)]).unwrap()
    }

    #[test]
    fn pmf_validation_and_parse() {
        assert!(IntegerPmf::new(vec![0.5, 0.4]).is_err());
        assert!(IntegerPmf::new(vec![1.5, -0.5]).is_err());
        let p = IntegerPmf::parse("# mu\n0 0.25\n2 0.75\n").unwrap();
        assert_eq!(p.masses(), &[0.25, 0.0, 0.75]);
        assert_eq!(IntegerPmf::parse(&p.to_literal()).unwrap(), p);
        match IntegerPmf::parse("0 0.5\nx 0.5\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(IntegerPmf::point(3).max_value(), 3);
    }

    #[test]
    fn empty_sum_is_identity() {
        let r = random_sum(&IntegerPmf::point(0), &delta1(), 0.0).unwrap();
        assert_eq!(r.dist, DiscreteDistribution::identity(1));
    }

    #[test]
    fn bernoulli_count_of_unit_jumps() {
        let u = IntegerPmf::new(vec![0.5, 0.5]).unwrap();
        let r = random_sum(&u, &delta1(), 0.0).unwrap();
        assert_eq!(r.dist.mass_at(&[0.0]), 0.5);
        assert_eq!(r.dist.mass_at(&[1.0]), 0.5);
    }

    #[test]
    fn poisson_count_matches_compound_poisson() {
        let h = DiscreteDistribution::from_pairs(1, &[(&[-1.0], 0.25), (&[0.0], 0.5), (&[1.0], 0.25)]).unwrap();
        for &(alpha, tol) in &[(1.0, 1e-10), (4.5, 1e-12)] {
            let (u, _) = IntegerPmf::poisson(alpha, tol).unwrap();
            let rs = random_sum(&u, &h, 0.0).unwrap();
            let cp = compound_poisson(alpha, &h, tol).unwrap();
            assert!(total_variation(&rs.dist, &cp.dist).unwrap() <= 10.0 * tol);
        }
    }

    #[test]
    fn point_count_is_a_power() {
        let h = DiscreteDistribution::from_pairs(1, &[(&[-1.0], 0.5), (&[1.0], 0.5)]).unwrap();
        let r = random_sum(&IntegerPmf::point(7), &h, 0.0).unwrap();
        assert_eq!(r.dist, power_exact(&h, 7).unwrap());
    }

    #[test]
    fn truncation_reports_dropped_mass() {
        let u = IntegerPmf::new(vec![0.9, 0.0999, 0.0001]).unwrap();
        let r = random_sum(&u, &delta1(), 1e-3).unwrap();
        assert!((r.error_bound - 1e-4).abs() < 1e-15);
        assert_eq!(r.dist.mass_at(&[2.0]), 0.0);
    }
}
