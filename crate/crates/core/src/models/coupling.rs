use super::pmf::IntegerPmf;
use super::transport;
use crate::error::{invalid, Error, Result};

/// Default cap on each marginal's support size for [`optimal_coupling`].
pub const DEFAULT_SUPPORT_CAP: usize = 200;

/// Marginal tolerance for a valid [`Coupling`].
pub const MARGINAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundType {
    /// `min{c_m / sqrt(l + 1) + c(m) |k - l| / (l + 1), 1}`, for symmetric `F`.
    Symmetric,
    /// `min{c(m) |k - l| / (l + 1), 1}`, for `F` with non-negative
    /// characteristic function.
    PlusClass,
}

impl BoundType {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundType::Symmetric => "symmetric",
            BoundType::PlusClass => "plus-class",
        }
    }
}

/// Cost integrand of the random-sum coupling bound. The constants are free
/// parameters; they default to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingBoundSpec {
    pub bound_type: BoundType,
    /// Coefficient of `1 / sqrt(l + 1)` (symmetric bound only).
    pub const_cm: f64,
    /// Coefficient of `|k - l| / (l + 1)`.
    pub const_c_m: f64,
}

impl CouplingBoundSpec {
    pub fn new(bound_type: BoundType, const_cm: f64, const_c_m: f64) -> Result<Self> {
        if !(const_cm > 0.0 && const_cm.is_finite() && const_c_m > 0.0 && const_c_m.is_finite()) {
            return invalid("coupling bound constants must be positive");
        }
        Ok(CouplingBoundSpec {
            bound_type,
            const_cm,
            const_c_m,
        })
    }

    pub fn plus_class() -> Self {
        CouplingBoundSpec {
            bound_type: BoundType::PlusClass,
            const_cm: 1.0,
            const_c_m: 1.0,
        }
    }

    pub fn symmetric() -> Self {
        CouplingBoundSpec {
            bound_type: BoundType::Symmetric,
            const_cm: 1.0,
            const_c_m: 1.0,
        }
    }
}

pub fn coupling_cost(k: usize, l: usize, spec: &CouplingBoundSpec) -> f64 {
    let l1 = (l + 1) as f64;
    let gap = spec.const_c_m * k.abs_diff(l) as f64 / l1;
    let raw = match spec.bound_type {
        BoundType::Symmetric => spec.const_cm / l1.sqrt() + gap,
        BoundType::PlusClass => gap,
    };
    raw.min(1.0)
}

/// Joint pmf of `(mu, nu)` over `supp U x supp V`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    rows: Vec<usize>,
    cols: Vec<usize>,
    joint: Vec<f64>,
}

impl Coupling {
    /// Validates non-negativity and both marginals within [`MARGINAL_TOL`].
    pub fn new(u: &IntegerPmf, v: &IntegerPmf, joint: Vec<f64>) -> Result<Self> {
        let (rows, a) = support_of(u);
        let (cols, b) = support_of(v);
        if joint.len() != rows.len() * cols.len() {
            return invalid("joint matrix has the wrong size");
        }
        if joint.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return invalid("joint masses must be finite and non-negative");
        }
        let c = Coupling { rows, cols, joint };
        for (i, ai) in a.iter().enumerate() {
            let s: f64 = c.row(i).iter().sum();
            if (s - ai).abs() > MARGINAL_TOL {
                return invalid(format!("row {} sums to {s:?}, expected {ai:?}", c.rows[i]));
            }
        }
        for (j, bj) in b.iter().enumerate() {
            let s: f64 = (0..c.rows.len()).map(|i| c.joint[i * c.cols.len() + j]).sum();
            if (s - bj).abs() > MARGINAL_TOL {
                return invalid(format!("column {} sums to {s:?}, expected {bj:?}", c.cols[j]));
            }
        }
        Ok(c)
    }

    /// Support values of `mu`.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Support values of `nu`.
    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn joint(&self) -> &[f64] {
        &self.joint
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.cols.len();
        &self.joint[i * n..(i + 1) * n]
    }

    /// `P{mu = k, nu = l}`.
    pub fn mass(&self, k: usize, l: usize) -> f64 {
        match (self.rows.binary_search(&k), self.cols.binary_search(&l)) {
            (Ok(i), Ok(j)) => self.joint[i * self.cols.len() + j],
            _ => 0.0,
        }
    }

    /// `E cost(mu, nu)`.
    pub fn expected_cost(&self, spec: &CouplingBoundSpec) -> f64 {
        let n = self.cols.len();
        let mut total = 0.0;
        for (i, &k) in self.rows.iter().enumerate() {
            for (j, &l) in self.cols.iter().enumerate() {
                let x = self.joint[i * n + j];
                if x > 0.0 {
                    total += x * coupling_cost(k, l, spec);
                }
            }
        }
        total
    }
}

fn support_of(p: &IntegerPmf) -> (Vec<usize>, Vec<f64>) {
    p.support().unzip()
}

/// Comonotone coupling: matches cumulative masses of `U` and `V` in order.
pub fn quantile_coupling(u: &IntegerPmf, v: &IntegerPmf) -> Result<Coupling> {
    let (rows, a) = support_of(u);
    let (cols, b) = support_of(v);
    let n = cols.len();
    let mut joint = vec![0.0; rows.len() * n];
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0], b[0]);
    while i < rows.len() && j < n {
        let q = ra.min(rb);
        joint[i * n + j] += q;
        if ra <= rb {
            rb -= ra;
            i += 1;
            ra = a.get(i).copied().unwrap_or(0.0);
        } else {
            ra -= rb;
            j += 1;
            rb = b.get(j).copied().unwrap_or(0.0);
        }
    }
    Coupling::new(u, v, joint)
}

/// Exact minimizer of `E cost(mu, nu)` over all couplings of `U` and `V`.
pub fn optimal_coupling(u: &IntegerPmf, v: &IntegerPmf, spec: &CouplingBoundSpec) -> Result<(Coupling, f64)> {
    optimal_coupling_with(u, v, spec, DEFAULT_SUPPORT_CAP)
}

pub fn optimal_coupling_with(
    u: &IntegerPmf,
    v: &IntegerPmf,
    spec: &CouplingBoundSpec,
    cap: usize,
) -> Result<(Coupling, f64)> {
    let (rows, a) = support_of(u);
    let (cols, b) = support_of(v);
    if rows.len() > cap || cols.len() > cap {
        return Err(Error::ResourceLimit(format!(
            "coupling supports {} x {} exceed the cap {cap}",
            rows.len(),
            cols.len()
        )));
    }
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if (sa - sb).abs() > 1e-9 {
        return invalid(format!("marginal masses differ: {sa:?} vs {sb:?}"));
    }
    let cost: Vec<f64> = rows
        .iter()
        .flat_map(|&k| cols.iter().map(move |&l| coupling_cost(k, l, spec)))
        .collect();
    let flow = transport::solve(&a, &b, &cost)?;
    let coupling = Coupling::new(u, v, flow)?;
    let value = coupling.expected_cost(spec);
    Ok((coupling, value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_formulas() {
        let plus = CouplingBoundSpec::plus_class();
        assert_eq!(coupling_cost(4, 4, &plus), 0.0);
        assert_eq!(coupling_cost(3, 1, &plus), 1.0);
        assert_eq!(coupling_cost(1, 3, &plus), 0.5);
        assert_eq!(coupling_cost(3, 3, &CouplingBoundSpec::symmetric()), 0.5);
        assert!(CouplingBoundSpec::new(BoundType::Symmetric, 0.0, 1.0).is_err());
    }

    #[test]
    fn identical_marginals_cost_nothing() {
        let u = IntegerPmf::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let (c, value) = optimal_coupling(&u, &u, &CouplingBoundSpec::plus_class()).unwrap();
        assert_eq!(value, 0.0);
        assert_eq!(c.mass(2, 2), 0.3);
        assert_eq!(quantile_coupling(&u, &u).unwrap().joint(), c.joint());
    }

    #[test]
    fn deterministic_marginals() {
        let spec = CouplingBoundSpec::symmetric();
        let (c, value) = optimal_coupling(&IntegerPmf::point(5), &IntegerPmf::point(2), &spec).unwrap();
        assert_eq!(c.joint(), &[1.0]);
        assert_eq!(value, coupling_cost(5, 2, &spec));
    }

    #[test]
    fn quantile_with_point_row() {
        let v = IntegerPmf::new(vec![0.2, 0.0, 0.8]).unwrap();
        let q = quantile_coupling(&IntegerPmf::point(0), &v).unwrap();
        assert_eq!(q.rows(), &[0]);
        assert_eq!(q.row(0), &[0.2, 0.8]);
    }

    #[test]
    fn cap_is_enforced() {
        let u = IntegerPmf::new(vec![0.25; 4]).unwrap();
        let err = optimal_coupling_with(&u, &u, &CouplingBoundSpec::plus_class(), 3).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit(_)));
    }
}
