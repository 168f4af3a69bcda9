//! Named test families and the exact-arithmetic routines the experiments
//! share. 2-D integer-lattice laws go through the FFT lattice path; all
//! other laws use sparse convolution.

use crate::dist::{
    compound_poisson, compound_poisson_lattice, power_exact, power_lattice, DiscreteDistribution,
    LatticeDistribution, WithError,
};
use crate::error::{invalid, Result};
use crate::models::RareEventModel;

pub const FAMILY_NAMES: [&str; 6] = [
    "rademacher",
    "lazy-rademacher",
    "product2d",
    "lazy-product2d",
    "delta0",
    "hyperplane",
];

/// A named distribution used as `F` by the experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub id: String,
    pub law: DiscreteDistribution,
}

fn pairs(dim: usize, atoms: &[(&[f64], f64)]) -> DiscreteDistribution {
    DiscreteDistribution::from_pairs(dim, atoms).expect("family atoms are valid")
}

/// - `rademacher`: `1/2 E_-1 + 1/2 E_1`;
/// - `lazy-rademacher`: `1/2 E + 1/4 E_-1 + 1/4 E_1`;
/// - `product2d` / `lazy-product2d`: independent coordinates of the above;
/// - `delta0`: the unit mass `E` in R^1;
/// - `hyperplane`: `1/2 E_(1,-1) + 1/2 E_(1,1)`, concentrated on `{x_1 = 1}`.
pub fn family(name: &str) -> Result<Family> {
    let law = match name {
        "rademacher" => pairs(1, &[(&[-1.0], 0.5), (&[1.0], 0.5)]),
        "lazy-rademacher" => pairs(1, &[(&[-1.0], 0.25), (&[0.0], 0.5), (&[1.0], 0.25)]),
        "product2d" => pairs(
            2,
            &[(&[-1.0, -1.0], 0.25), (&[-1.0, 1.0], 0.25), (&[1.0, -1.0], 0.25), (&[1.0, 1.0], 0.25)],
        ),
        "lazy-product2d" => {
            let w = [0.25, 0.5, 0.25];
            let mut atoms = Vec::new();
            for (i, wi) in w.iter().enumerate() {
                for (j, wj) in w.iter().enumerate() {
                    atoms.push(([i as f64 - 1.0, j as f64 - 1.0], wi * wj));
                }
            }
            let refs: Vec<(&[f64], f64)> = atoms.iter().map(|(p, m)| (&p[..], *m)).collect();
            pairs(2, &refs)
        }
        "delta0" => DiscreteDistribution::identity(1),
        "hyperplane" => pairs(2, &[(&[1.0, -1.0], 0.5), (&[1.0, 1.0], 0.5)]),
        other => {
            return invalid(format!(
                "unknown family {other:?}; expected one of {}",
                FAMILY_NAMES.join(", ")
            ))
        }
    };
    Ok(Family { id: name.into(), law })
}

/// `n` observations with `p_i = p` and loss `V = E_1`.
pub fn bernoulli_loss(n: usize, p: f64) -> Result<RareEventModel> {
    RareEventModel::uniform(n, p, &pairs(1, &[(&[1.0], 1.0)]))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Per-axis lattice spacing of an integer-valued law: the gcd of coordinate
/// differences, or of the coordinates themselves when `through_origin`.
fn integer_spacing(f: &DiscreteDistribution, through_origin: bool) -> Vec<f64> {
    (0..f.dim())
        .map(|j| {
            let base = if through_origin { 0 } else { f.points()[0].coords()[j].round() as i64 };
            let g = f
                .points()
                .iter()
                .map(|p| (p.coords()[j].round() as i64 - base).unsigned_abs())
                .fold(0, gcd);
            g.max(1) as f64
        })
        .collect()
}

pub(crate) fn uses_lattice(f: &DiscreteDistribution) -> bool {
    f.dim() == 2 && f.is_integer_lattice()
}

pub(crate) fn lattice_of(f: &DiscreteDistribution, through_origin: bool) -> Result<LatticeDistribution> {
    LatticeDistribution::from_sparse(f, &integer_spacing(f, through_origin))
}

/// `F^n` as a dense lattice law (dimensions 1 and 2, integer support).
pub(crate) fn power_on_lattice(f: &DiscreteDistribution, n: u64) -> Result<LatticeDistribution> {
    power_lattice(&lattice_of(f, false)?, n)
}

/// `F^n`.
pub(crate) fn power_law(f: &DiscreteDistribution, n: u64) -> Result<DiscreteDistribution> {
    if uses_lattice(f) {
        Ok(power_on_lattice(f, n)?.to_sparse(0.0))
    } else {
        power_exact(f, n)
    }
}

/// `e(alpha F)` with its truncation bound.
pub(crate) fn cp_law(f: &DiscreteDistribution, alpha: f64, tol: f64) -> Result<WithError> {
    if uses_lattice(f) {
        let (lat, tail) = compound_poisson_lattice(alpha, &lattice_of(f, true)?, tol)?;
        Ok(WithError {
            dist: lat.to_sparse(0.0),
            error_bound: tail,
        })
    } else {
        compound_poisson(alpha, f, tol)
    }
}
