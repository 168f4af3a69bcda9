//! Orthogonal projection onto the span of a polyhedron's directions.
//!
//! Since `<P x, t_j> = <x, t_j>` whenever `t_j` lies in the subspace, the
//! event `{x in P}` is the event `{P x in P_bar}` for the polyhedron `P_bar`
//! written in basis coordinates. Measures of `P` can therefore be computed on
//! the projected law in `k <= m` dimensions, whatever the ambient dimension.

use super::{DirectionSet, Halfspace, Polyhedron};
use crate::dist::{dot, DiscreteDistribution};
use crate::error::{invalid, Result};

/// Tolerance for "direction lies in the span of the basis".
pub const SPAN_TOL: f64 = 1e-10;

/// Orthonormal basis of `span{t_1..t_m}` inside R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionBasis {
    original_dim: usize,
    basis: Vec<Vec<f64>>,
}

impl ProjectionBasis {
    pub fn original_dim(&self) -> usize {
        self.original_dim
    }

    /// Dimension `k` of the spanned subspace.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Coordinates `(<x, e_1>, .., <x, e_k>)`.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|e| dot(x, e)).collect()
    }
}

/// Modified Gram-Schmidt with one re-orthogonalization pass; vectors whose
/// residual norm is at most `rank_tol` are dropped.
pub fn orthonormal_basis(dirs: &DirectionSet, rank_tol: f64) -> ProjectionBasis {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for t in dirs.directions() {
        let mut v = t.clone();
        for _ in 0..2 {
            for e in &basis {
                let c = dot(&v, e);
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi -= c * ei;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > rank_tol {
            basis.push(v.into_iter().map(|c| c / norm).collect());
        }
    }
    ProjectionBasis {
        original_dim: dirs.dim(),
        basis,
    }
}

/// Law of the basis coordinates of `P_t xi`; colliding atoms merge.
pub fn project_distribution(f: &DiscreteDistribution, basis: &ProjectionBasis) -> Result<DiscreteDistribution> {
    if f.dim() != basis.original_dim {
        return invalid(format!(
            "distribution dimension {} vs basis ambient dimension {}",
            f.dim(),
            basis.original_dim
        ));
    }
    f.map_points(basis.rank(), |x| basis.coordinates(x))
}

/// Rewrites every halfspace in basis coordinates. Each direction must lie in
/// the span of the basis.
pub fn project_polyhedron(p: &Polyhedron, basis: &ProjectionBasis) -> Result<Polyhedron> {
    if p.dim() != basis.original_dim {
        return invalid("polyhedron dimension does not match the basis");
    }
    let mut hs = Vec::with_capacity(p.m());
    for h in p.halfspaces() {
        let c = basis.coordinates(&h.direction);
        let mut residual = h.direction.clone();
        for (ci, e) in c.iter().zip(basis.vectors()) {
            for (r, ei) in residual.iter_mut().zip(e) {
                *r -= ci * ei;
            }
        }
        let res = dot(&residual, &residual).sqrt();
        if res > SPAN_TOL {
            return invalid(format!("direction lies outside the basis span (residual {res:e})"));
        }
        hs.push(Halfspace {
            direction: c,
            threshold: h.threshold,
        });
    }
    Polyhedron::new(basis.rank(), hs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::measure;

    #[test]
    fn basis_cases() {
        let b = orthonormal_basis(&DirectionSet::axes(2), 1e-10);
        assert_eq!(b.vectors(), DirectionSet::axes(2).directions());
        let rep = DirectionSet::new(2, vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(orthonormal_basis(&rep, 1e-10).rank(), 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let t = DirectionSet::new(3, vec![vec![1.0, 0.0, 0.0], vec![s, s, 0.0]]).unwrap();
        let b = orthonormal_basis(&t, 1e-10);
        assert_eq!(b.rank(), 2);
        assert!((b.vectors()[1][1] - 1.0).abs() < 1e-15);
        assert!(b.vectors()[1][0].abs() < 1e-15);
        assert_eq!(b.vectors()[1][2], 0.0);
    }

    #[test]
    fn coordinate_projection_and_merging() {
        let mut e1 = vec![0.0; 3];
        e1[0] = 1.0;
        let b = orthonormal_basis(&DirectionSet::new(3, vec![e1]).unwrap(), 1e-10);
        let f = DiscreteDistribution::from_pairs(3, &[(&[1.0, 7.0, -2.0], 1.0)]).unwrap();
        let pf = project_distribution(&f, &b).unwrap();
        assert_eq!(pf.dim(), 1);
        assert_eq!(pf.mass_at(&[1.0]), 1.0);
        let pair = DiscreteDistribution::from_pairs(3, &[(&[0.0, 0.0, 1.0], 0.5), (&[0.0, 0.0, -1.0], 0.5)]).unwrap();
        let pp = project_distribution(&pair, &b).unwrap();
        assert_eq!(pp.len(), 1);
        assert_eq!(pp.mass_at(&[0.0]), 1.0);
    }

    #[test]
    fn polyhedron_projection() {
        let sq = Polyhedron::new(
            2,
            vec![
                Halfspace { direction: vec![1.0, 0.0], threshold: 1.0 },
                Halfspace { direction: vec![0.0, 1.0], threshold: -2.0 },
            ],
        )
        .unwrap();
        let b = orthonormal_basis(&DirectionSet::axes(2), 1e-10);
        assert_eq!(project_polyhedron(&sq, &b).unwrap(), sq);

        let mut e3 = vec![0.0; 5];
        e3[2] = 1.0;
        let p = Polyhedron::new(5, vec![Halfspace { direction: e3.clone(), threshold: 0.0 }]).unwrap();
        let b = orthonormal_basis(&DirectionSet::new(5, vec![e3]).unwrap(), 1e-10);
        let pb = project_polyhedron(&p, &b).unwrap();
        assert_eq!(pb.dim(), 1);
        assert_eq!(pb.halfspaces()[0].direction, vec![1.0]);
        assert_eq!(pb.halfspaces()[0].threshold, 0.0);

        // A basis from other directions does not span P's.
        let mut e1 = vec![0.0; 5];
        e1[0] = 1.0;
        let q = orthonormal_basis(&DirectionSet::new(5, vec![e1]).unwrap(), 1e-10);
        assert!(project_polyhedron(&p, &q).is_err());
        assert!(project_polyhedron(&sq, &q).is_err());
    }

    #[test]
    fn measure_is_preserved() {
        let f = DiscreteDistribution::from_pairs(
            3,
            &[(&[1.0, 2.0, 3.0], 0.2), (&[-1.0, 0.5, 0.0], 0.3), (&[0.0, -2.0, 4.0], 0.5)],
        )
        .unwrap();
        let dirs = DirectionSet::normalized(3, vec![vec![1.0, 1.0, 0.0]]).unwrap();
        let p = Polyhedron::from_directions(&dirs, &[1.0]).unwrap();
        let b = orthonormal_basis(&dirs, 1e-10);
        let lhs = measure(&f, &p).unwrap();
        let rhs = measure(&project_distribution(&f, &b).unwrap(), &project_polyhedron(&p, &b).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, 0.8);
    }
}
