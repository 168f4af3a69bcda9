//! Convex polyhedra `{x : <x, t_j> <= b_j, j = 1..m}`, their measures, and the
//! distances `rho` (axis-aligned lower orthants) and `rho_m` (any `m`
//! halfspaces).

mod distance;
mod projection;

use std::fmt::{self, Write as _};

use crate::dist::literal::{parse_f64, strip_comment};
use crate::dist::{dot, DiscreteDistribution, LatticeDistribution};
use crate::error::{invalid, parse_err, Error, Result};

pub use distance::{
    kolmogorov_rho, kolmogorov_rho_with, rho_fixed_directions, rho_m_search, AscentConfig, FixedMode,
    SearchConfig, DEFAULT_EXACT_CAP,
};
pub(crate) use distance::rng_for;
pub use projection::{orthonormal_basis, project_distribution, project_polyhedron, ProjectionBasis};

/// Directions must have unit norm within this tolerance.
pub const UNIT_TOL: f64 = 1e-12;

/// Closed halfspaces absorb floating round-off of this relative size, so an
/// atom sitting exactly on a threshold taken from its own projection stays
/// inside after re-projection.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[inline]
pub(crate) fn within(value: f64, threshold: f64) -> bool {
    threshold == f64::INFINITY || value <= threshold + BOUNDARY_TOL * (1.0 + threshold.abs())
}

/// An ordered list of unit directions `t_1..t_m` in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    dim: usize,
    directions: Vec<Vec<f64>>,
}

impl DirectionSet {
    pub fn new(dim: usize, directions: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be >= 1");
        }
        if directions.is_empty() {
            return invalid("at least one direction is required");
        }
        for t in &directions {
            if t.len() != dim {
                return invalid(format!("direction has dimension {}, expected {dim}", t.len()));
            }
            if t.iter().any(|c| !c.is_finite()) {
                return invalid("direction is not finite");
            }
            let norm = dot(t, t).sqrt();
            if (norm - 1.0).abs() > UNIT_TOL {
                return invalid(format!("direction norm {norm:?} is not 1"));
            }
        }
        Ok(DirectionSet { dim, directions })
    }

    /// Normalizes each vector; zero vectors are rejected.
    pub fn normalized(dim: usize, raw: Vec<Vec<f64>>) -> Result<Self> {
        let mut dirs = Vec::with_capacity(raw.len());
        for t in raw {
            let norm = dot(&t, &t).sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return invalid("zero-norm direction");
            }
            dirs.push(t.iter().map(|c| c / norm).collect());
        }
        Self::new(dim, dirs)
    }

    /// The standard basis `e_1..e_d`.
    pub fn axes(dim: usize) -> Self {
        let directions = (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                e
            })
            .collect();
        DirectionSet { dim, directions }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub direction: Vec<f64>,
    /// Finite or `+inf`.
    pub threshold: f64,
}

/// `P = {x : <x, t_j> <= b_j}` with unit `t_j` and `b_j` in `(-inf, +inf]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    dim: usize,
    halfspaces: Vec<Halfspace>,
}

impl Polyhedron {
    pub fn new(dim: usize, halfspaces: Vec<Halfspace>) -> Result<Self> {
        DirectionSet::new(dim, halfspaces.iter().map(|h| h.direction.clone()).collect())?;
        for h in &halfspaces {
            if h.threshold.is_nan() || h.threshold == f64::NEG_INFINITY {
                return invalid(format!("threshold must lie in (-inf, +inf], got {:?}", h.threshold));
            }
        }
        Ok(Polyhedron { dim, halfspaces })
    }

    /// Pairs a direction set with thresholds.
    pub fn from_directions(dirs: &DirectionSet, thresholds: &[f64]) -> Result<Self> {
        if thresholds.len() != dirs.len() {
            return invalid("one threshold per direction is required");
        }
        let hs = dirs
            .directions()
            .iter()
            .zip(thresholds)
            .map(|(t, &b)| Halfspace {
                direction: t.clone(),
                threshold: b,
            })
            .collect();
        Self::new(dirs.dim(), hs)
    }

    /// The whole space as a one-halfspace polyhedron.
    pub fn whole_space(dim: usize) -> Self {
        let mut e = vec![0.0; dim];
        e[0] = 1.0;
        Polyhedron {
            dim,
            halfspaces: vec![Halfspace {
                direction: e,
                threshold: f64::INFINITY,
            }],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn directions(&self) -> DirectionSet {
        DirectionSet {
            dim: self.dim,
            directions: self.halfspaces.iter().map(|h| h.direction.clone()).collect(),
        }
    }

    /// Appends `+inf` halfspaces until there are `m`; the set is unchanged.
    pub fn padded(&self, m: usize) -> Self {
        let mut out = self.clone();
        while out.halfspaces.len() < m {
            let mut e = vec![0.0; self.dim];
            e[out.halfspaces.len() % self.dim] = 1.0;
            out.halfspaces.push(Halfspace {
                direction: e,
                threshold: f64::INFINITY,
            });
        }
        out
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.dim {
            return invalid(format!("point has dimension {}, expected {}", x.len(), self.dim));
        }
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &[f64]) -> bool {
        self.halfspaces
            .iter()
            .all(|h| within(dot(x, &h.direction), h.threshold))
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_polyhedron(text)
    }

    pub fn to_literal(&self) -> String {
        let mut out = String::new();
        writeln!(out, "m {}", self.m()).unwrap();
        for h in &self.halfspaces {
            for c in &h.direction {
                write!(out, "{c:?} ").unwrap();
            }
            if h.threshold == f64::INFINITY {
                writeln!(out, "inf").unwrap();
            } else {
                writeln!(out, "{:?}", h.threshold).unwrap();
            }
        }
        out
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}

/// Parses `m <count>` followed by `count` lines `<t_1 .. t_d> <b|inf>`.
pub fn parse_polyhedron(text: &str) -> Result<Polyhedron> {
    let mut count: Option<usize> = None;
    let mut hs = Vec::new();
    let mut dim: Option<usize> = None;
    let mut last = 1;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        last = ln;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match count {
            None => {
                if toks.len() != 2 || toks[0] != "m" {
                    return parse_err(ln, "expected header `m <count>`");
                }
                let m: usize = toks[1].parse().map_err(|_| Error::Parse {
                    line: ln,
                    msg: "count must be a positive integer".into(),
                })?;
                if m == 0 {
                    return parse_err(ln, "count must be a positive integer");
                }
                count = Some(m);
            }
            Some(_) => {
                if toks.len() < 2 {
                    return parse_err(ln, "expected direction coordinates and a threshold");
                }
                let d = toks.len() - 1;
                if *dim.get_or_insert(d) != d {
                    return parse_err(ln, "inconsistent direction dimension");
                }
                let direction = toks[..d].iter().map(|t| parse_f64(t, ln)).collect::<Result<Vec<_>>>()?;
                let b = toks[d];
                let threshold = if b == "inf" || b == "+inf" {
                    f64::INFINITY
                } else {
                    parse_f64(b, ln)?
                };
                hs.push(Halfspace { direction, threshold });
            }
        }
    }
    let Some(m) = count else {
        return parse_err(last, "missing `m <count>` header");
    };
    if hs.len() != m {
        return parse_err(last, format!("expected {m} halfspaces, found {}", hs.len()));
    }
    Polyhedron::new(dim.unwrap_or(1), hs).map_err(|e| Error::Parse {
        line: last,
        msg: e.to_string(),
    })
}

/// `F{P}`.
pub fn measure(f: &DiscreteDistribution, p: &Polyhedron) -> Result<f64> {
    if f.dim() != p.dim() {
        return invalid(format!("distribution dimension {} vs polyhedron {}", f.dim(), p.dim()));
    }
    Ok(f
        .iter()
        .filter(|(x, _)| p.contains_unchecked(x.coords()))
        .map(|(_, m)| m)
        .sum::<f64>()
        .min(1.0))
}

/// `F{P}` for a dense lattice law.
pub fn measure_lattice(f: &LatticeDistribution, p: &Polyhedron) -> Result<f64> {
    if f.dim() != p.dim() {
        return invalid("dimension mismatch");
    }
    Ok(f.mass_where(|x| p.contains_unchecked(x)).clamp(0.0, 1.0))
}

/// How a [`DistanceCertificate`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateMode {
    /// Exact supremum over all polyhedra with the given directions.
    ExactFixedDirections,
    /// Coordinate ascent over thresholds; a lower bound.
    Ascent,
    /// Search over directions; a lower bound.
    Searched,
}

impl CertificateMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CertificateMode::ExactFixedDirections => "exact",
            CertificateMode::Ascent => "lower-bound(ascent)",
            CertificateMode::Searched => "lower-bound(search)",
        }
    }

    pub fn is_exact(self) -> bool {
        self == CertificateMode::ExactFixedDirections
    }
}

/// `|G{witness} - H{witness}|` together with the witness polyhedron.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceCertificate {
    pub value: f64,
    pub witness: Polyhedron,
    pub mode: CertificateMode,
}

impl DistanceCertificate {
    /// Recomputes the value on the witness.
    pub fn recompute(&self, g: &DiscreteDistribution, h: &DiscreteDistribution) -> Result<f64> {
        Ok((measure(g, &self.witness)? - measure(h, &self.witness)?).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs(t: &[f64], b: f64) -> Halfspace {
        Halfspace {
            direction: t.to_vec(),
            threshold: b,
        }
    }

    #[test]
    fn containment_cases() {
        let all = Polyhedron::new(2, vec![hs(&[1.0, 0.0], f64::INFINITY), hs(&[0.0, 1.0], f64::INFINITY)]).unwrap();
        assert!(all.contains(&[1e9, -1e9]).unwrap());
        let half = Polyhedron::new(1, vec![hs(&[1.0], 0.0)]).unwrap();
        assert!(half.contains(&[0.0]).unwrap());
        assert!(!half.contains(&[1e-6]).unwrap());
        let square = Polyhedron::new(2, vec![hs(&[1.0, 0.0], 1.0), hs(&[0.0, 1.0], 1.0)]).unwrap();
        assert!(!square.contains(&[2.0, 0.0]).unwrap());
        assert!(square.contains(&[1.0, 1.0]).unwrap());
        assert!(square.contains(&[1.0]).is_err());
    }

    #[test]
    fn rejects_bad_directions() {
        assert!(Polyhedron::new(2, vec![hs(&[1.0, 1.0], 0.0)]).is_err());
        assert!(Polyhedron::new(2, vec![]).is_err());
        assert!(Polyhedron::new(1, vec![hs(&[1.0], f64::NEG_INFINITY)]).is_err());
        assert!(DirectionSet::normalized(2, vec![vec![0.0, 0.0]]).is_err());
        let d = DirectionSet::normalized(2, vec![vec![3.0, 4.0]]).unwrap();
        assert_eq!(d.directions()[0], vec![0.6, 0.8]);
    }

    #[test]
    fn measures() {
        let e = DiscreteDistribution::identity(1);
        let half = Polyhedron::new(1, vec![hs(&[1.0], 0.0)]).unwrap();
        assert_eq!(measure(&e, &half).unwrap(), 1.0);
        let rad = DiscreteDistribution::from_pairs(1, &[(&[-1.0], 0.5), (&[1.0], 0.5)]).unwrap();
        assert_eq!(measure(&rad, &half).unwrap(), 0.5);
        assert_eq!(measure(&rad, &Polyhedron::whole_space(1)).unwrap(), 1.0);
        assert!(measure(&DiscreteDistribution::identity(2), &half).is_err());
    }

    #[test]
    fn literal_round_trip() {
        let p = Polyhedron::new(2, vec![hs(&[0.6, 0.8], -1.5), hs(&[0.0, 1.0], f64::INFINITY)]).unwrap();
        let q = parse_polyhedron(&p.to_literal()).unwrap();
        assert_eq!(p, q);
        assert!(parse_polyhedron("m 2\n1 0\n").is_err());
        assert!(parse_polyhedron("1 0\n").is_err());
    }
}
