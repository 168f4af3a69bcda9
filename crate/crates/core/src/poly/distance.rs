//! `sup |G{P} - H{P}|` over polyhedra.
//!
//! For fixed directions the measure of `{<x, t_j> <= b_j}` is piecewise
//! constant in each `b_j` and only jumps at projections of atoms, so the
//! supremum is a maximum over the finite grid of candidate thresholds (atom
//! projections plus `+inf`). The exact mode scatters signed masses into that
//! grid and takes an m-dimensional prefix sum. Searching over directions has
//! no such structure and only yields certified lower bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{measure, within, CertificateMode, DirectionSet, DistanceCertificate, Polyhedron};
use crate::dist::{dot, DiscreteDistribution};
use crate::error::{invalid, Error, Result};

/// Default cap on the number of threshold cells enumerated in exact mode.
pub const DEFAULT_EXACT_CAP: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            restarts: 32,
            seed: 0x5eed,
            max_sweeps: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixedMode {
    /// Enumerate every threshold combination; fails when more than `cap` cells.
    Exact { cap: usize },
    /// Cyclic coordinate ascent over thresholds from random starts.
    Ascent(AscentConfig),
}

impl Default for FixedMode {
    fn default() -> Self {
        FixedMode::Exact {
            cap: DEFAULT_EXACT_CAP,
        }
    }
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Atoms of `G` and `H` with signed masses, projected on each direction and
/// ranked into clusters of equal projection.
struct Prepared {
    signed: Vec<f64>,
    /// `ranks[j][a]`: cluster index of atom `a` along direction `j`.
    ranks: Vec<Vec<u32>>,
    /// `levels[j][r]`: largest projection in cluster `r`, used as threshold.
    levels: Vec<Vec<f64>>,
}

impl Prepared {
    fn new(g: &DiscreteDistribution, h: &DiscreteDistribution, dirs: &DirectionSet) -> Self {
        let coords: Vec<&[f64]> = g.points().iter().chain(h.points()).map(|p| p.coords()).collect();
        let signed: Vec<f64> = g
            .masses()
            .iter()
            .copied()
            .chain(h.masses().iter().map(|m| -m))
            .collect();
        let mut ranks = Vec::with_capacity(dirs.len());
        let mut levels = Vec::with_capacity(dirs.len());
        for t in dirs.directions() {
            let proj: Vec<f64> = coords.iter().map(|x| dot(x, t)).collect();
            let mut order: Vec<usize> = (0..proj.len()).collect();
            order.sort_by(|&a, &b| proj[a].total_cmp(&proj[b]));
            let mut rank = vec![0u32; proj.len()];
            let mut lv: Vec<f64> = Vec::new();
            for &a in &order {
                let v = proj[a];
                match lv.last_mut() {
                    Some(top) if within(v, *top) => *top = v,
                    _ => lv.push(v),
                }
                rank[a] = (lv.len() - 1) as u32;
            }
            ranks.push(rank);
            levels.push(lv);
        }
        Prepared { signed, ranks, levels }
    }

    fn threshold(&self, j: usize, r: usize) -> f64 {
        self.levels[j].get(r).copied().unwrap_or(f64::INFINITY)
    }

    fn witness(&self, dirs: &DirectionSet, r: &[usize]) -> Result<Polyhedron> {
        let b: Vec<f64> = r.iter().enumerate().map(|(j, &rj)| self.threshold(j, rj)).collect();
        Polyhedron::from_directions(dirs, &b)
    }
}

fn certify(
    g: &DiscreteDistribution,
    h: &DiscreteDistribution,
    witness: Polyhedron,
    mode: CertificateMode,
) -> Result<DistanceCertificate> {
    let value = (measure(g, &witness)? - measure(h, &witness)?).abs();
    Ok(DistanceCertificate { value, witness, mode })
}

fn check_dims(g: &DiscreteDistribution, h: &DiscreteDistribution, dirs: &DirectionSet) -> Result<()> {
    if g.dim() != h.dim() || g.dim() != dirs.dim() {
        return invalid(format!(
            "dimension mismatch: G {}, H {}, directions {}",
            g.dim(),
            h.dim(),
            dirs.dim()
        ));
    }
    Ok(())
}

/// `sup |G{P} - H{P}|` over `P` with the directions of `dirs`.
pub fn rho_fixed_directions(
    g: &DiscreteDistribution,
    h: &DiscreteDistribution,
    dirs: &DirectionSet,
    mode: FixedMode,
) -> Result<DistanceCertificate> {
    check_dims(g, h, dirs)?;
    let prep = Prepared::new(g, h, dirs);
    match mode {
        FixedMode::Exact { cap } => exact(g, h, dirs, &prep, cap),
        FixedMode::Ascent(cfg) => ascent(g, h, dirs, &prep, &cfg),
    }
}

fn exact(
    g: &DiscreteDistribution,
    h: &DiscreteDistribution,
    dirs: &DirectionSet,
    prep: &Prepared,
    cap: usize,
) -> Result<DistanceCertificate> {
    let m = dirs.len();
    let extents: Vec<usize> = prep.levels.iter().map(|l| l.len() + 1).collect();
    let cells = extents.iter().try_fold(1usize, |acc, &e| acc.checked_mul(e).filter(|&c| c <= cap));
    let Some(cells) = cells else {
        return Err(Error::ResourceLimit(format!(
            "exact threshold grid {extents:?} exceeds {cap} cells"
        )));
    };
    let mut strides = vec![1usize; m];
    for j in (0..m.saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * extents[j + 1];
    }
    let mut grid = vec![0.0f64; cells];
    for (a, &w) in prep.signed.iter().enumerate() {
        let flat: usize = (0..m).map(|j| prep.ranks[j][a] as usize * strides[j]).sum();
        grid[flat] += w;
    }
    for j in 0..m {
        let stride = strides[j];
        let ext = extents[j];
        for i in 0..cells {
            if !(i / stride).is_multiple_of(ext) {
                grid[i] += grid[i - stride];
            }
        }
    }
    let mut best = 0usize;
    let mut best_val = -1.0;
    for (i, v) in grid.iter().enumerate() {
        if v.abs() > best_val {
            best_val = v.abs();
            best = i;
        }
    }
    let r: Vec<usize> = (0..m).map(|j| (best / strides[j]) % extents[j]).collect();
    certify(g, h, prep.witness(dirs, &r)?, CertificateMode::ExactFixedDirections)
}

/// Best single-coordinate move: with every other threshold fixed, sweep the
/// candidate thresholds of direction `j`.
fn sweep(prep: &Prepared, r: &[usize], j: usize, buf: &mut Vec<f64>) -> (usize, f64) {
    let s = prep.levels[j].len();
    buf.clear();
    buf.resize(s + 1, 0.0);
    let m = r.len();
    'atoms: for (a, &w) in prep.signed.iter().enumerate() {
        for k in 0..m {
            if k != j && prep.ranks[k][a] as usize > r[k] {
                continue 'atoms;
            }
        }
        buf[prep.ranks[j][a] as usize] += w;
    }
    let mut acc = 0.0;
    let mut best = (0usize, -1.0f64);
    for (i, v) in buf.iter().enumerate() {
        acc += v;
        if acc.abs() > best.1 {
            best = (i, acc.abs());
        }
    }
    best
}

fn ascent(
    g: &DiscreteDistribution,
    h: &DiscreteDistribution,
    dirs: &DirectionSet,
    prep: &Prepared,
    cfg: &AscentConfig,
) -> Result<DistanceCertificate> {
    let m = dirs.len();
    let runs: Vec<(f64, Vec<usize>)> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|restart| {
            let mut rng = rng_for(cfg.seed, restart as u64);
            let mut r: Vec<usize> = (0..m).map(|j| rng.random_range(0..=prep.levels[j].len())).collect();
            let mut buf = Vec::new();
            let mut value = -1.0;
            for _ in 0..cfg.max_sweeps {
                let mut improved = false;
                for j in 0..m {
                    let (i, v) = sweep(prep, &r, j, &mut buf);
                    if v > value + 1e-15 {
                        value = v;
                        r[j] = i;
                        improved = true;
                    }
                }
                if !improved {
                    break;
                }
            }
            (value, r)
        })
        .collect();
    let mut best = &runs[0];
    for run in &runs[1..] {
        if run.0 > best.0 {
            best = run;
        }
    }
    certify(g, h, prep.witness(dirs, &best.1)?, CertificateMode::Ascent)
}

/// Kolmogorov distance `sup_x |G(x) - H(x)|`: lower orthants, i.e. the
/// standard-basis directions evaluated exactly. Refuses dimensions above 3.
pub fn kolmogorov_rho(g: &DiscreteDistribution, h: &DiscreteDistribution) -> Result<DistanceCertificate> {
    kolmogorov_rho_with(g, h, 3, DEFAULT_EXACT_CAP)
}

pub fn kolmogorov_rho_with(
    g: &DiscreteDistribution,
    h: &DiscreteDistribution,
    max_dim: usize,
    cap: usize,
) -> Result<DistanceCertificate> {
    if g.dim() != h.dim() {
        return invalid("dimension mismatch");
    }
    if g.dim() > max_dim {
        return Err(Error::ResourceLimit(format!(
            "exact Kolmogorov distance limited to dimension {max_dim}, got {}",
            g.dim()
        )));
    }
    rho_fixed_directions(g, h, &DirectionSet::axes(g.dim()), FixedMode::Exact { cap })
}

/// Parameters of the direction search behind [`rho_m_search`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Random direction sets per level.
    pub restarts: usize,
    /// Initial standard deviation of the Gaussian direction perturbation.
    pub perturbation_scale: f64,
    /// Number of perturbation scales.
    pub levels: usize,
    /// Scale factor between consecutive levels.
    pub decay: f64,
    pub steps_per_level: usize,
    pub seed: u64,
    pub exact_cap: usize,
    pub ascent: AscentConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 32,
            perturbation_scale: 0.5,
            levels: 6,
            decay: 0.5,
            steps_per_level: 4,
            seed: 0x5eed,
            exact_cap: 1 << 18,
            ascent: AscentConfig {
                restarts: 8,
                ..AscentConfig::default()
            },
        }
    }
}

fn random_direction<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = dot(&v, &v).sqrt();
        if n > 1e-8 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

fn evaluate(
    g: &DiscreteDistribution,
    h: &DiscreteDistribution,
    dirs: &DirectionSet,
    cfg: &SearchConfig,
) -> Result<DistanceCertificate> {
    match rho_fixed_directions(g, h, dirs, FixedMode::Exact { cap: cfg.exact_cap }) {
        Err(Error::ResourceLimit(_)) => rho_fixed_directions(g, h, dirs, FixedMode::Ascent(cfg.ascent)),
        other => other,
    }
}

fn hill_climb(
    g: &DiscreteDistribution,
    h: &DiscreteDistribution,
    start: Vec<Vec<f64>>,
    cfg: &SearchConfig,
    stream: u64,
) -> Result<DistanceCertificate> {
    let dim = g.dim();
    let mut rng = rng_for(cfg.seed, stream);
    let mut dirs = DirectionSet::normalized(dim, start)?;
    let mut best = evaluate(g, h, &dirs, cfg)?;
    let mut scale = cfg.perturbation_scale;
    for _ in 0..cfg.levels {
        for _ in 0..cfg.steps_per_level {
            let trial: Vec<Vec<f64>> = dirs
                .directions()
                .iter()
                .map(|t| {
                    t.iter()
                        .map(|c| c + scale * rng.sample::<f64, _>(StandardNormal))
                        .collect()
                })
                .collect();
            let Ok(trial) = DirectionSet::normalized(dim, trial) else {
                continue;
            };
            let cert = evaluate(g, h, &trial, cfg)?;
            if cert.value > best.value {
                best = cert;
                dirs = trial;
            }
        }
        scale *= cfg.decay;
    }
    Ok(best)
}

/// Certified lower bound on `rho_m(G, H)`.
///
/// Levels `1..=m` are searched in turn. Each level starts from the previous
/// level's witness plus one random direction, the coordinate axes, and
/// `restarts` uniformly random direction sets; every start is refined by
/// Gaussian hill climbing. The previous witness, padded with a `+inf`
/// halfspace, is itself kept as a candidate, so the value never decreases
/// in `m`. Deterministic for a given seed.
pub fn rho_m_search(
    g: &DiscreteDistribution,
    h: &DiscreteDistribution,
    m: usize,
    cfg: &SearchConfig,
) -> Result<DistanceCertificate> {
    if g.dim() != h.dim() {
        return invalid("dimension mismatch");
    }
    if m == 0 {
        return invalid("m must be >= 1");
    }
    let dim = g.dim();
    let mut best: Option<DistanceCertificate> = None;
    for level in 1..=m {
        let mut rng = rng_for(cfg.seed, (level as u64) << 32);
        let mut starts: Vec<Vec<Vec<f64>>> = Vec::new();
        if let Some(prev) = &best {
            let mut dirs = prev.witness.directions().directions().to_vec();
            dirs.push(random_direction(&mut rng, dim));
            starts.push(dirs);
        }
        let mut axes: Vec<Vec<f64>> = DirectionSet::axes(dim).directions().iter().take(level).cloned().collect();
        while axes.len() < level {
            axes.push(random_direction(&mut rng, dim));
        }
        starts.push(axes);
        for _ in 0..cfg.restarts {
            starts.push((0..level).map(|_| random_direction(&mut rng, dim)).collect());
        }
        let certs: Vec<Result<DistanceCertificate>> = starts
            .into_par_iter()
            .enumerate()
            .map(|(i, s)| hill_climb(g, h, s, cfg, ((level as u64) << 32) | (i as u64 + 1)))
            .collect();
        let mut level_best: Option<DistanceCertificate> = best.as_ref().map(|b| DistanceCertificate {
            witness: b.witness.padded(level),
            ..b.clone()
        });
        for cert in certs {
            let cert = cert?;
            if level_best.as_ref().is_none_or(|b| cert.value > b.value) {
                level_best = Some(cert);
            }
        }
        best = level_best;
    }
    let best = best.expect("at least one level");
    Ok(DistanceCertificate {
        mode: CertificateMode::Searched,
        ..best
    })
}
