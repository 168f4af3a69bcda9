//! Cumulative loss of `n` independent observations, each contributing `0`
//! with probability `1 - p_i` and a `V_i`-distributed loss with probability
//! `p_i`, together with its Poissonized counterpart.
//!
//! Config format:
//!
//! ```text
//! n 100
//! p 0.01 @loss.txt      # V_i read from a file relative to the config
//! p 0.02                # V_i given inline, terminated by `end`
//! dim 1
//! 1 0.5
//! 2 0.5
//! end
//! ```
//!
//! A single `p` entry applies to all `n` observations.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::sample::EmpiricalSample;
use crate::dist::literal::{parse_f64, parse_lines, strip_comment};
use crate::dist::{compound_poisson, convolve, mixture, parse_distribution, power_exact, DiscreteDistribution, WithError};
use crate::error::{invalid, parse_err, Error, Result};
use crate::poly::rng_for;

const CHUNK: usize = 4096;
const T_STREAM: u64 = 1 << 63;

#[derive(Debug, Clone, PartialEq)]
pub struct RareEvent {
    pub p: f64,
    pub loss: DiscreteDistribution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RareEventModel {
    entries: Vec<RareEvent>,
    p_max: f64,
}

impl RareEventModel {
    pub fn new(entries: Vec<RareEvent>) -> Result<Self> {
        let Some(first) = entries.first() else {
            return invalid("a model needs at least one observation");
        };
        let dim = first.loss.dim();
        let mut p_max: f64 = 0.0;
        for e in &entries {
            if !(0.0..=1.0).contains(&e.p) {
                return invalid(format!("p_i must lie in [0, 1], got {:?}", e.p));
            }
            if e.loss.dim() != dim {
                return invalid("loss laws differ in dimension");
            }
            p_max = p_max.max(e.p);
        }
        Ok(RareEventModel { entries, p_max })
    }

    /// `n` identical observations.
    pub fn uniform(n: usize, p: f64, loss: &DiscreteDistribution) -> Result<Self> {
        Self::new(vec![RareEvent { p, loss: loss.clone() }; n])
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    /// `max p_i`.
    pub fn p(&self) -> f64 {
        self.p_max
    }

    pub fn dim(&self) -> usize {
        self.entries[0].loss.dim()
    }

    pub fn entries(&self) -> &[RareEvent] {
        &self.entries
    }

    /// `sum p_i E V_i`.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for e in &self.entries {
            for (a, b) in m.iter_mut().zip(e.loss.mean()) {
                *a += e.p * b;
            }
        }
        m
    }

    /// Runs of identical consecutive observations.
    fn groups(&self) -> Vec<(&RareEvent, u64)> {
        let mut out: Vec<(&RareEvent, u64)> = Vec::new();
        for e in &self.entries {
            match out.last_mut() {
                Some((prev, c)) if *prev == e => *c += 1,
                _ => out.push((e, 1)),
            }
        }
        out
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses the config format; `@path` references resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let mut n: Option<usize> = None;
        let mut entries = Vec::new();
        let mut i = 0;
        while i < lines.len() {
            let ln = i + 1;
            let line = strip_comment(lines[i]);
            i += 1;
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match (toks[0], n) {
                ("n", None) if toks.len() == 2 => {
                    let v: usize = toks[1].parse().map_err(|_| Error::Parse {
                        line: ln,
                        msg: "n must be a positive integer".into(),
                    })?;
                    if v == 0 {
                        return parse_err(ln, "n must be a positive integer");
                    }
                    n = Some(v);
                }
                ("p", Some(_)) if toks.len() == 2 || toks.len() == 3 => {
                    let p = parse_f64(toks[1], ln)?;
                    let loss = if let Some(r) = toks.get(2) {
                        let Some(rel) = r.strip_prefix('@') else {
                            return parse_err(ln, "expected `@path` after the probability");
                        };
                        let text = std::fs::read_to_string(base.join(rel))?;
                        parse_distribution(&text).map_err(|e| Error::Parse {
                            line: ln,
                            msg: format!("in {rel}: {e}"),
                        })?
                    } else {
                        let start = i;
                        while i < lines.len() && strip_comment(lines[i]) != "end" {
                            i += 1;
                        }
                        if i == lines.len() {
                            return parse_err(ln, "inline loss law is missing its `end` line");
                        }
                        let d = parse_lines(lines[start..i].iter().copied(), start + 1)?;
                        i += 1;
                        d
                    };
                    entries.push((ln, p, loss));
                }
                (_, None) => return parse_err(ln, "expected `n <count>` first"),
                _ => return parse_err(ln, format!("unexpected line {line:?}")),
            }
        }
        let Some(n) = n else {
            return parse_err(lines.len().max(1), "missing `n <count>`");
        };
        let last = entries.last().map_or(lines.len().max(1), |e| e.0);
        let entries: Vec<RareEvent> = match entries.len() {
            0 => return parse_err(last, "no `p` entries"),
            1 => vec![RareEvent { p: entries[0].1, loss: entries[0].2.clone() }; n],
            k if k == n => entries.into_iter().map(|(_, p, loss)| RareEvent { p, loss }).collect(),
            k => return parse_err(last, format!("{k} entries for n = {n}")),
        };
        RareEventModel::new(entries).map_err(|e| Error::Parse {
            line: last,
            msg: e.to_string(),
        })
    }
}

/// Exact law `G = prod_i ((1 - p_i) E + p_i V_i)` of the cumulative loss.
pub fn exact_g(model: &RareEventModel) -> Result<DiscreteDistribution> {
    let mut acc = DiscreteDistribution::identity(model.dim());
    for (e, count) in model.groups() {
        let g = mixture(e.p, &e.loss)?;
        acc = convolve(&acc, &power_exact(&g, count)?)?;
    }
    Ok(acc)
}

/// `D = prod_i e(G_i)`, each factor truncated at `tol / n`.
pub fn exact_d(model: &RareEventModel, tol: f64) -> Result<WithError> {
    let n = model.n() as f64;
    let mut acc = DiscreteDistribution::identity(model.dim());
    let mut err = 0.0;
    for (e, count) in model.groups() {
        let g = mixture(e.p, &e.loss)?;
        let cp = compound_poisson(1.0, &g, tol / n)?;
        acc = convolve(&acc, &power_exact(&cp.dist, count)?)?;
        err += count as f64 * cp.error_bound;
    }
    Ok(WithError {
        dist: acc,
        error_bound: err.min(1.0),
    })
}

/// Inverse-CDF sampler over a distribution's atoms.
struct AtomSampler<'a> {
    law: &'a DiscreteDistribution,
    cum: Vec<f64>,
}

impl<'a> AtomSampler<'a> {
    fn new(law: &'a DiscreteDistribution) -> Self {
        let mut s = 0.0;
        let cum = law
            .masses()
            .iter()
            .map(|m| {
                s += m;
                s
            })
            .collect();
        AtomSampler { law, cum }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> &'a [f64] {
        let u: f64 = rng.random::<f64>() * self.cum[self.cum.len() - 1];
        let i = self.cum.partition_point(|&c| c <= u).min(self.cum.len() - 1);
        self.law.points()[i].coords()
    }
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        return invalid("sample count must be at least 1");
    }
    Ok(())
}

/// `N` i.i.d. draws of the cumulative loss `S`.
pub fn simulate_s(model: &RareEventModel, n_samples: usize, seed: u64) -> Result<EmpiricalSample> {
    check_count(n_samples)?;
    let dim = model.dim();
    let samplers: Vec<AtomSampler> = model.entries.iter().map(|e| AtomSampler::new(&e.loss)).collect();
    let chunks = n_samples.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, c as u64);
            let reps = CHUNK.min(n_samples - c * CHUNK);
            let mut out = vec![0.0; reps * dim];
            for r in 0..reps {
                let acc = &mut out[r * dim..(r + 1) * dim];
                for (e, s) in model.entries.iter().zip(&samplers) {
                    if rng.random::<f64>() < e.p {
                        for (a, x) in acc.iter_mut().zip(s.draw(&mut rng)) {
                            *a += x;
                        }
                    }
                }
            }
            out
        })
        .collect();
    EmpiricalSample::new(dim, parts.concat())
}

/// Draws of `T` together with the per-observation Poisson(1) multiplicities.
#[derive(Debug, Clone)]
pub struct PoissonizedDraws {
    pub sample: EmpiricalSample,
    /// Row-major `N x n` multiplicities `K_i`.
    pub counts: Vec<u32>,
}

/// `N` i.i.d. draws of the Poissonized loss `T`: observation `i` appears
/// `K_i ~ Poisson(1)` times, each copy carrying an independent loss drawn
/// from `(1 - p_i) E + p_i V_i`.
pub fn simulate_t(model: &RareEventModel, n_samples: usize, seed: u64) -> Result<EmpiricalSample> {
    Ok(simulate_t_with_counts(model, n_samples, seed)?.sample)
}

pub fn simulate_t_with_counts(model: &RareEventModel, n_samples: usize, seed: u64) -> Result<PoissonizedDraws> {
    check_count(n_samples)?;
    let dim = model.dim();
    let n = model.n();
    let samplers: Vec<AtomSampler> = model.entries.iter().map(|e| AtomSampler::new(&e.loss)).collect();
    let poisson = Poisson::new(1.0).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let chunks = n_samples.div_ceil(CHUNK);
    let parts: Vec<(Vec<f64>, Vec<u32>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, T_STREAM | c as u64);
            let reps = CHUNK.min(n_samples - c * CHUNK);
            let mut out = vec![0.0; reps * dim];
            let mut counts = vec![0u32; reps * n];
            for r in 0..reps {
                let acc = &mut out[r * dim..(r + 1) * dim];
                for (i, (e, s)) in model.entries.iter().zip(&samplers).enumerate() {
                    let k = poisson.sample(&mut rng) as u32;
                    counts[r * n + i] = k;
                    for _ in 0..k {
                        if rng.random::<f64>() < e.p {
                            for (a, x) in acc.iter_mut().zip(s.draw(&mut rng)) {
                                *a += x;
                            }
                        }
                    }
                }
            }
            (out, counts)
        })
        .collect();
    let (values, counts): (Vec<Vec<f64>>, Vec<Vec<u32>>) = parts.into_iter().unzip();
    Ok(PoissonizedDraws {
        sample: EmpiricalSample::new(dim, values.concat())?,
        counts: counts.concat(),
    })
}
