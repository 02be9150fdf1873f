//! Batch runs over continuous samplers: characteristic-function checks,
//! discretization bounds and the bracket of the discretized path.

use ocone_core::bridge::{
    discretize, stochastic_step_integral, sup_gap, CfAccumulator, CfReport, StepFunction,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampler::{SamplerKind, SamplerSpec};

/// Samples per reduction chunk. Chunks are merged in index order, so the
/// floating-point result does not depend on the number of threads.
pub const CHUNK: usize = 1024;

fn chunks(n: usize) -> Vec<(u64, u64)> {
    (0..n.div_ceil(CHUNK))
        .map(|c| ((c * CHUNK) as u64, ((c + 1) * CHUNK).min(n) as u64))
        .collect()
}

fn require_continuous(spec: &SamplerSpec) -> Result<()> {
    spec.validate()?;
    if spec.is_discrete() {
        return Err(Error::InvalidSpec(
            "a continuous sampler is required".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CfSummary {
    pub breaks: Vec<f64>,
    pub lambda: Vec<f64>,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs: f64,
    pub distance: f64,
    pub stderr: f64,
    pub z: f64,
    pub n_samples: u64,
    pub pass: bool,
}

impl CfSummary {
    fn new(h: &StepFunction, r: &CfReport) -> Self {
        CfSummary {
            breaks: h.breaks().to_vec(),
            lambda: h.coefficients().to_vec(),
            lhs_re: r.lhs.re,
            lhs_im: r.lhs.im,
            rhs: r.rhs,
            distance: r.distance,
            stderr: r.stderr,
            z: r.z,
            n_samples: r.n,
            pass: r.pass,
        }
    }
}

/// Characteristic-function check over `n` samples of a continuous sampler.
pub fn cf_check(spec: &SamplerSpec, n: usize, h: &StepFunction, z: f64) -> Result<CfSummary> {
    require_continuous(spec)?;
    let parts: Vec<CfAccumulator> = chunks(n)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut acc = CfAccumulator::new();
            for i in lo..hi {
                let s = spec.continuous_path(i)?;
                acc.push(stochastic_step_integral(&s.path, h)?, h.energy(&s.qv)?);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = CfAccumulator::new();
    for p in &parts {
        total.merge(p);
    }
    Ok(CfSummary::new(h, &total.finish(z)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSummary {
    pub mesh: f64,
    pub n_samples: usize,
    pub max_gap: f64,
    pub max_slack: f64,
    /// Samples whose gap exceeds `mesh + slack`.
    pub violations: usize,
    pub exact_crossings: bool,
}

/// Discretizes `n` samples at mesh `a` and records the worst sup gap.
pub fn gap_summary(spec: &SamplerSpec, n: usize, a: f64) -> Result<GapSummary> {
    require_continuous(spec)?;
    let parts: Vec<(f64, f64, usize, bool)> = chunks(n)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut out = (0.0f64, 0.0f64, 0usize, true);
            for i in lo..hi {
                let s = spec.continuous_path(i)?;
                let g = sup_gap(&s.path, &discretize(&s.path, a)?)?;
                out.0 = out.0.max(g.gap);
                out.1 = out.1.max(g.slack);
                out.2 += !g.within_bound() as usize;
                out.3 &= s.path.exact_crossings();
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(GapSummary {
        mesh: a,
        n_samples: n,
        max_gap: parts.iter().map(|p| p.0).fold(0.0, f64::max),
        max_slack: parts.iter().map(|p| p.1).fold(0.0, f64::max),
        violations: parts.iter().map(|p| p.2).sum(),
        exact_crossings: parts.iter().all(|p| p.3),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QvSummary {
    pub mesh: f64,
    pub n_samples: usize,
    /// Mean of `[M^a]_T = a² · #crossings` at the sampler horizon.
    pub mean: f64,
    pub stderr: f64,
    pub target: f64,
    /// `(mean - target) / stderr`.
    pub z: f64,
}

/// Bracket of the mesh-`a` discretization at the horizon, averaged over `n`
/// samples. Brownian-walk samplers count crossings straight from their bits.
pub fn qv_summary(spec: &SamplerSpec, n: usize, a: f64) -> Result<QvSummary> {
    require_continuous(spec)?;
    if n < 2 {
        return Err(Error::Undersized("need at least two samples".into()));
    }
    let (target, fast) = match spec.kind {
        SamplerKind::BrownianWalk { horizon, .. } => (horizon, true),
        SamplerKind::BrownianGrid { horizon, .. } => (horizon, false),
        _ => unreachable!(),
    };
    let parts: Vec<(f64, f64)> = chunks(n)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut sums = (0.0, 0.0);
            for i in lo..hi {
                let crossings = if fast {
                    spec.walk_crossings(i, a)?
                } else {
                    discretize(&spec.continuous_path(i)?.path, a)?
                        .jump_times()
                        .len() as u64
                };
                let q = a * a * crossings as f64;
                sums.0 += q;
                sums.1 += q * q;
            }
            Ok(sums)
        })
        .collect::<Result<_>>()?;
    let (s1, s2) = parts
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let nf = n as f64;
    let mean = s1 / nf;
    let var = ((s2 - s1 * s1 / nf) / (nf - 1.0)).max(0.0);
    let stderr = (var / nf).sqrt();
    Ok(QvSummary {
        mesh: a,
        n_samples: n,
        mean,
        stderr,
        target,
        z: (mean - target) / stderr,
    })
}
