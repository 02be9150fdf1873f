//! Seedable samplers for discrete and continuous processes.
//!
//! Every sample draws from its own ChaCha stream keyed by `(seed, purpose)`
//! and selected by the sample index, so sample `i` is the same whether the
//! batch runs serially or on any number of threads.

use num_rational::BigRational;
use ocone_core::bridge::{QvRecord, SampledContinuousPath};
use ocone_core::counterexamples::{
    ce1_law, ce1_path, ce1_sign_count, ce2_block_count, ce2_law, ce2_path,
};
use ocone_core::law::{enumerate_law_with_cap, PathLaw, ProcessSpec};
use ocone_core::{SkipFreePath, WalkPath};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WALK: u64 = 0;
const CLOCK: u64 = 1;

/// Seed of the companion sample used by the two-sample test.
pub fn companion_seed(seed: u64) -> u64 {
    let mut rng = rng_for(seed, u64::MAX, 0);
    rng.next_u64()
}

/// Independent generator for one `(seed, purpose, index)` triple.
pub fn rng_for(seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&purpose.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Law of the discrete clock driving a time-changed walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum Clock {
    /// Increments are i.i.d. Bernoulli(`p`).
    Lazy { p: f64 },
    /// A fixed nondecreasing clock path `A_0 = 0, …, A_m`.
    Fixed { values: Vec<i64> },
}

/// Time change applied to a Gaussian grid path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TimeChange {
    /// Plain Brownian motion.
    None,
    /// Random piecewise-constant rates drawn independently of the driving noise.
    Independent,
    /// Rate 1 up to half the horizon, then rate 4 if the path is positive at
    /// that time and rate 0 otherwise.
    SignDependent,
}

/// Number of pieces of the independent random rate.
pub const RATE_PIECES: usize = 4;
/// Largest independent random rate.
pub const MAX_RATE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SamplerKind {
    BernoulliWalk {
        horizon: usize,
    },
    OconeTimeChange {
        horizon: usize,
        clock: Clock,
    },
    Ce1 {
        horizon: usize,
    },
    Ce2 {
        horizon: usize,
    },
    /// The clock runs at full speed after an up first step and lazily with
    /// probability 1/2 after a down first step.
    DependentTimeChange {
        horizon: usize,
    },
    /// Gaussian increments on a uniform grid.
    BrownianGrid {
        steps: usize,
        horizon: f64,
        time_change: TimeChange,
    },
    /// Lattice walk of mesh `mesh` taking one step per `mesh²` time units, so
    /// that crossings of multiples of the mesh are exact.
    BrownianWalk {
        mesh: f64,
        horizon: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    #[serde(flatten)]
    pub kind: SamplerKind,
    pub seed: u64,
}

/// A sampled continuous path with its bracket `⟨M⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSample {
    pub path: SampledContinuousPath,
    pub qv: QvRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    Discrete(SkipFreePath),
    Continuous(ContinuousSample),
}

/// Longest discrete horizon the samplers accept.
pub const MAX_DISCRETE_HORIZON: usize = 63;

impl SamplerSpec {
    pub fn new(kind: SamplerKind, seed: u64) -> Result<Self> {
        let spec = SamplerSpec { kind, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SamplerSpec {
            kind: self.kind.clone(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.to_string()));
        match &self.kind {
            SamplerKind::BernoulliWalk { horizon }
            | SamplerKind::Ce1 { horizon }
            | SamplerKind::DependentTimeChange { horizon } => {
                if *horizon > MAX_DISCRETE_HORIZON {
                    return bad("horizon exceeds 63 steps");
                }
            }
            SamplerKind::Ce2 { horizon } => {
                if *horizon > ocone_core::counterexamples::CE2_MAX_HORIZON {
                    return bad("ce2 horizon exceeds 31 steps");
                }
            }
            SamplerKind::OconeTimeChange { horizon, clock } => {
                if *horizon > MAX_DISCRETE_HORIZON {
                    return bad("horizon exceeds 63 steps");
                }
                match clock {
                    Clock::Lazy { p } => {
                        if !(0.0..=1.0).contains(p) {
                            return bad("clock probability must lie in [0, 1]");
                        }
                    }
                    Clock::Fixed { values } => {
                        let ok = values.len() == horizon + 1
                            && values[0] == 0
                            && values.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1);
                        if !ok {
                            return bad("fixed clock must start at 0, take unit steps and cover the horizon");
                        }
                    }
                }
            }
            SamplerKind::BrownianGrid { steps, horizon, .. } => {
                if *steps == 0 || !(*horizon > 0.0) || !horizon.is_finite() {
                    return bad("grid needs at least one step and a positive horizon");
                }
            }
            SamplerKind::BrownianWalk { mesh, horizon } => {
                if !(*mesh > 0.0) || !(*horizon > 0.0) || !horizon.is_finite() {
                    return bad("walk needs a positive mesh and horizon");
                }
                if horizon / (mesh * mesh) > 1e9 {
                    return bad("walk would exceed 10^9 steps");
                }
            }
        }
        Ok(())
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(
            self.kind,
            SamplerKind::BrownianGrid { .. } | SamplerKind::BrownianWalk { .. }
        )
    }

    /// Number of steps of a discrete sample.
    pub fn horizon(&self) -> Option<usize> {
        match &self.kind {
            SamplerKind::BernoulliWalk { horizon }
            | SamplerKind::OconeTimeChange { horizon, .. }
            | SamplerKind::Ce1 { horizon }
            | SamplerKind::Ce2 { horizon }
            | SamplerKind::DependentTimeChange { horizon } => Some(*horizon),
            _ => None,
        }
    }

    /// Exact law of a discrete sampler, when one can be enumerated.
    pub fn exact_law(&self, cap: usize) -> Result<Option<PathLaw>> {
        let law = match &self.kind {
            SamplerKind::BernoulliWalk { horizon } => {
                enumerate_law_with_cap(&ProcessSpec::BernoulliWalk, *horizon, cap)?
            }
            SamplerKind::Ce1 { horizon } => ce1_law(*horizon)?,
            SamplerKind::Ce2 { horizon } => ce2_law(*horizon)?,
            SamplerKind::OconeTimeChange { horizon, clock } => {
                let clock = match clock {
                    Clock::Lazy { p } => {
                        let Some(p) = BigRational::from_float(*p) else {
                            return Ok(None);
                        };
                        ProcessSpec::lazy_clock(*horizon, &p)
                    }
                    Clock::Fixed { values } => {
                        vec![(
                            SkipFreePath::from_values(values.clone())?,
                            BigRational::from_integer(1.into()),
                        )]
                    }
                };
                enumerate_law_with_cap(&ProcessSpec::TimeChangedWalk { clock }, *horizon, cap)?
            }
            _ => return Ok(None),
        };
        Ok(Some(law))
    }

    pub fn discrete_path(&self, index: u64) -> Result<SkipFreePath> {
        let walk_bits = |len: usize| -> Result<WalkPath> {
            let mut rng = rng_for(self.seed, WALK, index);
            let bits = if len == 0 {
                0
            } else {
                rng.next_u64() >> (64 - len)
            };
            Ok(WalkPath::from_bits(len, bits)?)
        };
        let signs = |len: usize| -> Vec<i8> {
            let w = walk_bits(len).expect("length checked by validate");
            (1..=len).map(|k| w.step(k) as i8).collect()
        };
        match &self.kind {
            SamplerKind::BernoulliWalk { horizon } => Ok(walk_bits(*horizon)?.to_skip_free()),
            SamplerKind::Ce1 { horizon } => {
                Ok(ce1_path(&signs(ce1_sign_count(*horizon)), *horizon)?.to_skip_free())
            }
            SamplerKind::Ce2 { horizon } => {
                Ok(ce2_path(&signs(ce2_block_count(*horizon)), *horizon)?.to_skip_free())
            }
            SamplerKind::OconeTimeChange { horizon, clock } => {
                let clock = match clock {
                    Clock::Lazy { p } => {
                        let mut rng = rng_for(self.seed, CLOCK, index);
                        lazy_clock_path(*horizon, *p, 0, &mut rng)
                    }
                    Clock::Fixed { values } => values.clone(),
                };
                let walk = walk_bits(*clock.last().unwrap() as usize)?;
                time_change(&walk, &clock)
            }
            SamplerKind::DependentTimeChange { horizon } => {
                let m = *horizon;
                let walk = walk_bits(m)?;
                let clock = if m == 0 || walk.step(1) == 1 {
                    (0..=m as i64).collect()
                } else {
                    let mut rng = rng_for(self.seed, CLOCK, index);
                    let mut tail = lazy_clock_path(m - 1, 0.5, 1, &mut rng);
                    tail.insert(0, 0);
                    tail
                };
                time_change(&walk, &clock)
            }
            _ => Err(Error::InvalidSpec(
                "continuous sampler has no discrete paths".into(),
            )),
        }
    }

    pub fn continuous_path(&self, index: u64) -> Result<ContinuousSample> {
        match &self.kind {
            SamplerKind::BrownianGrid {
                steps,
                horizon,
                time_change,
            } => Ok(brownian_grid(
                self.seed,
                index,
                *steps,
                *horizon,
                *time_change,
            )?),
            SamplerKind::BrownianWalk { mesh, horizon } => {
                let n = walk_steps(*mesh, *horizon);
                let mut rng = rng_for(self.seed, WALK, index);
                let mut times = Vec::with_capacity(n + 2);
                let mut values = Vec::with_capacity(n + 2);
                let mut qv = Vec::with_capacity(n + 2);
                times.push(0.0);
                values.push(0.0);
                qv.push(0.0);
                let mut units = 0i64;
                let mut word = 0u64;
                for k in 0..n {
                    if k % 64 == 0 {
                        word = rng.next_u64();
                    }
                    units += if word >> (k % 64) & 1 == 1 { 1 } else { -1 };
                    let t = (k + 1) as f64 * mesh * mesh;
                    times.push(t);
                    values.push(units as f64 * mesh);
                    qv.push(t);
                }
                if *horizon > *times.last().unwrap() {
                    times.push(*horizon);
                    values.push(units as f64 * mesh);
                    qv.push(*qv.last().unwrap());
                }
                Ok(ContinuousSample {
                    path: SampledContinuousPath::new(times.clone(), values, true)?,
                    qv: QvRecord::new(times, qv)?,
                })
            }
            _ => Err(Error::InvalidSpec(
                "discrete sampler has no continuous paths".into(),
            )),
        }
    }

    pub fn sample_one(&self, index: u64) -> Result<Sample> {
        if self.is_discrete() {
            self.discrete_path(index).map(Sample::Discrete)
        } else {
            self.continuous_path(index).map(Sample::Continuous)
        }
    }

    /// Number of crossings of the lattice `detect_mesh·ℤ` by a Brownian-walk
    /// sample, computed straight from its random bits. `detect_mesh` must be
    /// a multiple of the walk mesh.
    pub fn walk_crossings(&self, index: u64, detect_mesh: f64) -> Result<u64> {
        let SamplerKind::BrownianWalk { mesh, horizon } = self.kind else {
            return Err(Error::InvalidSpec(
                "crossing counts need a brownian-walk sampler".into(),
            ));
        };
        let ratio = detect_mesh / mesh;
        let r = ratio.round();
        if r < 1.0 || (ratio - r).abs() > 1e-9 {
            return Err(Error::InvalidSpec(
                "detection mesh must be a multiple of the walk mesh".into(),
            ));
        }
        let table = CrossingTable::new(r as usize);
        let n = walk_steps(mesh, horizon);
        let mut rng = rng_for(self.seed, WALK, index);
        Ok(table.count(&mut rng, n))
    }
}

fn walk_steps(mesh: f64, horizon: f64) -> usize {
    let x = horizon / (mesh * mesh);
    (x + x * 1e-12).floor() as usize
}

/// Byte-at-a-time automaton counting exits from `(-r, r)` around the last
/// lattice level reached.
struct CrossingTable {
    width: usize,
    next: Vec<(u8, u8)>,
}

impl CrossingTable {
    fn new(r: usize) -> Self {
        let width = 2 * r - 1;
        let mut next = Vec::with_capacity(width * 256);
        for state in 0..width {
            for byte in 0..256usize {
                let (mut s, mut c) = (state as i64 - (r as i64 - 1), 0u8);
                for bit in 0..8 {
                    s += if byte >> bit & 1 == 1 { 1 } else { -1 };
                    if s.unsigned_abs() as usize == r {
                        s = 0;
                        c += 1;
                    }
                }
                next.push(((s + r as i64 - 1) as u8, c));
            }
        }
        CrossingTable { width, next }
    }

    fn step(&self, state: usize, up: bool) -> (usize, u64) {
        let r = (self.width + 1) / 2;
        let s = state as i64 - (r as i64 - 1) + if up { 1 } else { -1 };
        if s.unsigned_abs() as usize == r {
            (r - 1, 1)
        } else {
            ((s + r as i64 - 1) as usize, 0)
        }
    }

    fn count(&self, rng: &mut ChaCha8Rng, n: usize) -> u64 {
        let r = (self.width + 1) / 2;
        let mut state = r - 1;
        let mut total = 0u64;
        let mut done = 0;
        while done < n {
            let word = rng.next_u64();
            let take = (n - done).min(64);
            let whole = take / 8;
            for b in 0..whole {
                let byte = (word >> (8 * b)) as u8 as usize;
                let (s, c) = self.next[state * 256 + byte];
                state = s as usize;
                total += c as u64;
            }
            for bit in whole * 8..take {
                let (s, c) = self.step(state, word >> bit & 1 == 1);
                state = s;
                total += c;
            }
            done += take;
        }
        total
    }
}

/// Clock path of length `m` starting at `start` with Bernoulli(`p`) increments.
fn lazy_clock_path(m: usize, p: f64, start: i64, rng: &mut ChaCha8Rng) -> Vec<i64> {
    let mut values = Vec::with_capacity(m + 1);
    values.push(start);
    for _ in 0..m {
        let up = rng.random_bool(p);
        values.push(values.last().unwrap() + up as i64);
    }
    values
}

fn time_change(walk: &WalkPath, clock: &[i64]) -> Result<SkipFreePath> {
    use ocone_core::PathLike;
    Ok(SkipFreePath::from_values(
        clock.iter().map(|&a| walk.value(a as usize)).collect(),
    )?)
}

fn brownian_grid(
    seed: u64,
    index: u64,
    steps: usize,
    horizon: f64,
    tc: TimeChange,
) -> Result<ContinuousSample> {
    let dt = horizon / steps as f64;
    let mut noise = rng_for(seed, WALK, index);
    let rates: Vec<f64> = match tc {
        TimeChange::Independent => {
            let mut rng = rng_for(seed, CLOCK, index);
            (0..RATE_PIECES)
                .map(|_| rng.random_range(0.0..MAX_RATE))
                .collect()
        }
        _ => vec![1.0],
    };
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut qv = Vec::with_capacity(steps + 1);
    times.push(0.0);
    values.push(0.0);
    qv.push(0.0);
    let half = steps / 2;
    let mut late_rate = 1.0;
    for k in 0..steps {
        let rate = match tc {
            TimeChange::None => 1.0,
            TimeChange::Independent => rates[k * RATE_PIECES / steps],
            TimeChange::SignDependent => {
                if k == half {
                    late_rate = if *values.last().unwrap() > 0.0 {
                        4.0
                    } else {
                        0.0
                    };
                }
                if k < half {
                    1.0
                } else {
                    late_rate
                }
            }
        };
        let z: f64 = noise.sample(StandardNormal);
        times.push(if k + 1 == steps {
            horizon
        } else {
            (k + 1) as f64 * dt
        });
        values.push(values.last().unwrap() + (rate * dt).sqrt() * z);
        qv.push(qv.last().unwrap() + rate * dt);
    }
    Ok(ContinuousSample {
        path: SampledContinuousPath::new(times.clone(), values, false)?,
        qv: QvRecord::new(times, qv)?,
    })
}

/// Draws samples `0..n` in parallel; the result is ordered by index.
pub fn sample(spec: &SamplerSpec, n: usize) -> Result<Vec<Sample>> {
    if n == 0 {
        return Err(Error::Undersized("at least one sample is required".into()));
    }
    spec.validate()?;
    (0..n as u64)
        .into_par_iter()
        .map(|i| spec.sample_one(i))
        .collect()
}

pub fn sample_discrete(spec: &SamplerSpec, n: usize) -> Result<Vec<SkipFreePath>> {
    if n == 0 {
        return Err(Error::Undersized("at least one sample is required".into()));
    }
    spec.validate()?;
    (0..n as u64)
        .into_par_iter()
        .map(|i| spec.discrete_path(i))
        .collect()
}
