//! Continuous paths on a sample grid, their space discretization onto a
//! lattice `aℤ`, and the characteristic-function form of the Ocone property.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::path::LatticePath;

/// Relative tolerance for level tests on exact-crossing inputs.
const EXACT_TOLERANCE: f64 = 1e-9;

/// Anything with a value at every time in `[0, horizon]`.
pub trait ContinuousPath {
    fn horizon(&self) -> f64;
    fn value_at(&self, t: f64) -> f64;
}

impl ContinuousPath for LatticePath {
    fn horizon(&self) -> f64 {
        LatticePath::horizon(self)
    }

    fn value_at(&self, t: f64) -> f64 {
        LatticePath::value_at(self, t)
    }
}

fn check_grid(times: &[f64], values: &[f64]) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::LengthMismatch {
            left: times.len(),
            right: values.len(),
        });
    }
    if times.is_empty() || times[0] != 0.0 || values[0] != 0.0 {
        return Err(Error::BadOrigin);
    }
    if times.iter().chain(values).any(|x| !x.is_finite()) {
        return Err(Error::MalformedPath("non-finite sample"));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::NonMonotoneTimes);
    }
    Ok(())
}

/// Piecewise-linear interpolation on a grid, constant past either end.
fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let i = times.partition_point(|&s| s <= t);
    if i == 0 {
        return values[0];
    }
    if i == times.len() {
        return values[i - 1];
    }
    let (t0, t1) = (times[i - 1], times[i]);
    let (x0, x1) = (values[i - 1], values[i]);
    x0 + (x1 - x0) * (t - t0) / (t1 - t0)
}

/// Continuous path known on a grid and linear in between.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledContinuousPath {
    times: Vec<f64>,
    values: Vec<f64>,
    exact_crossings: bool,
}

impl SampledContinuousPath {
    /// `exact_crossings` marks scaled lattice walks, whose level crossings all
    /// happen on grid points.
    pub fn new(times: Vec<f64>, values: Vec<f64>, exact_crossings: bool) -> Result<Self> {
        check_grid(&times, &values)?;
        Ok(SampledContinuousPath {
            times,
            values,
            exact_crossings,
        })
    }

    /// Samples a lattice path at its jump times and horizon.
    pub fn from_lattice(path: &LatticePath) -> Result<Self> {
        let mut times = alloc::vec![0.0];
        let mut values = alloc::vec![0.0];
        let mut units = 0i64;
        for (&t, &s) in path.jump_times().iter().zip(path.jump_signs()) {
            units += s as i64;
            times.push(t);
            values.push(units as f64 * path.mesh());
        }
        if path.horizon() > *times.last().unwrap() {
            times.push(path.horizon());
            values.push(units as f64 * path.mesh());
        }
        SampledContinuousPath::new(times, values, true)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exact_crossings(&self) -> bool {
        self.exact_crossings
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest change between neighbouring samples.
    pub fn max_increment(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| libm::fabs(w[1] - w[0]))
            .fold(0.0, f64::max)
    }

    /// Sum of squared increments over the grid.
    pub fn realized_variation(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
            .sum()
    }

    /// Keeps the path until it first touches `level`, mirrors it about `level`
    /// afterwards. A crossing strictly inside a segment becomes a new sample.
    pub fn reflect(&self, level: f64) -> SampledContinuousPath {
        let tol = if self.exact_crossings {
            EXACT_TOLERANCE * libm::fabs(level).max(1.0)
        } else {
            0.0
        };
        let mut times = Vec::with_capacity(self.len() + 1);
        let mut values = Vec::with_capacity(self.len() + 1);
        let mut hit = libm::fabs(self.values[0] - level) <= tol;
        times.push(self.times[0]);
        values.push(if hit {
            2.0 * level - self.values[0]
        } else {
            self.values[0]
        });
        for i in 1..self.len() {
            let (x0, x1) = (self.values[i - 1], self.values[i]);
            if !hit {
                if libm::fabs(x1 - level) <= tol {
                    hit = true;
                    times.push(self.times[i]);
                    values.push(level);
                    continue;
                }
                if (x0 - level) * (x1 - level) < 0.0 {
                    hit = true;
                    let (t0, t1) = (self.times[i - 1], self.times[i]);
                    times.push(t0 + (level - x0) / (x1 - x0) * (t1 - t0));
                    values.push(level);
                }
            }
            times.push(self.times[i]);
            values.push(if hit { 2.0 * level - x1 } else { x1 });
        }
        SampledContinuousPath {
            times,
            values,
            exact_crossings: self.exact_crossings,
        }
    }
}

impl ContinuousPath for SampledContinuousPath {
    fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn value_at(&self, t: f64) -> f64 {
        interpolate(&self.times, &self.values, t)
    }
}

/// Nondecreasing record of `⟨M⟩` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QvRecord {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl QvRecord {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid(&times, &values)?;
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::MalformedPath(
                "quadratic variation must be nondecreasing",
            ));
        }
        Ok(QvRecord { times, values })
    }

    /// `⟨M⟩_t = t` on `[0, horizon]`.
    pub fn identity(horizon: f64) -> Result<Self> {
        QvRecord::new(alloc::vec![0.0, horizon], alloc::vec![0.0, horizon])
    }

    /// `⟨M⟩ ≡ 0` on `[0, horizon]`.
    pub fn zero(horizon: f64) -> Result<Self> {
        QvRecord::new(alloc::vec![0.0, horizon], alloc::vec![0.0, 0.0])
    }

    /// Bracket of a lattice path: `a²` per jump.
    pub fn of_lattice(path: &LatticePath) -> Result<Self> {
        let a2 = path.mesh() * path.mesh();
        let mut times = alloc::vec![0.0];
        let mut values = alloc::vec![0.0];
        for (k, &t) in path.jump_times().iter().enumerate() {
            if t > 0.0 {
                // step just before the jump keeps the record piecewise constant
                let before = libm::nextafter(t, 0.0).max(*times.last().unwrap());
                if before > *times.last().unwrap() {
                    times.push(before);
                    values.push(a2 * k as f64);
                }
            }
            if t > *times.last().unwrap() {
                times.push(t);
                values.push(a2 * (k + 1) as f64);
            } else {
                *values.last_mut().unwrap() = a2 * (k + 1) as f64;
            }
        }
        if path.horizon() > *times.last().unwrap() {
            times.push(path.horizon());
            values.push(*values.last().unwrap());
        }
        QvRecord::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn value_at(&self, t: f64) -> f64 {
        interpolate(&self.times, &self.values, t)
    }
}

/// `h = Σ_j λ_j 1_{]t_{j-1}, t_j]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breaks: Vec<f64>,
    coefficients: Vec<f64>,
}

impl StepFunction {
    /// `breaks` starts at 0 and has one more entry than `coefficients`.
    pub fn new(breaks: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        if breaks.len() != coefficients.len() + 1 {
            return Err(Error::LengthMismatch {
                left: breaks.len(),
                right: coefficients.len() + 1,
            });
        }
        if breaks[0] != 0.0 {
            return Err(Error::BadOrigin);
        }
        if breaks.iter().chain(&coefficients).any(|x| !x.is_finite()) {
            return Err(Error::MalformedPath("non-finite step function"));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::NonMonotoneTimes);
        }
        Ok(StepFunction {
            breaks,
            coefficients,
        })
    }

    /// `λ · 1_{]0, t]}`.
    pub fn constant(lambda: f64, t: f64) -> Result<Self> {
        StepFunction::new(alloc::vec![0.0, t], alloc::vec![lambda])
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn last_break(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 || t > self.last_break() {
            return 0.0;
        }
        let j = self.breaks.partition_point(|&b| b < t);
        self.coefficients[j - 1]
    }

    /// `(λ_j, t_{j-1}, t_j)` for every block.
    pub fn blocks(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.coefficients
            .iter()
            .zip(self.breaks.windows(2))
            .map(|(&l, w)| (l, w[0], w[1]))
    }

    /// `∫ h² d⟨M⟩ = Σ_j λ_j² (⟨M⟩_{t_j} - ⟨M⟩_{t_{j-1}})`.
    pub fn energy(&self, qv: &QvRecord) -> Result<f64> {
        check_within(self.last_break(), qv.horizon())?;
        Ok(self
            .blocks()
            .map(|(l, s, t)| l * l * (qv.value_at(t) - qv.value_at(s)))
            .sum())
    }
}

fn check_within(time: f64, horizon: f64) -> Result<()> {
    if time > horizon * (1.0 + 1e-12) {
        return Err(Error::BeyondHorizon { time, horizon });
    }
    Ok(())
}

/// Replaces the path by a pure-jump path on `aℤ` that jumps whenever the
/// path has moved by `a` from the last lattice level reached. The jump times
/// are the crossing times `τ_k`.
///
/// Crossings between samples are placed by linear interpolation. On
/// exact-crossing inputs every crossing falls on a sample.
pub fn discretize(p: &SampledContinuousPath, a: f64) -> Result<LatticePath> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::NonPositiveMesh);
    }
    let tol = if p.exact_crossings {
        EXACT_TOLERANCE * a
    } else {
        0.0
    };
    let mut level = 0i64;
    let mut jump_times = Vec::new();
    let mut jump_signs = Vec::new();
    for i in 1..p.len() {
        let (t0, t1) = (p.times[i - 1], p.times[i]);
        let (x0, x1) = (p.values[i - 1], p.values[i]);
        loop {
            let up = (level + 1) as f64 * a;
            let down = (level - 1) as f64 * a;
            let (target, sign) = if x1 >= up - tol {
                (up, 1)
            } else if x1 <= down + tol {
                (down, -1)
            } else {
                break;
            };
            let t = if libm::fabs(x1 - target) <= tol {
                t1
            } else {
                (t0 + (target - x0) / (x1 - x0) * (t1 - t0)).clamp(t0, t1)
            };
            // a crossing can never precede the previous one
            let t = jump_times.last().map_or(t, |&last: &f64| t.max(last));
            if jump_times.last() == Some(&t) {
                // coincident crossings only arise from degenerate segments
                return Err(Error::NonMonotoneTimes);
            }
            jump_times.push(t);
            jump_signs.push(sign);
            level += sign as i64;
        }
    }
    LatticePath::new(a, jump_times, jump_signs, p.horizon())
}

/// Result of [`sup_gap`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupGap {
    /// `max_i |x_i - L(t_i)|` over the sample grid.
    pub gap: f64,
    pub mesh: f64,
    /// Largest move between samples; zero on exact-crossing inputs.
    pub slack: f64,
}

impl SupGap {
    pub fn bound(&self) -> f64 {
        self.mesh + self.slack
    }

    pub fn within_bound(&self) -> bool {
        self.gap <= self.bound()
    }
}

pub fn sup_gap(p: &SampledContinuousPath, lattice: &LatticePath) -> Result<SupGap> {
    let (h1, h2) = (ContinuousPath::horizon(p), lattice.horizon());
    if libm::fabs(h1 - h2) > 1e-12 * h1.max(1.0) {
        return Err(Error::BeyondHorizon {
            time: h1.max(h2),
            horizon: h1.min(h2),
        });
    }
    // both time grids are sorted, so one sweep tracks the lattice value
    let (jumps, signs) = (lattice.jump_times(), lattice.jump_signs());
    let (mut next, mut units) = (0usize, 0i64);
    let mut gap = 0.0f64;
    for (&t, &x) in p.times.iter().zip(&p.values) {
        while next < jumps.len() && jumps[next] <= t {
            units += signs[next] as i64;
            next += 1;
        }
        gap = gap.max(libm::fabs(x - units as f64 * lattice.mesh()));
    }
    let slack = if p.exact_crossings {
        0.0
    } else {
        p.max_increment()
    };
    Ok(SupGap {
        gap,
        mesh: lattice.mesh(),
        slack,
    })
}

/// `∫ h dM = Σ_j λ_j (M_{t_j} - M_{t_{j-1}})`.
pub fn stochastic_step_integral<P: ContinuousPath + ?Sized>(
    p: &P,
    h: &StepFunction,
) -> Result<f64> {
    check_within(h.last_break(), p.horizon())?;
    Ok(h.blocks()
        .map(|(l, s, t)| l * (p.value_at(t) - p.value_at(s)))
        .sum())
}

/// `u = ⌊a⁻² ω⌋`, robust to the last-bit error in `a⁻²`.
fn lattice_count(omega: f64, a: f64) -> f64 {
    let x = omega / (a * a);
    libm::floor(x + libm::fabs(x) * 1e-12)
}

/// `∏_j cos(λ_j a)^{u_j - u_{j-1}}` with `u_j = ⌊a⁻² ⟨M⟩_{t_j}⌋`.
pub fn cos_product(qv: &QvRecord, h: &StepFunction, a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::NonPositiveMesh);
    }
    check_within(h.last_break(), qv.horizon())?;
    let mut log = 0.0;
    for (l, s, t) in h.blocks() {
        let x = libm::fabs(l) * a;
        if x >= FRAC_PI_2 {
            return Err(Error::CosineNotPositive(x));
        }
        let du = lattice_count(qv.value_at(t), a) - lattice_count(qv.value_at(s), a);
        if du != 0.0 {
            // log cos x = log1p(-2 sin²(x/2)) keeps precision for small x
            let half = libm::sin(x / 2.0);
            log += du * libm::log1p(-2.0 * half * half);
        }
    }
    Ok(libm::exp(log))
}

/// `exp(-½ Σ_j λ_j² (ω_{t_j} - ω_{t_{j-1}}))`.
pub fn limit_exponential(qv: &QvRecord, h: &StepFunction) -> Result<f64> {
    Ok(libm::exp(-0.5 * h.energy(qv)?))
}

/// Least-squares slope of `log err` against `log a`.
pub fn convergence_order(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            available: points.len(),
        });
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(a, e)| (libm::log(a), libm::log(e)))
        .collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Default pass threshold for [`cf_ocone_test`], in standard errors.
pub const DEFAULT_Z: f64 = 3.0;

/// Running sums for the characteristic-function comparison. Partial
/// accumulators merge by addition, so any fixed partition of the samples
/// reduces to the same report.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CfAccumulator {
    n: u64,
    cos: f64,
    cos2: f64,
    sin: f64,
    sin2: f64,
    damp: f64,
    damp2: f64,
}

impl CfAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one sample given `∫ h dM` and `∫ h² d⟨M⟩`.
    pub fn push(&mut self, integral: f64, energy: f64) {
        let (s, c) = libm::sincos(integral);
        let d = libm::exp(-0.5 * energy);
        self.n += 1;
        self.cos += c;
        self.cos2 += c * c;
        self.sin += s;
        self.sin2 += s * s;
        self.damp += d;
        self.damp2 += d * d;
    }

    pub fn merge(&mut self, other: &CfAccumulator) {
        self.n += other.n;
        self.cos += other.cos;
        self.cos2 += other.cos2;
        self.sin += other.sin;
        self.sin2 += other.sin2;
        self.damp += other.damp;
        self.damp2 += other.damp2;
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn finish(&self, z: f64) -> Result<CfReport> {
        if self.n < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                available: self.n as usize,
            });
        }
        let n = self.n as f64;
        let var = |sum: f64, sum2: f64| ((sum2 - sum * sum / n) / (n - 1.0)).max(0.0);
        let lhs = Complex64::new(self.cos / n, self.sin / n);
        let rhs = self.damp / n;
        let se_re2 = (var(self.cos, self.cos2) + var(self.damp, self.damp2)) / n;
        let se_im2 = var(self.sin, self.sin2) / n;
        let stderr = libm::sqrt(se_re2 + se_im2);
        let distance = (lhs - rhs).norm();
        Ok(CfReport {
            lhs,
            rhs,
            stderr,
            distance,
            z,
            n: self.n,
            pass: distance <= z * stderr,
        })
    }
}

/// Empirical check of `E[exp(i∫h dM)] = E[exp(-½∫h² d⟨M⟩)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfReport {
    pub lhs: Complex64,
    pub rhs: f64,
    pub stderr: f64,
    /// `|lhs - rhs|`.
    pub distance: f64,
    pub z: f64,
    pub n: u64,
    pub pass: bool,
}

pub fn cf_ocone_test<P: ContinuousPath>(
    samples: &[(P, QvRecord)],
    h: &StepFunction,
    z: f64,
) -> Result<CfReport> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            available: samples.len(),
        });
    }
    let mut acc = CfAccumulator::new();
    for (p, qv) in samples {
        acc.push(stochastic_step_integral(p, h)?, h.energy(qv)?);
    }
    acc.finish(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        libm::fabs(a - b) <= tol
    }

    fn lattice(mesh: f64, times: &[f64], signs: &[i8], horizon: f64) -> LatticePath {
        LatticePath::new(mesh, times.to_vec(), signs.to_vec(), horizon).unwrap()
    }

    #[test]
    fn discretize_interpolates_crossing() {
        let p =
            SampledContinuousPath::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 0.3, 0.6, 0.9], false)
                .unwrap();
        let l = discretize(&p, 0.5).unwrap();
        assert_eq!(l.jump_signs(), &[1]);
        assert!(close(l.jump_times()[0], 1.0 + 2.0 / 3.0, 1e-12));
        assert_eq!(l.value_at(3.0), 0.5);
        assert_eq!(l.value_at(1.5), 0.0);
    }

    #[test]
    fn discretize_constant_path() {
        let p = SampledContinuousPath::new(vec![0.0, 1.0, 2.0], vec![0.0; 3], false).unwrap();
        let l = discretize(&p, 0.1).unwrap();
        assert!(l.jump_times().is_empty());
        assert_eq!(sup_gap(&p, &l).unwrap().gap, 0.0);
    }

    #[test]
    fn discretize_is_idempotent_on_lattice_paths() {
        let l = lattice(0.25, &[0.1, 0.4, 0.5, 0.9], &[1, 1, -1, -1], 1.0);
        let p = SampledContinuousPath::from_lattice(&l).unwrap();
        assert_eq!(discretize(&p, 0.25).unwrap(), l);
    }

    #[test]
    fn discretize_rejects_bad_input() {
        assert_eq!(
            SampledContinuousPath::new(vec![0.0, 2.0, 1.0], vec![0.0; 3], false),
            Err(Error::NonMonotoneTimes)
        );
        let p = SampledContinuousPath::new(vec![0.0, 1.0], vec![0.0, 1.0], false).unwrap();
        assert_eq!(discretize(&p, 0.0), Err(Error::NonPositiveMesh));
    }

    #[test]
    fn ramp_gap_within_interpolation_slack() {
        let n = 1000;
        let times: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let p = SampledContinuousPath::new(times.clone(), times, false).unwrap();
        let l = discretize(&p, 0.25).unwrap();
        assert_eq!(l.jump_signs(), &[1, 1, 1, 1]);
        let gap = sup_gap(&p, &l).unwrap();
        assert!(gap.within_bound());
        assert!(gap.gap <= 0.25 + 1.0 / n as f64);
    }

    #[test]
    fn reflection_commutes_with_discretization() {
        // scaled walk of mesh 1/8 detected at mesh 1/4
        let units = [0i64, 1, 2, 1, 2, 3, 4, 3, 2, 1, 0, -1, -2, -1, 0];
        let times: Vec<f64> = (0..units.len()).map(|i| i as f64 * 0.1).collect();
        let values: Vec<f64> = units.iter().map(|&u| u as f64 * 0.125).collect();
        let p = SampledContinuousPath::new(times, values, true).unwrap();
        for k in 0..=2 {
            let lhs = discretize(&p.reflect(k as f64 * 0.25), 0.25).unwrap();
            let rhs = discretize(&p, 0.25).unwrap().reflect_units(k);
            assert_eq!(lhs, rhs, "level {k}");
        }
    }

    #[test]
    fn step_integral_examples() {
        let ramp = SampledContinuousPath::new(vec![0.0, 2.0], vec![0.0, 2.0], false).unwrap();
        let h = StepFunction::constant(1.0, 2.0).unwrap();
        assert_eq!(stochastic_step_integral(&ramp, &h).unwrap(), 2.0);
        let h = StepFunction::new(vec![0.0, 1.0, 2.0], vec![1.0, -1.0]).unwrap();
        assert_eq!(stochastic_step_integral(&ramp, &h).unwrap(), 0.0);
        let l = lattice(1.0, &[0.5, 1.5], &[1, 1], 2.0);
        let h = StepFunction::constant(2.0, 2.0).unwrap();
        assert_eq!(stochastic_step_integral(&l, &h).unwrap(), 4.0);
        let h = StepFunction::constant(2.0, 3.0).unwrap();
        assert!(matches!(
            stochastic_step_integral(&l, &h),
            Err(Error::BeyondHorizon { .. })
        ));
    }

    #[test]
    fn cos_product_examples() {
        let qv = QvRecord::identity(2.0).unwrap();
        let h = StepFunction::constant(1.0, 1.0).unwrap();
        let c = cos_product(&qv, &h, 0.01).unwrap();
        assert!(close(c, libm::pow(libm::cos(0.01), 10000.0), 1e-12));
        assert!(close(c, 0.60652, 1e-5));
        assert!(close(
            limit_exponential(&qv, &h).unwrap(),
            libm::exp(-0.5),
            1e-15
        ));

        let zero = StepFunction::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(cos_product(&qv, &zero, 0.1).unwrap(), 1.0);
        assert_eq!(limit_exponential(&qv, &zero).unwrap(), 1.0);

        let h = StepFunction::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0]).unwrap();
        let a = 1.0 / 128.0;
        let c = cos_product(&qv, &h, a).unwrap();
        let e = limit_exponential(&qv, &h).unwrap();
        assert!(close(e, libm::exp(-2.5), 1e-15));
        assert!(close(c, e, 1e-3));

        let big = StepFunction::constant(200.0, 1.0).unwrap();
        assert!(matches!(
            cos_product(&qv, &big, 0.01),
            Err(Error::CosineNotPositive(_))
        ));
    }

    #[test]
    fn second_order_convergence() {
        let qv = QvRecord::identity(1.0).unwrap();
        let h = StepFunction::constant(1.0, 1.0).unwrap();
        let e = limit_exponential(&qv, &h).unwrap();
        let points: Vec<(f64, f64)> = (4..=10)
            .map(|k| {
                let a = libm::ldexp(1.0, -k);
                (a, libm::fabs(cos_product(&qv, &h, a).unwrap() - e))
            })
            .collect();
        let order = convergence_order(&points).unwrap();
        assert!((1.8..=2.2).contains(&order), "order {order}");
    }

    #[test]
    fn deterministic_drift_fails_cf_test() {
        let p = SampledContinuousPath::new(vec![0.0, 1.0], vec![0.0, 1.0], false).unwrap();
        let qv = QvRecord::zero(1.0).unwrap();
        let h = StepFunction::constant(1.0, 1.0).unwrap();
        let report = cf_ocone_test(&[(p.clone(), qv.clone()), (p, qv)], &h, DEFAULT_Z).unwrap();
        assert!(close(report.lhs.re, libm::cos(1.0), 1e-15));
        assert!(close(report.lhs.im, libm::sin(1.0), 1e-15));
        assert_eq!(report.rhs, 1.0);
        assert!(!report.pass);
    }

    #[test]
    fn cf_needs_two_samples() {
        let h = StepFunction::constant(1.0, 1.0).unwrap();
        let none: [(SampledContinuousPath, QvRecord); 0] = [];
        assert!(matches!(
            cf_ocone_test(&none, &h, 3.0),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn lattice_bracket_record() {
        let l = lattice(0.5, &[0.25, 0.75], &[1, -1], 1.0);
        let qv = QvRecord::of_lattice(&l).unwrap();
        assert_eq!(qv.value_at(0.2), 0.0);
        assert_eq!(qv.value_at(0.25), 0.25);
        assert_eq!(qv.value_at(0.5), 0.25);
        assert_eq!(qv.value_at(1.0), 0.5);
    }
}
