//! Discrete skip-free paths and the elementary path transforms.
//!
//! A [`SkipFreePath`] starts at zero and moves by `-1`, `0` or `+1` at every
//! step. A [`WalkPath`] is the special case without flat steps and is stored
//! as a bit string of increment signs, so `Λ^m` is just `0..2^m`.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Longest walk representable by [`WalkPath`].
pub const MAX_WALK_LEN: usize = 64;

/// A hitting time: either a finite index or "never" (`inf ∅ = +∞`).
///
/// `Never` compares greater than every finite index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HittingTime {
    At(usize),
    Never,
}

impl HittingTime {
    pub fn is_finite(self) -> bool {
        matches!(self, HittingTime::At(_))
    }

    pub fn index(self) -> Option<usize> {
        match self {
            HittingTime::At(k) => Some(k),
            HittingTime::Never => None,
        }
    }

    /// `true` when the time is finite and at most `k`.
    pub fn at_most(self, k: usize) -> bool {
        matches!(self, HittingTime::At(t) if t <= k)
    }
}

impl fmt::Display for HittingTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HittingTime::At(k) => write!(f, "{k}"),
            HittingTime::Never => f.write_str("inf"),
        }
    }
}

/// A single increment of a skip-free path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    Down,
    Flat,
    Up,
}

impl Step {
    pub fn value(self) -> i64 {
        match self {
            Step::Down => -1,
            Step::Flat => 0,
            Step::Up => 1,
        }
    }

    pub fn from_value(d: i64) -> Option<Step> {
        match d {
            -1 => Some(Step::Down),
            0 => Some(Step::Flat),
            1 => Some(Step::Up),
            _ => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Step::Down => '-',
            Step::Flat => '0',
            Step::Up => '+',
        }
    }

    fn from_symbol(c: char) -> Option<Step> {
        match c {
            '+' => Some(Step::Up),
            '-' | '\u{2212}' => Some(Step::Down),
            '0' => Some(Step::Flat),
            _ => None,
        }
    }
}

/// Operations shared by both path types.
pub trait PathLike {
    /// Number of steps `m`.
    fn horizon(&self) -> usize;

    /// Value at index `k`, `0 <= k <= m`.
    fn value(&self, k: usize) -> i64;

    /// First index `k` with `value(k) == level`.
    fn first_passage(&self, level: i64) -> HittingTime {
        (0..=self.horizon())
            .find(|&k| self.value(k) == level)
            .map_or(HittingTime::Never, HittingTime::At)
    }

    fn values(&self) -> Vec<i64> {
        (0..=self.horizon()).map(|k| self.value(k)).collect()
    }
}

/// First passage time of `p` at `level`.
pub fn first_passage<P: PathLike + ?Sized>(p: &P, level: i64) -> HittingTime {
    p.first_passage(level)
}

// ---------------------------------------------------------------------------
// SkipFreePath

/// Integer path `(v_0, …, v_m)` with `v_0 = 0` and increments in `{-1, 0, 1}`.
///
/// Ordered lexicographically by values, which is the canonical order used by
/// law comparisons.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SkipFreePath {
    values: Vec<i64>,
}

impl SkipFreePath {
    pub fn from_values(values: Vec<i64>) -> Result<Self> {
        match values.first() {
            None => return Err(Error::MalformedPath("empty path")),
            Some(&v0) if v0 != 0 => return Err(Error::MalformedPath("path must start at 0")),
            _ => {}
        }
        if values.windows(2).any(|w| (w[1] - w[0]).abs() > 1) {
            return Err(Error::MalformedPath("increments must lie in {-1, 0, 1}"));
        }
        Ok(SkipFreePath { values })
    }

    pub fn from_steps<I: IntoIterator<Item = Step>>(steps: I) -> Self {
        let mut values = alloc::vec![0i64];
        let mut cur = 0;
        for s in steps {
            cur += s.value();
            values.push(cur);
        }
        SkipFreePath { values }
    }

    /// The constant path of horizon `m`.
    pub fn zero(m: usize) -> Self {
        SkipFreePath {
            values: alloc::vec![0; m + 1],
        }
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.values
    }

    pub fn step(&self, k: usize) -> Step {
        // invariant checked at construction
        Step::from_value(self.values[k] - self.values[k - 1]).unwrap()
    }

    pub fn steps(&self) -> impl Iterator<Item = Step> + '_ {
        self.values
            .windows(2)
            .map(|w| Step::from_value(w[1] - w[0]).unwrap())
    }

    pub fn last(&self) -> i64 {
        *self.values.last().unwrap()
    }

    /// Prefix `(v_0, …, v_j)`; `j` is clamped to the horizon.
    pub fn truncate(&self, j: usize) -> SkipFreePath {
        let j = j.min(self.horizon());
        SkipFreePath {
            values: self.values[..=j].to_vec(),
        }
    }

    /// Reflection `Θ^a`: keep the path up to its first passage at `a`, mirror
    /// it about `a` afterwards. Identity when `a` is never reached.
    pub fn reflect(&self, level: i64) -> SkipFreePath {
        match self.first_passage(level) {
            HittingTime::Never => self.clone(),
            HittingTime::At(t) => {
                let mut values = self.values.clone();
                for v in &mut values[t + 1..] {
                    *v = 2 * level - *v;
                }
                SkipFreePath { values }
            }
        }
    }

    /// First exit time `σ_a = inf{k : |v_k| = a}`.
    pub fn exit_time(&self, a: i64) -> HittingTime {
        self.values
            .iter()
            .position(|v| v.abs() == a)
            .map_or(HittingTime::Never, HittingTime::At)
    }

    /// Exit reflection `Ψ^a`: flip every increment strictly after `σ_a`.
    pub fn exit_reflect(&self, a: i64) -> Result<SkipFreePath> {
        if a < 0 {
            return Err(Error::NegativeExitLevel(a));
        }
        Ok(match self.exit_time(a) {
            HittingTime::Never => self.clone(),
            HittingTime::At(t) => {
                let pivot = self.values[t];
                let mut values = self.values.clone();
                for v in &mut values[t + 1..] {
                    *v = 2 * pivot - *v;
                }
                SkipFreePath { values }
            }
        })
    }

    pub fn quadratic_variation(&self) -> QuadraticVariation {
        let mut qv = Vec::with_capacity(self.values.len());
        let mut acc = 0u32;
        qv.push(0);
        for w in self.values.windows(2) {
            acc += (w[1] - w[0]).unsigned_abs() as u32;
            qv.push(acc);
        }
        QuadraticVariation(qv)
    }

    /// Embedded walk `S^M = (M_{τ_n})`, observed at the successive unit
    /// increases of the quadratic variation.
    pub fn embedded_walk(&self) -> EmbeddedWalk {
        let mut times = alloc::vec![0usize];
        let mut bits = 0u64;
        let mut len = 0usize;
        for k in 1..=self.horizon() {
            match self.step(k) {
                Step::Flat => {}
                s => {
                    if s == Step::Up {
                        bits |= 1 << len;
                    }
                    len += 1;
                    times.push(k);
                }
            }
        }
        let settle = *times.last().unwrap();
        EmbeddedWalk {
            walk: WalkPath {
                len: len as u8,
                bits,
            },
            times,
            settle_time: settle,
            stagnates: settle < self.horizon(),
        }
    }

    /// Index `T` at which the quadratic variation reaches its final value.
    pub fn settle_time(&self) -> usize {
        let qv = self.quadratic_variation();
        let last = qv.last();
        qv.0.iter().position(|&q| q == last).unwrap()
    }

    /// Keeps the path before its settle time `T`
    /// and continues it from `M_T` with the increments of `aux`.
    pub fn paste_walk(&self, aux: &WalkPath) -> Result<SkipFreePath> {
        let t = self.settle_time();
        let needed = self.horizon() - t;
        if aux.horizon() < needed {
            return Err(Error::AuxiliaryTooShort {
                needed,
                available: aux.horizon(),
            });
        }
        let base = self.values[t];
        let mut values = self.values[..=t].to_vec();
        for j in 1..=needed {
            values.push(base + aux.value(j));
        }
        Ok(SkipFreePath { values })
    }

    /// Increment string such as `"++-0+"`.
    pub fn increments(&self) -> String {
        self.steps().map(Step::symbol).collect()
    }

    /// `"m:increments"`.
    pub fn to_compact(&self) -> String {
        alloc::format!("{}:{}", self.horizon(), self.increments())
    }

    /// Converts to a walk when no step is flat.
    pub fn to_walk(&self) -> Option<WalkPath> {
        if self.horizon() > MAX_WALK_LEN {
            return None;
        }
        let mut bits = 0u64;
        for (i, s) in self.steps().enumerate() {
            match s {
                Step::Flat => return None,
                Step::Up => bits |= 1 << i,
                Step::Down => {}
            }
        }
        Some(WalkPath {
            len: self.horizon() as u8,
            bits,
        })
    }
}

impl PathLike for SkipFreePath {
    fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    fn value(&self, k: usize) -> i64 {
        self.values[k]
    }

    fn values(&self) -> Vec<i64> {
        self.values.clone()
    }
}

impl fmt::Display for SkipFreePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.increments())
    }
}

/// Parses `"++-0+"` or the compact `"5:++-0+"` form.
impl FromStr for SkipFreePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (declared, body) = match s.split_once(':') {
            Some((h, body)) => {
                let h = h
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::MalformedPath("bad horizon prefix"))?;
                (Some(h), body.trim())
            }
            None => (None, s),
        };
        let steps = body
            .chars()
            .map(|c| Step::from_symbol(c).ok_or(Error::MalformedPath("unknown increment symbol")))
            .collect::<Result<Vec<_>>>()?;
        if let Some(h) = declared {
            if h != steps.len() {
                return Err(Error::MalformedPath(
                    "horizon prefix does not match increments",
                ));
            }
        }
        Ok(SkipFreePath::from_steps(steps))
    }
}

impl From<WalkPath> for SkipFreePath {
    fn from(w: WalkPath) -> Self {
        SkipFreePath { values: w.values() }
    }
}

// ---------------------------------------------------------------------------
// QuadraticVariation

/// `([M]_0, …, [M]_m)`: starts at zero, increases by 0 or 1 per step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadraticVariation(Vec<u32>);

impl QuadraticVariation {
    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn last(&self) -> u32 {
        *self.0.last().unwrap()
    }

    pub fn horizon(&self) -> usize {
        self.0.len() - 1
    }

    /// `true` when every step adds one unit.
    pub fn is_full(&self) -> bool {
        self.last() as usize == self.horizon()
    }
}

// ---------------------------------------------------------------------------
// EmbeddedWalk

/// Result of [`SkipFreePath::embedded_walk`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddedWalk {
    /// `(M_{τ_0}, …, M_{τ_K})` with `K = [M]_m`.
    pub walk: WalkPath,
    /// `τ_0 = 0, τ_1, …, τ_K`.
    pub times: Vec<usize>,
    /// First index achieving the final quadratic variation.
    pub settle_time: usize,
    /// The path is flat from `settle_time` to the horizon and does not end on a move.
    pub stagnates: bool,
}

// ---------------------------------------------------------------------------
// WalkPath

/// Path with increments in `{-1, +1}` only, an element of `Λ^m`.
///
/// Bit `i` of `bits` is set when step `i + 1` goes up. Bits above `len` are
/// always clear, so equality and hashing on the struct are canonical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WalkPath {
    len: u8,
    bits: u64,
}

impl WalkPath {
    pub fn from_bits(len: usize, bits: u64) -> Result<Self> {
        if len > MAX_WALK_LEN {
            return Err(Error::WalkTooLong(len));
        }
        if len < 64 && bits >> len != 0 {
            return Err(Error::MalformedPath("bits set beyond walk length"));
        }
        Ok(WalkPath {
            len: len as u8,
            bits,
        })
    }

    pub fn from_values(values: &[i64]) -> Result<Self> {
        let p = SkipFreePath::from_values(values.to_vec())?;
        p.to_walk()
            .ok_or(Error::MalformedPath("walk increments must be +1 or -1"))
    }

    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        if signs.len() > MAX_WALK_LEN {
            return Err(Error::WalkTooLong(signs.len()));
        }
        let mut bits = 0;
        for (i, &s) in signs.iter().enumerate() {
            match s {
                1 => bits |= 1 << i,
                -1 => {}
                _ => return Err(Error::MalformedPath("walk increments must be +1 or -1")),
            }
        }
        Ok(WalkPath {
            len: signs.len() as u8,
            bits,
        })
    }

    pub fn empty() -> Self {
        WalkPath { len: 0, bits: 0 }
    }

    /// The alternating path `(0, 1, 0, 1, …)` of length `m`.
    pub fn alternating(m: usize) -> Self {
        let mut bits = 0;
        for i in (0..m).step_by(2) {
            bits |= 1 << i;
        }
        WalkPath { len: m as u8, bits }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sign of step `k` (1-based).
    pub fn step(&self, k: usize) -> i64 {
        if self.bits >> (k - 1) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn last(&self) -> i64 {
        self.value(self.len())
    }

    fn tail_mask(&self, t: usize) -> u64 {
        let full = if self.len == 64 {
            u64::MAX
        } else {
            (1u64 << self.len) - 1
        };
        if t >= 64 {
            0
        } else {
            full & !((1u64 << t) - 1)
        }
    }

    /// Reflection `Θ^a`: flips every step after the first passage at `level`.
    pub fn reflect(&self, level: i64) -> WalkPath {
        match self.first_passage(level) {
            HittingTime::Never => *self,
            HittingTime::At(t) => WalkPath {
                len: self.len,
                bits: self.bits ^ self.tail_mask(t),
            },
        }
    }

    /// `true` when [`reflect`](Self::reflect) changes the path, i.e. `T_a ≤ m - 1`.
    pub fn reflection_is_effective(&self, level: i64) -> bool {
        self.len > 0 && self.first_passage(level).at_most(self.len() - 1)
    }

    pub fn truncate(&self, j: usize) -> WalkPath {
        let j = j.min(self.len());
        let bits = if j >= 64 {
            self.bits
        } else {
            self.bits & ((1u64 << j) - 1)
        };
        WalkPath { len: j as u8, bits }
    }

    /// Appends one step (`true` = up).
    pub fn push(&self, up: bool) -> Result<WalkPath> {
        if self.len() >= MAX_WALK_LEN {
            return Err(Error::WalkTooLong(self.len() + 1));
        }
        let bits = if up {
            self.bits | 1 << self.len
        } else {
            self.bits
        };
        Ok(WalkPath {
            len: self.len + 1,
            bits,
        })
    }

    /// Every element of `Λ^m` in bit order.
    pub fn all(m: usize) -> impl Iterator<Item = WalkPath> {
        assert!(m < 64, "enumeration of Λ^m needs m < 64");
        (0..1u64 << m).map(move |bits| WalkPath { len: m as u8, bits })
    }

    pub fn increments(&self) -> String {
        (1..=self.len())
            .map(|k| if self.step(k) == 1 { '+' } else { '-' })
            .collect()
    }

    pub fn to_skip_free(&self) -> SkipFreePath {
        SkipFreePath::from(*self)
    }
}

impl PathLike for WalkPath {
    fn horizon(&self) -> usize {
        self.len()
    }

    fn value(&self, k: usize) -> i64 {
        if k == 0 {
            return 0;
        }
        let mask = if k >= 64 { u64::MAX } else { (1u64 << k) - 1 };
        let ups = (self.bits & mask).count_ones() as i64;
        2 * ups - k as i64
    }

    fn first_passage(&self, level: i64) -> HittingTime {
        let mut cur = 0i64;
        if level == 0 {
            return HittingTime::At(0);
        }
        for k in 1..=self.len() {
            cur += self.step(k);
            if cur == level {
                return HittingTime::At(k);
            }
        }
        HittingTime::Never
    }
}

/// Lexicographic order on values, consistent with [`SkipFreePath`].
impl Ord for WalkPath {
    fn cmp(&self, other: &Self) -> Ordering {
        // first differing step decides; a down step gives the smaller value
        let common = self.len.min(other.len) as usize;
        for k in 1..=common {
            let (a, b) = (self.step(k), other.step(k));
            if a != b {
                return a.cmp(&b);
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for WalkPath {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for WalkPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.increments())
    }
}

impl FromStr for WalkPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let p: SkipFreePath = s.parse()?;
        if p.horizon() > MAX_WALK_LEN {
            return Err(Error::WalkTooLong(p.horizon()));
        }
        p.to_walk()
            .ok_or(Error::MalformedPath("walk increments must be +1 or -1"))
    }
}

// ---------------------------------------------------------------------------
// LatticePath

/// Pure-jump path on the lattice `ηℤ`: jumps of size `±η` at strictly
/// increasing times, constant in between, right-continuous.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePath {
    mesh: f64,
    jump_times: Vec<f64>,
    jump_signs: Vec<i8>,
    horizon: f64,
}

impl LatticePath {
    pub fn new(mesh: f64, jump_times: Vec<f64>, jump_signs: Vec<i8>, horizon: f64) -> Result<Self> {
        if !(mesh > 0.0) || !mesh.is_finite() {
            return Err(Error::NonPositiveMesh);
        }
        if jump_times.len() != jump_signs.len() {
            return Err(Error::LengthMismatch {
                left: jump_times.len(),
                right: jump_signs.len(),
            });
        }
        if jump_times.iter().any(|t| !(*t >= 0.0)) || jump_times.windows(2).any(|w| !(w[0] < w[1]))
        {
            return Err(Error::NonMonotoneTimes);
        }
        if jump_signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::MalformedPath("lattice jumps must be +1 or -1"));
        }
        if jump_times.last().is_some_and(|&t| t > horizon) {
            return Err(Error::BeyondHorizon {
                time: *jump_times.last().unwrap(),
                horizon,
            });
        }
        Ok(LatticePath {
            mesh,
            jump_times,
            jump_signs,
            horizon,
        })
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn jump_signs(&self) -> &[i8] {
        &self.jump_signs
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of jumps at or before `t`.
    pub fn jumps_until(&self, t: f64) -> usize {
        self.jump_times.partition_point(|&s| s <= t)
    }

    /// `M_t = η Σ_k sign_k 1{τ_k ≤ t}`.
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.jumps_until(t);
        self.mesh * self.jump_signs[..n].iter().map(|&s| s as i64).sum::<i64>() as f64
    }

    /// `[M]_t = η² #{k : τ_k ≤ t}`.
    pub fn quadratic_variation_at(&self, t: f64) -> f64 {
        self.mesh * self.mesh * self.jumps_until(t) as f64
    }

    /// Integer walk `(S_0, …, S_K)` in units of the mesh.
    pub fn walk_units(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.jump_signs.len() + 1);
        let mut cur = 0i64;
        out.push(0);
        for &s in &self.jump_signs {
            cur += s as i64;
            out.push(cur);
        }
        out
    }

    /// Reflection at the lattice level `k·η`, in units of the mesh.
    pub fn reflect_units(&self, k: i64) -> LatticePath {
        let walk = self.walk_units();
        match walk.iter().position(|&v| v == k) {
            None => self.clone(),
            Some(t) => {
                let mut signs = self.jump_signs.clone();
                for s in &mut signs[t..] {
                    *s = -*s;
                }
                LatticePath {
                    jump_signs: signs,
                    ..self.clone()
                }
            }
        }
    }

    /// Embedded walk `S^M_k = M_{τ_k}` together with the jump times.
    pub fn embedded_walk(&self) -> LatticeEmbedding {
        LatticeEmbedding {
            mesh: self.mesh,
            units: self.walk_units(),
            jump_times: self.jump_times.clone(),
        }
    }
}

/// Result of [`LatticePath::embedded_walk`]: `S^M` scaled by the mesh plus the
/// time-change record `τ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeEmbedding {
    pub mesh: f64,
    /// `S^M / η`, an integer walk.
    pub units: Vec<i64>,
    pub jump_times: Vec<f64>,
}

impl LatticeEmbedding {
    pub fn len(&self) -> usize {
        self.units.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.units.len() == 1
    }

    /// `S^M_k` on the lattice `ηℤ`.
    pub fn value(&self, k: usize) -> f64 {
        self.mesh * self.units[k] as f64
    }

    /// `S^M_{η^{-2} [M]_t}` for a given quadratic variation value.
    pub fn reconstruct(&self, qv: f64) -> f64 {
        let k = libm::round(qv / (self.mesh * self.mesh)) as usize;
        self.value(k.min(self.len()))
    }

    pub fn walk(&self) -> Option<WalkPath> {
        WalkPath::from_values(&self.units).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn sf(v: &[i64]) -> SkipFreePath {
        SkipFreePath::from_values(v.to_vec()).unwrap()
    }

    fn w(v: &[i64]) -> WalkPath {
        WalkPath::from_values(v).unwrap()
    }

    #[test]
    fn first_passage_examples() {
        assert_eq!(sf(&[0, 1, 2, 3]).first_passage(2), HittingTime::At(2));
        assert_eq!(sf(&[0, -1, 0, -1]).first_passage(1), HittingTime::Never);
        assert_eq!(sf(&[0, 1, 0, 1]).first_passage(0), HittingTime::At(0));
        assert_eq!(w(&[0, 1, 2, 3]).first_passage(2), HittingTime::At(2));
        assert_eq!(w(&[0, -1, 0, -1]).first_passage(1), HittingTime::Never);
    }

    #[test]
    fn never_is_greater_than_every_index() {
        assert!(HittingTime::Never > HittingTime::At(usize::MAX));
        assert!(!HittingTime::Never.at_most(1000));
    }

    #[test]
    fn reflect_examples() {
        assert_eq!(sf(&[0, 1, 2, 3]).reflect(2), sf(&[0, 1, 2, 1]));
        assert_eq!(sf(&[0, -1, -2, -3]).reflect(1), sf(&[0, -1, -2, -3]));
        let once = sf(&[0, 1, 0, -1]).reflect(0);
        assert_eq!(once, sf(&[0, -1, 0, 1]));
        assert_eq!(once.reflect(0), sf(&[0, 1, 0, -1]));

        assert_eq!(w(&[0, 1, 2, 3]).reflect(2), w(&[0, 1, 2, 1]));
        assert_eq!(w(&[0, 1, 0, -1]).reflect(0), w(&[0, -1, 0, 1]));
    }

    #[test]
    fn exit_reflect_examples() {
        assert_eq!(
            sf(&[0, -1, 0, 1]).exit_reflect(1).unwrap(),
            sf(&[0, -1, -2, -3])
        );
        assert_eq!(
            sf(&[0, 1, 2, 3]).exit_reflect(2).unwrap(),
            sf(&[0, 1, 2, 3]).reflect(2)
        );
        assert_eq!(sf(&[0, 0, 0]).exit_reflect(1).unwrap(), sf(&[0, 0, 0]));
        assert!(sf(&[0, 1]).exit_reflect(-1).is_err());
    }

    #[test]
    fn quadratic_variation_examples() {
        assert_eq!(
            sf(&[0, 1, 2, 1]).quadratic_variation().as_slice(),
            &[0, 1, 2, 3]
        );
        assert_eq!(
            sf(&[0, 0, 1, 1]).quadratic_variation().as_slice(),
            &[0, 0, 1, 1]
        );
        let p = sf(&[0, 1, 0, -1]);
        assert_eq!(p.reflect(1).quadratic_variation(), p.quadratic_variation());
        assert_eq!(p.quadratic_variation().as_slice(), &[0, 1, 2, 3]);
    }

    #[test]
    fn embedded_walk_examples() {
        let e = sf(&[0, 0, 1, 1, 2]).embedded_walk();
        assert_eq!(e.walk, w(&[0, 1, 2]));
        assert_eq!(e.times, vec![0, 2, 4]);
        assert!(!e.stagnates);
        assert_eq!(sf(&[0, 1, 2, 3]).embedded_walk().walk, w(&[0, 1, 2, 3]));

        let p = sf(&[0, 0, 1, 0]);
        let lhs = p.reflect(1).embedded_walk().walk;
        let rhs = p.embedded_walk().walk.reflect(1);
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, w(&[0, 1, 2]));

        let stalled = sf(&[0, 1, 1, 1]).embedded_walk();
        assert!(stalled.stagnates);
        assert_eq!(stalled.settle_time, 1);
    }

    #[test]
    fn paste_walk_examples() {
        let aux = w(&[0, -1, 0]);
        let p = sf(&[0, 1, 1, 1]);
        let x = p.paste_walk(&aux).unwrap();
        assert_eq!(x, sf(&[0, 1, 0, 1]));
        assert_eq!(
            x.embedded_walk()
                .walk
                .truncate(p.quadratic_variation().last() as usize),
            p.embedded_walk().walk
        );

        let q = sf(&[0, 1, 0, -1]);
        assert_eq!(q.paste_walk(&WalkPath::empty()).unwrap(), q);
    }

    #[test]
    fn paste_walk_rejects_short_aux() {
        let p = sf(&[0, 1, 1, 1, 1]);
        let err = p.paste_walk(&w(&[0, 1])).unwrap_err();
        assert_eq!(
            err,
            Error::AuxiliaryTooShort {
                needed: 3,
                available: 1
            }
        );
    }

    #[test]
    fn lattice_embedded_walk_examples() {
        let l = LatticePath::new(1.0, vec![0.5, 1.2], vec![1, -1], 2.0).unwrap();
        assert_eq!(l.embedded_walk().walk().unwrap(), w(&[0, 1, 0]));

        let l = LatticePath::new(0.25, vec![1.0, 2.0, 3.0], vec![1, 1, 1], 4.0).unwrap();
        let qv = l.quadratic_variation_at(2.5);
        assert_eq!(qv, 2.0 * 0.25 * 0.25);
        let e = l.embedded_walk();
        assert_eq!(e.value(2), 0.5);
        assert_eq!(e.reconstruct(qv), l.value_at(2.5));

        let l = LatticePath::new(1.0, vec![], vec![], 1.0).unwrap();
        assert_eq!(l.embedded_walk().units, vec![0]);
        assert_eq!(l.value_at(0.7), 0.0);
    }

    #[test]
    fn lattice_reconstruction_at_all_grid_times() {
        let l = LatticePath::new(0.5, vec![0.1, 0.3, 0.35, 0.9], vec![1, -1, -1, 1], 1.0).unwrap();
        let e = l.embedded_walk();
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            assert_eq!(e.reconstruct(l.quadratic_variation_at(t)), l.value_at(t));
        }
    }

    #[test]
    fn text_round_trip() {
        let p: SkipFreePath = "++-0+".parse().unwrap();
        assert_eq!(p.as_slice(), &[0, 1, 2, 1, 1, 2]);
        assert_eq!(p.to_string(), "++-0+");
        assert_eq!(p.to_compact().parse::<SkipFreePath>().unwrap(), p);
        assert!("4:++-".parse::<SkipFreePath>().is_err());
        assert!("+x".parse::<SkipFreePath>().is_err());
        assert_eq!("+\u{2212}".parse::<WalkPath>().unwrap(), w(&[0, 1, 0]));
        assert!("+0".parse::<WalkPath>().is_err());
    }

    #[test]
    fn malformed_values_rejected() {
        assert!(SkipFreePath::from_values(vec![1, 2]).is_err());
        assert!(SkipFreePath::from_values(vec![0, 2]).is_err());
        assert!(SkipFreePath::from_values(vec![]).is_err());
        assert!(WalkPath::from_values(&[0, 0]).is_err());
    }

    #[test]
    fn alternating_target() {
        assert_eq!(WalkPath::alternating(3).values(), vec![0, 1, 0, 1]);
        assert_eq!(WalkPath::alternating(4).values(), vec![0, 1, 0, 1, 0]);
    }

    #[test]
    fn walk_order_matches_value_order() {
        let all: Vec<_> = WalkPath::all(4).collect();
        for a in &all {
            for b in &all {
                assert_eq!(a.cmp(b), a.values().cmp(&b.values()));
            }
        }
    }
}
