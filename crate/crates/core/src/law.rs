//! Exact finite-horizon laws of skip-free processes.
//!
//! Masses are arbitrary-precision rationals and every comparison is exact.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::counterexamples;
use crate::error::{Error, Result};
use crate::path::{PathLike, QuadraticVariation, SkipFreePath, WalkPath};
use crate::solver::SOLVER_LEVELS;

pub type Mass = BigRational;

/// Default cap on the horizon accepted by [`enumerate_law`].
pub const DEFAULT_LAW_CAP: usize = 16;

/// `1 / 2^k`.
pub fn dyadic(k: usize) -> Mass {
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

/// Finitely supported probability law on paths of one horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathLaw {
    horizon: usize,
    support: BTreeMap<SkipFreePath, Mass>,
}

impl PathLaw {
    /// Builds a law, merging repeated paths. Every mass must be positive and
    /// the total must be exactly one.
    pub fn from_masses<I>(horizon: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (SkipFreePath, Mass)>,
    {
        let mut support: BTreeMap<SkipFreePath, Mass> = BTreeMap::new();
        for (p, q) in entries {
            if p.horizon() != horizon {
                return Err(Error::HorizonMismatch {
                    left: horizon,
                    right: p.horizon(),
                });
            }
            if !q.is_positive() {
                return Err(Error::NonPositiveMass);
            }
            *support.entry(p).or_insert_with(Mass::zero) += q;
        }
        let law = PathLaw { horizon, support };
        let total = law.total_mass();
        if !total.is_one() {
            return Err(Error::MassNotOne(total.to_string()));
        }
        Ok(law)
    }

    /// Aggregates without validation; zero masses are dropped.
    fn collect<I>(horizon: usize, entries: I) -> Self
    where
        I: IntoIterator<Item = (SkipFreePath, Mass)>,
    {
        let mut support: BTreeMap<SkipFreePath, Mass> = BTreeMap::new();
        for (p, q) in entries {
            *support.entry(p).or_insert_with(Mass::zero) += q;
        }
        support.retain(|_, q| !q.is_zero());
        PathLaw { horizon, support }
    }

    /// Unit mass on one path.
    pub fn point(path: SkipFreePath) -> Self {
        let horizon = path.horizon();
        let mut support = BTreeMap::new();
        support.insert(path, Mass::one());
        PathLaw { horizon, support }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SkipFreePath, &Mass)> {
        self.support.iter()
    }

    pub fn mass(&self, path: &SkipFreePath) -> Mass {
        self.support.get(path).cloned().unwrap_or_else(Mass::zero)
    }

    pub fn total_mass(&self) -> Mass {
        self.support.values().fold(Mass::zero(), |acc, q| acc + q)
    }

    /// Image law under a path map of the same horizon.
    pub fn map<F: Fn(&SkipFreePath) -> SkipFreePath>(&self, f: F) -> PathLaw {
        PathLaw::collect(
            self.horizon,
            self.support.iter().map(|(p, q)| (f(p), q.clone())),
        )
    }

    /// Marginal law of the prefix up to `depth`.
    pub fn truncate(&self, depth: usize) -> PathLaw {
        let depth = depth.min(self.horizon);
        PathLaw::collect(
            depth,
            self.support
                .iter()
                .map(|(p, q)| (p.truncate(depth), q.clone())),
        )
    }

    /// Law of the quadratic-variation trajectory.
    pub fn qv_marginal(&self) -> BTreeMap<QuadraticVariation, Mass> {
        let mut out: BTreeMap<QuadraticVariation, Mass> = BTreeMap::new();
        for (p, q) in &self.support {
            *out.entry(p.quadratic_variation())
                .or_insert_with(Mass::zero) += q;
        }
        out
    }

    /// Mass carried by paths that stop moving before the horizon.
    pub fn stagnating_mass(&self) -> Mass {
        self.support
            .iter()
            .filter(|(p, _)| p.settle_time() < self.horizon)
            .fold(Mass::zero(), |acc, (_, q)| acc + q)
    }
}

// ---------------------------------------------------------------------------
// Process specifications

/// Generator of an exact path law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcessSpec {
    /// Symmetric Bernoulli walk.
    BernoulliWalk,
    /// `M_k = S_{A_k}` with `S` a fair walk and `A` an independent clock
    /// given by its exact law. Clock paths are nondecreasing with unit steps.
    TimeChangedWalk { clock: Vec<(SkipFreePath, Mass)> },
    /// First counterexample: step three repeats step two.
    Ce1,
    /// Second counterexample: signs constant on dyadic blocks.
    Ce2,
    /// The constant zero process.
    Zero,
    /// An explicit table, restricted to the requested horizon.
    Table(PathLaw),
}

impl ProcessSpec {
    /// Exact law of the clock on `m` steps whose increments are i.i.d.
    /// Bernoulli(`p`).
    pub fn lazy_clock(m: usize, p: &Mass) -> Vec<(SkipFreePath, Mass)> {
        let q = Mass::one() - p;
        (0..1u64 << m)
            .map(|bits| {
                let mut values = alloc::vec![0i64];
                let mut mass = Mass::one();
                for i in 0..m {
                    let up = bits >> i & 1 == 1;
                    values.push(values[i] + up as i64);
                    mass *= if up { p.clone() } else { q.clone() };
                }
                (SkipFreePath::from_values(values).unwrap(), mass)
            })
            .filter(|(_, q)| !q.is_zero())
            .collect()
    }
}

pub fn enumerate_law(spec: &ProcessSpec, m: usize) -> Result<PathLaw> {
    enumerate_law_with_cap(spec, m, DEFAULT_LAW_CAP)
}

pub fn enumerate_law_with_cap(spec: &ProcessSpec, m: usize, cap: usize) -> Result<PathLaw> {
    if m > cap {
        return Err(Error::CapExceeded { requested: m, cap });
    }
    match spec {
        ProcessSpec::BernoulliWalk => Ok(bernoulli_law(m)),
        ProcessSpec::TimeChangedWalk { clock } => time_changed_law(clock, m),
        ProcessSpec::Ce1 => counterexamples::ce1_law(m),
        ProcessSpec::Ce2 => counterexamples::ce2_law(m),
        ProcessSpec::Zero => Ok(PathLaw::point(SkipFreePath::zero(m))),
        ProcessSpec::Table(law) => {
            if m > law.horizon() {
                return Err(Error::HorizonMismatch {
                    left: law.horizon(),
                    right: m,
                });
            }
            let total = law.total_mass();
            if !total.is_one() {
                return Err(Error::MassNotOne(total.to_string()));
            }
            Ok(law.truncate(m))
        }
    }
}

fn bernoulli_law(m: usize) -> PathLaw {
    let q = dyadic(m);
    PathLaw::collect(m, WalkPath::all(m).map(|w| (w.to_skip_free(), q.clone())))
}

fn time_changed_law(clock: &[(SkipFreePath, Mass)], m: usize) -> Result<PathLaw> {
    let mut total = Mass::zero();
    let mut entries = Vec::new();
    for (a, pa) in clock {
        if a.horizon() < m
            || a.as_slice()
                .windows(2)
                .any(|w| !(w[1] == w[0] || w[1] == w[0] + 1))
        {
            return Err(Error::BadClock);
        }
        if !pa.is_positive() {
            return Err(Error::NonPositiveMass);
        }
        total += pa;
        let a = a.truncate(m);
        let k = a.last() as usize;
        let q = pa * dyadic(k);
        for w in WalkPath::all(k) {
            let values = a
                .as_slice()
                .iter()
                .map(|&ak| w.value(ak as usize))
                .collect();
            entries.push((SkipFreePath::from_values(values)?, q.clone()));
        }
    }
    if !total.is_one() {
        return Err(Error::MassNotOne(total.to_string()));
    }
    Ok(PathLaw::collect(m, entries))
}

// ---------------------------------------------------------------------------
// Reflection pushforward and comparison

/// Image law under `Θ^a`.
pub fn pushforward_reflect(law: &PathLaw, level: i64) -> PathLaw {
    law.map(|p| p.reflect(level))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discrepancy {
    pub path: SkipFreePath,
    pub left: Mass,
    pub right: Mass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawComparison {
    pub equal: bool,
    /// First path, in canonical order, where the masses differ.
    pub witness: Option<Discrepancy>,
}

/// Every path where the two laws disagree, in canonical order.
pub fn discrepancies(l1: &PathLaw, l2: &PathLaw) -> Result<Vec<Discrepancy>> {
    if l1.horizon != l2.horizon {
        return Err(Error::HorizonMismatch {
            left: l1.horizon,
            right: l2.horizon,
        });
    }
    let mut keys: Vec<&SkipFreePath> = l1.support.keys().chain(l2.support.keys()).collect();
    keys.sort();
    keys.dedup();
    Ok(keys
        .into_iter()
        .filter_map(|p| {
            let (a, b) = (l1.mass(p), l2.mass(p));
            (a != b).then(|| Discrepancy {
                path: p.clone(),
                left: a,
                right: b,
            })
        })
        .collect())
}

pub fn laws_equal(l1: &PathLaw, l2: &PathLaw) -> Result<LawComparison> {
    if l1.horizon != l2.horizon {
        return Err(Error::HorizonMismatch {
            left: l1.horizon,
            right: l2.horizon,
        });
    }
    let witness = discrepancies(l1, l2)?.into_iter().next();
    Ok(LawComparison {
        equal: witness.is_none(),
        witness,
    })
}

/// Outcome of comparing a law with its image under one reflection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelCheck {
    pub level: i64,
    pub invariant: bool,
    /// First discrepancy in canonical order; `left` is the original mass.
    pub witness: Option<Discrepancy>,
    pub discrepancies: Vec<Discrepancy>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvarianceReport {
    pub horizon: usize,
    pub checks: Vec<LevelCheck>,
}

impl InvarianceReport {
    pub fn check(&self, level: i64) -> Option<&LevelCheck> {
        self.checks.iter().find(|c| c.level == level)
    }

    pub fn all_invariant(&self) -> bool {
        self.checks.iter().all(|c| c.invariant)
    }
}

pub fn invariance_report(law: &PathLaw, levels: &[i64]) -> Result<InvarianceReport> {
    let checks = levels
        .iter()
        .map(|&level| {
            let discrepancies = discrepancies(law, &pushforward_reflect(law, level))?;
            Ok(LevelCheck {
                level,
                invariant: discrepancies.is_empty(),
                witness: discrepancies.first().cloned(),
                discrepancies,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InvarianceReport {
        horizon: law.horizon(),
        checks,
    })
}

// ---------------------------------------------------------------------------
// Conditional laws of the embedded walk

/// One class of paths sharing a quadratic-variation trajectory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QvClass {
    pub mass: Mass,
    /// Length `K = [M]_m` of the embedded walk in this class.
    pub walk_len: usize,
    /// Conditional law of the embedded walk given the class.
    pub conditional: BTreeMap<WalkPath, Mass>,
}

impl QvClass {
    pub fn conditional_mass(&self, w: &WalkPath) -> Mass {
        self.conditional.get(w).cloned().unwrap_or_else(Mass::zero)
    }

    /// Uniform over all of `Λ^K`.
    pub fn is_uniform(&self) -> bool {
        let expected = dyadic(self.walk_len);
        self.conditional.len() as u128 == 1u128 << self.walk_len
            && self.conditional.values().all(|q| *q == expected)
    }

    /// Conditional law of the first `k` steps.
    pub fn prefix_law(&self, k: usize) -> BTreeMap<WalkPath, Mass> {
        let mut out: BTreeMap<WalkPath, Mass> = BTreeMap::new();
        for (w, q) in &self.conditional {
            *out.entry(w.truncate(k)).or_insert_with(Mass::zero) += q;
        }
        out
    }
}

pub fn conditional_embedded_law(law: &PathLaw) -> BTreeMap<QuadraticVariation, QvClass> {
    let mut classes: BTreeMap<QuadraticVariation, (Mass, BTreeMap<WalkPath, Mass>)> =
        BTreeMap::new();
    for (p, q) in &law.support {
        let entry = classes
            .entry(p.quadratic_variation())
            .or_insert_with(|| (Mass::zero(), BTreeMap::new()));
        entry.0 += q;
        *entry
            .1
            .entry(p.embedded_walk().walk)
            .or_insert_with(Mass::zero) += q;
    }
    classes
        .into_iter()
        .map(|(qv, (mass, joint))| {
            let walk_len = qv.last() as usize;
            let conditional = joint.into_iter().map(|(w, q)| (w, q / &mass)).collect();
            (
                qv,
                QvClass {
                    mass,
                    walk_len,
                    conditional,
                },
            )
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Ocone check

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    /// Censored classes are compared on their common prefixes.
    Direct,
    /// Stagnating paths are first extended by an independent fair walk.
    Pasted,
}

/// Two classes whose embedded walks disagree on a common prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductWitness {
    pub reference: QuadraticVariation,
    pub class: QuadraticVariation,
    pub prefix: WalkPath,
    pub reference_mass: Mass,
    pub class_mass: Mass,
}

/// A walk whose conditional mass breaks uniformity in its class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformityWitness {
    pub class: QuadraticVariation,
    pub path: WalkPath,
    pub mass: Mass,
    /// Reflection level exposing the asymmetry, when one exists.
    pub level: Option<i64>,
    pub image: Option<WalkPath>,
    pub image_mass: Option<Mass>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OconeReport {
    pub mode: CheckMode,
    pub is_product: bool,
    pub embedded_uniform: bool,
    pub stagnating_mass: Mass,
    /// Classes whose embedded walk is shorter than the horizon.
    pub censored_classes: usize,
    pub product_witness: Option<ProductWitness>,
    pub uniformity_witness: Option<UniformityWitness>,
}

impl OconeReport {
    pub fn is_ocone(&self) -> bool {
        self.is_product && self.embedded_uniform
    }

    /// The most informative single path: the uniformity witness if any,
    /// otherwise the product witness prefix.
    pub fn witness(&self) -> Option<WalkPath> {
        self.uniformity_witness
            .as_ref()
            .map(|w| w.path)
            .or_else(|| self.product_witness.as_ref().map(|w| w.prefix))
    }
}

pub fn ocone_check(law: &PathLaw) -> OconeReport {
    check_classes(law, CheckMode::Direct)
}

/// Extends stagnating paths with an independent fair walk, then checks.
pub fn ocone_check_pasted(law: &PathLaw) -> OconeReport {
    check_classes(&paste_law(law), CheckMode::Pasted)
}

fn check_classes(law: &PathLaw, mode: CheckMode) -> OconeReport {
    let classes = conditional_embedded_law(law);
    let m = law.horizon();

    let mut product_witness = None;
    if let Some((ref_qv, reference)) = classes
        .iter()
        .max_by_key(|(qv, c)| (c.walk_len, core::cmp::Reverse(*qv)))
    {
        'outer: for (qv, class) in &classes {
            let k = class.walk_len;
            let lhs = reference.prefix_law(k);
            let rhs = class.prefix_law(k);
            for w in WalkPath::all(k) {
                let a = lhs.get(&w).cloned().unwrap_or_else(Mass::zero);
                let b = rhs.get(&w).cloned().unwrap_or_else(Mass::zero);
                if a != b {
                    product_witness = Some(ProductWitness {
                        reference: ref_qv.clone(),
                        class: qv.clone(),
                        prefix: w,
                        reference_mass: a,
                        class_mass: b,
                    });
                    break 'outer;
                }
            }
        }
    }

    let uniformity_witness = classes
        .iter()
        .find(|(_, c)| !c.is_uniform())
        .map(|(qv, c)| uniformity_witness(qv, c));

    OconeReport {
        mode,
        is_product: product_witness.is_none(),
        embedded_uniform: uniformity_witness.is_none(),
        stagnating_mass: law.stagnating_mass(),
        censored_classes: classes.values().filter(|c| c.walk_len < m).count(),
        product_witness,
        uniformity_witness,
    }
}

fn uniformity_witness(qv: &QuadraticVariation, class: &QvClass) -> UniformityWitness {
    for &a in &SOLVER_LEVELS {
        for u in WalkPath::all(class.walk_len) {
            let image = u.reflect(a);
            let (p, q) = (class.conditional_mass(&u), class.conditional_mass(&image));
            if p != q {
                return UniformityWitness {
                    class: qv.clone(),
                    path: u,
                    mass: p,
                    level: Some(a),
                    image: Some(image),
                    image_mass: Some(q),
                };
            }
        }
    }
    let expected = dyadic(class.walk_len);
    let u = WalkPath::all(class.walk_len)
        .find(|u| class.conditional_mass(u) != expected)
        .expect("non-uniform class has an off-uniform walk");
    UniformityWitness {
        class: qv.clone(),
        path: u,
        mass: class.conditional_mass(&u),
        level: None,
        image: None,
        image_mass: None,
    }
}

/// Law of the pasted process: every path that stops moving before the horizon
/// is continued from its settle time by an independent fair walk.
pub fn paste_law(law: &PathLaw) -> PathLaw {
    let m = law.horizon();
    let mut entries = Vec::new();
    for (p, q) in law.iter() {
        let rest = m - p.settle_time();
        let share = q * dyadic(rest);
        for aux in WalkPath::all(rest) {
            entries.push((
                p.paste_walk(&aux).expect("aux covers the tail"),
                share.clone(),
            ));
        }
    }
    PathLaw::collect(m, entries)
}

/// Law giving orbit `i` total weight `weights[i] / Σ weights`, spread
/// uniformly over its members. Such a law is invariant under every
/// reflection generating the orbits.
pub fn invariant_law(
    horizon: usize,
    orbits: &[Vec<SkipFreePath>],
    weights: &[Mass],
) -> Result<PathLaw> {
    if orbits.len() != weights.len() {
        return Err(Error::LengthMismatch {
            left: orbits.len(),
            right: weights.len(),
        });
    }
    if weights.iter().any(|w| w.is_negative()) {
        return Err(Error::NonPositiveMass);
    }
    let total = weights.iter().fold(Mass::zero(), |acc, w| acc + w);
    if !total.is_positive() {
        return Err(Error::NonPositiveMass);
    }
    let mut entries = Vec::new();
    for (orbit, w) in orbits.iter().zip(weights) {
        if w.is_zero() {
            continue;
        }
        let share = w / (&total * BigInt::from(orbit.len()));
        for p in orbit {
            entries.push((p.clone(), share.clone()));
        }
    }
    PathLaw::from_masses(horizon, entries)
}
