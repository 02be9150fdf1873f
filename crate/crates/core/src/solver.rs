//! Reflection words between walks.
//!
//! Any two walks of the same length are connected by a finite sequence of
//! reflections at levels 0, 1 and 2. [`Solver`] builds such a word
//! constructively, by induction on the length, routing every walk through the
//! alternating walk `(0, 1, 0, 1, …)`. [`OrbitGraph`] is the brute-force
//! counterpart: breadth-first search over the reflection graph of `Λ^m`.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::path::{SkipFreePath, Step, WalkPath};

/// Levels used by the constructive solver.
pub const SOLVER_LEVELS: [i64; 3] = [0, 1, 2];

/// Default cap on the walk length accepted by [`OrbitGraph::build`].
pub const DEFAULT_ORBIT_CAP: usize = 12;

/// Sequence of reflection levels `a_1, …, a_k`, applied left to right:
/// the image of `s` is `Θ^{a_k} ∘ … ∘ Θ^{a_1}(s)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ReflectionWord(pub Vec<i64>);

impl ReflectionWord {
    pub fn new(levels: Vec<i64>) -> Self {
        ReflectionWord(levels)
    }

    pub fn empty() -> Self {
        ReflectionWord(Vec::new())
    }

    pub fn levels(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The word applying the same reflections in the opposite order. Since
    /// every reflection is an involution this is the inverse map.
    pub fn reversed(&self) -> ReflectionWord {
        ReflectionWord(self.0.iter().rev().copied().collect())
    }

    pub fn concat(&self, other: &ReflectionWord) -> ReflectionWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        ReflectionWord(v)
    }

    /// Cancels adjacent repeated letters (`Θ^a Θ^a = id`) until none remain.
    pub fn reduced(&self) -> ReflectionWord {
        let mut out: Vec<i64> = Vec::with_capacity(self.0.len());
        for &a in &self.0 {
            if out.last() == Some(&a) {
                out.pop();
            } else {
                out.push(a);
            }
        }
        ReflectionWord(out)
    }

    /// Applies the word to `s`.
    pub fn apply(&self, s: &WalkPath) -> WalkPath {
        self.0.iter().fold(*s, |cur, &a| cur.reflect(a))
    }

    pub fn apply_skip_free(&self, p: &SkipFreePath) -> SkipFreePath {
        self.0.iter().fold(p.clone(), |cur, &a| cur.reflect(a))
    }

    /// Position of the first letter that leaves the current path unchanged,
    /// or `None` when every application is effective.
    pub fn first_ineffective(&self, s: &WalkPath) -> Option<usize> {
        let mut cur = *s;
        for (i, &a) in self.0.iter().enumerate() {
            if !cur.reflection_is_effective(a) {
                return Some(i);
            }
            cur = cur.reflect(a);
        }
        None
    }
}

impl fmt::Display for ReflectionWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("]")
    }
}

/// Applies `w` to `s`, left to right.
pub fn apply_word(s: &WalkPath, w: &ReflectionWord) -> WalkPath {
    w.apply(s)
}

/// Constructive word solver with memoised sub-results.
///
/// Words are built by the length induction: solve the prefix, and when the
/// last two steps point the same way, conjugate a single middle move
/// (`Θ^2` at even prefix length, a three-letter word at odd length) by the
/// word carrying the prefix to an auxiliary target. The assembled word is
/// freely reduced, which keeps every application effective.
#[derive(Debug, Default)]
pub struct Solver {
    memo: BTreeMap<WalkPath, ReflectionWord>,
    base: BTreeMap<WalkPath, ReflectionWord>,
    odd_middle: Option<ReflectionWord>,
}

impl Solver {
    pub fn new() -> Self {
        let mut solver = Solver::default();
        for m in 1..=3 {
            let graph = OrbitGraph::build(m, &SOLVER_LEVELS, m).expect("base graph");
            let target = WalkPath::alternating(m);
            let tree = graph.bfs_tree(target);
            for s in WalkPath::all(m) {
                // path alt -> s reversed is a word s -> alt
                let w = graph
                    .word_from_tree(&tree, target, s)
                    .expect("connected base case");
                solver.base.insert(s, w.reversed());
            }
        }
        solver
    }

    /// Word carrying `s` to the alternating walk of the same length.
    pub fn solve_to_alternating(&mut self, s: &WalkPath) -> Result<ReflectionWord> {
        if s.is_empty() {
            return Err(Error::MalformedPath("walk must have at least one step"));
        }
        Ok(self.to_alternating(*s))
    }

    /// Word carrying `s` to `t`: the word to the alternating walk from `s`,
    /// followed by the reverse of the one from `t`.
    pub fn solve(&mut self, s: &WalkPath, t: &WalkPath) -> Result<ReflectionWord> {
        if s.len() != t.len() {
            return Err(Error::HorizonMismatch {
                left: s.len(),
                right: t.len(),
            });
        }
        let forward = self.solve_to_alternating(s)?;
        let back = self.solve_to_alternating(t)?;
        Ok(forward.concat(&back.reversed()))
    }

    fn to_alternating(&mut self, s: WalkPath) -> ReflectionWord {
        let m = s.len();
        if m <= 3 {
            return self.base[&s].clone();
        }
        if let Some(w) = self.memo.get(&s) {
            return w.clone();
        }
        let n = m - 1;
        let prefix = s.truncate(n);
        let head = self.to_alternating(prefix);
        let word = if s.step(n) != s.step(m) {
            // the last step already alternates and effective moves on the
            // prefix flip both final steps together
            head
        } else {
            let aux = if n % 2 == 0 {
                // (s̄^(n-1), 2)
                WalkPath::alternating(n - 1).push(true).unwrap()
            } else {
                // (s̄^(n-1), -1)
                WalkPath::alternating(n - 1).push(false).unwrap()
            };
            let aux_word = self.to_alternating(aux);
            let conj = head.concat(&aux_word.reversed());
            let middle = if n % 2 == 0 {
                ReflectionWord(vec![2])
            } else {
                self.odd_middle()
            };
            conj.concat(&middle)
                .concat(&conj.reversed())
                .concat(&head)
                .reduced()
        };
        self.memo.insert(s, word.clone());
        word
    }

    /// The three-letter word sending `(s̄^(m-1), -1, -2)` to `(s̄^(m-1), -1, 0)`.
    /// Both palindromes `[1,0,1]` and `[0,1,0]` are tried and checked by
    /// application; the first that works is kept.
    pub fn odd_middle(&mut self) -> ReflectionWord {
        if let Some(w) = &self.odd_middle {
            return w.clone();
        }
        let from = WalkPath::alternating(2)
            .push(false)
            .unwrap()
            .push(false)
            .unwrap();
        let to = WalkPath::alternating(2)
            .push(false)
            .unwrap()
            .push(true)
            .unwrap();
        let chosen = [vec![1, 0, 1], vec![0, 1, 0]]
            .into_iter()
            .map(ReflectionWord)
            .find(|w| w.apply(&from) == to && w.first_ineffective(&from).is_none())
            .expect("one of the middle words works");
        self.odd_middle = Some(chosen.clone());
        chosen
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }
}

/// Convenience wrapper around a fresh [`Solver`].
pub fn solve(s: &WalkPath, t: &WalkPath) -> Result<ReflectionWord> {
    Solver::new().solve(s, t)
}

pub fn solve_to_alternating(s: &WalkPath) -> Result<ReflectionWord> {
    Solver::new().solve_to_alternating(s)
}

// ---------------------------------------------------------------------------
// Orbit graph

/// Reflection graph on `Λ^m`: `s ~ Θ^a(s)` for every level `a` in the set.
#[derive(Debug, Clone)]
pub struct OrbitGraph {
    m: usize,
    levels: Vec<i64>,
    component: Vec<u32>,
    n_components: usize,
}

/// BFS predecessor table rooted at one vertex.
#[derive(Debug, Clone)]
pub struct BfsTree {
    dist: Vec<u32>,
    parent: Vec<(u64, i64)>,
}

impl BfsTree {
    pub fn distance(&self, s: &WalkPath) -> Option<u32> {
        let d = self.dist[s.bits() as usize];
        (d != u32::MAX).then_some(d)
    }
}

/// One row of an orbit census.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRow {
    pub m: usize,
    pub levels: Vec<i64>,
    pub n_components: usize,
    pub max_component_diameter: usize,
}

impl OrbitGraph {
    pub fn build(m: usize, levels: &[i64], cap: usize) -> Result<Self> {
        if m > cap {
            return Err(Error::CapExceeded { requested: m, cap });
        }
        if m == 0 || m >= 32 {
            return Err(Error::MalformedPath("orbit graph needs 1 <= m < 32"));
        }
        let mut levels: Vec<i64> = levels.to_vec();
        levels.sort_unstable();
        levels.dedup();
        let n = 1usize << m;
        let mut component = vec![u32::MAX; n];
        let mut n_components = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if component[start] != u32::MAX {
                continue;
            }
            let id = n_components as u32;
            n_components += 1;
            component[start] = id;
            queue.push_back(start as u64);
            while let Some(v) = queue.pop_front() {
                let s = WalkPath::from_bits(m, v).unwrap();
                for &a in &levels {
                    let u = s.reflect(a).bits() as usize;
                    if component[u] == u32::MAX {
                        component[u] = id;
                        queue.push_back(u as u64);
                    }
                }
            }
        }
        Ok(OrbitGraph {
            m,
            levels,
            component,
            n_components,
        })
    }

    pub fn horizon(&self) -> usize {
        self.m
    }

    pub fn levels(&self) -> &[i64] {
        &self.levels
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn component_of(&self, s: &WalkPath) -> usize {
        self.component[s.bits() as usize] as usize
    }

    pub fn same_component(&self, s: &WalkPath, t: &WalkPath) -> bool {
        self.component_of(s) == self.component_of(t)
    }

    /// Vertices grouped by component, each group in bit order.
    pub fn components(&self) -> Vec<Vec<WalkPath>> {
        let mut groups = vec![Vec::new(); self.n_components];
        for (v, &c) in self.component.iter().enumerate() {
            groups[c as usize].push(WalkPath::from_bits(self.m, v as u64).unwrap());
        }
        groups
    }

    pub fn bfs_tree(&self, root: WalkPath) -> BfsTree {
        let n = 1usize << self.m;
        let mut dist = vec![u32::MAX; n];
        let mut parent = vec![(u64::MAX, 0i64); n];
        let mut queue = VecDeque::new();
        dist[root.bits() as usize] = 0;
        queue.push_back(root);
        while let Some(s) = queue.pop_front() {
            let d = dist[s.bits() as usize];
            for &a in &self.levels {
                let u = s.reflect(a);
                let ui = u.bits() as usize;
                if dist[ui] == u32::MAX {
                    dist[ui] = d + 1;
                    parent[ui] = (s.bits(), a);
                    queue.push_back(u);
                }
            }
        }
        BfsTree { dist, parent }
    }

    fn word_from_tree(
        &self,
        tree: &BfsTree,
        root: WalkPath,
        t: WalkPath,
    ) -> Option<ReflectionWord> {
        tree.distance(&t)?;
        let mut letters = Vec::new();
        let mut cur = t.bits();
        while cur != root.bits() {
            let (p, a) = tree.parent[cur as usize];
            letters.push(a);
            cur = p;
        }
        letters.reverse();
        Some(ReflectionWord(letters))
    }

    /// A shortest word from `s` to `t`, if they share a component.
    pub fn shortest_word(&self, s: &WalkPath, t: &WalkPath) -> Option<ReflectionWord> {
        let tree = self.bfs_tree(*s);
        self.word_from_tree(&tree, *s, *t)
    }

    /// Largest eccentricity over all vertices, i.e. the largest diameter
    /// among the components.
    pub fn max_component_diameter(&self) -> usize {
        WalkPath::all(self.m)
            .map(|s| {
                let tree = self.bfs_tree(s);
                tree.dist
                    .iter()
                    .filter(|&&d| d != u32::MAX)
                    .max()
                    .copied()
                    .unwrap_or(0) as usize
            })
            .max()
            .unwrap_or(0)
    }

    pub fn census_row(&self) -> CensusRow {
        CensusRow {
            m: self.m,
            levels: self.levels.clone(),
            n_components: self.n_components,
            max_component_diameter: self.max_component_diameter(),
        }
    }
}

/// Orbit graph rows for `m = 1..=m_max`.
pub fn orbit_census(m_max: usize, levels: &[i64], cap: usize) -> Result<Vec<CensusRow>> {
    (1..=m_max)
        .map(|m| OrbitGraph::build(m, levels, cap).map(|g| g.census_row()))
        .collect()
}

/// Partition of all skip-free paths of horizon `m` into orbits of the group
/// generated by the reflections at `levels`. Orbits and their members are
/// returned in canonical order.
pub fn skip_free_orbits(m: usize, levels: &[i64]) -> Vec<Vec<SkipFreePath>> {
    let all = all_skip_free(m);
    let mut seen: BTreeSet<SkipFreePath> = BTreeSet::new();
    let mut orbits = Vec::new();
    for p in all {
        if seen.contains(&p) {
            continue;
        }
        let mut orbit = BTreeSet::new();
        let mut queue = VecDeque::new();
        orbit.insert(p.clone());
        queue.push_back(p);
        while let Some(q) = queue.pop_front() {
            for &a in levels {
                let r = q.reflect(a);
                if orbit.insert(r.clone()) {
                    queue.push_back(r);
                }
            }
        }
        seen.extend(orbit.iter().cloned());
        orbits.push(orbit.into_iter().collect());
    }
    orbits
}

/// Every skip-free path of horizon `m` (there are `3^m`), in canonical order.
pub fn all_skip_free(m: usize) -> Vec<SkipFreePath> {
    let mut out = vec![SkipFreePath::zero(0)];
    for _ in 0..m {
        let mut next = Vec::with_capacity(out.len() * 3);
        for p in &out {
            for s in [Step::Down, Step::Flat, Step::Up] {
                let mut v = p.as_slice().to_vec();
                v.push(p.last() + s.value());
                next.push(SkipFreePath::from_values(v).unwrap());
            }
        }
        out = next;
    }
    out
}
