//! Chi-square tests of reflection invariance and of the independence between
//! the embedded walk and the quadratic variation.

use std::collections::BTreeMap;
use std::ops::Range;

use ocone_core::{QuadraticVariation, SkipFreePath, WalkPath};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::sampler::{companion_seed, sample_discrete, SamplerSpec};

/// Smallest expected count per merged cell.
pub const MIN_EXPECTED: f64 = 5.0;
/// Smallest row total in the independence table.
pub const MIN_ROW_TOTAL: u64 = 50;
/// Number of largest contributions listed in a report.
pub const WITNESS_CELLS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessCell {
    /// First and last cylinder merged into the cell.
    pub first: String,
    pub last: String,
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub test: &'static str,
    pub method: &'static str,
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub n_samples: usize,
    pub depth: usize,
    pub alpha: f64,
    pub reject: bool,
    pub witness_cells: Vec<WitnessCell>,
}

/// Merged contingency table: one row per group, one column per cell.
#[derive(Debug, Clone, PartialEq)]
struct Table {
    labels: Vec<(String, String)>,
    counts: Vec<Vec<u64>>,
}

impl Table {
    fn chi_square(&self) -> (f64, usize, Vec<WitnessCell>) {
        let rows = self.counts.len();
        let cols = self.labels.len();
        if rows < 2 || cols < 2 {
            return (0.0, 0, Vec::new());
        }
        let row_tot: Vec<f64> = self
            .counts
            .iter()
            .map(|r| r.iter().sum::<u64>() as f64)
            .collect();
        let col_tot: Vec<f64> = (0..cols)
            .map(|j| self.counts.iter().map(|r| r[j]).sum::<u64>() as f64)
            .collect();
        let n: f64 = row_tot.iter().sum();
        let mut stat = 0.0;
        let mut cells = Vec::with_capacity(cols);
        for j in 0..cols {
            let mut contribution = 0.0;
            let mut expected = Vec::with_capacity(rows);
            for i in 0..rows {
                let e = row_tot[i] * col_tot[j] / n;
                let d = self.counts[i][j] as f64 - e;
                if e > 0.0 {
                    contribution += d * d / e;
                }
                expected.push(e);
            }
            stat += contribution;
            cells.push(WitnessCell {
                first: self.labels[j].0.clone(),
                last: self.labels[j].1.clone(),
                observed: self.counts.iter().map(|r| r[j]).collect(),
                expected,
                contribution,
            });
        }
        cells.sort_by(|a, b| b.contribution.total_cmp(&a.contribution));
        cells.truncate(WITNESS_CELLS);
        (stat, (rows - 1) * (cols - 1), cells)
    }
}

fn p_value(stat: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    dist.sf(stat).clamp(0.0, 1.0)
}

/// Groups neighbouring columns of `counts` (already in lexicographic order)
/// until `keep` holds for every group's column sums; a short tail joins the
/// last group.
fn merge_ranges(counts: &[Vec<u64>], keep: impl Fn(&[u64]) -> bool) -> Vec<Range<usize>> {
    let cols = counts.first().map_or(0, Vec::len);
    let mut ranges: Vec<Range<usize>> = Vec::new();
    let mut acc = vec![0u64; counts.len()];
    let mut start = 0;
    for j in 0..cols {
        for (a, row) in acc.iter_mut().zip(counts) {
            *a += row[j];
        }
        if keep(&acc) {
            ranges.push(start..j + 1);
            acc.iter_mut().for_each(|a| *a = 0);
            start = j + 1;
        }
    }
    if start < cols {
        match ranges.last_mut() {
            Some(last) => last.end = cols,
            None => ranges.push(start..cols),
        }
    }
    ranges
}

fn collapse(counts: &[Vec<u64>], ranges: &[Range<usize>]) -> Vec<Vec<u64>> {
    counts
        .iter()
        .map(|row| ranges.iter().map(|r| row[r.clone()].iter().sum()).collect())
        .collect()
}

fn range_labels(keys: &[String], ranges: &[Range<usize>]) -> Vec<(String, String)> {
    ranges
        .iter()
        .map(|r| (keys[r.start].clone(), keys[r.end - 1].clone()))
        .collect()
}

fn transpose(counts: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let cols = counts.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| counts.iter().map(|row| row[j]).collect())
        .collect()
}

fn check_depth(spec: &SamplerSpec, depth: usize) -> Result<usize> {
    let horizon = spec
        .horizon()
        .ok_or_else(|| Error::InvalidSpec("cylinder tests need a discrete sampler".into()))?;
    if depth > horizon {
        return Err(Error::InvalidConfig(format!(
            "depth {depth} exceeds the horizon {horizon}"
        )));
    }
    Ok(horizon)
}

/// Two-sample chi-square test of `M =ᴸ Θ^a(M)` on cylinders of the given
/// depth. The reflected sample is drawn from an independent seed.
pub fn reflect_two_sample_test(
    spec: &SamplerSpec,
    level: i64,
    n: usize,
    depth: usize,
    alpha: f64,
) -> Result<TestReport> {
    check_depth(spec, depth)?;
    let left = sample_discrete(spec, n)?;
    let right = sample_discrete(&spec.with_seed(companion_seed(spec.seed)), n)?;
    let mut table: BTreeMap<SkipFreePath, [u64; 2]> = BTreeMap::new();
    for p in &left {
        table.entry(p.truncate(depth)).or_default()[0] += 1;
    }
    for p in &right {
        table.entry(p.reflect(level).truncate(depth)).or_default()[1] += 1;
    }
    let keys: Vec<String> = table.keys().map(SkipFreePath::increments).collect();
    let counts = vec![
        table.values().map(|c| c[0]).collect::<Vec<_>>(),
        table.values().map(|c| c[1]).collect::<Vec<_>>(),
    ];
    let ranges = merge_ranges(&counts, |acc| {
        (acc[0] + acc[1]) as f64 / 2.0 >= MIN_EXPECTED
    });
    if ranges.is_empty() {
        return Err(Error::Undersized("no samples after merging".into()));
    }
    let table = Table {
        labels: range_labels(&keys, &ranges),
        counts: collapse(&counts, &ranges),
    };
    let (statistic, df, witness_cells) = table.chi_square();
    let p = p_value(statistic, df);
    Ok(TestReport {
        test: "reflect-two-sample",
        method: "chi-square homogeneity on merged cylinder cells",
        statistic,
        degrees_of_freedom: df,
        p_value: p,
        n_samples: n,
        depth,
        alpha,
        reject: p < alpha,
        witness_cells,
    })
}

/// Chi-square independence test between the first `depth` steps of the
/// embedded walk and the quadratic-variation trajectory. Only samples whose
/// embedded walk has at least `depth` steps enter the table.
pub fn ocone_independence_test(
    spec: &SamplerSpec,
    n: usize,
    depth: usize,
    alpha: f64,
) -> Result<TestReport> {
    check_depth(spec, depth)?;
    let paths = sample_discrete(spec, n)?;
    let mut joint: BTreeMap<WalkPath, BTreeMap<QuadraticVariation, u64>> = BTreeMap::new();
    let mut columns: BTreeMap<QuadraticVariation, usize> = BTreeMap::new();
    for p in &paths {
        let qv = p.quadratic_variation();
        if (qv.last() as usize) < depth {
            continue;
        }
        let prefix = p.embedded_walk().walk.truncate(depth);
        *joint
            .entry(prefix)
            .or_default()
            .entry(qv.clone())
            .or_default() += 1;
        columns.entry(qv).or_default();
    }
    let total: u64 = joint.values().flat_map(|r| r.values()).sum();
    if total == 0 {
        return Err(Error::Undersized(format!(
            "no sample has {depth} walk steps"
        )));
    }
    for (j, v) in columns.values_mut().enumerate() {
        *v = j;
    }
    // rows: walk prefixes; merge until each row total reaches the minimum
    let raw_rows: Vec<Vec<u64>> = joint
        .values()
        .map(|r| {
            let mut row = vec![0u64; columns.len()];
            for (qv, c) in r {
                row[columns[qv]] = *c;
            }
            row
        })
        .collect();
    let row_sums: Vec<Vec<u64>> = vec![raw_rows.iter().map(|r| r.iter().sum()).collect()];
    let row_ranges = merge_ranges(&row_sums, |acc| acc[0] >= MIN_ROW_TOTAL);
    let rows = transpose(&collapse(&transpose(&raw_rows), &row_ranges));
    // columns: merge until the smallest row expects enough in every cell
    let min_row = rows.iter().map(|r| r.iter().sum::<u64>()).min().unwrap() as f64;
    let col_keys: Vec<String> = columns.keys().map(qv_label).collect();
    let col_ranges = merge_ranges(&rows, |acc| {
        min_row * acc.iter().sum::<u64>() as f64 / total as f64 >= MIN_EXPECTED
    });
    let table = Table {
        labels: range_labels(&col_keys, &col_ranges),
        counts: collapse(&rows, &col_ranges),
    };
    let (statistic, df, witness_cells) = table.chi_square();
    let p = p_value(statistic, df);
    Ok(TestReport {
        test: "ocone-independence",
        method: "chi-square independence between walk prefix and quadratic variation",
        statistic,
        degrees_of_freedom: df,
        p_value: p,
        n_samples: n,
        depth,
        alpha,
        reject: p < alpha,
        witness_cells,
    })
}

fn qv_label(qv: &QuadraticVariation) -> String {
    qv.as_slice()
        .windows(2)
        .map(|w| if w[1] > w[0] { '1' } else { '0' })
        .collect()
}

/// One cylinder compared against its exact mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderCheck {
    pub cylinder: String,
    pub exact: f64,
    pub empirical: f64,
    pub stderr: f64,
    /// `|empirical - exact| / stderr`; zero when both vanish.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub n_samples: usize,
    pub depth: usize,
    pub max_z: f64,
    /// Empirical mass on cylinders outside the exact support.
    pub mass_outside_support: f64,
    pub cylinders: Vec<CylinderCheck>,
}

/// Compares empirical cylinder frequencies with the sampler's exact law.
pub fn cylinder_consistency(
    spec: &SamplerSpec,
    n: usize,
    depth: usize,
    cap: usize,
) -> Result<ConsistencyReport> {
    use num_traits::ToPrimitive;
    check_depth(spec, depth)?;
    let law = spec
        .exact_law(cap)?
        .ok_or_else(|| Error::InvalidSpec("sampler has no exact law".into()))?
        .truncate(depth);
    let mut counts: BTreeMap<SkipFreePath, u64> = BTreeMap::new();
    for p in sample_discrete(spec, n)? {
        *counts.entry(p.truncate(depth)).or_default() += 1;
    }
    let nf = n as f64;
    let mut cylinders = Vec::with_capacity(law.len());
    for (path, mass) in law.iter() {
        let exact = mass.to_f64().unwrap();
        let empirical = counts.get(path).copied().unwrap_or(0) as f64 / nf;
        let stderr = (exact * (1.0 - exact) / nf).sqrt();
        let gap = (empirical - exact).abs();
        let z = if gap == 0.0 { 0.0 } else { gap / stderr };
        cylinders.push(CylinderCheck {
            cylinder: path.increments(),
            exact,
            empirical,
            stderr,
            z,
        });
    }
    let outside: u64 = counts
        .iter()
        .filter(|(p, _)| law.mass(p) == num_rational::BigRational::from_integer(0.into()))
        .map(|(_, c)| c)
        .sum();
    Ok(ConsistencyReport {
        n_samples: n,
        depth,
        max_z: cylinders.iter().map(|c| c.z).fold(0.0, f64::max),
        mass_outside_support: outside as f64 / nf,
        cylinders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merging_keeps_order_and_totals() {
        let keys: Vec<String> = ["a", "b", "c", "d", "e", "f"].map(String::from).to_vec();
        let counts = vec![vec![1, 2, 9, 1, 5, 1], vec![1, 3, 9, 0, 5, 0]];
        let ranges = merge_ranges(&counts, |acc| (acc[0] + acc[1]) as f64 / 2.0 >= 5.0);
        assert_eq!(ranges, vec![0..3, 3..6]);
        assert_eq!(
            range_labels(&keys, &ranges),
            vec![("a".into(), "c".into()), ("d".into(), "f".into())]
        );
        assert_eq!(collapse(&counts, &ranges), vec![vec![12, 7], vec![13, 5]]);
    }

    #[test]
    fn chi_square_of_a_known_table() {
        // 2x2 table with statistic 100·(30·30-20·20)² / (50·50·50·50) = 4
        let t = Table {
            labels: vec![("a".into(), "a".into()), ("b".into(), "b".into())],
            counts: vec![vec![30, 20], vec![20, 30]],
        };
        let (stat, df, _) = t.chi_square();
        assert!((stat - 4.0).abs() < 1e-12);
        assert_eq!(df, 1);
        assert!((p_value(stat, df) - 0.0455002638963584).abs() < 1e-9);
    }
}
