//! Two processes invariant under reflection at levels 0 and 1 that are not
//! Ocone.
//!
//! The first repeats its second step once. The second keeps one sign on each
//! dyadic block of steps `[2^k, 2^{k+1})`, so a path can only change direction
//! at the end of a block.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::law::{dyadic, invariance_report, InvarianceReport, PathLaw, DEFAULT_LAW_CAP};
use crate::path::WalkPath;

/// Levels checked by default for the first process.
pub const CE1_LEVELS: [i64; 4] = [0, 1, 2, 3];

/// Levels checked by default for the second process.
pub const CE2_LEVELS: [i64; 3] = [0, 1, 2];

/// Longest horizon supported by the block construction.
pub const CE2_MAX_HORIZON: usize = 31;

/// Number of free signs behind the first process on `m` steps.
pub fn ce1_sign_count(m: usize) -> usize {
    if m >= 3 {
        m - 1
    } else {
        m
    }
}

/// Path of the first process from its free signs `ε_1, ε_2, ε_4, ε_5, …`.
pub fn ce1_path(signs: &[i8], m: usize) -> Result<WalkPath> {
    let needed = ce1_sign_count(m);
    if signs.len() < needed {
        return Err(Error::InsufficientBits {
            needed,
            available: signs.len(),
        });
    }
    let steps: Vec<i8> = (1..=m)
        .map(|k| match k {
            1 | 2 => signs[k - 1],
            3 => signs[1],
            _ => signs[k - 2],
        })
        .collect();
    WalkPath::from_signs(&steps)
}

pub fn ce1_law(m: usize) -> Result<PathLaw> {
    if m > DEFAULT_LAW_CAP {
        return Err(Error::CapExceeded {
            requested: m,
            cap: DEFAULT_LAW_CAP,
        });
    }
    sign_law(m, ce1_sign_count(m), ce1_path)
}

pub fn ce1_invariance_report(m: usize) -> Result<InvarianceReport> {
    invariance_report(&ce1_law(m)?, &CE1_LEVELS)
}

/// Index of the dyadic block containing step `n ≥ 1`.
pub fn ce2_block(n: usize) -> usize {
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

/// Number of blocks touched by the first `m` steps.
pub fn ce2_block_count(m: usize) -> usize {
    if m == 0 {
        0
    } else {
        ce2_block(m) + 1
    }
}

/// Horizons ending exactly on a block boundary: `2^k - 1`.
pub fn is_block_complete(m: usize) -> bool {
    (m + 1).is_power_of_two()
}

/// Path of the second process: step `n` takes the sign `signs[⌊log₂ n⌋]`.
pub fn ce2_path(signs: &[i8], m: usize) -> Result<WalkPath> {
    if m > CE2_MAX_HORIZON {
        return Err(Error::CapExceeded {
            requested: m,
            cap: CE2_MAX_HORIZON,
        });
    }
    let needed = ce2_block_count(m);
    if signs.len() < needed {
        return Err(Error::InsufficientBits {
            needed,
            available: signs.len(),
        });
    }
    let steps: Vec<i8> = (1..=m).map(|n| signs[ce2_block(n)]).collect();
    WalkPath::from_signs(&steps)
}

pub fn ce2_law(m: usize) -> Result<PathLaw> {
    if m > CE2_MAX_HORIZON {
        return Err(Error::CapExceeded {
            requested: m,
            cap: CE2_MAX_HORIZON,
        });
    }
    sign_law(m, ce2_block_count(m), ce2_path)
}

pub fn ce2_invariance_report(m: usize) -> Result<InvarianceReport> {
    if !is_block_complete(m) {
        return Err(Error::NotBlockComplete(m));
    }
    invariance_report(&ce2_law(m)?, &CE2_LEVELS)
}

fn sign_law(m: usize, free: usize, build: fn(&[i8], usize) -> Result<WalkPath>) -> Result<PathLaw> {
    let q = dyadic(free);
    let mut entries = Vec::with_capacity(1 << free);
    for bits in 0..1u64 << free {
        let signs: Vec<i8> = (0..free)
            .map(|i| if bits >> i & 1 == 1 { 1 } else { -1 })
            .collect();
        entries.push((build(&signs, m)?.to_skip_free(), q.clone()));
    }
    PathLaw::from_masses(m, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::{laws_equal, ocone_check, pushforward_reflect, Mass};
    use crate::path::SkipFreePath;
    use num_rational::BigRational;

    fn sf(v: &[i64]) -> SkipFreePath {
        SkipFreePath::from_values(v.to_vec()).unwrap()
    }

    #[test]
    fn ce1_small_horizons() {
        let law = ce1_law(3).unwrap();
        assert_eq!(law.len(), 4);
        let quarter = BigRational::new(1.into(), 4.into());
        for p in [[0, 1, 2, 3], [0, 1, 0, -1], [0, -1, 0, 1], [0, -1, -2, -3]] {
            assert_eq!(law.mass(&sf(&p)), quarter);
        }
        assert_eq!(ce1_law(1).unwrap().len(), 2);
        let law4 = ce1_law(4).unwrap();
        assert_eq!(law4.len(), 8);
        assert_eq!(law4.truncate(3), law);
        assert!(matches!(ce1_law(17), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn ce1_report() {
        let report = ce1_invariance_report(3).unwrap();
        for check in &report.checks {
            assert_eq!(check.invariant, check.level != 2, "level {}", check.level);
        }
        let two = report.check(2).unwrap();
        let wit = two.witness.as_ref().unwrap();
        assert_eq!(wit.path, sf(&[0, 1, 2, 1]));
        assert_eq!(wit.left, Mass::from_integer(0.into()));
        assert_eq!(wit.right, BigRational::new(1.into(), 4.into()));
    }

    #[test]
    fn ce2_paths() {
        assert_eq!(
            ce2_path(&[1, 1, 1], 7).unwrap().to_skip_free(),
            sf(&[0, 1, 2, 3, 4, 5, 6, 7])
        );
        assert_eq!(
            ce2_path(&[1, -1, -1], 7).unwrap().to_skip_free(),
            sf(&[0, 1, 0, -1, -2, -3, -4, -5])
        );
        assert!(matches!(
            ce2_path(&[1, 1], 7),
            Err(Error::InsufficientBits {
                needed: 3,
                available: 2
            })
        ));
        assert!(matches!(
            ce2_path(&[1; 6], 32),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn ce2_law_is_uniform_on_blocks() {
        let law = ce2_law(7).unwrap();
        assert_eq!(law.len(), 8);
        let eighth = BigRational::new(1.into(), 8.into());
        assert!(law.iter().all(|(_, q)| *q == eighth));
    }

    #[test]
    fn ce2_report() {
        let report = ce2_invariance_report(7).unwrap();
        assert!(report.check(0).unwrap().invariant);
        assert!(report.check(1).unwrap().invariant);
        let two = report.check(2).unwrap();
        assert!(!two.invariant);
        let image = sf(&[0, 1, 2, 3, 4, 5, 6, 7]).reflect(2);
        assert_eq!(image, sf(&[0, 1, 2, 1, 0, -1, -2, -3]));
        let d = two.discrepancies.iter().find(|d| d.path == image).unwrap();
        assert_eq!(d.left, Mass::from_integer(0.into()));
        assert_eq!(d.right, BigRational::new(1.into(), 8.into()));
        assert_eq!(ce2_invariance_report(6), Err(Error::NotBlockComplete(6)));
    }

    #[test]
    fn level_one_permutes_ce2_support() {
        let law = ce2_law(7).unwrap();
        let mut images: Vec<SkipFreePath> = law.iter().map(|(p, _)| p.reflect(1)).collect();
        images.sort();
        let support: Vec<SkipFreePath> = law.iter().map(|(p, _)| p.clone()).collect();
        assert_eq!(images, support);
        assert!(
            laws_equal(&law, &pushforward_reflect(&law, 1))
                .unwrap()
                .equal
        );
    }

    #[test]
    fn neither_process_is_ocone() {
        assert!(!ocone_check(&ce1_law(3).unwrap()).embedded_uniform);
        assert!(!ocone_check(&ce2_law(7).unwrap()).embedded_uniform);
    }
}
