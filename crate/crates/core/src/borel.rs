//! Borel-normality test.
//!
//! At level `i` every substring frequency must satisfy
//! `|N_j / floor(n/i) - 2^-i| < sqrt(log2(n)/n)` for all `j`, and the
//! sequence passes when every level `1..=i_max` passes.

use serde::{Deserialize, Serialize};

use crate::bitstream::BitSequence;
use crate::blockstats::{count_blocks_par, max_borel_level, BlockCounts};
use crate::error::{Error, Result};

/// Per-level outcome with signed deviations `d_j = N_j/total - 2^-i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorelLevelReport {
    #[serde(rename = "i")]
    pub level: u32,
    pub bound: f64,
    pub deviations: Vec<f64>,
    pub passes: bool,
}

impl BorelLevelReport {
    pub fn from_counts(counts: &BlockCounts, n: u64) -> Result<Self> {
        let bound = borel_bound(n)?;
        let deviations = borel_deviations(counts)?;
        let passes = deviations.iter().all(|d| d.abs() < bound);
        Ok(Self {
            level: counts.level,
            bound,
            deviations,
            passes,
        })
    }

    pub fn max_abs_deviation(&self) -> f64 {
        self.deviations.iter().fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// Result of [`borel_test`] over levels `1..=max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorelReport {
    pub n: u64,
    pub levels: Vec<BorelLevelReport>,
    pub overall: bool,
}

impl BorelReport {
    pub fn first_failure(&self) -> Option<u32> {
        self.levels.iter().find(|l| !l.passes).map(|l| l.level)
    }
}

/// `sqrt(log2(n)/n)`.
pub fn borel_bound(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "Borel bound undefined for n = {n} (need n >= 2)"
        )));
    }
    let n = n as f64;
    Ok((n.log2() / n).sqrt())
}

pub fn borel_deviations(counts: &BlockCounts) -> Result<Vec<f64>> {
    if counts.total == 0 {
        return Err(Error::EmptyInput(
            "no complete blocks to compute frequencies from".into(),
        ));
    }
    let total = counts.total as f64;
    let expected = (-(counts.level as f64)).exp2();
    Ok(counts
        .counts
        .iter()
        .map(|&c| c as f64 / total - expected)
        .collect())
}

/// Resolves the requested maximum level against `i_max(n)`.
pub(crate) fn resolve_levels(n: u64, levels: Option<u32>) -> Result<u32> {
    let imax = max_borel_level(n)?;
    match levels {
        None => Ok(imax),
        Some(0) => Err(Error::Domain("at least one level must be requested".into())),
        Some(l) if l > imax => Err(Error::Domain(format!(
            "level {l} exceeds i_max = {imax} for n = {n}; level i needs n >= 2^(2^i)"
        ))),
        Some(l) => Ok(l),
    }
}

/// Runs the test at levels `1..=levels` (default: all admissible levels).
pub fn borel_test(seq: &BitSequence, levels: Option<u32>) -> Result<BorelReport> {
    let n = seq.len();
    let max = resolve_levels(n, levels)?;
    let reports = (1..=max)
        .map(|i| BorelLevelReport::from_counts(&count_blocks_par(seq, i)?, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(report_from_levels(n, reports))
}

pub(crate) fn report_from_levels(n: u64, levels: Vec<BorelLevelReport>) -> BorelReport {
    let overall = levels.iter().all(|l| l.passes);
    BorelReport { n, levels, overall }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn bound_values() {
        assert_close(borel_bound(16).unwrap(), 0.5, 1e-15);
        assert_close(borel_bound(256).unwrap(), 0.176_776_695_296_636_9, 1e-15);
        assert_close(borel_bound(1 << 32).unwrap(), 32f64.sqrt() / 65536.0, 1e-18);
        assert!((borel_bound(1 << 32).unwrap() / 8.6314e-5 - 1.0).abs() < 1e-4);
        assert!(matches!(borel_bound(1), Err(Error::Domain(_))));
    }

    #[test]
    fn deviation_examples() {
        let d = |v: Vec<u64>| borel_deviations(&BlockCounts::from_counts(v).unwrap()).unwrap();
        assert_eq!(d(vec![2, 2]), [0.0, 0.0]);
        assert_eq!(d(vec![3, 1]), [0.25, -0.25]);
        assert_eq!(d(vec![1, 1, 1, 1]), [0.0; 4]);
        assert!(matches!(
            borel_deviations(&BlockCounts::zero(2).unwrap()),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn constant_ones_fail_level_one() {
        let s = BitSequence::from_packed(vec![0xFF; 1 << 13], None).unwrap();
        let r = borel_test(&s, None).unwrap();
        assert_eq!(r.levels.len(), 4);
        assert!(!r.levels[0].passes);
        assert_eq!(r.levels[0].deviations[1], 0.5);
        assert_close(r.levels[0].bound, 0.015_625, 1e-15);
        assert!(!r.overall);
        assert_eq!(r.first_failure(), Some(1));
    }

    #[test]
    fn alternating_passes_level_one_fails_level_two() {
        let s = BitSequence::from_packed(vec![0x55; 1 << 13], None).unwrap();
        let r = borel_test(&s, Some(2)).unwrap();
        assert!(r.levels[0].passes);
        assert_eq!(r.levels[0].deviations, [0.0, 0.0]);
        assert!(!r.levels[1].passes);
        assert_eq!(r.levels[1].deviations[0b01], 0.75);
    }

    #[test]
    fn equality_fails() {
        // n = 16: bound is exactly 0.5; 16 ones give d = 0.5.
        let s = BitSequence::from_packed(vec![0xFF, 0xFF], None).unwrap();
        let r = borel_test(&s, Some(1)).unwrap();
        assert_eq!(r.levels[0].bound, 0.5);
        assert_eq!(r.levels[0].deviations[1], 0.5);
        assert!(!r.levels[0].passes);
    }

    #[test]
    fn levels_above_imax_rejected() {
        let s = BitSequence::from_packed(vec![0x5A; 2], None).unwrap();
        match borel_test(&s, Some(3)) {
            Err(Error::Domain(msg)) => assert!(msg.contains("i_max = 2"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(borel_test(&s, Some(0)).is_err());
        assert!(borel_test(&BitSequence::from_bits([1, 0, 1]), None).is_err());
    }

    #[test]
    fn json_shape() {
        let s = BitSequence::from_packed(vec![0x5A; 2], None).unwrap();
        let r = borel_test(&s, Some(1)).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["n"], 16);
        assert_eq!(v["levels"][0]["i"], 1);
        assert!(v["levels"][0]["deviations"].is_array());
        assert_eq!(v["overall"], true);
    }

    proptest! {
        #[test]
        fn deviations_sum_to_zero_and_verdict_matches_max(
            counts in proptest::collection::vec(0u64..10_000, 1usize..=5).prop_flat_map(|v| {
                let level = v.len() as u32;
                proptest::collection::vec(0u64..10_000, 1usize << level)
            }),
            n in 4u64..1_000_000,
        ) {
            prop_assume!(counts.iter().sum::<u64>() > 0);
            let c = BlockCounts::from_counts(counts).unwrap();
            let r = BorelLevelReport::from_counts(&c, n).unwrap();
            let sum: f64 = r.deviations.iter().sum();
            prop_assert!(sum.abs() <= (1u64 << c.level) as f64 * 1e-15);
            prop_assert_eq!(r.passes, r.max_abs_deviation() < r.bound);
        }

        #[test]
        fn threshold_is_exact(half in 1u64..5_000, k in 0u64..5_000, n in 4u64..100_000) {
            let k = k.min(half);
            let c = BlockCounts::from_counts(vec![half - k, half + k]).unwrap();
            let r = BorelLevelReport::from_counts(&c, n).unwrap();
            let delta = k as f64 / (2 * half) as f64;
            prop_assert!((r.deviations[1] - delta).abs() <= 1e-16);
            prop_assert_eq!(r.passes, r.max_abs_deviation() < r.bound);
        }
    }
}
