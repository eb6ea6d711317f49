//! Seeded synthetic sources.
//!
//! All generators draw from xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). Uniform reals are the top 53 bits
//! of a draw scaled by `2^-53`, and a Bernoulli(p) event is `u < p`. These
//! conversions are implemented here rather than taken from a distribution
//! library so that fixtures stay identical across platforms and releases.
//!
//! - [`gen_bernoulli`]: i.i.d. bits with `P(1) = theta`.
//! - [`gen_markov`]: a fair first bit, then each bit repeats its predecessor
//!   with probability `q`. `q > 1/2` mimics after-pulsing (excess `00`/`11`),
//!   `q < 1/2` mimics dead time (excess `01`/`10`).
//! - [`gen_detector`]: Poisson photon arrivals routed fairly to two
//!   detectors with non-paralysable dead time and single after-pulses.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::bitstream::{BitSequence, BitSequenceBuilder};
use crate::error::{Error, Result};
use crate::extract::{TimeTagSeries, TimeUnit};

/// Detector-physics parameters. Times are in the series' time unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Mean photon interarrival time across both detectors.
    pub mean_interarrival: f64,
    /// A detector ignores photons arriving less than this long after its
    /// previous recorded event.
    pub dead_time: u64,
    /// Probability that a recorded event spawns an after-pulse.
    pub afterpulse_prob: f64,
    /// Delay of the after-pulse relative to its parent event. After-pulses
    /// are subject to dead time like any other event.
    pub afterpulse_delay: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorKind {
    Bernoulli { theta: f64 },
    Markov { stay_prob: f64 },
    Detector(DetectorParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub seed: u64,
    /// Output length in bits (recorded events for the detector model).
    pub n: u64,
}

impl GeneratorConfig {
    pub fn bernoulli(theta: f64, n: u64, seed: u64) -> Self {
        Self {
            kind: GeneratorKind::Bernoulli { theta },
            seed,
            n,
        }
    }

    pub fn markov(stay_prob: f64, n: u64, seed: u64) -> Self {
        Self {
            kind: GeneratorKind::Markov { stay_prob },
            seed,
            n,
        }
    }

    pub fn detector(params: DetectorParams, n: u64, seed: u64) -> Self {
        Self {
            kind: GeneratorKind::Detector(params),
            seed,
            n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")))
            }
        };
        match self.kind {
            GeneratorKind::Bernoulli { theta } => prob("theta", theta),
            GeneratorKind::Markov { stay_prob } => prob("stay probability", stay_prob),
            GeneratorKind::Detector(p) => {
                prob("after-pulse probability", p.afterpulse_prob)?;
                if !(p.mean_interarrival > 0.0 && p.mean_interarrival.is_finite()) {
                    return Err(Error::Config(format!(
                        "mean interarrival must be positive, got {}",
                        p.mean_interarrival
                    )));
                }
                if p.afterpulse_prob >= 1.0 {
                    return Err(Error::Config(
                        "after-pulse probability 1 never lets the detector settle".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Deterministic source behind every generator.
#[derive(Debug, Clone)]
pub struct SimRng(Xoshiro256PlusPlus);

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Exponential with the given mean, by inversion.
    pub fn exponential(&mut self, mean: f64) -> f64 {
        -mean * (1.0 - self.next_f64()).ln()
    }
}

fn wrong_kind(expected: &str, cfg: &GeneratorConfig) -> Error {
    Error::Config(format!(
        "expected a {expected} configuration, got {:?}",
        cfg.kind
    ))
}

pub fn gen_bernoulli(cfg: &GeneratorConfig) -> Result<BitSequence> {
    let GeneratorKind::Bernoulli { theta } = cfg.kind else {
        return Err(wrong_kind("bernoulli", cfg));
    };
    cfg.validate()?;
    let mut rng = SimRng::new(cfg.seed);
    let mut out = BitSequenceBuilder::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        out.push(rng.bernoulli(theta));
    }
    Ok(out.finish())
}

pub fn gen_markov(cfg: &GeneratorConfig) -> Result<BitSequence> {
    let GeneratorKind::Markov { stay_prob } = cfg.kind else {
        return Err(wrong_kind("markov", cfg));
    };
    cfg.validate()?;
    let mut rng = SimRng::new(cfg.seed);
    let mut out = BitSequenceBuilder::with_capacity(cfg.n);
    if cfg.n > 0 {
        let mut prev = rng.bernoulli(0.5);
        out.push(prev);
        for _ in 1..cfg.n {
            if !rng.bernoulli(stay_prob) {
                prev = !prev;
            }
            out.push(prev);
        }
    }
    Ok(out.finish())
}

/// Simulates the two-detector source; returns the recorded time tags and
/// the detector identity (0 or 1) of each recorded event.
pub fn gen_detector(cfg: &GeneratorConfig) -> Result<(TimeTagSeries, BitSequence)> {
    let GeneratorKind::Detector(p) = cfg.kind else {
        return Err(wrong_kind("detector", cfg));
    };
    cfg.validate()?;
    let mut rng = SimRng::new(cfg.seed);
    let mut tags = Vec::with_capacity(cfg.n as usize);
    let mut ids = BitSequenceBuilder::with_capacity(cfg.n);
    let mut last: [Option<u64>; 2] = [None, None];
    // Pending after-pulses ordered by (time, insertion order).
    let mut pending: BinaryHeap<Reverse<(u64, u64, u8)>> = BinaryHeap::new();
    let mut scheduled = 0u64;

    let mut clock = 0u64;
    let next_photon = |rng: &mut SimRng, clock: &mut u64| {
        // Floor of the exponential keeps tags integral; the fractional part
        // only matters below the time resolution.
        let gap = rng.exponential(p.mean_interarrival);
        *clock = clock.saturating_add(gap as u64);
        let detector = (rng.next_u64() >> 63) as u8;
        (*clock, detector)
    };
    let mut photon = next_photon(&mut rng, &mut clock);

    while (tags.len() as u64) < cfg.n {
        let (time, detector) = match pending.peek() {
            Some(&Reverse((t, _, d))) if t <= photon.0 => {
                pending.pop();
                (t, d)
            }
            _ => {
                let current = photon;
                photon = next_photon(&mut rng, &mut clock);
                current
            }
        };
        let blind = matches!(last[detector as usize], Some(prev) if time - prev < p.dead_time);
        if blind {
            continue;
        }
        last[detector as usize] = Some(time);
        tags.push(time);
        ids.push(detector == 1);
        if p.afterpulse_prob > 0.0 && rng.bernoulli(p.afterpulse_prob) {
            pending.push(Reverse((
                time.saturating_add(p.afterpulse_delay),
                scheduled,
                detector,
            )));
            scheduled += 1;
        }
    }
    let series = TimeTagSeries::timestamps(tags, TimeUnit::Ps)?;
    Ok((series, ids.finish()))
}

/// Output of [`generate`].
#[derive(Debug, Clone)]
pub enum Generated {
    Bits(BitSequence),
    Detector {
        tags: TimeTagSeries,
        bits: BitSequence,
    },
}

pub fn generate(cfg: &GeneratorConfig) -> Result<Generated> {
    match cfg.kind {
        GeneratorKind::Bernoulli { .. } => gen_bernoulli(cfg).map(Generated::Bits),
        GeneratorKind::Markov { .. } => gen_markov(cfg).map(Generated::Bits),
        GeneratorKind::Detector(_) => {
            gen_detector(cfg).map(|(tags, bits)| Generated::Detector { tags, bits })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockstats::count_blocks;

    fn ascii(seq: &BitSequence) -> String {
        seq.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    #[test]
    fn degenerate_bernoulli() {
        assert_eq!(
            ascii(&gen_bernoulli(&GeneratorConfig::bernoulli(1.0, 8, 5)).unwrap()),
            "11111111"
        );
        assert_eq!(
            ascii(&gen_bernoulli(&GeneratorConfig::bernoulli(0.0, 8, 5)).unwrap()),
            "00000000"
        );
    }

    #[test]
    fn degenerate_markov() {
        for seed in 0..4 {
            let s = ascii(&gen_markov(&GeneratorConfig::markov(1.0, 8, seed)).unwrap());
            assert!(s == "00000000" || s == "11111111", "{s}");
            let s = ascii(&gen_markov(&GeneratorConfig::markov(0.0, 8, seed)).unwrap());
            assert!(s == "01010101" || s == "10101010", "{s}");
        }
    }

    #[test]
    fn rng_stream_is_pinned() {
        // First outputs of xoshiro256++ seeded through SplitMix64 with seed 0.
        let mut rng = SimRng::new(0);
        let first: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        let mut again = SimRng::new(0);
        assert_eq!(first, (0..3).map(|_| again.next_u64()).collect::<Vec<_>>());
        assert_eq!(first[0], 0x53175d61490b23df);
    }

    #[test]
    fn determinism() {
        let cfg = GeneratorConfig::markov(0.3, 10_000, 99);
        assert_eq!(gen_markov(&cfg).unwrap(), gen_markov(&cfg).unwrap());
        let det = GeneratorConfig::detector(
            DetectorParams {
                mean_interarrival: 500.0,
                dead_time: 100,
                afterpulse_prob: 0.1,
                afterpulse_delay: 150,
            },
            5_000,
            11,
        );
        let (t1, b1) = gen_detector(&det).unwrap();
        let (t2, b2) = gen_detector(&det).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(b1, b2);
        assert_eq!(t1.len(), 5_000);
        assert_eq!(b1.len(), 5_000);
    }

    #[test]
    fn config_errors() {
        assert!(gen_bernoulli(&GeneratorConfig::bernoulli(1.5, 8, 0)).is_err());
        assert!(gen_markov(&GeneratorConfig::markov(-0.1, 8, 0)).is_err());
        assert!(gen_markov(&GeneratorConfig::bernoulli(0.5, 8, 0)).is_err());
        let bad = DetectorParams {
            mean_interarrival: 0.0,
            dead_time: 0,
            afterpulse_prob: 0.0,
            afterpulse_delay: 1,
        };
        assert!(matches!(
            gen_detector(&GeneratorConfig::detector(bad, 8, 0)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn dead_time_is_respected_per_detector() {
        let cfg = GeneratorConfig::detector(
            DetectorParams {
                mean_interarrival: 100.0,
                dead_time: 250,
                afterpulse_prob: 0.2,
                afterpulse_delay: 300,
            },
            20_000,
            4,
        );
        let (tags, ids) = gen_detector(&cfg).unwrap();
        let mut last = [None::<u64>; 2];
        for (t, d) in tags.values.iter().zip(ids.iter()) {
            if let Some(prev) = last[usize::from(d)] {
                assert!(t - prev >= 250);
            }
            last[usize::from(d)] = Some(*t);
        }
    }

    #[test]
    fn markov_half_is_fair_at_level_two() {
        let s = gen_markov(&GeneratorConfig::markov(0.5, 1 << 16, 1)).unwrap();
        let c = count_blocks(&s, 2).unwrap();
        let expected = c.total as f64 / 4.0;
        for &k in &c.counts {
            assert!((k as f64 - expected).abs() < 5.0 * expected.sqrt());
        }
    }

    #[test]
    fn config_json() {
        let cfg = GeneratorConfig::markov(0.51, 1 << 24, 7);
        let json = serde_json::to_value(cfg).unwrap();
        assert_eq!(json["kind"], "markov");
        assert_eq!(json["stay_prob"], 0.51);
        let back: GeneratorConfig = serde_json::from_value(json).unwrap();
        assert_eq!(back, cfg);
    }
}
