use randcert::extract::interarrivals;
use randcert::simgen::{generate, DetectorParams, Generated};
use randcert::{
    borel_test, count_blocks, gen_bernoulli, gen_detector, gen_markov, timetags_to_bits,
    GeneratorConfig,
};
use sha2::{Digest, Sha256};

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

// Cross-checked against an independent SplitMix64 + xoshiro256++ script.
#[test]
fn bernoulli_stream_is_pinned() {
    let seq = gen_bernoulli(&GeneratorConfig::bernoulli(0.5, 1 << 20, 42)).unwrap();
    assert_eq!(seq.count_ones(), 524_456);
    assert_eq!(
        hex(&Sha256::digest(seq.as_bytes())),
        "2a54876eab25f553e4051e39d0c097b969b909debf57909c01b2302541ca7976"
    );
}

#[test]
fn biased_coin_fails_level_one() {
    let seq = gen_bernoulli(&GeneratorConfig::bernoulli(0.51, 1 << 20, 1)).unwrap();
    let r = borel_test(&seq, None).unwrap();
    assert_eq!(r.first_failure(), Some(1));
    assert!(r.levels[0].deviations[1] > 0.0);
}

#[test]
fn memoryless_chain_passes() {
    let seq = gen_markov(&GeneratorConfig::markov(0.5, 1 << 20, 3)).unwrap();
    let r = borel_test(&seq, Some(2)).unwrap();
    assert!(r.overall, "{r:?}");
}

#[test]
fn anti_persistent_chain_favours_alternation() {
    let seq = gen_markov(&GeneratorConfig::markov(0.45, 1 << 20, 4)).unwrap();
    let d = &borel_test(&seq, Some(2)).unwrap().levels[1].deviations;
    assert!(
        d[1] > 0.0 && d[2] > 0.0 && d[0] < 0.0 && d[3] < 0.0,
        "{d:?}"
    );
}

fn detector(dead_time: u64, afterpulse_prob: f64, afterpulse_delay: u64) -> DetectorParams {
    DetectorParams {
        mean_interarrival: 1000.0,
        dead_time,
        afterpulse_prob,
        afterpulse_delay,
    }
}

#[test]
fn afterpulses_repeat_the_last_symbol() {
    let cfg = GeneratorConfig::detector(detector(0, 0.05, 0), 1 << 22, 3);
    let (tags, ids) = gen_detector(&cfg).unwrap();
    assert_eq!(tags.len() as u64, 1 << 22);
    assert_eq!(ids.len(), 1 << 22);
    let r = borel_test(&ids, Some(2)).unwrap();
    let d = &r.levels[1].deviations;
    assert!(!r.levels[1].passes);
    assert!(d[0] > 0.0 && d[3] > 0.0, "{d:?}");
}

#[test]
fn dead_time_forces_alternation() {
    let cfg = GeneratorConfig::detector(detector(5_000, 0.0, 0), 1 << 18, 8);
    let (_, ids) = gen_detector(&cfg).unwrap();
    let d = &borel_test(&ids, Some(2)).unwrap().levels[1].deviations;
    assert!(d[1] > 0.0 && d[2] > 0.0, "{d:?}");
}

#[test]
fn dead_time_suppresses_short_same_detector_gaps() {
    let cfg = GeneratorConfig::detector(detector(300, 0.2, 100), 50_000, 12);
    let (tags, ids) = gen_detector(&cfg).unwrap();
    let mut last = [None::<u64>; 2];
    for (k, &t) in tags.values.iter().enumerate() {
        let d = ids.bit_at(k as u64).unwrap() as usize;
        if let Some(prev) = last[d] {
            assert!(
                t - prev >= 300,
                "event {k} at {t} follows {prev} on detector {d}"
            );
        }
        last[d] = Some(t);
    }
}

#[test]
fn clean_detector_parity_is_balanced() {
    let cfg = GeneratorConfig::detector(detector(0, 0.0, 0), (1 << 18) + 1, 21);
    let (tags, ids) = gen_detector(&cfg).unwrap();
    let bits = timetags_to_bits(&interarrivals(&tags).unwrap(), 1).unwrap();
    assert!(borel_test(&bits, None).unwrap().overall);
    assert!(borel_test(&ids, None).unwrap().overall);
}

#[test]
fn config_round_trips_through_json() {
    let cfg = GeneratorConfig::detector(detector(40, 0.01, 25), 1000, 77);
    let text = serde_json::to_string(&cfg).unwrap();
    assert!(text.contains("\"kind\":\"detector\""));
    let back: GeneratorConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
    let markov: GeneratorConfig =
        serde_json::from_str(r#"{"kind":"markov","stay_prob":0.6,"seed":1,"n":64}"#).unwrap();
    assert_eq!(markov, GeneratorConfig::markov(0.6, 64, 1));
}

#[test]
fn generate_dispatches_on_kind() {
    match generate(&GeneratorConfig::markov(0.6, 64, 1)).unwrap() {
        Generated::Bits(seq) => {
            assert_eq!(
                seq,
                gen_markov(&GeneratorConfig::markov(0.6, 64, 1)).unwrap()
            )
        }
        other => panic!("unexpected {other:?}"),
    }
    match generate(&GeneratorConfig::detector(detector(0, 0.0, 0), 16, 2)).unwrap() {
        Generated::Detector { tags, bits } => {
            assert_eq!(tags.len(), 16);
            assert_eq!(bits.len(), 16);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(gen_bernoulli(&GeneratorConfig::bernoulli(1.5, 8, 0)).is_err());
    assert!(gen_markov(&GeneratorConfig::bernoulli(0.5, 8, 0)).is_err());
    assert!(gen_detector(&GeneratorConfig::detector(detector(0, 1.0, 0), 8, 0)).is_err());
    let mut p = detector(0, 0.0, 0);
    p.mean_interarrival = 0.0;
    assert!(gen_detector(&GeneratorConfig::detector(p, 8, 0)).is_err());
}

#[test]
fn counts_cover_the_whole_stream() {
    let seq = gen_bernoulli(&GeneratorConfig::bernoulli(0.3, 10_001, 5)).unwrap();
    for level in 1..=5 {
        let c = count_blocks(&seq, level).unwrap();
        assert_eq!(c.total, 10_001 / u64::from(level));
    }
}
