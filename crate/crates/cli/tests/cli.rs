use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn randcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randcert"))
        .args(args)
        .env_remove("RANDCERT_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn generate(dir: &Path, name: &str, extra: &[&str]) -> String {
    let out = dir.join(name);
    let mut args = vec!["generate", "-o", p(&out)];
    args.extend_from_slice(extra);
    let r = randcert(&args);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    p(&out).to_string()
}

#[test]
fn bounds_table() {
    let r = randcert(&["bounds", "-n", "2^32", "--json"]);
    assert_eq!(code(&r), 0);
    let v: Value = serde_json::from_str(&stdout(&r)).unwrap();
    assert_eq!(v["i_max"], 5);
    let expected = [3.62956e-5, 6.08097e-5, 7.82572e-5, 9.11726e-5, 1.01069e-4];
    for (row, want) in v["levels"].as_array().unwrap().iter().zip(expected) {
        let rhs = row["bayes_rhs"].as_f64().unwrap();
        assert!((rhs - want).abs() / want < 1e-5);
        assert!((row["borel_bound"].as_f64().unwrap() - 8.6314e-5).abs() < 1e-8);
    }

    let r = randcert(&["bounds", "-n", "16", "--levels", "1"]);
    assert_eq!(code(&r), 0);
    assert!(stdout(&r).contains("5.00000e-1"));

    let r = randcert(&["bounds", "-n", "16", "--levels", "3"]);
    assert_eq!(code(&r), 2);
    assert!(stderr(&r).contains("i_max = 2"));
}

#[test]
fn analyze_unbiased_stream() {
    let dir = tempfile::tempdir().unwrap();
    let bits = generate(
        dir.path(),
        "coin.bin",
        &["--kind", "bernoulli", "-n", "2^20", "--seed", "42"],
    );
    let json = dir.path().join("report.json");
    let csv = dir.path().join("report.csv");
    let r = randcert(&[
        "analyze",
        "-i",
        &bits,
        "-f",
        "packed",
        "--json",
        p(&json),
        "--csv",
        p(&csv),
    ]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let v: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["input"]["n"], 1 << 20);
    assert_eq!(v["borel"]["levels"].as_array().unwrap().len(), 4);
    assert_eq!(v["verdicts"]["borel"], true);
    assert_eq!(v["verdicts"]["bayes_bound"], true);
    let csv = fs::read_to_string(&csv).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 + 4 + 8 + 16);
    assert!(csv.starts_with("level,substring,deviation,borel_bound,bayes_rhs\n"));
}

#[test]
fn analyze_correlated_stream_fails_level_two() {
    let dir = tempfile::tempdir().unwrap();
    let bits = generate(
        dir.path(),
        "chain.txt",
        &[
            "--kind",
            "markov",
            "--stay-prob",
            "0.51",
            "-n",
            "2^20",
            "--seed",
            "7",
            "--format",
            "ascii",
        ],
    );
    let r = randcert(&[
        "analyze",
        "-i",
        &bits,
        "-f",
        "ascii",
        "--max-level",
        "2",
        "--json",
        "-",
    ]);
    assert_eq!(code(&r), 1);
    let v: Value = serde_json::from_str(&stdout(&r)).unwrap();
    let levels = v["borel"]["levels"].as_array().unwrap();
    assert_eq!(levels[0]["passes"], true);
    assert_eq!(levels[1]["passes"], false);
    let d = levels[1]["deviations"].as_array().unwrap();
    assert!(d[0].as_f64().unwrap() > 0.0 && d[3].as_f64().unwrap() > 0.0);
}

#[test]
fn analyze_rejects_inadmissible_level() {
    let dir = tempfile::tempdir().unwrap();
    let bits = generate(
        dir.path(),
        "coin.bin",
        &["--kind", "bernoulli", "-n", "2^20"],
    );
    let r = randcert(&["analyze", "-i", &bits, "-f", "packed", "--max-level", "9"]);
    assert_eq!(code(&r), 2);
    assert!(stderr(&r).contains("i_max = 4"));
}

#[test]
fn analyze_reports_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "0101\n01x1\n").unwrap();
    let r = randcert(&["analyze", "-i", p(&bad), "-f", "ascii"]);
    assert_eq!(code(&r), 2);
    assert!(stderr(&r).contains("bad.txt"));
    assert!(stderr(&r).contains('7'));

    let r = randcert(&[
        "analyze",
        "-i",
        p(&dir.path().join("missing")),
        "-f",
        "packed",
    ]);
    assert_eq!(code(&r), 2);
    let r = randcert(&["analyze", "-f", "packed"]);
    assert_eq!(code(&r), 2);
}

#[test]
fn analyze_posterior_needs_a_cap_at_level_four() {
    let dir = tempfile::tempdir().unwrap();
    let bits = generate(
        dir.path(),
        "coin.bin",
        &["--kind", "bernoulli", "-n", "2^16", "--seed", "3"],
    );
    let r = randcert(&["analyze", "-i", &bits, "-f", "packed", "--bayes-posterior"]);
    assert_eq!(code(&r), 2);
    assert!(stderr(&r).contains("max_blocks"));
    let r = randcert(&[
        "analyze",
        "-i",
        &bits,
        "-f",
        "packed",
        "--bayes-posterior",
        "--max-blocks",
        "2",
        "--json",
        "-",
    ]);
    assert!(code(&r) <= 1, "{}", stderr(&r));
    let v: Value = serde_json::from_str(&stdout(&r)).unwrap();
    assert_eq!(
        v["posterior"][3]["models"].as_array().unwrap().len(),
        32_768
    );
}

#[test]
fn posterior_ranks_models() {
    let dir = tempfile::tempdir().unwrap();
    let bits = generate(
        dir.path(),
        "coin.bin",
        &["--kind", "bernoulli", "-n", "2^16", "--seed", "5"],
    );
    let r = randcert(&[
        "posterior",
        "-i",
        &bits,
        "-f",
        "packed",
        "--level",
        "2",
        "--json",
        "-",
    ]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let v: Value = serde_json::from_str(&stdout(&r)).unwrap();
    assert_eq!(v["models"].as_array().unwrap().len(), 15);
    assert_eq!(
        v["models"][v["best_index"].as_u64().unwrap() as usize],
        "0000"
    );

    let biased = generate(
        dir.path(),
        "biased.bin",
        &["--kind", "bernoulli", "--theta", "0.6", "-n", "2^16"],
    );
    let r = randcert(&["posterior", "-i", &biased, "-f", "packed", "--level", "1"]);
    assert_eq!(code(&r), 1);
    let r = randcert(&["posterior", "-i", &biased, "-f", "packed", "--level", "5"]);
    assert_eq!(code(&r), 2);
}

#[test]
fn extract_parity_listing() {
    let dir = tempfile::tempdir().unwrap();
    let tags = dir.path().join("tags.txt");
    fs::write(&tags, "592 342 ps\n595 634 ps\n593 645 ps\n").unwrap();
    let out = dir.path().join("bits.txt");
    let r = randcert(&[
        "extract",
        "-i",
        p(&tags),
        "--kind",
        "interarrivals",
        "--unit",
        "ps",
        "-o",
        p(&out),
    ]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    assert!(stdout(&r).contains("n=3"));
    assert_eq!(fs::read_to_string(&out).unwrap(), "001\n");

    let r = randcert(&[
        "extract",
        "-i",
        p(&tags),
        "--kind",
        "interarrivals",
        "--divisor",
        "10",
    ]);
    assert!(stdout(&r).contains("bits=010"), "{}", stdout(&r));
}

#[test]
fn extract_differences_timestamps() {
    let dir = tempfile::tempdir().unwrap();
    let tags = dir.path().join("stamps.txt");
    fs::write(&tags, "100\n250\n400\n").unwrap();
    let r = randcert(&["extract", "-i", p(&tags), "--kind", "timestamps"]);
    assert_eq!(code(&r), 0);
    assert!(stdout(&r).contains("n=2"));
    assert!(stdout(&r).contains("bits=00"));

    fs::write(&tags, "5\n3\n").unwrap();
    let r = randcert(&["extract", "-i", p(&tags), "--kind", "timestamps"]);
    assert_eq!(code(&r), 2);
    assert!(stderr(&r).contains("index 1"), "{}", stderr(&r));
}

#[test]
fn extract_rejects_empty_input() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    for kind in ["timestamps", "interarrivals"] {
        let r = randcert(&["extract", "-i", p(&empty), "--kind", kind]);
        assert_eq!(code(&r), 2);
    }
    let r = randcert(&["extract", "-i", p(&empty)]);
    assert_eq!(code(&r), 2, "kind is never guessed");
}

#[test]
fn detector_tags_round_trip_through_extract() {
    let dir = tempfile::tempdir().unwrap();
    let tags = dir.path().join("tags.bin");
    let ids = generate(
        dir.path(),
        "ids.bin",
        &[
            "--kind",
            "detector",
            "-n",
            "4097",
            "--seed",
            "1",
            "--dead-time",
            "50",
            "--tags",
            p(&tags),
            "--tag-format",
            "binary",
        ],
    );
    assert_eq!(fs::metadata(&ids).unwrap().len(), 4097_u64.div_ceil(8));
    assert_eq!(fs::metadata(&tags).unwrap().len(), 4097 * 8);
    let out = dir.path().join("parity.bin");
    let r = randcert(&[
        "extract",
        "-i",
        p(&tags),
        "--tag-format",
        "binary",
        "--kind",
        "timestamps",
        "-o",
        p(&out),
        "--out-format",
        "packed",
    ]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    assert!(stdout(&r).contains("n=4096"));
    assert_eq!(fs::metadata(&out).unwrap().len(), 512);
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(
        dir.path(),
        "a.bin",
        &[
            "--kind",
            "markov",
            "--stay-prob",
            "0.3",
            "-n",
            "1000",
            "--seed",
            "9",
        ],
    );
    let b = generate(
        dir.path(),
        "b.bin",
        &[
            "--kind",
            "markov",
            "--stay-prob",
            "0.3",
            "-n",
            "1000",
            "--seed",
            "9",
        ],
    );
    let c = generate(
        dir.path(),
        "c.bin",
        &[
            "--kind",
            "markov",
            "--stay-prob",
            "0.3",
            "-n",
            "1000",
            "--seed",
            "10",
        ],
    );
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());

    let r = randcert(&[
        "generate",
        "--kind",
        "bernoulli",
        "--theta",
        "2",
        "-n",
        "8",
        "-o",
        p(&dir.path().join("x")),
    ]);
    assert_eq!(code(&r), 2);
    let r = randcert(&[
        "generate",
        "--kind",
        "bernoulli",
        "-n",
        "8",
        "-o",
        p(&dir.path().join("y")),
        "--tags",
        p(&dir.path().join("t")),
    ]);
    assert_eq!(code(&r), 2);
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let bits = generate(
        dir.path(),
        "coin.bin",
        &["--kind", "bernoulli", "-n", "2^16", "--seed", "4"],
    );
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_randcert"))
            .args(["analyze", "-i", &bits, "-f", "packed", "--json", "-"])
            .env("RANDCERT_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let auto = run("0");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, auto.stdout);
    assert_eq!(code(&run("many")), 2);
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(code(&randcert(&["--help"])), 0);
    assert_eq!(code(&randcert(&["--version"])), 0);
    assert_eq!(code(&randcert(&[])), 2);
}
