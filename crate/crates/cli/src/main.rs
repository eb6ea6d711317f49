//! `randcert`: Borel-normality and Bayesian randomness checks for bit files.
//!
//! Exit status is 0 when every requested check passes, 1 when one fails and
//! 2 on usage or data errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use randcert::extract::TimeUnit;
use randcert::BitFormat;

#[derive(Parser)]
#[command(
    name = "randcert",
    version,
    about = "Randomness certification for binary sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Borel and Bayesian-bound tests (and optionally the posterior) on a bit file.
    Analyze(AnalyzeArgs),
    /// Print the Borel bound and the Bayesian bound for a sequence length.
    Bounds(BoundsArgs),
    /// Turn photon time tags into bits by interarrival parity.
    Extract(ExtractArgs),
    /// Write a simulated bit sequence (and detector time tags).
    Generate(GenerateArgs),
    /// Posterior over partition models at one level.
    Posterior(PosteriorArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Ascii,
    Packed,
}

impl From<FormatArg> for BitFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Ascii => BitFormat::Ascii,
            FormatArg::Packed => BitFormat::Packed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TagFormat {
    Text,
    Binary,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Timestamps,
    Interarrivals,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorArg {
    Bernoulli,
    Markov,
    Detector,
}

/// Input bit file shared by `analyze` and `posterior`.
#[derive(Args)]
struct InputArgs {
    /// Bit file to read.
    #[arg(long, short)]
    input: PathBuf,
    /// Encoding of the input file.
    #[arg(long, short, value_enum)]
    format: FormatArg,
    /// Use only the first N bits (packed files may carry pad bits).
    #[arg(long, short, value_parser = parse_count)]
    n: Option<u64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Highest level to test; defaults to the largest admissible one.
    #[arg(long)]
    max_level: Option<u32>,
    /// Also compute the posterior over partition models at each level.
    #[arg(long)]
    bayes_posterior: bool,
    /// Blocks allowed per partition model (needed at level 4).
    #[arg(long, requires = "bayes_posterior")]
    max_blocks: Option<usize>,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write per-substring deviations as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Sequence length; accepts `2^k`.
    #[arg(long, short, value_parser = parse_count)]
    n: u64,
    /// Levels to tabulate, comma separated; defaults to 1..=i_max.
    #[arg(long, value_delimiter = ',')]
    levels: Vec<u32>,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExtractArgs {
    /// Time-tag file.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    tag_format: TagFormat,
    /// Whether the file holds absolute event times or their differences.
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Expected unit token in text input.
    #[arg(long)]
    unit: Option<TimeUnit>,
    /// Divide values by this before taking parity.
    #[arg(long, default_value_t = 1)]
    divisor: u64,
    /// Where to write the bits.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ascii")]
    out_format: FormatArg,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: GeneratorArg,
    /// Number of bits (recorded events for `detector`); accepts `2^k`.
    #[arg(long, short, value_parser = parse_count)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probability of a one (bernoulli).
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Probability of repeating the previous bit (markov).
    #[arg(long, default_value_t = 0.5)]
    stay_prob: f64,
    /// Mean photon interarrival time in tag units (detector).
    #[arg(long, default_value_t = 1000.0)]
    mean_interarrival: f64,
    #[arg(long, default_value_t = 0)]
    dead_time: u64,
    #[arg(long, default_value_t = 0.0)]
    afterpulse_prob: f64,
    #[arg(long, default_value_t = 0)]
    afterpulse_delay: u64,
    /// Bit output file (detector identities for `detector`).
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "packed")]
    format: FormatArg,
    /// Also write the detector time tags here.
    #[arg(long)]
    tags: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    tag_format: TagFormat,
}

#[derive(Args)]
struct PosteriorArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    level: u32,
    #[arg(long)]
    max_blocks: Option<usize>,
    /// Number of top-ranked models to print.
    #[arg(long, default_value_t = 5)]
    top: usize,
    /// Write the posterior table as JSON (`-` for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Accepts plain integers and powers of two written `2^k`.
fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Some(exp) = s.strip_prefix("2^") {
        let k: u32 = exp
            .parse()
            .map_err(|e| format!("bad exponent in '{s}': {e}"))?;
        return 1u64
            .checked_shl(k)
            .filter(|_| k < 64)
            .ok_or_else(|| format!("2^{k} does not fit in 64 bits"));
    }
    s.replace('_', "")
        .parse()
        .map_err(|e| format!("'{s}' is not a count: {e}"))
}

/// Sizes the rayon pool from `RANDCERT_THREADS` (0 or unset means automatic).
fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("RANDCERT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| format!("RANDCERT_THREADS must be a non-negative integer, got '{value}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| format!("cannot configure worker threads: {e}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let outcome = match cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Bounds(a) => commands::bounds(a),
        Command::Extract(a) => commands::extract(a),
        Command::Generate(a) => commands::generate(a),
        Command::Posterior(a) => commands::posterior(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
