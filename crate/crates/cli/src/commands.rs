use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use randcert::bayes::partition_count;
use randcert::bitstream::load;
use randcert::blockstats::count_blocks_par;
use randcert::extract::{
    parse_timetags_binary, parse_timetags_text, write_timetags_binary, write_timetags_text,
};
use randcert::report::{
    analyze as run_analysis, InputMeta, PosteriorOptions, MAX_POSTERIOR_MODELS,
};
use randcert::simgen::{generate as run_generator, DetectorParams, Generated};
use randcert::{
    bayes_bound_rhs, borel_bound, enumerate_partitions, interarrivals, max_borel_level,
    posterior as run_posterior, timetags_to_bits, BitFormat, BitSequence, Error, GeneratorConfig,
    ModelPrior, TimeTagSeries,
};

use crate::{
    AnalyzeArgs, BoundsArgs, ExtractArgs, GenerateArgs, GeneratorArg, InputArgs, KindArg,
    PosteriorArgs, TagFormat,
};

/// A failure rendered on stderr, with the file it concerns when known.
pub struct CliError(String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError(e.to_string())
    }
}

fn at(path: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| CliError(format!("{}: {e}", path.display()))
}

fn io_at(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError(format!("{}: {e}", path.display()))
}

/// `Ok(true)` when every check passed, `Ok(false)` when one failed.
pub type Outcome = Result<bool, CliError>;

fn load_input(args: &InputArgs) -> Result<BitSequence, CliError> {
    let format = BitFormat::from(args.format);
    let seq = load(&args.input, format, args.n).map_err(at(&args.input))?;
    match (format, args.n) {
        (BitFormat::Ascii, Some(n)) if n > seq.len() => Err(at(&args.input)(Error::Length {
            requested: n,
            available: seq.len(),
        })),
        (BitFormat::Ascii, Some(n)) => Ok(seq.slice(0, n)?),
        _ => Ok(seq),
    }
}

/// Writes `text` to `path`, or to stdout when `path` is `-`.
fn emit(path: &Path, text: &str) -> Result<(), CliError> {
    if path.as_os_str() == "-" {
        println!("{text}");
        return Ok(());
    }
    fs::write(path, text).map_err(io_at(path))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_at(path))
}

fn write_bits(seq: &BitSequence, path: &Path, format: BitFormat) -> Result<(), CliError> {
    let mut w = create(path)?;
    match format {
        BitFormat::Ascii => seq.write_ascii(&mut w, Some(80)),
        BitFormat::Packed => seq.write_packed(&mut w),
    }
    .and_then(|_| w.flush())
    .map_err(io_at(path))
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

pub fn analyze(args: AnalyzeArgs) -> Outcome {
    let seq = load_input(&args.input)?;
    let meta = InputMeta {
        path: Some(args.input.input.display().to_string()),
        format: Some(args.input.format.into()),
        n: 0,
    };
    let opts = args.bayes_posterior.then_some(PosteriorOptions {
        max_blocks: args.max_blocks,
    });
    let report = run_analysis(&seq, meta, args.max_level, opts)?;

    if args.json.as_deref().map_or(true, |p| p.as_os_str() != "-") {
        println!("{} ({} bits)", args.input.input.display(), report.input.n);
        println!("level  max|dev|    borel bound        lhs        rhs  borel  bayes");
        for (b, c) in report.borel.levels.iter().zip(&report.bayes_bound) {
            println!(
                "{:>5}  {:>10.3e}  {:>10.3e}  {:>10.3e}  {:>10.3e}  {:>5}  {:>5}",
                b.level,
                b.max_abs_deviation(),
                b.bound,
                c.lhs,
                c.rhs,
                verdict(b.passes),
                verdict(c.passes)
            );
        }
        for table in report.posterior.iter().flatten() {
            println!(
                "posterior level {}: best {} (p = {:.4}) among {} models, one-block p = {}",
                table.level,
                table.best(),
                table.posteriors[table.best_index],
                table.models.len(),
                table
                    .symmetric_posterior
                    .map_or_else(|| "n/a".to_string(), |p| format!("{p:.4}"))
            );
        }
        println!(
            "verdict: {}",
            if report.verdicts.all_pass() {
                "pass"
            } else {
                "FAIL"
            }
        );
    }
    if let Some(path) = &args.json {
        emit(path, &report.to_json()?)?;
    }
    if let Some(path) = &args.csv {
        let mut w = create(path)?;
        report
            .write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(io_at(path))?;
    }
    Ok(report.verdicts.all_pass())
}

#[derive(Serialize)]
struct BoundRow {
    i: u32,
    borel_bound: f64,
    bayes_rhs: f64,
}

#[derive(Serialize)]
struct BoundsTable {
    n: u64,
    i_max: u32,
    levels: Vec<BoundRow>,
}

pub fn bounds(args: BoundsArgs) -> Outcome {
    let n = args.n;
    let imax = max_borel_level(n)?;
    let levels: Vec<u32> = if args.levels.is_empty() {
        (1..=imax).collect()
    } else {
        args.levels.clone()
    };
    if let Some(&bad) = levels.iter().find(|&&l| l == 0 || l > imax) {
        return Err(CliError(format!(
            "level {bad} is not admissible for n = {n}: i_max = {imax}"
        )));
    }
    let borel = borel_bound(n)?;
    let rows = levels
        .iter()
        .map(|&i| {
            Ok(BoundRow {
                i,
                borel_bound: borel,
                bayes_rhs: bayes_bound_rhs(n, i)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    if args.json {
        let table = BoundsTable {
            n,
            i_max: imax,
            levels: rows,
        };
        let text = serde_json::to_string_pretty(&table)
            .map_err(|e| CliError(format!("cannot serialise bounds: {e}")))?;
        println!("{text}");
    } else {
        println!("n = {n}, i_max = {imax}");
        println!("level  borel bound    bayes rhs");
        for r in &rows {
            println!(
                "{:>5}  {:>11.5e}  {:>11.5e}",
                r.i, r.borel_bound, r.bayes_rhs
            );
        }
    }
    Ok(true)
}

pub fn extract(args: ExtractArgs) -> Outcome {
    let path = &args.input;
    let data = fs::read(path).map_err(io_at(path))?;
    let values = match args.tag_format {
        TagFormat::Text => parse_timetags_text(&data, args.unit),
        TagFormat::Binary => parse_timetags_binary(&data),
    }
    .map_err(at(path))?;
    if values.is_empty() {
        return Err(CliError(format!(
            "{}: no time tags in input",
            path.display()
        )));
    }
    let unit = args.unit.unwrap_or_default();
    let series = match args.kind {
        KindArg::Timestamps => {
            let stamps = TimeTagSeries::timestamps(values, unit).map_err(at(path))?;
            interarrivals(&stamps).map_err(at(path))?
        }
        KindArg::Interarrivals => TimeTagSeries::interarrivals(values, unit),
    };
    let bits = timetags_to_bits(&series, args.divisor)?;
    if let Some(out) = &args.output {
        write_bits(&bits, out, args.out_format.into())?;
    }
    let ones = bits.count_ones();
    let preview = bits.to_ascii(None);
    let preview = preview.trim_end();
    let shown = &preview[..preview.len().min(64)];
    let more = if preview.len() > 64 { "..." } else { "" };
    println!(
        "n={} ones={} fraction={:.6} bits={shown}{more}",
        bits.len(),
        ones,
        ones as f64 / bits.len() as f64
    );
    Ok(true)
}

pub fn generate(args: GenerateArgs) -> Outcome {
    let cfg = match args.kind {
        GeneratorArg::Bernoulli => GeneratorConfig::bernoulli(args.theta, args.n, args.seed),
        GeneratorArg::Markov => GeneratorConfig::markov(args.stay_prob, args.n, args.seed),
        GeneratorArg::Detector => GeneratorConfig::detector(
            DetectorParams {
                mean_interarrival: args.mean_interarrival,
                dead_time: args.dead_time,
                afterpulse_prob: args.afterpulse_prob,
                afterpulse_delay: args.afterpulse_delay,
            },
            args.n,
            args.seed,
        ),
    };
    let format = BitFormat::from(args.format);
    match run_generator(&cfg)? {
        Generated::Bits(seq) => {
            if args.tags.is_some() {
                return Err(CliError(
                    "--tags only applies to the detector generator".into(),
                ));
            }
            write_bits(&seq, &args.output, format)?;
            println!("wrote {} bits to {}", seq.len(), args.output.display());
        }
        Generated::Detector { tags, bits } => {
            write_bits(&bits, &args.output, format)?;
            println!(
                "wrote {} detector bits to {}",
                bits.len(),
                args.output.display()
            );
            if let Some(path) = &args.tags {
                let mut w = create(path)?;
                match args.tag_format {
                    TagFormat::Text => write_timetags_text(&mut w, &tags.values, Some(tags.unit)),
                    TagFormat::Binary => write_timetags_binary(&mut w, &tags.values),
                }
                .and_then(|_| w.flush())
                .map_err(io_at(path))?;
                println!("wrote {} time tags to {}", tags.len(), path.display());
            }
        }
    }
    Ok(true)
}

pub fn posterior(args: PosteriorArgs) -> Outcome {
    let seq = load_input(&args.input)?;
    let level = args.level;
    let imax = max_borel_level(seq.len()).map_err(at(&args.input.input))?;
    if level == 0 || level > imax {
        return Err(CliError(format!(
            "level {level} is not admissible for n = {}: i_max = {imax}",
            seq.len()
        )));
    }
    let size = 1usize << level;
    let cap = args.max_blocks.map(|k| k.min(size));
    let count = partition_count(size, cap);
    if count > MAX_POSTERIOR_MODELS {
        return Err(CliError(format!(
            "level {level} has {count} partition models; pass --max-blocks (e.g. 2)"
        )));
    }
    let counts = count_blocks_par(&seq, level)?;
    let models = enumerate_partitions(size, cap)?.collect();
    let table = run_posterior(&counts, models, ModelPrior::Uniform)?;

    if args.json.as_deref().map_or(true, |p| p.as_os_str() != "-") {
        println!(
            "level {level}: {} models, {} blocks of {level} bits",
            table.models.len(),
            counts.total
        );
        println!(
            "rank  model{}  blocks   log-evidence   posterior",
            " ".repeat(size.saturating_sub(5))
        );
        for (rank, &k) in table.ranking().iter().take(args.top).enumerate() {
            let m = &table.models[k];
            println!(
                "{:>4}  {:<w$}  {:>6}  {:>13.4}  {:>10.4e}",
                rank + 1,
                m.to_string(),
                m.num_blocks(),
                table.log_marginals[k],
                table.posteriors[k],
                w = size.max(5)
            );
        }
    }
    if let Some(path) = &args.json {
        let text = serde_json::to_string_pretty(&table)
            .map_err(|e| CliError(format!("cannot serialise posterior: {e}")))?;
        emit(path, &text)?;
    }
    Ok(table.best().is_one_block())
}
