//! Combined analysis report and its JSON/CSV renderings.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bayes::{
    bayes_bound_level, enumerate_partitions, partition_count, posterior, BayesBoundReport,
    ModelPrior, PartitionModel, PosteriorTable,
};
use crate::bitstream::{BitFormat, BitSequence};
use crate::blockstats::{count_blocks_par, substring_bits};
use crate::borel::{report_from_levels, resolve_levels, BorelLevelReport, BorelReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputMeta {
    pub path: Option<String>,
    pub format: Option<BitFormat>,
    pub n: u64,
}

/// Largest model set [`analyze`] will enumerate at one level. Level 4
/// without a block cap (about 1.05e10 partitions) is refused.
pub const MAX_POSTERIOR_MODELS: u128 = 1 << 22;

/// Which models the posterior is computed over at a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PosteriorOptions {
    /// Cap on the number of blocks per partition; `None` enumerates all.
    pub max_blocks: Option<usize>,
}

/// Per-criterion verdicts, each the conjunction over the covered levels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub borel: bool,
    pub bayes_bound: bool,
    /// The one-block model is the posterior mode at every level.
    pub posterior: Option<bool>,
}

impl Verdicts {
    pub fn all_pass(&self) -> bool {
        self.borel && self.bayes_bound && self.posterior.unwrap_or(true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub input: InputMeta,
    pub borel: BorelReport,
    pub bayes_bound: Vec<BayesBoundReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posterior: Option<Vec<PosteriorTable>>,
    pub verdicts: Verdicts,
}

/// Runs the Borel test, the Bayesian bound and optionally the posterior at
/// levels `1..=min(levels, i_max)`, counting each level once.
pub fn analyze(
    seq: &BitSequence,
    input: InputMeta,
    levels: Option<u32>,
    posterior_opts: Option<PosteriorOptions>,
) -> Result<AnalysisReport> {
    let n = seq.len();
    let max = resolve_levels(n, levels)?;
    let mut borel_levels = Vec::with_capacity(max as usize);
    let mut bayes_levels = Vec::with_capacity(max as usize);
    let mut tables = posterior_opts.map(|_| Vec::with_capacity(max as usize));
    for i in 1..=max {
        let counts = count_blocks_par(seq, i)?;
        borel_levels.push(BorelLevelReport::from_counts(&counts, n)?);
        bayes_levels.push(bayes_bound_level(&counts, n)?);
        if let (Some(opts), Some(tables)) = (posterior_opts, tables.as_mut()) {
            let size = 1usize << i;
            let cap = opts.max_blocks.map(|k| k.min(size));
            let count = partition_count(size, cap);
            if count > MAX_POSTERIOR_MODELS {
                return Err(Error::Domain(format!(
                    "posterior at level {i} would enumerate {count} models; \
                     cap the blocks per model (e.g. max_blocks = 2) or lower the level"
                )));
            }
            let models: Vec<PartitionModel> = enumerate_partitions(size, cap)?.collect();
            tables.push(posterior(&counts, models, ModelPrior::Uniform)?);
        }
    }
    let borel = report_from_levels(n, borel_levels);
    let verdicts = Verdicts {
        borel: borel.overall,
        bayes_bound: bayes_levels.iter().all(|r| r.passes),
        posterior: tables
            .as_ref()
            .map(|t| t.iter().all(|t| t.best().is_one_block())),
    };
    Ok(AnalysisReport {
        input: InputMeta { n, ..input },
        borel,
        bayes_bound: bayes_levels,
        posterior: tables,
        verdicts,
    })
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Contract(format!("report serialisation failed: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format {
            offset: 0,
            message: format!("invalid report JSON: {e}"),
        })
    }

    /// One row per substring: `level,substring,deviation,borel_bound,bayes_rhs`.
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        let mut rows = Vec::new();
        for level in &self.borel.levels {
            let rhs = self
                .bayes_bound
                .iter()
                .find(|b| b.level == level.level)
                .map(|b| b.rhs);
            for (j, &d) in level.deviations.iter().enumerate() {
                rows.push(CsvRow {
                    level: level.level,
                    substring: substring_bits(j as u64, level.level),
                    deviation: d,
                    borel_bound: level.bound,
                    bayes_rhs: rhs,
                });
            }
        }
        rows
    }

    /// Writes [`csv_rows`](Self::csv_rows) with a header line.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "level,substring,deviation,borel_bound,bayes_rhs")?;
        for r in self.csv_rows() {
            let rhs = r.bayes_rhs.map(|v| format!("{v:e}")).unwrap_or_default();
            writeln!(
                w,
                "{},{},{:e},{:e},{}",
                r.level, r.substring, r.deviation, r.borel_bound, rhs
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub level: u32,
    pub substring: String,
    pub deviation: f64,
    pub borel_bound: f64,
    pub bayes_rhs: Option<f64>,
}
