//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, missing
//! settings), 2 for data errors (unreadable or invalid inputs, failed
//! training or evaluation).

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

pub use config::{ExperimentConfig, RunConfig};
pub use output::{sha256_file, InputDigest, Report};

use crate::eval::{Condition, Holdout, Normalization};
use crate::labels::LabelSource;

#[derive(Debug, Parser)]
#[command(name = "wikicred", version, about = "Source reliability from wiki edit histories")]
pub struct Cli {
    /// TOML run configuration; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump merged revisions' source edits and per-article domain timelines.
    Extract(CorpusArgs),
    /// Build one feature matrix CSV per dataset.
    Features(CorpusArgs),
    /// Train an ensemble on a labeled feature matrix.
    Train(TrainCmd),
    /// Score every domain of a matrix with a trained ensemble.
    Score(ScoreCmd),
    /// Per-feature attributions and a top-k summary.
    Explain(ExplainCmd),
    /// Leave-one-out evaluation of one matrix with bootstrap metrics.
    Evaluate(EvaluateCmd),
    /// Train on other datasets and evaluate on a test matrix.
    Adapt(AdaptCmd),
    /// Bootstrap metrics of random predictions for a matrix's labels.
    Baseline(BaselineCmd),
    /// Simulation experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Download page histories from a MediaWiki API into a corpus file.
    #[cfg(feature = "fetch")]
    Fetch(FetchCmd),
}

#[cfg(feature = "fetch")]
#[derive(Debug, Args)]
pub struct FetchCmd {
    /// API endpoint, e.g. https://en.wikipedia.org/w/api.php.
    #[arg(long)]
    pub base_url: String,
    /// Page id to download; repeat for several.
    #[arg(long = "page-id", required = true)]
    pub page_id: Vec<u64>,
    #[arg(long)]
    pub lang: String,
    #[arg(long)]
    pub topic: String,
    /// Corpus file to append to.
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    /// Resume state; defaults to the output path with a `.cursor` suffix.
    #[arg(long, value_name = "FILE")]
    pub cursor: Option<PathBuf>,
    /// Milliseconds between requests, at least 100.
    #[arg(long, default_value_t = 100)]
    pub interval_ms: u64,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Master seed for every random draw.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Corpus file in JSON Lines form; repeat for several files.
    #[arg(long, value_name = "FILE")]
    pub corpus: Vec<PathBuf>,
    /// Reliability label CSV with a `domain,category` header.
    #[arg(long, value_name = "FILE")]
    pub labels: Option<PathBuf>,
    /// Category vocabulary of the label file.
    #[arg(long, value_enum)]
    pub label_source: Option<LabelSource>,
    /// Redirect map, one `from<TAB>to` URL prefix pair per line.
    #[arg(long, value_name = "FILE")]
    pub redirects: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Boosting rounds.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Shrinkage applied to every leaf, in (0, 1].
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Maximum tree depth, 1 to 5.
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// L2 penalty on leaf values.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Minimum gain for a split.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Weight of reliable rows; n_unreliable / n_reliable when unset.
    #[arg(long)]
    pub pos_weight: Option<f64>,
    /// Minimum labeled domains per class.
    #[arg(long)]
    pub min_per_class: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainCmd {
    /// Labeled feature matrix CSV.
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,
    /// Ensemble file to write; defaults to `<out>/model/<matrix stem>.json`.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ScoreCmd {
    /// Ensemble file written by `train`.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Feature matrix CSV to score.
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ExplainCmd {
    /// Ensemble file written by `train`.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Feature matrix CSV whose rows are explained.
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,
    /// Background matrix; the explained matrix when absent.
    #[arg(long, value_name = "FILE")]
    pub background: Option<PathBuf>,
    /// Number of features in the summary.
    #[arg(long)]
    pub top_k: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Bootstrap resamples.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Also compare against a random baseline with a Mann-Whitney test.
    #[arg(long)]
    pub with_baseline: bool,
    /// Significance level before the Bonferroni correction.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number of comparisons in the batch, for the Bonferroni correction.
    #[arg(long)]
    pub comparisons: Option<usize>,
    /// Random baseline draws reliable at the observed rate instead of 1/2.
    #[arg(long)]
    pub prior_matched: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateCmd {
    /// Labeled feature matrix CSV.
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,
    /// Quantile-normalize the matrix first.
    #[arg(long, value_enum)]
    pub normalize: Option<Normalization>,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct AdaptCmd {
    /// Training matrix CSV; repeat to pool several.
    #[arg(long = "train-matrix", value_name = "FILE", required = true)]
    pub train_matrix: Vec<PathBuf>,
    /// Test matrix CSV.
    #[arg(long, value_name = "FILE")]
    pub test: PathBuf,
    /// Evaluation condition.
    #[arg(long, value_enum)]
    pub condition: Option<Condition>,
    /// Per-dataset normalization before pooling.
    #[arg(long, value_enum)]
    pub normalize: Option<Normalization>,
    /// Rows dropped with a held-out domain in mixed and pooled conditions.
    #[arg(long, value_enum)]
    pub holdout: Option<Holdout>,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct BaselineCmd {
    /// Labeled feature matrix CSV; only its labels are used.
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,
    /// Bootstrap resamples.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Draw reliable at the observed rate instead of 1/2.
    #[arg(long)]
    pub prior_matched: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCmd {
    /// F1 against the number of sampled merged revisions.
    Scaling(ScalingCmd),
}

#[derive(Debug, Args)]
pub struct ScalingCmd {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Revision counts to sample, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    /// Samples per grid point.
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Keep only revisions made on or before this day (YYYY-MM-DD).
    #[arg(long)]
    pub cutoff: Option<NaiveDate>,
    /// Dataset to include as `topic.lang`; repeat to pool several. All when absent.
    #[arg(long)]
    pub dataset: Vec<String>,
    #[command(flatten)]
    pub train: TrainArgs,
}

/// Usage problems exit with 1; everything else with 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Data(e.into())
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Messages go to stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::execute(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}
