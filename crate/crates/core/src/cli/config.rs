use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::boost::TrainConfig;
use crate::eval::{Condition, Holdout, Normalization};
use crate::labels::LabelSource;

/// Everything a run needs besides per-command file arguments. Read from a
/// TOML file; command-line flags override individual values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub corpus: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    pub label_source: LabelSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub redirects: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub bootstrap: usize,
    pub min_per_class: usize,
    pub condition: Condition,
    pub normalization: Normalization,
    pub holdout: Holdout,
    pub alpha: f64,
    pub comparisons: usize,
    pub prior_matched: bool,
    pub top_k: usize,
    pub train: TrainConfig,
    pub experiment: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Explicit revision counts; the quarter-decade grid from 10^3 when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<usize>>,
    pub repeats: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<NaiveDate>,
    /// Datasets pooled into the group, as `topic.lang`; all when empty.
    pub datasets: Vec<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig { grid: None, repeats: 10, cutoff: None, datasets: Vec::new() }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: Vec::new(),
            labels: None,
            label_source: LabelSource::Perennial,
            redirects: None,
            out_dir: PathBuf::from("out"),
            seed: 0,
            bootstrap: 100,
            min_per_class: 2,
            condition: Condition::CrossLanguage,
            normalization: Normalization::None,
            holdout: Holdout::AllDatasets,
            alpha: 0.05,
            comparisons: 1,
            prior_matched: false,
            top_k: 10,
            train: TrainConfig::default(),
            experiment: ExperimentConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("reading config {}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| anyhow::anyhow!("config {}: {e}", path.display()))
    }
}
