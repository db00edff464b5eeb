//! Metrics, validation protocols, resampling and significance tests.

mod adapt;
mod bootstrap;
mod loo;
mod metrics;
mod scaling;
mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adapt::{adapt, training_keys, AdaptOptions, Condition, Holdout, Normalization};
pub use bootstrap::{bootstrap_metrics, derive_seed, random_baseline, rng as seeded_rng, BootstrapSummary, Stat};
pub use loo::{is_single_class, loo_validate, loo_validate_with};
pub use metrics::{f1_macro, metrics, ClassMetrics, Metrics, Prediction, PredictionSet, THRESHOLD};
pub use scaling::{
    cutoff_end, default_grid, log_grid, prepare_group, scaling_experiment, subsample, CurvePoint, ScalingCurve,
    ScalingOptions,
};
pub use stats::{
    mann_whitney, mann_whitney_with, significance, u_statistic, Alternative, MannWhitney, Method, Significance,
    Verdict, EXACT_LIMIT,
};

use crate::boost::{ModelError, TrainError};
use crate::features::MatrixError;
use crate::timeline::TimelineError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("need at least 2 labeled rows, found {0}")]
    TooFewRows(usize),
    #[error("fold holding out {domain}: {source}")]
    Fold { domain: String, source: TrainError },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("training data has {reliable} reliable and {unreliable} unreliable labeled domains, need {min} of each")]
    InsufficientLabels { reliable: usize, unreliable: usize, min: usize },
    #[error("{0}")]
    ModeMismatch(String),
    #[error("no revisions left to evaluate")]
    EmptyDataset,
    #[error(transparent)]
    Timeline(#[from] TimelineError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Summary of one evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub condition: Condition,
    pub normalization: Normalization,
    pub train: Vec<String>,
    pub test: String,
    pub predictions: usize,
    /// Metrics on the predictions themselves, before resampling.
    pub point: Metrics,
    pub bootstrap: BootstrapSummary,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub significance: Option<Significance>,
}

impl EvalReport {
    /// Bootstraps `p` and assembles the report. Panics on an empty set.
    pub fn new(
        condition: Condition,
        normalization: Normalization,
        train: Vec<String>,
        test: String,
        p: &PredictionSet,
        resamples: usize,
        seed: u64,
    ) -> Self {
        let pairs = p.pairs();
        EvalReport {
            condition,
            normalization,
            train,
            test,
            predictions: p.len(),
            point: metrics(&pairs).expect("non-empty predictions"),
            bootstrap: bootstrap_metrics(&pairs, resamples, seed),
            significance: None,
        }
    }

    /// Compares this run's bootstrap F1 sample against a baseline sample.
    pub fn with_significance(mut self, baseline: &[f64], alpha: f64, comparisons: usize) -> Self {
        self.significance = Some(significance(&self.bootstrap.f1_samples, baseline, alpha, comparisons));
        self
    }
}
