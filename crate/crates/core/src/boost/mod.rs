//! Gradient-boosted regression trees on weighted logistic loss.
//!
//! Training is exact greedy and fully deterministic: no subsampling, no
//! early stopping, and ties between equally good splits go to the lowest
//! feature index and then the lowest threshold.

mod attribution;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureMatrix;
use crate::labels::Label;

pub use attribution::{Attribution, Explainer};
pub use tree::{Node, Tree};

pub const SCHEMA: &str = "wikicred.ensemble/1";

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("no labeled rows to train on")]
    Empty,
    #[error("training rows hold a single class ({reliable} reliable, {unreliable} unreliable)")]
    SingleClass { reliable: usize, unreliable: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("feature fingerprint {found} does not match the model's {expected}")]
    FingerprintMismatch { expected: String, found: String },
    #[error("row has {found} values, model expects {expected}")]
    RowWidth { expected: usize, found: usize },
    #[error("background matrix is empty")]
    EmptyBackground,
    #[error("unsupported ensemble schema {0:?}")]
    Schema(String),
    #[error("malformed ensemble: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_depth: usize,
    pub rounds: usize,
    pub lambda: f64,
    pub gamma: f64,
    /// Weight of reliable rows; `None` means n_unreliable / n_reliable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pos_weight: Option<f64>,
    pub base_margin: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            max_depth: 1,
            rounds: 100,
            lambda: 1.0,
            gamma: 0.0,
            pos_weight: None,
            base_margin: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must lie in (0, 1]");
        }
        if !(1..=5).contains(&self.max_depth) {
            return bad("max_depth must lie in 1..=5");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be finite and >= 0");
        }
        if !self.gamma.is_finite() {
            return bad("gamma must be finite");
        }
        if let Some(w) = self.pos_weight {
            if !(w > 0.0 && w.is_finite()) {
                return bad("pos_weight must be finite and > 0");
            }
        }
        if !self.base_margin.is_finite() {
            return bad("base_margin must be finite");
        }
        Ok(())
    }
}

/// n_neg / n_pos.
pub fn positive_class_weight(reliable: usize, unreliable: usize) -> f64 {
    unreliable as f64 / reliable as f64
}

pub fn sigmoid(margin: f64) -> f64 {
    if margin >= 0.0 {
        1.0 / (1.0 + libm::exp(-margin))
    } else {
        let e = libm::exp(margin);
        e / (1.0 + e)
    }
}

/// log(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log1p(libm::exp(-x))
    } else {
        libm::log1p(libm::exp(x))
    }
}

/// Weighted negative log-likelihood of `y` under margins `m`.
pub fn logistic_loss(margins: &[f64], targets: &[f64], weights: &[f64]) -> f64 {
    margins
        .iter()
        .zip(targets)
        .zip(weights)
        .map(|((&m, &y), &w)| w * (y * softplus(-m) + (1.0 - y) * softplus(m)))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StumpEnsemble {
    pub schema: String,
    pub config: TrainConfig,
    /// The weight actually applied to reliable rows.
    pub pos_weight: f64,
    pub fingerprint: String,
    pub n_features: usize,
    pub base_margin: f64,
    pub trees: Vec<Tree>,
}

impl StumpEnsemble {
    /// An ensemble with no trees.
    pub fn constant(fingerprint: String, n_features: usize, base_margin: f64) -> Self {
        StumpEnsemble {
            schema: SCHEMA.to_string(),
            config: TrainConfig { rounds: 0, base_margin, ..TrainConfig::default() },
            pos_weight: 1.0,
            fingerprint,
            n_features,
            base_margin,
            trees: Vec::new(),
        }
    }

    pub fn check_matrix(&self, m: &FeatureMatrix) -> Result<(), ModelError> {
        let found = m.fingerprint();
        if found != self.fingerprint {
            return Err(ModelError::FingerprintMismatch { expected: self.fingerprint.clone(), found });
        }
        Ok(())
    }

    fn check_row(&self, row: &[f64]) -> Result<(), ModelError> {
        if row.len() != self.n_features {
            return Err(ModelError::RowWidth { expected: self.n_features, found: row.len() });
        }
        Ok(())
    }

    pub fn predict_margin(&self, row: &[f64]) -> Result<f64, ModelError> {
        self.check_row(row)?;
        Ok(self.margin_unchecked(row))
    }

    fn margin_unchecked(&self, row: &[f64]) -> f64 {
        self.trees.iter().fold(self.base_margin, |acc, t| acc + t.predict(row))
    }

    pub fn predict_proba(&self, row: &[f64]) -> Result<f64, ModelError> {
        self.predict_margin(row).map(sigmoid)
    }

    /// Margins for every row of `m`, after checking its fingerprint.
    pub fn predict_matrix(&self, m: &FeatureMatrix) -> Result<Vec<f64>, ModelError> {
        self.check_matrix(m)?;
        Ok(m.rows().map(|r| self.margin_unchecked(r)).collect())
    }

    pub fn max_depth(&self) -> usize {
        self.trees.iter().map(Tree::depth).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("ensemble serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let e: StumpEnsemble =
            serde_json::from_str(text).map_err(|err| ModelError::Malformed(err.to_string()))?;
        if e.schema != SCHEMA {
            return Err(ModelError::Schema(e.schema));
        }
        for t in &e.trees {
            t.validate(e.n_features).map_err(ModelError::Malformed)?;
        }
        Ok(e)
    }
}

/// Trains on every labeled row of `m`.
pub fn train(m: &FeatureMatrix, cfg: &TrainConfig) -> Result<StumpEnsemble, TrainError> {
    train_rows(m, &m.labeled_rows(), cfg)
}

/// Trains on the listed rows of `m`, which must all be labeled.
pub fn train_rows(m: &FeatureMatrix, rows: &[usize], cfg: &TrainConfig) -> Result<StumpEnsemble, TrainError> {
    train_traced(m, rows, cfg).map(|(e, _)| e)
}

/// Like [`train_rows`], also returning the weighted training loss before the
/// first round and after each round.
pub fn train_traced(
    m: &FeatureMatrix,
    rows: &[usize],
    cfg: &TrainConfig,
) -> Result<(StumpEnsemble, Vec<f64>), TrainError> {
    cfg.validate()?;
    if rows.is_empty() {
        return Err(TrainError::Empty);
    }
    let labels: Vec<Label> = rows.iter().map(|&r| m.labels[r].expect("training rows are labeled")).collect();
    let reliable = labels.iter().filter(|l| l.is_reliable()).count();
    let unreliable = labels.len() - reliable;
    if reliable == 0 || unreliable == 0 {
        return Err(TrainError::SingleClass { reliable, unreliable });
    }
    for &r in rows {
        if let Some(col) = m.row(r).iter().position(|v| !v.is_finite()) {
            return Err(TrainError::NonFinite { row: r, col });
        }
    }
    let pos_weight = cfg.pos_weight.unwrap_or_else(|| positive_class_weight(reliable, unreliable));
    let targets: Vec<f64> = labels.iter().map(|l| l.target()).collect();
    let weights: Vec<f64> = labels.iter().map(|l| if l.is_reliable() { pos_weight } else { 1.0 }).collect();

    let data = tree::Columns::new(m, rows);
    let mut margins = vec![cfg.base_margin; rows.len()];
    let mut trace = vec![logistic_loss(&margins, &targets, &weights)];
    let mut trees = Vec::with_capacity(cfg.rounds);
    let mut grad = vec![0.0; rows.len()];
    let mut hess = vec![0.0; rows.len()];
    for _ in 0..cfg.rounds {
        for i in 0..rows.len() {
            let p = sigmoid(margins[i]);
            grad[i] = weights[i] * (p - targets[i]);
            hess[i] = weights[i] * p * (1.0 - p);
        }
        let t = tree::grow(&data, &grad, &hess, cfg);
        for (i, mg) in margins.iter_mut().enumerate() {
            *mg += t.predict_with(|f| data.value(i, f));
        }
        trace.push(logistic_loss(&margins, &targets, &weights));
        trees.push(t);
    }
    let e = StumpEnsemble {
        schema: SCHEMA.to_string(),
        config: cfg.clone(),
        pos_weight,
        fingerprint: m.fingerprint(),
        n_features: m.n_cols(),
        base_margin: cfg.base_margin,
        trees,
    };
    Ok((e, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DatasetKey;

    fn matrix(rows: &[(&[f64], bool)]) -> FeatureMatrix {
        let width = rows[0].0.len();
        FeatureMatrix::from_rows(
            DatasetKey::new("t", "en"),
            (0..width).map(|j| format!("f{j}")).collect(),
            rows.iter()
                .enumerate()
                .map(|(i, (r, y))| (format!("d{i}"), r.to_vec(), Some(Label::from_bool(*y))))
                .collect(),
        )
    }

    #[test]
    fn weight_rule() {
        assert_eq!(positive_class_weight(159, 234), 234.0 / 159.0);
        assert!((positive_class_weight(159, 234) - 1.4717).abs() < 1e-4);
    }

    #[test]
    fn zero_rounds_is_a_coin() {
        let m = matrix(&[(&[0.0], true), (&[1.0], false)]);
        let e = train(&m, &TrainConfig { rounds: 0, ..Default::default() }).unwrap();
        assert!(e.trees.is_empty());
        assert_eq!(e.predict_proba(&[3.0]).unwrap(), 0.5);
    }

    #[test]
    fn separates_ten_vs_ten() {
        let rows: Vec<(Vec<f64>, bool)> =
            (0..20).map(|i| (vec![i as f64, ((i * 7) % 5) as f64], i >= 10)).collect();
        let refs: Vec<(&[f64], bool)> = rows.iter().map(|(r, y)| (r.as_slice(), *y)).collect();
        let m = matrix(&refs);
        let e = train(&m, &TrainConfig::default()).unwrap();
        for (r, y) in &rows {
            assert_eq!(e.predict_proba(r).unwrap() >= 0.5, *y);
        }
        // every tree splits the separating feature right between the classes
        match &e.trees[0].nodes[0] {
            Node::Split { feature, threshold, .. } => assert_eq!((*feature, *threshold), (0, 9.5)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        let one_class = matrix(&[(&[0.0], true), (&[1.0], true)]);
        assert_eq!(
            train(&one_class, &TrainConfig::default()),
            Err(TrainError::SingleClass { reliable: 2, unreliable: 0 })
        );
        let nan = matrix(&[(&[f64::NAN], true), (&[1.0], false)]);
        assert_eq!(train(&nan, &TrainConfig::default()), Err(TrainError::NonFinite { row: 0, col: 0 }));
        let empty = FeatureMatrix::new(DatasetKey::new("t", "en"), vec!["f".into()]);
        assert_eq!(train(&empty, &TrainConfig::default()), Err(TrainError::Empty));
        let bad = TrainConfig { learning_rate: 0.0, ..Default::default() };
        assert!(matches!(train(&one_class, &bad), Err(TrainError::InvalidConfig(_))));
    }

    #[test]
    fn single_stump_path_arithmetic() {
        let e = StumpEnsemble {
            trees: vec![Tree::stump(0, 0.5, 0.1, -0.1)],
            ..StumpEnsemble::constant("fp".into(), 2, 0.25)
        };
        assert_eq!(e.predict_margin(&[0.0, 9.0]).unwrap(), 0.25 + 0.1);
        assert_eq!(e.predict_margin(&[0.5, 9.0]).unwrap(), 0.25 - 0.1);
        assert_eq!(e.predict_margin(&[0.0]), Err(ModelError::RowWidth { expected: 2, found: 1 }));
    }

    #[test]
    fn json_round_trip_and_schema() {
        let m = matrix(&[(&[0.0, 2.0], true), (&[1.0, 1.0], false), (&[0.3, 5.0], true)]);
        let e = train(&m, &TrainConfig { rounds: 5, max_depth: 2, ..Default::default() }).unwrap();
        let text = e.to_json();
        assert_eq!(StumpEnsemble::from_json(&text).unwrap(), e);
        let wrong = text.replace(SCHEMA, "other/9");
        assert_eq!(StumpEnsemble::from_json(&wrong), Err(ModelError::Schema("other/9".into())));
    }

    #[test]
    fn fingerprint_mismatch_detected() {
        let m = matrix(&[(&[0.0], true), (&[1.0], false)]);
        let e = train(&m, &TrainConfig::default()).unwrap();
        let mut other = m.clone();
        other.feature_ids = vec!["g".into()];
        assert!(matches!(e.predict_matrix(&other), Err(ModelError::FingerprintMismatch { .. })));
    }
}
