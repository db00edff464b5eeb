//! Training on some datasets and testing on another.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::loo::par_map;
use super::metrics::{Prediction, PredictionSet};
use super::EvalError;
use crate::boost::{train, TrainConfig};
use crate::features::{quantile_normalize, FeatureMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Native,
    CrossLanguage,
    CrossTopic,
    Mixed,
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    None,
    Quantile,
}

/// Which rows leave the training pool when a test domain is held out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Holdout {
    /// The domain's rows in every pooled dataset.
    #[default]
    AllDatasets,
    /// Only the held-out row of the test dataset.
    TestOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptOptions {
    pub condition: Condition,
    pub normalization: Normalization,
    pub holdout: Holdout,
    pub min_per_class: usize,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        AdaptOptions {
            condition: Condition::CrossLanguage,
            normalization: Normalization::None,
            holdout: Holdout::AllDatasets,
            min_per_class: 2,
        }
    }
}

fn check_keys(train: &[FeatureMatrix], test: &FeatureMatrix, condition: Condition) -> Result<(), EvalError> {
    for m in train {
        let (t, k) = (&test.key, &m.key);
        let problem = match condition {
            Condition::CrossLanguage if k.topic != t.topic => Some("cross-language training data must share the test topic"),
            Condition::CrossLanguage if k.lang == t.lang => Some("cross-language training data must use other languages"),
            Condition::CrossTopic if k.lang != t.lang => Some("cross-topic training data must share the test language"),
            Condition::CrossTopic if k.topic == t.topic => Some("cross-topic training data must cover other topics"),
            Condition::Mixed if k.topic != t.topic => Some("mixed training data must share the test topic"),
            _ => None,
        };
        if let Some(p) = problem {
            return Err(EvalError::ModeMismatch(format!("{p} (train {k}, test {t})")));
        }
        if m.feature_ids != test.feature_ids {
            return Err(EvalError::ModeMismatch(format!("feature columns of {k} differ from {t}")));
        }
    }
    Ok(())
}

fn check_labels(m: &FeatureMatrix, min: usize) -> Result<(), EvalError> {
    let (reliable, unreliable) = m.class_counts();
    if reliable < min || unreliable < min {
        return Err(EvalError::InsufficientLabels { reliable, unreliable, min });
    }
    Ok(())
}

/// Scores the labeled rows of `test` with models trained on `train`.
///
/// Cross conditions train one model on the pooled training matrices. Mixed
/// and pooled conditions run leave-one-out over the test rows, training each
/// fold on the pooled matrices plus the remaining test rows. With quantile
/// normalization every matrix is normalized on its own before pooling.
/// `Native` ignores `train` and is plain leave-one-out on `test`.
pub fn adapt(
    train_sets: &[FeatureMatrix],
    test: &FeatureMatrix,
    opts: &AdaptOptions,
    cfg: &TrainConfig,
) -> Result<PredictionSet, EvalError> {
    let normalize = |m: &FeatureMatrix| match opts.normalization {
        Normalization::None => m.clone(),
        Normalization::Quantile => quantile_normalize(m),
    };
    let test_n = normalize(test);
    if opts.condition == Condition::Native {
        check_labels(&test_n, opts.min_per_class)?;
        return super::loo_validate(&test_n, cfg);
    }
    check_keys(train_sets, test, opts.condition)?;
    // the test dataset itself never counts as outside training data
    let others: Vec<FeatureMatrix> = train_sets.iter().filter(|m| m.key != test.key).map(normalize).collect();

    match opts.condition {
        Condition::CrossLanguage | Condition::CrossTopic => {
            if others.is_empty() {
                return Err(EvalError::ModeMismatch("no training datasets".into()));
            }
            let pooled = FeatureMatrix::concat(&others.iter().collect::<Vec<_>>())?;
            check_labels(&pooled, opts.min_per_class)?;
            let model = train(&pooled, cfg)?;
            let predictions = test_n
                .labeled_rows()
                .into_iter()
                .map(|r| {
                    let margin = model.predict_margin(test_n.row(r)).expect("same columns");
                    Prediction::from_margin(test_n.domains[r].clone(), test_n.labels[r].expect("labeled"), margin)
                })
                .collect();
            Ok(PredictionSet { predictions })
        }
        Condition::Mixed | Condition::Pooled => {
            let mut parts: Vec<&FeatureMatrix> = others.iter().collect();
            parts.push(&test_n);
            let pooled = FeatureMatrix::concat(&parts)?;
            check_labels(&pooled, opts.min_per_class)?;
            let offset = pooled.n_rows() - test_n.n_rows();
            let test_rows = test_n.labeled_rows();
            let pool_labeled = pooled.labeled_rows();
            let folds = par_map(test_rows.len(), |k| {
                let held = offset + test_rows[k];
                let domain = &pooled.domains[held];
                let rows: Vec<usize> = pool_labeled
                    .iter()
                    .copied()
                    .filter(|&r| match opts.holdout {
                        Holdout::AllDatasets => &pooled.domains[r] != domain,
                        Holdout::TestOnly => r != held,
                    })
                    .collect();
                let model = crate::boost::train_rows(&pooled, &rows, cfg)
                    .map_err(|source| EvalError::Fold { domain: domain.clone(), source })?;
                let margin = model.predict_margin(pooled.row(held)).expect("same columns");
                Ok::<_, EvalError>(Prediction::from_margin(domain.clone(), pooled.labels[held].expect("labeled"), margin))
            });
            Ok(PredictionSet { predictions: folds.into_iter().collect::<Result<_, _>>()? })
        }
        Condition::Native => unreachable!("handled above"),
    }
}

/// Keys of the matrices that actually train a model for `test`.
pub fn training_keys(train_sets: &[FeatureMatrix], test: &FeatureMatrix, condition: Condition) -> Vec<String> {
    let mut keys: BTreeSet<String> =
        train_sets.iter().filter(|m| m.key != test.key).map(|m| m.key.to_string()).collect();
    if matches!(condition, Condition::Native | Condition::Mixed | Condition::Pooled) {
        keys.insert(test.key.to_string());
    }
    keys.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DatasetKey;
    use crate::labels::Label;

    fn matrix(topic: &str, lang: &str, rows: &[(&str, f64, bool)]) -> FeatureMatrix {
        FeatureMatrix::from_rows(
            DatasetKey::new(topic, lang),
            vec!["f".into()],
            rows.iter().map(|(d, v, y)| (d.to_string(), vec![*v], Some(Label::from_bool(*y)))).collect(),
        )
    }

    fn rows(scale: f64) -> Vec<(&'static str, f64, bool)> {
        ["a", "b", "c", "d", "e", "f"].iter().enumerate().map(|(i, d)| (*d, i as f64 * scale, i >= 3)).collect()
    }

    #[test]
    fn cross_on_itself_is_resubstitution() {
        let en = matrix("t", "en", &rows(1.0));
        let de = matrix("t", "de", &rows(1.0));
        let p = adapt(&[de], &en, &AdaptOptions::default(), &TrainConfig::default()).unwrap();
        assert_eq!(p.len(), 6);
        assert!(p.predictions.iter().all(|x| x.label == x.predicted));
    }

    #[test]
    fn mode_consistency() {
        let en = matrix("t", "en", &rows(1.0));
        let other_topic = matrix("u", "de", &rows(1.0));
        let e = adapt(&[other_topic], &en, &AdaptOptions::default(), &TrainConfig::default());
        assert!(matches!(e, Err(EvalError::ModeMismatch(_))));
    }

    #[test]
    fn quantile_rescues_distorted_scale() {
        // the other language reports the same ordering on a shifted scale
        let en = matrix("t", "en", &rows(1.0));
        let de = matrix("t", "de", &rows(1.0).into_iter().map(|(d, v, y)| (d, v + 100.0, y)).collect::<Vec<_>>());
        let raw = adapt(std::slice::from_ref(&de), &en, &AdaptOptions::default(), &TrainConfig::default()).unwrap();
        let q = AdaptOptions { normalization: Normalization::Quantile, ..Default::default() };
        let norm = adapt(&[de], &en, &q, &TrainConfig::default()).unwrap();
        let correct = |p: &PredictionSet| p.predictions.iter().filter(|x| x.label == x.predicted).count();
        assert_eq!(correct(&norm), 6);
        assert!(correct(&raw) < 6);
    }

    #[test]
    fn pooled_holdout_removes_domain_everywhere() {
        // every test domain has a twin in the other dataset; keeping the twin
        // in the pool hands each fold one more training row
        let en = matrix("t", "en", &rows(1.0));
        let de = matrix("t", "de", &rows(1.0));
        let all = AdaptOptions { condition: Condition::Mixed, ..Default::default() };
        let test_only = AdaptOptions { holdout: Holdout::TestOnly, ..all.clone() };
        let a = adapt(std::slice::from_ref(&de), &en, &all, &TrainConfig::default()).unwrap();
        let b = adapt(&[de], &en, &test_only, &TrainConfig::default()).unwrap();
        assert_eq!(a.len(), 6);
        assert_ne!(a, b);
    }
}
