//! F1 as a function of how many merged revisions the features see.

use chrono::{DateTime, Duration, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::bootstrap::{derive_seed, rng, Stat};
use super::metrics::f1_macro;
use super::{loo_validate, EvalError};
use crate::boost::TrainConfig;
use crate::corpus::{truncate_before, Dataset, DatasetKey, Tier};
use crate::extractor::Canonicalizer;
use crate::features::compute_features;
use crate::labels::LabelSet;
use crate::pipeline::{PreparedArticle, PreparedDataset};

/// Revision counts 10^start, 10^(start+step), ... up to 10^stop, rounded
/// to the nearest integer.
pub fn log_grid(start: f64, stop: f64, step: f64) -> Vec<usize> {
    assert!(step > 0.0, "positive step");
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    let mut out: Vec<usize> =
        (0..=n).map(|i| libm::pow(10.0, start + step * i as f64).round() as usize).collect();
    out.dedup();
    out
}

/// The default grid: 10^3 to 10^6.75 in quarter decades.
pub fn default_grid() -> Vec<usize> {
    log_grid(3.0, 6.75, 0.25)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingOptions {
    pub grid: Vec<usize>,
    pub repeats: usize,
    /// Last day whose revisions are kept.
    pub cutoff: Option<NaiveDate>,
    pub seed: u64,
    pub min_per_class: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n_revisions: usize,
    pub repeats: usize,
    pub f1_macro: Stat,
    pub f1_samples: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScalingCurve {
    pub available_revisions: usize,
    pub points: Vec<CurvePoint>,
    pub notes: Vec<String>,
}

impl ScalingCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n_revisions,repeats,f1_mean,f1_std\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.n_revisions,
                p.repeats,
                crate::features::format_g17(p.f1_macro.mean),
                crate::features::format_g17(p.f1_macro.std)
            ));
        }
        out
    }
}

/// Start of the day after `cutoff`, the exclusive end of kept revisions.
pub fn cutoff_end(cutoff: NaiveDate) -> DateTime<Utc> {
    (cutoff + Duration::days(1)).and_hms_opt(0, 0, 0).expect("midnight").and_utc()
}

/// Keeps `n` of the group's merged revisions, drawn uniformly without
/// replacement, and rebuilds every article from its surviving revisions.
/// Surviving revisions are not merged again even if a gap leaves two runs by
/// the same user adjacent.
pub fn subsample(group: &PreparedDataset, n: usize, seed: u64) -> PreparedDataset {
    let total = group.merged_revision_count();
    let mut keep = vec![false; total];
    for i in rand::seq::index::sample(&mut rng(seed), total, n.min(total)) {
        keep[i] = true;
    }
    let mut flat = 0;
    let mut articles = Vec::new();
    for a in &group.articles {
        let mut kept = Vec::new();
        for m in &a.merged {
            if keep[flat] {
                kept.push(m.clone());
            }
            flat += 1;
        }
        if !kept.is_empty() {
            articles.push(
                PreparedArticle::from_merged(a.page_id, a.retrieved_at, kept).expect("subsequence of a valid history"),
            );
        }
    }
    PreparedDataset { key: group.key.clone(), tier: group.tier, articles }
}

/// Pools the datasets' articles into one prepared dataset.
pub fn prepare_group(
    datasets: &[Dataset],
    canon: &Canonicalizer<'_>,
    cutoff: Option<NaiveDate>,
) -> Result<PreparedDataset, EvalError> {
    let mut articles = Vec::new();
    for d in datasets {
        let d = match cutoff {
            Some(c) => truncate_before(d, cutoff_end(c)),
            None => d.clone(),
        };
        articles.extend(PreparedDataset::prepare(&d, canon)?.articles);
    }
    if articles.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let key = match datasets {
        [one] => one.key.clone(),
        _ => DatasetKey::new(
            datasets.iter().map(|d| d.key.topic.as_str()).collect::<Vec<_>>().join("+"),
            datasets.iter().map(|d| d.key.lang.as_str()).collect::<Vec<_>>().join("+"),
        ),
    };
    Ok(PreparedDataset { key, tier: Tier::Unassigned, articles })
}

/// Runs leave-one-out on features rebuilt from random revision samples of
/// the group, `repeats` times per grid point. Grid points above the number
/// of available revisions, and repeats whose sample cannot be evaluated,
/// are skipped with a note.
pub fn scaling_experiment(
    datasets: &[Dataset],
    labels: &LabelSet,
    canon: &Canonicalizer<'_>,
    opts: &ScalingOptions,
    cfg: &TrainConfig,
) -> Result<ScalingCurve, EvalError> {
    let group = prepare_group(datasets, canon, opts.cutoff)?;
    let available = group.merged_revision_count();
    let mut curve = ScalingCurve { available_revisions: available, ..Default::default() };
    for (gi, &n) in opts.grid.iter().enumerate() {
        if n > available {
            curve.notes.push(format!("grid point {n} skipped: only {available} merged revisions"));
            continue;
        }
        let mut samples = Vec::new();
        for rep in 0..opts.repeats {
            let seed = derive_seed(derive_seed(opts.seed, gi as u64), rep as u64);
            let sample = subsample(&group, n, seed);
            let mut m = compute_features(&sample);
            m.attach_labels(labels);
            let (reliable, unreliable) = m.class_counts();
            if reliable < opts.min_per_class || unreliable < opts.min_per_class {
                curve.notes.push(format!(
                    "grid point {n}, repeat {rep} skipped: {reliable} reliable / {unreliable} unreliable labeled domains"
                ));
                continue;
            }
            match loo_validate(&m, cfg) {
                Ok(p) => samples.push(f1_macro(&p).expect("non-empty")),
                Err(e) => curve.notes.push(format!("grid point {n}, repeat {rep} skipped: {e}")),
            }
        }
        if !samples.is_empty() {
            curve.points.push(CurvePoint {
                n_revisions: n,
                repeats: samples.len(),
                f1_macro: Stat::of(&samples),
                f1_samples: samples,
            });
        }
    }
    Ok(curve)
}
