use super::metrics::{Prediction, PredictionSet};
use super::EvalError;
use crate::boost::{train_rows, StumpEnsemble, TrainConfig, TrainError};
use crate::features::FeatureMatrix;

/// Maps `f` over `0..n` on scoped worker threads, keeping index order.
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = std::thread::available_parallelism().map(|w| w.get()).unwrap_or(1).min(n.max(1));
    if workers <= 1 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let f = &f;
                s.spawn(move || (w * chunk..((w + 1) * chunk).min(n)).map(f).collect::<Vec<T>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

fn fold(m: &FeatureMatrix, labeled: &[usize], k: usize, cfg: &TrainConfig) -> Result<StumpEnsemble, EvalError> {
    let train: Vec<usize> = labeled.iter().copied().filter(|&r| r != labeled[k]).collect();
    train_rows(m, &train, cfg).map_err(|source| EvalError::Fold { domain: m.domains[labeled[k]].clone(), source })
}

fn predict(m: &FeatureMatrix, row: usize, e: &StumpEnsemble) -> Prediction {
    let margin = e.predict_margin(m.row(row)).expect("fold model matches its matrix");
    Prediction::from_margin(m.domains[row].clone(), m.labels[row].expect("labeled"), margin)
}

fn check(m: &FeatureMatrix) -> Result<Vec<usize>, EvalError> {
    let labeled = m.labeled_rows();
    if labeled.len() < 2 {
        return Err(EvalError::TooFewRows(labeled.len()));
    }
    Ok(labeled)
}

/// Leave-one-out over the labeled rows of `m`: each fold trains on all other
/// labeled rows, with class weights recomputed for that fold, and predicts
/// the held-out row. Folds run in parallel.
pub fn loo_validate(m: &FeatureMatrix, cfg: &TrainConfig) -> Result<PredictionSet, EvalError> {
    let labeled = check(m)?;
    let folds = par_map(labeled.len(), |k| fold(m, &labeled, k, cfg).map(|e| predict(m, labeled[k], &e)));
    Ok(PredictionSet { predictions: folds.into_iter().collect::<Result<_, _>>()? })
}

/// Sequential [`loo_validate`] that hands each fold's held-out row index and
/// model to `inspect` before predicting.
pub fn loo_validate_with<F>(m: &FeatureMatrix, cfg: &TrainConfig, mut inspect: F) -> Result<PredictionSet, EvalError>
where
    F: FnMut(usize, &StumpEnsemble),
{
    let labeled = check(m)?;
    let mut predictions = Vec::with_capacity(labeled.len());
    for k in 0..labeled.len() {
        let e = fold(m, &labeled, k, cfg)?;
        inspect(labeled[k], &e);
        predictions.push(predict(m, labeled[k], &e));
    }
    Ok(PredictionSet { predictions })
}

/// Whether a fold failure came from a single-class training set.
pub fn is_single_class(e: &EvalError) -> bool {
    matches!(e, EvalError::Fold { source: TrainError::SingleClass { .. }, .. })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boost::Node;
    use crate::corpus::DatasetKey;
    use crate::labels::Label;

    fn matrix(rows: &[(&[f64], bool)]) -> FeatureMatrix {
        FeatureMatrix::from_rows(
            DatasetKey::new("t", "en"),
            (0..rows[0].0.len()).map(|j| format!("f{j}")).collect(),
            rows.iter()
                .enumerate()
                .map(|(i, (r, y))| (format!("d{i}"), r.to_vec(), Some(Label::from_bool(*y))))
                .collect(),
        )
    }

    #[test]
    fn two_by_two_separable() {
        // with a gap between the classes no fold's midpoint lands on its held-out value
        let m = matrix(&[(&[0.0], false), (&[1.0], false), (&[3.0], true), (&[4.0], true)]);
        let p = loo_validate(&m, &TrainConfig::default()).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.predictions.iter().all(|x| x.label == x.predicted));
    }

    #[test]
    fn twins_predicted_correctly() {
        let m = matrix(&[
            (&[0.0, 5.0], false),
            (&[0.0, 5.0], false),
            (&[1.0, 5.0], false),
            (&[9.0, 1.0], true),
            (&[9.0, 1.0], true),
            (&[8.0, 1.0], true),
        ]);
        let p = loo_validate(&m, &TrainConfig::default()).unwrap();
        assert!(p.predictions.iter().all(|x| x.label == x.predicted));
    }

    #[test]
    fn degenerate_inputs() {
        let one = matrix(&[(&[0.0], true)]);
        assert!(matches!(loo_validate(&one, &TrainConfig::default()), Err(EvalError::TooFewRows(1))));
        let lone_positive = matrix(&[(&[0.0], true), (&[1.0], false), (&[2.0], false)]);
        let err = loo_validate(&lone_positive, &TrainConfig::default()).unwrap_err();
        assert!(is_single_class(&err));
    }

    #[test]
    fn held_out_row_never_shapes_a_threshold() {
        // column 1 is a canary, unique per row: every threshold on it must be
        // the midpoint of two adjacent values from the fold's training rows
        let rows: Vec<(Vec<f64>, bool)> =
            (0..12).map(|i| (vec![(i % 3) as f64, 100.0 + i as f64 * 10.0], i % 2 == 0)).collect();
        let refs: Vec<(&[f64], bool)> = rows.iter().map(|(r, y)| (r.as_slice(), *y)).collect();
        let m = matrix(&refs);
        let mut canary_splits = 0;
        let serial = loo_validate_with(&m, &TrainConfig::default(), |held, e| {
            let seen: Vec<f64> = (0..m.n_rows()).filter(|&r| r != held).map(|r| m.get(r, 1)).collect();
            let mids: Vec<f64> = seen.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
            for t in &e.trees {
                for n in &t.nodes {
                    if let Node::Split { feature: 1, threshold, .. } = n {
                        canary_splits += 1;
                        assert!(mids.contains(threshold), "fold {held} split at {threshold}");
                    }
                }
            }
        })
        .unwrap();
        assert!(canary_splits > 0);
        assert_eq!(serial, loo_validate(&m, &TrainConfig::default()).unwrap());
    }
}
