use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{metrics, Metrics};
use crate::labels::Label;

/// Mixes a master seed with an index into an independent sub-seed
/// (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Stat { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub resamples: usize,
    pub seed: u64,
    pub f1_macro: Stat,
    pub reliable_precision: Stat,
    pub reliable_recall: Stat,
    pub unreliable_precision: Stat,
    pub unreliable_recall: Stat,
    /// F1 macro of every resample, in draw order.
    pub f1_samples: Vec<f64>,
}

fn resample_with(pairs: &[(Label, Label)], n: usize, seed: u64, rng: &mut ChaCha8Rng) -> BootstrapSummary {
    assert!(n >= 1, "at least one resample");
    assert!(!pairs.is_empty(), "nothing to resample");
    let len = pairs.len() as u64;
    let mut draws: Vec<Metrics> = Vec::with_capacity(n);
    let mut sample = Vec::with_capacity(pairs.len());
    for _ in 0..n {
        sample.clear();
        // u64 ranges keep the draw sequence identical on every platform
        sample.extend((0..len).map(|_| pairs[rng.random_range(0..len) as usize]));
        draws.push(metrics(&sample).expect("non-empty"));
    }
    let stat = |f: fn(&Metrics) -> f64| Stat::of(&draws.iter().map(f).collect::<Vec<_>>());
    BootstrapSummary {
        resamples: n,
        seed,
        f1_macro: stat(|m| m.f1_macro),
        reliable_precision: stat(|m| m.reliable.precision),
        reliable_recall: stat(|m| m.reliable.recall),
        unreliable_precision: stat(|m| m.unreliable.precision),
        unreliable_recall: stat(|m| m.unreliable.recall),
        f1_samples: draws.iter().map(|m| m.f1_macro).collect(),
    }
}

/// Resamples (true, predicted) pairs with replacement `n` times and
/// summarizes the recomputed metrics. Panics on empty input or `n == 0`.
pub fn bootstrap_metrics(pairs: &[(Label, Label)], n: usize, seed: u64) -> BootstrapSummary {
    resample_with(pairs, n, seed, &mut rng(seed))
}

/// Coin-flip predictions for every label, drawn once, then bootstrapped
/// like a model's output. With `prior_matched` the coin lands on reliable
/// with the observed reliable fraction instead of one half.
pub fn random_baseline(labels: &[Label], n: usize, seed: u64, prior_matched: bool) -> BootstrapSummary {
    let mut r = rng(seed);
    let p = if prior_matched {
        labels.iter().filter(|l| l.is_reliable()).count() as f64 / labels.len() as f64
    } else {
        0.5
    };
    let pairs: Vec<(Label, Label)> = labels.iter().map(|&l| (l, Label::from_bool(r.random_bool(p)))).collect();
    resample_with(&pairs, n, seed, &mut r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Reliable as R, Unreliable as U};

    #[test]
    fn perfect_predictions_have_no_spread() {
        let pairs = [(R, R), (U, U), (R, R), (U, U)];
        let s = bootstrap_metrics(&pairs, 100, 7);
        assert_eq!((s.f1_macro.mean, s.f1_macro.std), (1.0, 0.0));
        let balanced: Vec<_> = (0..50).flat_map(|_| [(R, R), (U, U)]).collect();
        let s = bootstrap_metrics(&balanced, 100, 7);
        assert_eq!((s.f1_macro.mean, s.f1_macro.std), (1.0, 0.0));
    }

    #[test]
    fn reproducible() {
        let pairs = [(R, U), (U, U), (R, R), (U, R), (R, R)];
        assert_eq!(bootstrap_metrics(&pairs, 50, 3), bootstrap_metrics(&pairs, 50, 3));
        assert_ne!(bootstrap_metrics(&pairs, 50, 3), bootstrap_metrics(&pairs, 50, 4));
        let labels = [R, U, U, R, U];
        assert_eq!(random_baseline(&labels, 20, 9, false), random_baseline(&labels, 20, 9, false));
    }

    #[test]
    fn sub_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }

    #[test]
    fn population_std() {
        assert_eq!(Stat::of(&[1.0, 3.0]), Stat { mean: 2.0, std: 1.0 });
    }
}
