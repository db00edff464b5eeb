use serde::{Deserialize, Serialize};

use crate::boost::sigmoid;
use crate::labels::Label;

/// Probability at or above which a domain is predicted reliable.
pub const THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub domain: String,
    pub label: Label,
    pub probability: f64,
    pub predicted: Label,
}

impl Prediction {
    pub fn from_margin(domain: String, label: Label, margin: f64) -> Self {
        let probability = sigmoid(margin);
        Prediction { domain, label, probability, predicted: Label::from_bool(probability >= THRESHOLD) }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub predictions: Vec<Prediction>,
}

impl PredictionSet {
    pub fn pairs(&self) -> Vec<(Label, Label)> {
        self.predictions.iter().map(|p| (p.label, p.predicted)).collect()
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }

    /// `domain,label,probability,predicted` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let bit = |l: Label| if l.is_reliable() { "1" } else { "0" };
        let mut out = String::from("domain,label,probability,predicted\n");
        for p in &self.predictions {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.domain,
                bit(p.label),
                crate::features::format_g17(p.probability),
                bit(p.predicted)
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub f1_macro: f64,
    pub reliable: ClassMetrics,
    pub unreliable: ClassMetrics,
}

/// Metrics for one class and whether it occurs at all, as truth or prediction.
fn class_metrics(pairs: &[(Label, Label)], class: Label) -> (ClassMetrics, bool) {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for &(truth, pred) in pairs {
        match (truth == class, pred == class) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    let frac = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let m = ClassMetrics {
        precision: frac(tp, tp + fp),
        recall: frac(tp, tp + fn_),
        // equals 2PR/(P+R), and 0 when there are no true positives
        f1: frac(2 * tp, 2 * tp + fp + fn_),
    };
    (m, tp + fp + fn_ > 0)
}

/// Per-class precision, recall and F1 from (true, predicted) pairs. The
/// macro F1 averages over the classes that occur in either column, so a
/// sample holding one class only is scored on that class alone. Returns
/// `None` for an empty slice.
pub fn metrics(pairs: &[(Label, Label)]) -> Option<Metrics> {
    if pairs.is_empty() {
        return None;
    }
    let (reliable, has_r) = class_metrics(pairs, Label::Reliable);
    let (unreliable, has_u) = class_metrics(pairs, Label::Unreliable);
    let f1_macro = match (has_r, has_u) {
        (true, true) => (reliable.f1 + unreliable.f1) / 2.0,
        (true, false) => reliable.f1,
        _ => unreliable.f1,
    };
    Some(Metrics { f1_macro, reliable, unreliable })
}

pub fn f1_macro(p: &PredictionSet) -> Option<f64> {
    metrics(&p.pairs()).map(|m| m.f1_macro)
}
