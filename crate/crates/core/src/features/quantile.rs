use super::FeatureMatrix;

/// 1-based ranks with ties sharing their mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        // == rather than total_cmp so that -0.0 and 0.0 tie
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mean;
        }
        i = j + 1;
    }
    ranks
}

/// Replaces every column by its average ranks divided by the row count,
/// giving values in (0, 1].
pub fn quantile_normalize(m: &FeatureMatrix) -> FeatureMatrix {
    let mut out = m.clone();
    let n = m.n_rows() as f64;
    for c in 0..m.n_cols() {
        let scaled: Vec<f64> = average_ranks(&m.column(c)).into_iter().map(|r| r / n).collect();
        out.set_column(c, &scaled);
    }
    out
}
