//! Exact additive attributions against a background sample.
//!
//! Each feature's contribution is its Shapley value in the game where the
//! features outside a coalition are taken from a background row, averaged
//! over the background. For a stump this reduces to `leaf(row)` minus the
//! stump's background mean, credited to the split feature. Deeper trees are
//! handled per (row, background row) pair by walking every leaf both rows
//! can reach.

use serde::Serialize;

use super::{ModelError, Node, StumpEnsemble, Tree};
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attribution {
    pub base: f64,
    /// One value per feature, in column order.
    pub contributions: Vec<f64>,
}

impl Attribution {
    /// base + Σ contributions.
    pub fn total(&self) -> f64 {
        self.base + self.contributions.iter().sum::<f64>()
    }
}

/// Precomputed background statistics for one ensemble.
pub struct Explainer<'a> {
    ensemble: &'a StumpEnsemble,
    background: &'a FeatureMatrix,
    /// Background mean of each tree's output.
    tree_means: Vec<f64>,
    factorials: Vec<f64>,
}

impl<'a> Explainer<'a> {
    pub fn new(ensemble: &'a StumpEnsemble, background: &'a FeatureMatrix) -> Result<Self, ModelError> {
        ensemble.check_matrix(background)?;
        if background.is_empty() {
            return Err(ModelError::EmptyBackground);
        }
        let n = background.n_rows() as f64;
        let tree_means =
            ensemble.trees.iter().map(|t| background.rows().map(|r| t.predict(r)).sum::<f64>() / n).collect();
        let depth = ensemble.max_depth();
        let mut factorials = vec![1.0; 2 * depth + 1];
        for k in 1..factorials.len() {
            factorials[k] = factorials[k - 1] * k as f64;
        }
        Ok(Explainer { ensemble, background, tree_means, factorials })
    }

    pub fn base_value(&self) -> f64 {
        self.ensemble.base_margin + self.tree_means.iter().sum::<f64>()
    }

    pub fn attribute(&self, row: &[f64]) -> Result<Attribution, ModelError> {
        self.ensemble.check_row(row)?;
        let mut phi = vec![0.0; self.ensemble.n_features];
        for (t, mean) in self.ensemble.trees.iter().zip(&self.tree_means) {
            match t.nodes[0] {
                Node::Leaf { .. } => {}
                Node::Split { feature, .. } if t.depth() == 1 => {
                    phi[feature] += t.predict(row) - mean;
                }
                Node::Split { .. } => self.deep_tree(t, row, &mut phi),
            }
        }
        Ok(Attribution { base: self.base_value(), contributions: phi })
    }

    fn deep_tree(&self, t: &Tree, row: &[f64], phi: &mut [f64]) {
        let n = self.background.n_rows() as f64;
        let mut acc = vec![0.0; phi.len()];
        for z in self.background.rows() {
            let mut from_row = Vec::new();
            let mut from_bg = Vec::new();
            self.walk(t, 0, row, z, &mut from_row, &mut from_bg, &mut acc);
        }
        for (p, a) in phi.iter_mut().zip(acc) {
            *p += a / n;
        }
    }

    /// Visits every leaf reachable when each feature on the path follows
    /// either `x` (features in `sx`) or `z` (features in `sz`), never both.
    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        t: &Tree,
        node: usize,
        x: &[f64],
        z: &[f64],
        sx: &mut Vec<usize>,
        sz: &mut Vec<usize>,
        acc: &mut [f64],
    ) {
        match t.nodes[node] {
            Node::Leaf { value } => {
                let (a, b) = (sx.len(), sz.len());
                let f = &self.factorials;
                if a > 0 {
                    let w = f[a - 1] * f[b] / f[a + b];
                    for &i in sx.iter() {
                        acc[i] += value * w;
                    }
                }
                if b > 0 {
                    let w = f[a] * f[b - 1] / f[a + b];
                    for &i in sz.iter() {
                        acc[i] -= value * w;
                    }
                }
            }
            Node::Split { feature, threshold, left, right } => {
                let x_left = x[feature] < threshold;
                let z_left = z[feature] < threshold;
                let in_x = sx.contains(&feature);
                let in_z = sz.contains(&feature);
                for (child, go_left) in [(left, true), (right, false)] {
                    match (x_left == go_left, z_left == go_left) {
                        (true, true) => self.walk(t, child, x, z, sx, sz, acc),
                        (true, false) if !in_z => {
                            if in_x {
                                self.walk(t, child, x, z, sx, sz, acc);
                            } else {
                                sx.push(feature);
                                self.walk(t, child, x, z, sx, sz, acc);
                                sx.pop();
                            }
                        }
                        (false, true) if !in_x => {
                            if in_z {
                                self.walk(t, child, x, z, sx, sz, acc);
                            } else {
                                sz.push(feature);
                                self.walk(t, child, x, z, sx, sz, acc);
                                sz.pop();
                            }
                        }
                        _ => {}
                    }
                }
            }
        }
    }
}

impl StumpEnsemble {
    /// Attribution of one row against `background`.
    pub fn attribute(&self, row: &[f64], background: &FeatureMatrix) -> Result<Attribution, ModelError> {
        Explainer::new(self, background)?.attribute(row)
    }
}
