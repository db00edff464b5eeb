use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Node {
    /// Rows with `value < threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64 },
}

/// Binary tree stored in pre-order; the root is node 0 and children always
/// come after their parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree { nodes: vec![Node::Leaf { value }] }
    }

    pub fn stump(feature: usize, threshold: f64, left: f64, right: f64) -> Self {
        Tree {
            nodes: vec![
                Node::Split { feature, threshold, left: 1, right: 2 },
                Node::Leaf { value: left },
                Node::Leaf { value: right },
            ],
        }
    }

    /// Node index of the leaf reached by a row given as a value lookup.
    pub fn leaf_index_with<F: Fn(usize) -> f64>(&self, value: F) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split { feature, threshold, left, right } => {
                    i = if value(feature) < threshold { left } else { right };
                }
            }
        }
    }

    pub fn leaf_index(&self, row: &[f64]) -> usize {
        self.leaf_index_with(|f| row[f])
    }

    pub fn leaf_value(&self, node: usize) -> f64 {
        match self.nodes[node] {
            Node::Leaf { value } => value,
            Node::Split { .. } => panic!("node {node} is not a leaf"),
        }
    }

    pub fn predict_with<F: Fn(usize) -> f64>(&self, value: F) -> f64 {
        self.leaf_value(self.leaf_index_with(value))
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        self.predict_with(|f| row[f])
    }

    /// Number of splits on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(t, left).max(walk(t, right)),
            }
        }
        walk(self, 0)
    }

    /// Structural checks for trees read from disk.
    pub(crate) fn validate(&self, n_features: usize) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree without nodes".into());
        }
        let mut referenced = vec![false; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            match *n {
                Node::Leaf { value } if !value.is_finite() => {
                    return Err(format!("node {i}: non-finite leaf"));
                }
                Node::Leaf { .. } => {}
                Node::Split { feature, threshold, left, right } => {
                    if feature >= n_features {
                        return Err(format!("node {i}: feature {feature} out of range"));
                    }
                    if !threshold.is_finite() {
                        return Err(format!("node {i}: non-finite threshold"));
                    }
                    for c in [left, right] {
                        if c <= i || c >= self.nodes.len() || referenced[c] {
                            return Err(format!("node {i}: bad child {c}"));
                        }
                        referenced[c] = true;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Training rows copied column-major, with each column's row order sorted
/// once by (value, row).
pub(crate) struct Columns {
    n_rows: usize,
    values: Vec<f64>,
    sorted: Vec<Vec<u32>>,
}

impl Columns {
    pub(crate) fn new(m: &FeatureMatrix, rows: &[usize]) -> Self {
        let n_rows = rows.len();
        let mut values = Vec::with_capacity(n_rows * m.n_cols());
        for c in 0..m.n_cols() {
            values.extend(rows.iter().map(|&r| m.get(r, c)));
        }
        let sorted = (0..m.n_cols())
            .map(|c| {
                let col = &values[c * n_rows..(c + 1) * n_rows];
                let mut order: Vec<u32> = (0..n_rows as u32).collect();
                order.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                order
            })
            .collect();
        Columns { n_rows, values, sorted }
    }

    pub(crate) fn value(&self, row: usize, col: usize) -> f64 {
        self.values[col * self.n_rows + row]
    }

    fn n_cols(&self) -> usize {
        self.sorted.len()
    }
}

struct Split {
    gain: f64,
    feature: usize,
    threshold: f64,
}

fn score(g: f64, h: f64, lambda: f64) -> f64 {
    let den = h + lambda;
    if den > 0.0 {
        g * g / den
    } else {
        0.0
    }
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo * 0.5 + hi * 0.5;
    if mid > lo {
        mid
    } else {
        hi
    }
}

struct Grower<'a> {
    data: &'a Columns,
    grad: &'a [f64],
    hess: &'a [f64],
    cfg: &'a TrainConfig,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn best_split(&self, members: &[Vec<u32>], g: f64, h: f64) -> Option<Split> {
        let lambda = self.cfg.lambda;
        let parent = score(g, h, lambda);
        let mut best: Option<Split> = None;
        for (f, order) in members.iter().enumerate() {
            let (mut gl, mut hl) = (0.0, 0.0);
            for k in 0..order.len().saturating_sub(1) {
                let r = order[k] as usize;
                gl += self.grad[r];
                hl += self.hess[r];
                let lo = self.data.value(r, f);
                let hi = self.data.value(order[k + 1] as usize, f);
                if lo >= hi {
                    continue;
                }
                let gain = 0.5 * (score(gl, hl, lambda) + score(g - gl, h - hl, lambda) - parent) - self.cfg.gamma;
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Split { gain, feature: f, threshold: midpoint(lo, hi) });
                }
            }
        }
        best.filter(|b| b.gain > 0.0)
    }

    /// `members[f]` holds the node's rows in column f's sorted order;
    /// `rows` holds them in ascending row order.
    fn grow(&mut self, members: &[Vec<u32>], rows: &[u32], depth: usize) -> usize {
        let g: f64 = rows.iter().map(|&r| self.grad[r as usize]).sum();
        let h: f64 = rows.iter().map(|&r| self.hess[r as usize]).sum();
        let id = self.nodes.len();
        let split = if depth < self.cfg.max_depth { self.best_split(members, g, h) } else { None };
        let Some(split) = split else {
            let den = h + self.cfg.lambda;
            let value = if den > 0.0 { -self.cfg.learning_rate * g / den } else { 0.0 };
            self.nodes.push(Node::Leaf { value });
            return id;
        };
        self.nodes.push(Node::Leaf { value: 0.0 });
        let goes_left = |r: u32| self.data.value(r as usize, split.feature) < split.threshold;
        let part = |list: &[u32], left: bool| -> Vec<u32> {
            list.iter().copied().filter(|&r| goes_left(r) == left).collect()
        };
        let left_members: Vec<Vec<u32>> = members.iter().map(|o| part(o, true)).collect();
        let right_members: Vec<Vec<u32>> = members.iter().map(|o| part(o, false)).collect();
        let (left_rows, right_rows) = (part(rows, true), part(rows, false));
        let left = self.grow(&left_members, &left_rows, depth + 1);
        let right = self.grow(&right_members, &right_rows, depth + 1);
        self.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        id
    }
}

/// Fits one tree to the given gradient statistics.
pub(crate) fn grow(data: &Columns, grad: &[f64], hess: &[f64], cfg: &TrainConfig) -> Tree {
    let mut grower = Grower { data, grad, hess, cfg, nodes: Vec::new() };
    let rows: Vec<u32> = (0..data.n_rows as u32).collect();
    debug_assert_eq!(data.n_cols(), data.sorted.len());
    grower.grow(&data.sorted, &rows, 0);
    Tree { nodes: grower.nodes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_falls_back_to_upper_value() {
        assert_eq!(midpoint(1.0, 2.0), 1.5);
        let next = f64::from_bits(1.0f64.to_bits() + 1);
        assert_eq!(midpoint(1.0, next), next);
        assert!(1.0 < midpoint(1.0, next));
    }

    #[test]
    fn depth_and_validation() {
        let t = Tree::stump(0, 1.0, 2.0, 3.0);
        assert_eq!(t.depth(), 1);
        assert_eq!(Tree::leaf(0.0).depth(), 0);
        assert!(t.validate(1).is_ok());
        assert!(t.validate(0).is_err());
        let cyclic = Tree { nodes: vec![Node::Split { feature: 0, threshold: 0.0, left: 0, right: 1 }] };
        assert!(cyclic.validate(1).is_err());
    }
}
