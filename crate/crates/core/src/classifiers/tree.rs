//! CART classification tree grown to purity with Gini impurity.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// `x[feature] <= threshold` goes left.
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

pub fn gini(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = k;
        }
    }
    best
}

struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl DecisionTree {
    /// Grows until every leaf is pure or its rows are indistinguishable.
    /// `max_depth == None` means unlimited.
    pub fn fit(rows: &[Vec<f64>], y: &[usize], n_classes: usize, max_depth: Option<usize>) -> Self {
        let mut tree = DecisionTree { nodes: Vec::new() };
        let all: Vec<usize> = (0..rows.len()).collect();
        tree.grow(rows, y, n_classes, all, 0, max_depth);
        tree
    }

    fn grow(
        &mut self,
        rows: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        idx: Vec<usize>,
        depth: usize,
        max_depth: Option<usize>,
    ) -> usize {
        let mut counts = vec![0usize; n_classes];
        for &i in &idx {
            counts[y[i]] += 1;
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            class: majority(&counts),
        });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || max_depth.is_some_and(|m| depth >= m) {
            return id;
        }
        let Some(split) = best_split(rows, y, n_classes, &idx, &counts) else {
            return id;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| rows[i][split.feature] <= split.threshold);
        let left = self.grow(rows, y, n_classes, left_idx, depth + 1, max_depth);
        let right = self.grow(rows, y, n_classes, right_idx, depth + 1, max_depth);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }

    pub fn predict_one(&self, x: &[f64]) -> usize {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                Node::Leaf { class } => return *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Lowest weighted child impurity over all features and midpoint thresholds.
/// Ties keep the lowest feature index, then the lowest threshold.
fn best_split(
    rows: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    idx: &[usize],
    counts: &[usize],
) -> Option<Split> {
    let n = idx.len() as f64;
    let n_features = rows[idx[0]].len();
    let mut best: Option<Split> = None;
    let mut sorted = idx.to_vec();
    #[allow(clippy::needless_range_loop)] // f indexes a column across rows
    for f in 0..n_features {
        sorted.sort_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]).then(a.cmp(&b)));
        let mut left = vec![0usize; n_classes];
        let mut right = counts.to_vec();
        for w in 0..sorted.len() - 1 {
            let i = sorted[w];
            left[y[i]] += 1;
            right[y[i]] -= 1;
            let (lo, hi) = (rows[i][f], rows[sorted[w + 1]][f]);
            if lo == hi {
                continue;
            }
            let nl = (w + 1) as f64;
            let score = (nl * gini(&left) + (n - nl) * gini(&right)) / n;
            if best.as_ref().is_none_or(|b| score < b.score) {
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some(Split {
                    feature: f,
                    threshold,
                    score,
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[5, 0]), 0.0);
        assert!((gini(&[5, 5]) - 0.5).abs() < 1e-15);
        assert_eq!(gini(&[]), 0.0);
    }

    #[test]
    fn fits_xor() {
        let rows = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ];
        let y = [0, 1, 1, 0];
        let t = DecisionTree::fit(&rows, &y, 2, None);
        for (r, &c) in rows.iter().zip(&y) {
            assert_eq!(t.predict_one(r), c);
        }
    }

    #[test]
    fn contradictory_rows_become_a_leaf() {
        let rows = vec![vec![1.0], vec![1.0], vec![1.0]];
        let t = DecisionTree::fit(&rows, &[1, 0, 1], 2, None);
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.predict_one(&[1.0]), 1);
    }

    #[test]
    fn depth_limit() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let y = [0, 1, 0, 1, 0, 1, 0, 1];
        assert_eq!(DecisionTree::fit(&rows, &y, 2, Some(0)).node_count(), 1);
        let full = DecisionTree::fit(&rows, &y, 2, None);
        assert!(rows.iter().zip(&y).all(|(r, &c)| full.predict_one(r) == c));
    }
}
