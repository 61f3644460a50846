use serde::{Deserialize, Serialize};

/// Stores the training set; predicts by majority vote among the `k`
/// Euclidean-nearest rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    k: usize,
    n_classes: usize,
    rows: Vec<Vec<f64>>,
    y: Vec<usize>,
}

impl Knn {
    pub fn fit(rows: &[Vec<f64>], y: &[usize], n_classes: usize, k: usize) -> Self {
        Self {
            k: k.max(1),
            n_classes,
            rows: rows.to_vec(),
            y: y.to_vec(),
        }
    }

    /// Indices of the nearest training rows; equal distances keep the lower
    /// training index first.
    pub fn neighbors(&self, x: &[f64]) -> Vec<usize> {
        let mut dist: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        let k = self.k.min(dist.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, cmp);
            dist.truncate(k);
        }
        dist.sort_unstable_by(cmp);
        dist.into_iter().map(|(_, i)| i).collect()
    }

    /// Vote ties go to the earlier class.
    pub fn predict_one(&self, x: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for i in self.neighbors(x) {
            votes[self.y[i]] += 1;
        }
        let mut best = 0;
        for (c, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = c;
            }
        }
        best
    }
}
