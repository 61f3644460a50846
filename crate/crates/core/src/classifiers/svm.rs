//! Kernel SVM, one-vs-one over class pairs.

use serde::{Deserialize, Serialize};

use super::kernel::KernelParams;
use crate::error::Result;
use crate::optim::smo_solve;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PairMachine {
    /// Class voted for by a positive decision value.
    positive: usize,
    negative: usize,
    support: Vec<Vec<f64>>,
    /// `alpha_i * y_i` for each support vector.
    coef: Vec<f64>,
    bias: f64,
}

impl PairMachine {
    fn decision(&self, kernel: &KernelParams, x: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(sv, c)| c * kernel.apply(sv, x))
            .sum::<f64>()
            + self.bias
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    kernel: KernelParams,
    n_classes: usize,
    machines: Vec<PairMachine>,
}

impl SvmModel {
    pub fn fit(
        rows: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        kernel: KernelParams,
        c: f64,
        tol: f64,
    ) -> Result<Self> {
        kernel.validate()?;
        let mut machines = Vec::new();
        for a in 0..n_classes {
            for b in (a + 1)..n_classes {
                let idx: Vec<usize> = (0..rows.len())
                    .filter(|&i| y[i] == a || y[i] == b)
                    .collect();
                let signs: Vec<f64> = idx
                    .iter()
                    .map(|&i| if y[i] == a { 1.0 } else { -1.0 })
                    .collect();
                let gram: Vec<Vec<f64>> = idx
                    .iter()
                    .map(|&i| {
                        idx.iter()
                            .map(|&j| kernel.apply(&rows[i], &rows[j]))
                            .collect()
                    })
                    .collect();
                let sol = smo_solve(&gram, &signs, c, tol)?;
                machines.push(PairMachine {
                    positive: a,
                    negative: b,
                    support: sol
                        .support_indices
                        .iter()
                        .map(|&k| rows[idx[k]].clone())
                        .collect(),
                    coef: sol
                        .support_indices
                        .iter()
                        .map(|&k| sol.alphas[k] * signs[k])
                        .collect(),
                    bias: sol.bias,
                });
            }
        }
        Ok(Self {
            kernel,
            n_classes,
            machines,
        })
    }

    /// Decision value of every pairwise machine, in (0,1), (0,2), ... order.
    pub fn decision_values(&self, x: &[f64]) -> Vec<f64> {
        self.machines
            .iter()
            .map(|m| m.decision(&self.kernel, x))
            .collect()
    }

    /// Majority vote; ties go to the larger summed decision value, then to
    /// the earlier class.
    pub fn predict_one(&self, x: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        let mut confidence = vec![0.0; self.n_classes];
        for m in &self.machines {
            let d = m.decision(&self.kernel, x);
            if d > 0.0 {
                votes[m.positive] += 1;
            } else {
                votes[m.negative] += 1;
            }
            confidence[m.positive] += d;
            confidence[m.negative] -= d;
        }
        let mut best = 0;
        for k in 1..self.n_classes {
            if votes[k] > votes[best]
                || (votes[k] == votes[best] && confidence[k] > confidence[best])
            {
                best = k;
            }
        }
        best
    }
}
