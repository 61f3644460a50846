//! L2-regularized logistic regression, one-vs-rest, fitted with L-BFGS.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::optim::{dot, lbfgs_minimize, OptimizerConfig};

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(t)) without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Binary objective `1/2 |w|^2 + C sum_i log(1 + exp(-y_i (w.x_i + b)))`.
///
/// Parameters are packed as `[w_0 .. w_{d-1}, b]`; the intercept is not
/// penalized. Labels are +1 / -1.
pub struct BinaryLogisticLoss<'a> {
    pub rows: &'a [Vec<f64>],
    pub y: &'a [f64],
    pub c: f64,
}

impl BinaryLogisticLoss<'_> {
    pub fn evaluate(&self, params: &[f64], grad: &mut [f64]) -> f64 {
        let d = params.len() - 1;
        let (w, b) = (&params[..d], params[d]);
        let mut value = 0.5 * dot(w, w);
        grad[..d].copy_from_slice(w);
        grad[d] = 0.0;
        for (x, &yi) in self.rows.iter().zip(self.y) {
            let margin = yi * (dot(w, x) + b);
            value += self.c * softplus(-margin);
            let coeff = -self.c * yi * sigmoid(-margin);
            for (g, xj) in grad[..d].iter_mut().zip(x) {
                *g += coeff * xj;
            }
            grad[d] += coeff;
        }
        value
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// One `[w.., b]` vector per class.
    weights: Vec<Vec<f64>>,
}

impl LogisticModel {
    pub fn fit(
        rows: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        c: f64,
        cfg: &OptimizerConfig,
    ) -> Result<Self> {
        let d = rows[0].len();
        let mut weights = Vec::with_capacity(n_classes);
        for class in 0..n_classes {
            let signs: Vec<f64> = y
                .iter()
                .map(|&k| if k == class { 1.0 } else { -1.0 })
                .collect();
            let loss = BinaryLogisticLoss { rows, y: &signs, c };
            let min = lbfgs_minimize(|p, g| loss.evaluate(p, g), &vec![0.0; d + 1], cfg)?;
            weights.push(min.x);
        }
        Ok(Self { weights })
    }

    pub fn decision(&self, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        self.weights
            .iter()
            .map(|w| dot(&w[..d], x) + w[d])
            .collect()
    }

    /// Per-class sigmoid outputs renormalized to sum to one.
    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let mut p: Vec<f64> = self.decision(x).into_iter().map(sigmoid).collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0);
        assert!((sigmoid(-800.0)).is_finite());
    }
}
