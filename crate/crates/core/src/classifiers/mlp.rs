//! One-hidden-layer perceptron: ReLU hidden units, softmax output,
//! mean cross-entropy with an L2 penalty on the weights.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::softmax_in_place;
use crate::error::Result;
use crate::optim::{adam_minimize, lbfgs_minimize, OptimizerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MlpSolver {
    Lbfgs,
    Adam,
}

/// Parameter layout inside the flat vector: `W1 (d x h)`, `b1 (h)`,
/// `W2 (h x k)`, `b2 (k)`, all row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpShape {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
}

impl MlpShape {
    pub fn n_params(&self) -> usize {
        self.inputs * self.hidden + self.hidden + self.hidden * self.outputs + self.outputs
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.inputs * self.hidden;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.hidden * self.outputs;
        (b1, w2, b2)
    }

    /// Glorot-uniform weights and biases.
    pub fn init(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut params = Vec::with_capacity(self.n_params());
        let layers = [(self.inputs, self.hidden), (self.hidden, self.outputs)];
        for (fan_in, fan_out) in layers {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for _ in 0..(fan_in * fan_out + fan_out) {
                params.push(rng.gen_range(-bound..bound));
            }
        }
        params
    }

    fn forward(&self, params: &[f64], x: &[f64], hidden: &mut [f64], out: &mut [f64]) {
        let (b1, w2, b2) = self.offsets();
        let h = self.hidden;
        hidden.copy_from_slice(&params[b1..b1 + h]);
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let w = &params[j * h..(j + 1) * h];
            for (a, wk) in hidden.iter_mut().zip(w) {
                *a += xj * wk;
            }
        }
        hidden.iter_mut().for_each(|a| *a = a.max(0.0));
        out.copy_from_slice(&params[b2..b2 + self.outputs]);
        for (k, &ak) in hidden.iter().enumerate() {
            if ak == 0.0 {
                continue;
            }
            let w = &params[w2 + k * self.outputs..w2 + (k + 1) * self.outputs];
            for (o, wo) in out.iter_mut().zip(w) {
                *o += ak * wo;
            }
        }
        softmax_in_place(out);
    }
}

/// Training objective over a subset of rows.
pub struct MlpLoss<'a> {
    pub shape: MlpShape,
    pub rows: &'a [Vec<f64>],
    pub y: &'a [usize],
    /// L2 strength; the penalty is `alpha / (2 n) * |W|^2` for a batch of n rows.
    pub alpha: f64,
}

impl MlpLoss<'_> {
    pub fn evaluate(&self, params: &[f64], grad: &mut [f64]) -> f64 {
        let all: Vec<usize> = (0..self.rows.len()).collect();
        self.evaluate_batch(params, &all, grad)
    }

    pub fn evaluate_batch(&self, params: &[f64], batch: &[usize], grad: &mut [f64]) -> f64 {
        let s = self.shape;
        let (b1, w2, b2) = s.offsets();
        let n = batch.len() as f64;
        grad.iter_mut().for_each(|g| *g = 0.0);

        let mut hidden = vec![0.0; s.hidden];
        let mut out = vec![0.0; s.outputs];
        let mut delta_hidden = vec![0.0; s.hidden];
        let mut value = 0.0;
        for &i in batch {
            let x = &self.rows[i];
            s.forward(params, x, &mut hidden, &mut out);
            let target = self.y[i];
            value -= out[target].max(f64::MIN_POSITIVE).ln();

            // output delta = (p - onehot) / n
            out[target] -= 1.0;
            out.iter_mut().for_each(|d| *d /= n);
            for (k, &ak) in hidden.iter().enumerate() {
                let w = &params[w2 + k * s.outputs..w2 + (k + 1) * s.outputs];
                let g = &mut grad[w2 + k * s.outputs..w2 + (k + 1) * s.outputs];
                let mut back = 0.0;
                for ((gk, wk), d) in g.iter_mut().zip(w).zip(&out) {
                    *gk += ak * d;
                    back += wk * d;
                }
                delta_hidden[k] = if ak > 0.0 { back } else { 0.0 };
            }
            for (g, d) in grad[b2..b2 + s.outputs].iter_mut().zip(&out) {
                *g += d;
            }
            for (g, d) in grad[b1..b1 + s.hidden].iter_mut().zip(&delta_hidden) {
                *g += d;
            }
            for (j, &xj) in x.iter().enumerate() {
                if xj == 0.0 {
                    continue;
                }
                let g = &mut grad[j * s.hidden..(j + 1) * s.hidden];
                for (gk, d) in g.iter_mut().zip(&delta_hidden) {
                    *gk += xj * d;
                }
            }
        }
        value /= n;

        let scale = self.alpha / n;
        let mut penalty = 0.0;
        for range in [0..b1, w2..b2] {
            for (g, w) in grad[range.clone()].iter_mut().zip(&params[range]) {
                penalty += w * w;
                *g += scale * w;
            }
        }
        value + 0.5 * scale * penalty
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    shape: MlpShape,
    params: Vec<f64>,
}

pub struct MlpSettings {
    pub hidden: usize,
    pub alpha: f64,
    pub solver: MlpSolver,
    pub optimizer: OptimizerConfig,
    pub batch_size: usize,
}

impl MlpModel {
    pub fn fit(
        rows: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        settings: &MlpSettings,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let shape = MlpShape {
            inputs: rows[0].len(),
            hidden: settings.hidden,
            outputs: n_classes,
        };
        let x0 = shape.init(rng);
        let loss = MlpLoss {
            shape,
            rows,
            y,
            alpha: settings.alpha,
        };
        let params = match settings.solver {
            MlpSolver::Lbfgs => {
                lbfgs_minimize(|p, g| loss.evaluate(p, g), &x0, &settings.optimizer)?.x
            }
            MlpSolver::Adam => {
                // max_iterations counts epochs; each epoch visits every row once
                let batch = settings.batch_size.clamp(1, rows.len());
                let per_epoch = rows.len().div_ceil(batch);
                let cfg = OptimizerConfig {
                    max_iterations: settings.optimizer.max_iterations * per_epoch,
                    ..settings.optimizer
                };
                let mut order: Vec<usize> = (0..rows.len()).collect();
                let mut step = 0usize;
                let oracle = |p: &[f64], g: &mut [f64]| {
                    let slot = step % per_epoch;
                    if slot == 0 {
                        order.shuffle(rng);
                    }
                    step += 1;
                    let end = ((slot + 1) * batch).min(order.len());
                    loss.evaluate_batch(p, &order[slot * batch..end], g)
                };
                adam_minimize(oracle, &x0, &cfg)?.x
            }
        };
        Ok(Self { shape, params })
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let mut hidden = vec![0.0; self.shape.hidden];
        let mut out = vec![0.0; self.shape.outputs];
        self.shape.forward(&self.params, x, &mut hidden, &mut out);
        out
    }
}
