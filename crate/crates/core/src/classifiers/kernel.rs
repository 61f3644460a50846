use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::dot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    Linear,
    Poly,
    Rbf,
    Sigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub kind: KernelKind,
    pub gamma: f64,
    pub degree: u32,
    pub coef0: f64,
}

impl KernelParams {
    /// Defaults for `n_features` inputs: gamma = 1/n_features, degree 3, coef0 0.
    pub fn new(kind: KernelKind, n_features: usize) -> Self {
        Self {
            kind,
            gamma: 1.0 / n_features.max(1) as f64,
            degree: 3,
            coef0: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || self.degree == 0 {
            return Err(Error::InvalidConfig(
                "kernel needs gamma > 0 and degree >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Kernel value for equal-length inputs; callers check dimensions.
    pub(crate) fn apply(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Linear => dot(x, y),
            KernelKind::Poly => (self.gamma * dot(x, y) + self.coef0).powi(self.degree as i32),
            KernelKind::Rbf => {
                let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-self.gamma * sq).exp()
            }
            KernelKind::Sigmoid => (self.gamma * dot(x, y) + self.coef0).tanh(),
        }
    }
}

pub fn kernel_eval(p: &KernelParams, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(p.apply(x, y))
}
