//! Gradient-based minimizers and the SVM dual solver.
//!
//! Objectives are closures `FnMut(x, grad) -> f64` that return the value at
//! `x` and write the gradient into `grad`.

mod adam;
mod lbfgs;
mod smo;

pub use adam::adam_minimize;
pub use lbfgs::lbfgs_minimize;
pub use smo::{dual_objective, smo_solve, smo_solve_with_limit, DualSolution};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Gradient-norm threshold for L-BFGS, update-norm threshold for Adam.
    pub tolerance: f64,
    pub learning_rate: f64,
    pub history_size: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-4,
            learning_rate: 1e-3,
            history_size: 10,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.history_size == 0 {
            return bad("history_size must be at least 1");
        }
        if !(self.tolerance >= 0.0) {
            return bad("tolerance must be non-negative");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        for beta in [self.adam_beta1, self.adam_beta2] {
            if !(beta > 0.0 && beta < 1.0) {
                return bad("adam betas must lie in (0, 1)");
            }
        }
        if !(self.adam_epsilon >= 0.0) {
            return bad("adam_epsilon must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Gradient (L-BFGS) or update (Adam) norm fell below the tolerance.
    Converged,
    /// Relative objective decrease fell to rounding level.
    Stalled,
    MaxIterations,
    /// The line search failed after progress had already been made.
    LineSearchStalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub termination: Termination,
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|a| a.is_finite())
}

pub(crate) fn check_finite(value: f64, grad: &[f64]) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NumericalFailure(format!("objective value {value}")));
    }
    if !all_finite(grad) {
        return Err(Error::NumericalFailure(
            "gradient has non-finite entries".into(),
        ));
    }
    Ok(())
}
