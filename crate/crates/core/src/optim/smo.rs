//! Sequential minimal optimization for the soft-margin SVM dual
//!
//! ```text
//! max  sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij
//! s.t. 0 <= a_i <= C,  sum(a_i y_i) = 0
//! ```
//!
//! Each step picks the maximal violating pair (first-order working-set
//! selection, lowest index on ties) and solves the two-variable subproblem
//! analytically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// curvature floor for indefinite kernels (e.g. sigmoid)
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    /// Decision function is `sum_i alpha_i y_i K(x_i, x) + bias`.
    pub bias: f64,
    pub support_indices: Vec<usize>,
    /// False when the iteration limit was hit before the KKT gap closed.
    pub converged: bool,
    pub iterations: usize,
}

/// Dual objective `sum(a) - 1/2 a^T Q a` with `Q_ij = y_i y_j K_ij`.
pub fn dual_objective(kernel: &[Vec<f64>], y: &[f64], alphas: &[f64]) -> f64 {
    let n = alphas.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alphas[i] * alphas[j] * y[i] * y[j] * kernel[i][j];
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

pub fn smo_solve(kernel: &[Vec<f64>], y: &[f64], c: f64, tol: f64) -> Result<DualSolution> {
    let limit = (100 * y.len()).max(100_000);
    smo_solve_with_limit(kernel, y, c, tol, limit)
}

/// Like [`smo_solve`] with an explicit iteration budget. Running out of
/// iterations is not an error: the current iterate is returned with
/// `converged == false`.
pub fn smo_solve_with_limit(
    kernel: &[Vec<f64>],
    y: &[f64],
    c: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<DualSolution> {
    let n = y.len();
    if kernel.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: kernel.len(),
        });
    }
    if let Some(row) = kernel.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: row.len(),
        });
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidConfig("SVM labels must be +1 or -1".into()));
    }
    if !(c > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidConfig("C and tol must be positive".into()));
    }

    let q = |i: usize, j: usize| y[i] * y[j] * kernel[i][j];
    let mut alpha = vec![0.0; n];
    // gradient of 1/2 a^T Q a - sum(a)
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        let mut i_sel = None;
        let mut g_max = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut g_min = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > g_max {
                g_max = v;
                i_sel = Some(t);
            }
            if in_low(alpha[t], y[t]) && v < g_min {
                g_min = v;
                j_sel = Some(t);
            }
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            converged = true;
            break;
        };
        if g_max - g_min < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (k, g) in grad.iter_mut().enumerate() {
            *g += q(i, k) * di + q(j, k) * dj;
        }
    }

    let bias = -rho(&alpha, &grad, y, c);
    let support_indices = alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0.0)
        .map(|(i, _)| i)
        .collect();
    Ok(DualSolution {
        alphas: alpha,
        bias,
        support_indices,
        converged,
        iterations,
    })
}

/// Offset from the free support vectors, or the midpoint of the feasible
/// interval when every alpha sits at a bound.
fn rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for i in 0..alpha.len() {
        let yg = y[i] * grad[i];
        if alpha[i] >= c {
            if y[i] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[i] <= 0.0 {
            if y[i] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else if ub.is_finite() && lb.is_finite() {
        0.5 * (ub + lb)
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_kernel(points: &[f64]) -> Vec<Vec<f64>> {
        points
            .iter()
            .map(|a| points.iter().map(|b| a * b).collect())
            .collect()
    }

    #[test]
    fn symmetric_pair() {
        let k = linear_kernel(&[-1.0, 1.0]);
        let sol = smo_solve(&k, &[-1.0, 1.0], 1.0, 1e-3).unwrap();
        assert!(sol.converged);
        assert!((sol.alphas[0] - 0.5).abs() < 1e-12);
        assert!((sol.alphas[1] - 0.5).abs() < 1e-12);
        assert!(sol.bias.abs() < 1e-12);
        assert_eq!(sol.support_indices, [0, 1]);
        // boundary at x = 0
        let w: f64 = -sol.alphas[0] * -1.0 + sol.alphas[1] * 1.0 * 1.0;
        assert!((w * 0.0 + sol.bias).abs() < 1e-12);
    }

    #[test]
    fn identical_points_opposite_labels() {
        let k = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let sol = smo_solve(&k, &[1.0, -1.0], 1.0, 1e-3).unwrap();
        assert_eq!(sol.alphas, [1.0, 1.0]);
        assert!(sol.converged);
    }

    #[test]
    fn rejects_bad_input() {
        let k = vec![vec![1.0]];
        assert!(matches!(
            smo_solve(&k, &[1.0, -1.0], 1.0, 1e-3),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(smo_solve(&k, &[0.5], 1.0, 1e-3).is_err());
        assert!(smo_solve(&k, &[1.0], 0.0, 1e-3).is_err());
    }

    #[test]
    fn iteration_limit_flags_non_convergence() {
        let pts = [-2.0, -1.0, -0.5, 0.3, 1.0, 2.5];
        let k: Vec<Vec<f64>> = pts
            .iter()
            .map(|a: &f64| pts.iter().map(|b: &f64| (-(a - b).powi(2)).exp()).collect())
            .collect();
        let y = [-1.0, 1.0, -1.0, 1.0, -1.0, 1.0];
        let sol = smo_solve_with_limit(&k, &y, 1.0, 1e-9, 1).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations, 1);
        let full = smo_solve(&k, &y, 1.0, 1e-9).unwrap();
        assert!(full.converged);
        assert!(dual_objective(&k, &y, &full.alphas) >= dual_objective(&k, &y, &sol.alphas));
    }
}
