use std::collections::VecDeque;

use super::{check_finite, dot, norm, Minimum, OptimizerConfig, Termination};
use crate::error::{Error, Result};

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_BRACKET: usize = 25;
const MAX_ZOOM: usize = 40;
// relative objective decrease below this ends the run
const F_REL_TOL: f64 = 10.0 * f64::EPSILON;

struct Probe {
    alpha: f64,
    value: f64,
    slope: f64,
    x: Vec<f64>,
    grad: Vec<f64>,
}

struct LineSearch<'a, F> {
    f: &'a mut F,
    x: &'a [f64],
    dir: &'a [f64],
    f0: f64,
    slope0: f64,
    /// Best point seen that satisfies sufficient decrease.
    armijo_best: Option<Probe>,
}

impl<F: FnMut(&[f64], &mut [f64]) -> f64> LineSearch<'_, F> {
    fn probe(&mut self, alpha: f64) -> Probe {
        let x: Vec<f64> = self
            .x
            .iter()
            .zip(self.dir)
            .map(|(xi, di)| xi + alpha * di)
            .collect();
        let mut grad = vec![0.0; x.len()];
        let value = (self.f)(&x, &mut grad);
        let slope = dot(&grad, self.dir);
        let mut p = Probe {
            alpha,
            value,
            slope,
            x,
            grad,
        };
        if !p.value.is_finite() || !p.slope.is_finite() {
            // treated as an overshoot
            p.value = f64::INFINITY;
            p.slope = f64::INFINITY;
        } else if self.armijo(&p) && self.armijo_best.as_ref().is_none_or(|b| p.value < b.value) {
            self.armijo_best = Some(Probe {
                alpha: p.alpha,
                value: p.value,
                slope: p.slope,
                x: p.x.clone(),
                grad: p.grad.clone(),
            });
        }
        p
    }

    fn armijo(&self, p: &Probe) -> bool {
        p.value <= self.f0 + C1 * p.alpha * self.slope0
    }

    fn curvature(&self, p: &Probe) -> bool {
        p.slope.abs() <= -C2 * self.slope0
    }

    /// Strong-Wolfe search: bracketing phase followed by zoom.
    fn run(mut self, alpha0: f64) -> Option<Probe> {
        let mut prev = Probe {
            alpha: 0.0,
            value: self.f0,
            slope: self.slope0,
            x: Vec::new(),
            grad: Vec::new(),
        };
        let mut alpha = alpha0;
        for i in 0..MAX_BRACKET {
            let cur = self.probe(alpha);
            if !self.armijo(&cur) || (i > 0 && cur.value >= prev.value) {
                return self.zoom(prev, cur);
            }
            if self.curvature(&cur) {
                return Some(cur);
            }
            if cur.slope >= 0.0 {
                return self.zoom(cur, prev);
            }
            alpha = cur.alpha * 2.0;
            prev = cur;
        }
        self.armijo_best
    }

    fn zoom(mut self, mut lo: Probe, mut hi: Probe) -> Option<Probe> {
        for _ in 0..MAX_ZOOM {
            let width = hi.alpha - lo.alpha;
            if width.abs() <= f64::EPSILON * lo.alpha.abs().max(1e-300) {
                break;
            }
            let alpha = interpolate(&lo, &hi);
            let cur = self.probe(alpha);
            if !self.armijo(&cur) || cur.value >= lo.value {
                hi = cur;
            } else {
                if self.curvature(&cur) {
                    return Some(cur);
                }
                if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = cur;
            }
        }
        self.armijo_best
    }
}

/// Cubic interpolation minimizer, safeguarded to the inner 80% of the bracket.
fn interpolate(lo: &Probe, hi: &Probe) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let mid = 0.5 * (a + b);
    if !hi.value.is_finite() || !hi.slope.is_finite() {
        return mid;
    }
    let d1 = lo.slope + hi.slope - 3.0 * (lo.value - hi.value) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
    let (left, right) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * (right - left);
    if t.is_finite() && t >= left + margin && t <= right - margin {
        t
    } else {
        mid
    }
}

/// Limited-memory BFGS with a strong-Wolfe line search.
///
/// Stops when the gradient norm drops to `cfg.tolerance`, when the objective
/// stops decreasing at rounding level, or after `cfg.max_iterations`. A line
/// search that finds no acceptable step from the starting point is an error;
/// later failures end the run and return the current (best) iterate.
pub fn lbfgs_minimize<F>(mut objective: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<Minimum>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    cfg.validate()?;
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; x.len()];
    let mut value = objective(&x, &mut grad);
    check_finite(value, &grad)?;

    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> =
        VecDeque::with_capacity(cfg.history_size);
    let mut iterations = 0;
    let mut termination = Termination::MaxIterations;

    while iterations < cfg.max_iterations {
        if norm(&grad) <= cfg.tolerance {
            termination = Termination::Converged;
            break;
        }
        let mut dir = two_loop(&grad, &history);
        let mut slope = dot(&grad, &dir);
        if !(slope < 0.0) {
            history.clear();
            dir = grad.iter().map(|g| -g).collect();
            slope = dot(&grad, &dir);
        }
        let alpha0 = if history.is_empty() {
            (1.0 / norm(&grad)).min(1.0)
        } else {
            1.0
        };
        let search = LineSearch {
            f: &mut objective,
            x: &x,
            dir: &dir,
            f0: value,
            slope0: slope,
            armijo_best: None,
        };
        let Some(step) = search.run(alpha0) else {
            if iterations == 0 {
                return Err(Error::LineSearchFailure);
            }
            if !history.is_empty() {
                // retry once along steepest descent
                history.clear();
                continue;
            }
            termination = Termination::LineSearchStalled;
            break;
        };
        iterations += 1;

        let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = step.grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > f64::EPSILON * dot(&y, &y) {
            if history.len() == cfg.history_size {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let decrease = value - step.value;
        let scale = value.abs().max(step.value.abs()).max(1.0);
        x = step.x;
        grad = step.grad;
        value = step.value;
        if decrease <= F_REL_TOL * scale {
            termination = if norm(&grad) <= cfg.tolerance {
                Termination::Converged
            } else {
                Termination::Stalled
            };
            break;
        }
    }
    if termination == Termination::MaxIterations && norm(&grad) <= cfg.tolerance {
        termination = Termination::Converged;
    }
    Ok(Minimum {
        x,
        value,
        iterations,
        termination,
    })
}

/// Applies the inverse-Hessian approximation to `-grad`.
fn two_loop(grad: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = grad.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in &mut q {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64], g: &mut [f64]) -> f64 {
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi = 2.0 * xi;
        }
        x.iter().map(|v| v * v).sum()
    }

    fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
        g[1] = 200.0 * (b - a * a);
        (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
    }

    #[test]
    fn sphere_minimum() {
        let cfg = OptimizerConfig {
            tolerance: 1e-10,
            ..Default::default()
        };
        let m = lbfgs_minimize(sphere, &[3.0, 4.0], &cfg).unwrap();
        assert!(norm(&m.x) < 1e-6, "{:?}", m.x);
        assert!(m.value <= 25.0);
    }

    #[test]
    fn rosenbrock_minimum() {
        let cfg = OptimizerConfig {
            tolerance: 1e-10,
            max_iterations: 1000,
            ..Default::default()
        };
        let m = lbfgs_minimize(rosenbrock, &[-1.2, 1.0], &cfg).unwrap();
        assert!(
            (m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4,
            "{m:?}"
        );
    }

    #[test]
    fn nan_gradient_is_reported() {
        let f = |_: &[f64], g: &mut [f64]| {
            g[0] = f64::NAN;
            1.0
        };
        assert!(matches!(
            lbfgs_minimize(f, &[1.0], &OptimizerConfig::default()),
            Err(Error::NumericalFailure(_))
        ));
    }

    #[test]
    fn wrong_gradient_fails_line_search() {
        // gradient points uphill, so no descent step exists
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = -2.0 * x[0];
            x[0] * x[0]
        };
        assert!(matches!(
            lbfgs_minimize(f, &[1.0], &OptimizerConfig::default()),
            Err(Error::LineSearchFailure)
        ));
    }

    #[test]
    fn never_worse_than_start() {
        let cfg = OptimizerConfig {
            max_iterations: 3,
            ..Default::default()
        };
        let mut g = [0.0; 2];
        let start = rosenbrock(&[-1.2, 1.0], &mut g);
        let m = lbfgs_minimize(rosenbrock, &[-1.2, 1.0], &cfg).unwrap();
        assert!(m.value <= start);
        assert_eq!(m.termination, Termination::MaxIterations);
    }
}
