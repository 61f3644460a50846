use super::{check_finite, norm, Minimum, OptimizerConfig, Termination};
use crate::error::Result;

/// Adam with bias-corrected moment estimates.
///
/// The oracle may answer with a mini-batch estimate; the value it reports is
/// used to keep the best iterate seen, which is what gets returned.
pub fn adam_minimize<F>(mut objective: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<Minimum>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    cfg.validate()?;
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut step = vec![0.0; n];
    let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    for t in 1..=cfg.max_iterations {
        let value = objective(&x, &mut grad);
        check_finite(value, &grad)?;
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, x.clone()));
        }
        let c1 = 1.0 - b1.powi(t as i32);
        let c2 = 1.0 - b2.powi(t as i32);
        for i in 0..n {
            m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
            v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            step[i] = cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_epsilon);
            x[i] -= step[i];
        }
        iterations = t;
        if norm(&step) <= cfg.tolerance {
            termination = Termination::Converged;
            break;
        }
    }

    if iterations > 0 {
        let value = objective(&x, &mut grad);
        check_finite(value, &grad)?;
        if best.as_ref().is_none_or(|(b, _)| value <= *b) {
            best = Some((value, x));
        }
    }
    let (value, x) = match best {
        Some(b) => b,
        None => {
            let value = objective(x0, &mut grad);
            check_finite(value, &grad)?;
            (value, x0.to_vec())
        }
    };
    Ok(Minimum {
        x,
        value,
        iterations,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn bowl(x: &[f64], g: &mut [f64]) -> f64 {
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi = 2.0 * xi;
        }
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn converges_on_quadratic() {
        let cfg = OptimizerConfig {
            learning_rate: 0.05,
            max_iterations: 5000,
            tolerance: 1e-9,
            ..Default::default()
        };
        let m = adam_minimize(bowl, &[1.5, -2.0, 0.5], &cfg).unwrap();
        assert!(norm(&m.x) < 1e-3, "{:?}", m.x);
    }

    #[test]
    fn zero_iterations_is_identity() {
        let cfg = OptimizerConfig {
            max_iterations: 0,
            ..Default::default()
        };
        let m = adam_minimize(bowl, &[1.0, 2.0], &cfg).unwrap();
        assert_eq!(m.x, [1.0, 2.0]);
        assert_eq!(m.iterations, 0);
    }

    #[test]
    fn first_step_is_bounded_by_learning_rate() {
        let cfg = OptimizerConfig {
            max_iterations: 1,
            learning_rate: 0.01,
            tolerance: 0.0,
            ..Default::default()
        };
        let x0 = [3.0, -1e-6, 250.0, 0.0];
        let mut seen = Vec::new();
        let f = |x: &[f64], g: &mut [f64]| {
            seen.push(x.to_vec());
            bowl(x, g)
        };
        adam_minimize(f, &x0, &cfg).unwrap();
        // second call evaluates the iterate after one step
        for (a, b) in seen[1].iter().zip(&x0) {
            assert!((a - b).abs() <= 0.01 * (1.0 + 1e-8));
        }
    }

    #[test]
    fn non_finite_gradient() {
        let f = |_: &[f64], g: &mut [f64]| {
            g[0] = f64::INFINITY;
            0.0
        };
        assert!(matches!(
            adam_minimize(f, &[0.0], &OptimizerConfig::default()),
            Err(Error::NumericalFailure(_))
        ));
    }

    #[test]
    fn returns_best_iterate() {
        // huge learning rate overshoots; the start must still be beaten or kept
        let cfg = OptimizerConfig {
            learning_rate: 10.0,
            max_iterations: 20,
            ..Default::default()
        };
        let m = adam_minimize(bowl, &[0.1], &cfg).unwrap();
        assert!(m.value <= 0.01 + 1e-15);
    }
}
