use serde::{Deserialize, Serialize};

use super::softmax_in_place;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NbKind {
    Bernoulli,
    Multinomial,
    Gaussian,
}

/// Per-class log-priors plus the fitted likelihood parameters of one
/// naive Bayes variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    kind: NbKind,
    log_prior: Vec<f64>,
    /// Multinomial: log theta. Bernoulli: log p. Gaussian: means.
    a: Vec<Vec<f64>>,
    /// Bernoulli: log (1 - p). Gaussian: variances. Unused for multinomial.
    b: Vec<Vec<f64>>,
}

impl NaiveBayes {
    pub fn fit(
        kind: NbKind,
        rows: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        alpha: f64,
        var_smoothing: f64,
    ) -> Result<Self> {
        if kind == NbKind::Multinomial && rows.iter().flatten().any(|&v| v < 0.0) {
            return Err(Error::InvalidConfig(
                "multinomial naive Bayes requires non-negative features".into(),
            ));
        }
        let d = rows[0].len();
        let mut class_n = vec![0usize; n_classes];
        for &c in y {
            class_n[c] += 1;
        }
        let n = rows.len() as f64;
        let log_prior = class_n.iter().map(|&k| (k as f64 / n).ln()).collect();

        let (a, b) = match kind {
            NbKind::Multinomial => {
                let mut counts = vec![vec![0.0; d]; n_classes];
                for (row, &c) in rows.iter().zip(y) {
                    for (acc, v) in counts[c].iter_mut().zip(row) {
                        *acc += v;
                    }
                }
                let log_theta = counts
                    .iter()
                    .map(|cnt| {
                        let total: f64 = cnt.iter().sum::<f64>() + alpha * d as f64;
                        cnt.iter().map(|v| ((v + alpha) / total).ln()).collect()
                    })
                    .collect();
                (log_theta, Vec::new())
            }
            NbKind::Bernoulli => {
                let mut present = vec![vec![0.0; d]; n_classes];
                for (row, &c) in rows.iter().zip(y) {
                    for (acc, v) in present[c].iter_mut().zip(row) {
                        if *v > 0.0 {
                            *acc += 1.0;
                        }
                    }
                }
                let mut log_p = Vec::with_capacity(n_classes);
                let mut log_q = Vec::with_capacity(n_classes);
                for (c, cnt) in present.iter().enumerate() {
                    let denom = class_n[c] as f64 + 2.0 * alpha;
                    let p: Vec<f64> = cnt.iter().map(|v| (v + alpha) / denom).collect();
                    log_p.push(p.iter().map(|v| v.ln()).collect());
                    log_q.push(p.iter().map(|v| (1.0 - v).ln()).collect());
                }
                (log_p, log_q)
            }
            NbKind::Gaussian => {
                let mut mean = vec![vec![0.0; d]; n_classes];
                for (row, &c) in rows.iter().zip(y) {
                    for (m, v) in mean[c].iter_mut().zip(row) {
                        *m += v;
                    }
                }
                for (c, m) in mean.iter_mut().enumerate() {
                    m.iter_mut().for_each(|v| *v /= class_n[c] as f64);
                }
                let mut var = vec![vec![0.0; d]; n_classes];
                for (row, &c) in rows.iter().zip(y) {
                    for ((s, v), m) in var[c].iter_mut().zip(row).zip(&mean[c]) {
                        *s += (v - m) * (v - m);
                    }
                }
                // floor relative to the largest feature variance over all rows
                let max_var = (0..d)
                    .map(|j| {
                        let mu = rows.iter().map(|r| r[j]).sum::<f64>() / n;
                        rows.iter().map(|r| (r[j] - mu).powi(2)).sum::<f64>() / n
                    })
                    .fold(0.0, f64::max);
                let eps = var_smoothing * max_var;
                for (c, v) in var.iter_mut().enumerate() {
                    v.iter_mut().for_each(|s| *s = *s / class_n[c] as f64 + eps);
                }
                (mean, var)
            }
        };
        Ok(Self {
            kind,
            log_prior,
            a,
            b,
        })
    }

    pub fn joint_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        (0..self.log_prior.len())
            .map(|c| {
                let lp = self.log_prior[c];
                match self.kind {
                    NbKind::Multinomial => {
                        lp + x.iter().zip(&self.a[c]).map(|(v, t)| v * t).sum::<f64>()
                    }
                    NbKind::Bernoulli => {
                        lp + x
                            .iter()
                            .zip(self.a[c].iter().zip(&self.b[c]))
                            .map(|(v, (lp, lq))| if *v > 0.0 { *lp } else { *lq })
                            .sum::<f64>()
                    }
                    NbKind::Gaussian => {
                        lp + x
                            .iter()
                            .zip(self.a[c].iter().zip(&self.b[c]))
                            .map(|(v, (m, s))| {
                                if *s > 0.0 {
                                    -0.5 * ((2.0 * std::f64::consts::PI * s).ln()
                                        + (v - m).powi(2) / s)
                                } else if v == m {
                                    0.0
                                } else {
                                    f64::NEG_INFINITY
                                }
                            })
                            .sum::<f64>()
                    }
                }
            })
            .collect()
    }

    pub fn posteriors(&self, x: &[f64]) -> Vec<f64> {
        let mut jll = self.joint_log_likelihood(x);
        softmax_in_place(&mut jll);
        jll
    }
}
