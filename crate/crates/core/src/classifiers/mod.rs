//! The twelve classifier configurations behind one train/predict interface.

mod kernel;
mod knn;
pub mod logistic;
pub mod mlp;
mod naive_bayes;
mod svm;
mod tree;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use kernel::{kernel_eval, KernelKind, KernelParams};
pub use knn::Knn;
pub use logistic::{BinaryLogisticLoss, LogisticModel};
pub use mlp::{MlpLoss, MlpModel, MlpShape, MlpSolver};
pub use naive_bayes::{NaiveBayes, NbKind};
pub use svm::SvmModel;
pub use tree::{gini, DecisionTree};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::optim::OptimizerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    SvmLinear,
    SvmPoly,
    SvmRbf,
    SvmSigmoid,
    MlpLbfgs,
    MlpAdam,
    NbBernoulli,
    NbMultinomial,
    NbGaussian,
    LogisticRegression,
    DecisionTree,
    Knn,
}

impl Algorithm {
    /// All configurations in score-table row order.
    pub const ALL: [Algorithm; 12] = [
        Algorithm::SvmLinear,
        Algorithm::SvmPoly,
        Algorithm::SvmRbf,
        Algorithm::SvmSigmoid,
        Algorithm::MlpLbfgs,
        Algorithm::MlpAdam,
        Algorithm::NbBernoulli,
        Algorithm::NbMultinomial,
        Algorithm::NbGaussian,
        Algorithm::LogisticRegression,
        Algorithm::DecisionTree,
        Algorithm::Knn,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::SvmLinear => "svm_linear",
            Algorithm::SvmPoly => "svm_poly",
            Algorithm::SvmRbf => "svm_rbf",
            Algorithm::SvmSigmoid => "svm_sigmoid",
            Algorithm::MlpLbfgs => "mlp_lbfgs",
            Algorithm::MlpAdam => "mlp_adam",
            Algorithm::NbBernoulli => "nb_bernoulli",
            Algorithm::NbMultinomial => "nb_multinomial",
            Algorithm::NbGaussian => "nb_gaussian",
            Algorithm::LogisticRegression => "logistic_regression",
            Algorithm::DecisionTree => "decision_tree",
            Algorithm::Knn => "knn",
        }
    }

    /// Short row label as used in score tables.
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::SvmLinear => "SVM lin.",
            Algorithm::SvmPoly => "SVM pol.",
            Algorithm::SvmRbf => "SVM rad.",
            Algorithm::SvmSigmoid => "SVM sig.",
            Algorithm::MlpLbfgs => "Neur. lbfgs",
            Algorithm::MlpAdam => "Neur. adam",
            Algorithm::NbBernoulli => "Bern. NB",
            Algorithm::NbMultinomial => "Mult. NB",
            Algorithm::NbGaussian => "Gaus. NB",
            Algorithm::LogisticRegression => "LR",
            Algorithm::DecisionTree => "DT",
            Algorithm::Knn => "K-N",
        }
    }

    pub fn supports_scores(self) -> bool {
        matches!(
            self,
            Algorithm::MlpLbfgs
                | Algorithm::MlpAdam
                | Algorithm::NbBernoulli
                | Algorithm::NbMultinomial
                | Algorithm::NbGaussian
                | Algorithm::LogisticRegression
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Penalty parameter for SVM and logistic regression.
    pub c: f64,
    /// Kernel gamma; `None` means `1 / n_features`.
    pub gamma: Option<f64>,
    pub degree: u32,
    pub coef0: f64,
    pub svm_tol: f64,
    pub k_neighbors: usize,
    /// Additive smoothing for Bernoulli and multinomial NB.
    pub nb_alpha: f64,
    /// Gaussian NB variance floor as a fraction of the largest feature variance.
    pub var_smoothing: f64,
    pub hidden_units: usize,
    pub mlp_alpha: f64,
    /// L-BFGS iterations or Adam epochs for the perceptron.
    pub mlp_max_iter: usize,
    pub mlp_tol: f64,
    pub mlp_learning_rate: f64,
    pub mlp_batch_size: usize,
    pub lr_max_iter: usize,
    pub lr_tol: f64,
    pub max_depth: Option<usize>,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            c: 1.0,
            gamma: None,
            degree: 3,
            coef0: 0.0,
            svm_tol: 1e-3,
            k_neighbors: 5,
            nb_alpha: 1.0,
            var_smoothing: 1e-9,
            hidden_units: 100,
            mlp_alpha: 1e-4,
            mlp_max_iter: 200,
            mlp_tol: 1e-4,
            mlp_learning_rate: 1e-3,
            mlp_batch_size: 200,
            lr_max_iter: 100,
            lr_tol: 1e-4,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub algorithm: Algorithm,
    pub hyperparams: Hyperparams,
}

impl ClassifierSpec {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            hyperparams: Hyperparams::default(),
        }
    }

    pub fn with(algorithm: Algorithm, hyperparams: Hyperparams) -> Self {
        Self {
            algorithm,
            hyperparams,
        }
    }

    fn kernel(&self, n_features: usize) -> KernelParams {
        let kind = match self.algorithm {
            Algorithm::SvmPoly => KernelKind::Poly,
            Algorithm::SvmRbf => KernelKind::Rbf,
            Algorithm::SvmSigmoid => KernelKind::Sigmoid,
            _ => KernelKind::Linear,
        };
        let hp = &self.hyperparams;
        KernelParams {
            gamma: hp.gamma.unwrap_or(1.0 / n_features.max(1) as f64),
            degree: hp.degree,
            coef0: hp.coef0,
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "state", rename_all = "snake_case")]
pub enum ModelParams {
    Svm(SvmModel),
    Mlp(MlpModel),
    NaiveBayes(NaiveBayes),
    Logistic(LogisticModel),
    Tree(DecisionTree),
    Knn(Knn),
}

const MODEL_FORMAT_VERSION: u32 = 1;

/// A fitted classifier. Immutable; prediction is a pure function of the
/// stored parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    /// Sorted distinct training labels.
    pub classes: Vec<String>,
    pub n_features: usize,
    pub params: ModelParams,
}

pub(crate) fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        let u = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|x| *x = u);
        return;
    }
    let mut total = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        total += *x;
    }
    v.iter_mut().for_each(|x| *x /= total);
}

/// Trains on a vectorized corpus.
pub fn train(spec: &ClassifierSpec, data: &FeatureMatrix, seed: u64) -> Result<TrainedModel> {
    fit(spec, &data.rows, &data.labels, seed)
}

/// Trains on raw rows and string labels.
pub fn fit(
    spec: &ClassifierSpec,
    rows: &[Vec<f64>],
    labels: &[String],
    seed: u64,
) -> Result<TrainedModel> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: rows.len(),
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let n_features = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != n_features) {
        return Err(Error::DimensionMismatch {
            expected: n_features,
            found: r.len(),
        });
    }
    let mut classes: Vec<String> = labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::DegenerateLabels);
    }
    let y: Vec<usize> = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label collected above"))
        .collect();
    let k = classes.len();
    let hp = &spec.hyperparams;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let params = match spec.algorithm {
        Algorithm::SvmLinear | Algorithm::SvmPoly | Algorithm::SvmRbf | Algorithm::SvmSigmoid => {
            ModelParams::Svm(SvmModel::fit(
                rows,
                &y,
                k,
                spec.kernel(n_features),
                hp.c,
                hp.svm_tol,
            )?)
        }
        Algorithm::MlpLbfgs | Algorithm::MlpAdam => {
            let solver = if spec.algorithm == Algorithm::MlpLbfgs {
                MlpSolver::Lbfgs
            } else {
                MlpSolver::Adam
            };
            let settings = mlp::MlpSettings {
                hidden: hp.hidden_units,
                alpha: hp.mlp_alpha,
                solver,
                batch_size: hp.mlp_batch_size,
                optimizer: OptimizerConfig {
                    max_iterations: hp.mlp_max_iter,
                    tolerance: match solver {
                        MlpSolver::Lbfgs => hp.mlp_tol,
                        // Adam runs its full epoch budget unless updates vanish
                        MlpSolver::Adam => 0.0,
                    },
                    learning_rate: hp.mlp_learning_rate,
                    ..OptimizerConfig::default()
                },
            };
            ModelParams::Mlp(MlpModel::fit(rows, &y, k, &settings, &mut rng)?)
        }
        Algorithm::NbBernoulli | Algorithm::NbMultinomial | Algorithm::NbGaussian => {
            let kind = match spec.algorithm {
                Algorithm::NbBernoulli => NbKind::Bernoulli,
                Algorithm::NbMultinomial => NbKind::Multinomial,
                _ => NbKind::Gaussian,
            };
            ModelParams::NaiveBayes(NaiveBayes::fit(
                kind,
                rows,
                &y,
                k,
                hp.nb_alpha,
                hp.var_smoothing,
            )?)
        }
        Algorithm::LogisticRegression => {
            let cfg = OptimizerConfig {
                max_iterations: hp.lr_max_iter,
                tolerance: hp.lr_tol,
                ..OptimizerConfig::default()
            };
            ModelParams::Logistic(LogisticModel::fit(rows, &y, k, hp.c, &cfg)?)
        }
        Algorithm::DecisionTree => ModelParams::Tree(DecisionTree::fit(rows, &y, k, hp.max_depth)),
        Algorithm::Knn => ModelParams::Knn(Knn::fit(rows, &y, k, hp.k_neighbors)),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        classes,
        n_features,
        params,
    })
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

impl TrainedModel {
    fn check_row(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: row.len(),
            });
        }
        Ok(())
    }

    /// Index into `classes` of the predicted label.
    pub fn predict_index(&self, row: &[f64]) -> Result<usize> {
        self.check_row(row)?;
        Ok(match &self.params {
            ModelParams::Svm(m) => m.predict_one(row),
            ModelParams::Mlp(m) => argmax(&m.probabilities(row)),
            ModelParams::NaiveBayes(m) => argmax(&m.joint_log_likelihood(row)),
            ModelParams::Logistic(m) => argmax(&m.decision(row)),
            ModelParams::Tree(m) => m.predict_one(row),
            ModelParams::Knn(m) => m.predict_one(row),
        })
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<String>> {
        rows.iter()
            .map(|r| self.predict_index(r).map(|i| self.classes[i].clone()))
            .collect()
    }

    /// Per-class posterior rows (NB, logistic regression and MLP only).
    pub fn predict_scores(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter()
            .map(|r| {
                self.check_row(r)?;
                match &self.params {
                    ModelParams::Mlp(m) => Ok(m.probabilities(r)),
                    ModelParams::NaiveBayes(m) => Ok(m.posteriors(r)),
                    ModelParams::Logistic(m) => Ok(m.probabilities(r)),
                    _ => Err(Error::Unsupported(self.spec.algorithm.id())),
                }
            })
            .collect()
    }

    /// Mean negative log-probability of the true labels.
    pub fn log_loss(&self, rows: &[Vec<f64>], labels: &[String]) -> Result<f64> {
        let scores = self.predict_scores(rows)?;
        let mut total = 0.0;
        for (s, l) in scores.iter().zip(labels) {
            let i = self
                .classes
                .iter()
                .position(|c| c == l)
                .ok_or(Error::DegenerateLabels)?;
            total -= s[i].max(f64::MIN_POSITIVE).ln();
        }
        Ok(total / rows.len() as f64)
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "format_version": MODEL_FORMAT_VERSION, "model": self }).to_string()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Envelope {
            format_version: u32,
            model: TrainedModel,
        }
        let env: Envelope = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            reason: e.to_string(),
        })?;
        if env.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported model format version {}",
                env.format_version
            )));
        }
        Ok(env.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
