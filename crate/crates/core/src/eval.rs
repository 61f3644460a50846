//! Repeated stratified half/half splits scored by per-class F1.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classifiers::{train, Algorithm, ClassifierSpec};
use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::features::{build_matrix, vocabulary_from_documents, VectorModel};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassSplit {
    pub label: String,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Train/test document indices per class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub classes: Vec<ClassSplit>,
}

impl SplitPlan {
    pub fn train_indices(&self) -> Vec<usize> {
        self.classes
            .iter()
            .flat_map(|c| c.train.iter().copied())
            .collect()
    }

    pub fn test_indices(&self) -> Vec<usize> {
        self.classes
            .iter()
            .flat_map(|c| c.test.iter().copied())
            .collect()
    }
}

/// Shuffles each class independently and sends the first `ceil(n/2)`
/// documents to training, the rest to test.
pub fn stratified_split(corpus: &Corpus, seed: u64) -> Result<SplitPlan> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes = Vec::with_capacity(corpus.classes.len());
    for label in &corpus.classes {
        let mut idx = corpus.indices_of(label);
        if idx.len() < 2 {
            return Err(Error::ClassTooSmall(label.clone()));
        }
        idx.shuffle(&mut rng);
        let test = idx.split_off(idx.len().div_ceil(2));
        classes.push(ClassSplit {
            label: label.clone(),
            train: idx,
            test,
        });
    }
    Ok(SplitPlan { seed, classes })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassF1 {
    pub class: String,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    /// Some ratio was 0/0 and was mapped to 0.
    pub degenerate: bool,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// One-vs-rest F1 for every class in `classes`, in that order.
pub fn f1_scores(gold: &[String], pred: &[String], classes: &[String]) -> Result<Vec<ClassF1>> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch {
            left: gold.len(),
            right: pred.len(),
        });
    }
    Ok(classes
        .iter()
        .map(|c| {
            let (mut tp, mut fp, mut fn_) = (0, 0, 0);
            for (g, p) in gold.iter().zip(pred) {
                match (g == c, p == c) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    (false, false) => {}
                }
            }
            let (precision, dp) = ratio(tp, tp + fp);
            let (recall, dr) = ratio(tp, tp + fn_);
            let sum = precision + recall;
            let (f1, df) = if sum > 0.0 {
                (2.0 * precision * recall / sum, false)
            } else {
                (0.0, true)
            };
            ClassF1 {
                class: c.clone(),
                f1,
                precision,
                recall,
                degenerate: dp || dr || df,
            }
        })
        .collect())
}

/// Seed for run `run` derived only from the master seed (SplitMix64 mix).
pub fn run_seed(master_seed: u64, run: usize) -> u64 {
    let mut z = master_seed ^ (run as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunScores {
    pub seed: u64,
    pub f1: Vec<ClassF1>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub spec: ClassifierSpec,
    pub model: VectorModel,
    pub classes: Vec<String>,
    pub runs: Vec<RunScores>,
    /// Mean F1 over runs, aligned with `classes`.
    pub mean_f1: Vec<f64>,
}

impl EvalResult {
    pub fn mean_for(&self, class: &str) -> Option<f64> {
        self.classes
            .iter()
            .position(|c| c == class)
            .map(|i| self.mean_f1[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub runs: usize,
    pub vocab_k: usize,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            runs: 5,
            vocab_k: 1000,
            master_seed: 0,
        }
    }
}

fn single_run(
    corpus: &Corpus,
    model: VectorModel,
    spec: &ClassifierSpec,
    vocab_k: usize,
    seed: u64,
) -> Result<RunScores> {
    let plan = stratified_split(corpus, seed)?;
    let pick = |idx: Vec<usize>| -> Vec<&Document> {
        idx.into_iter().map(|i| &corpus.documents[i]).collect()
    };
    let train_docs = pick(plan.train_indices());
    let test_docs = pick(plan.test_indices());
    let vocab = vocabulary_from_documents(&train_docs, vocab_k)?;
    let train_m = build_matrix(&train_docs, &vocab, model)?;
    let test_m = build_matrix(&test_docs, &vocab, model)?;
    let fitted = train(spec, &train_m, seed)?;
    let pred = fitted.predict(&test_m.rows)?;
    Ok(RunScores {
        seed,
        f1: f1_scores(&test_m.labels, &pred, &corpus.classes)?,
    })
}

/// Runs the split/vectorize/train/score cycle `cfg.runs` times.
///
/// The vocabulary is rebuilt from each run's training half.
pub fn run_experiment(
    corpus: &Corpus,
    model: VectorModel,
    spec: &ClassifierSpec,
    cfg: &ExperimentConfig,
) -> Result<EvalResult> {
    if cfg.runs == 0 {
        return Err(Error::InvalidConfig("runs must be at least 1".into()));
    }
    let runs = (0..cfg.runs)
        .into_par_iter()
        .map(|r| {
            single_run(
                corpus,
                model,
                spec,
                cfg.vocab_k,
                run_seed(cfg.master_seed, r),
            )
            .map_err(|e| Error::Run {
                run: r + 1,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_f1 = (0..corpus.classes.len())
        .map(|c| runs.iter().map(|r| r.f1[c].f1).sum::<f64>() / runs.len() as f64)
        .collect();
    Ok(EvalResult {
        spec: spec.clone(),
        model,
        classes: corpus.classes.clone(),
        runs,
        mean_f1,
    })
}

/// Every (algorithm, model) combination, ordered by model then algorithm.
pub fn run_grid(
    corpus: &Corpus,
    models: &[VectorModel],
    algorithms: &[Algorithm],
    cfg: &ExperimentConfig,
) -> Result<Vec<EvalResult>> {
    let mut jobs: Vec<(VectorModel, Algorithm)> = models
        .iter()
        .flat_map(|&m| algorithms.iter().map(move |&a| (m, a)))
        .collect();
    jobs.sort();
    jobs.dedup();
    jobs.par_iter()
        .map(|&(m, a)| run_experiment(corpus, m, &ClassifierSpec::new(a), cfg))
        .collect()
}

/// CSV with columns `spec,model,class,run_1..run_n,mean`.
pub fn write_results_csv<W: Write>(results: &[EvalResult], out: W) -> Result<()> {
    let csv_err = |e: csv::Error| Error::InvalidConfig(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let n_runs = results.iter().map(|r| r.runs.len()).max().unwrap_or(0);
    let mut header = vec!["spec".to_string(), "model".into(), "class".into()];
    header.extend((1..=n_runs).map(|i| format!("run_{i}")));
    header.push("mean".into());
    w.write_record(&header).map_err(csv_err)?;
    for res in results {
        for (c, class) in res.classes.iter().enumerate() {
            let mut rec = vec![
                res.spec.algorithm.id().to_string(),
                res.model.id().to_string(),
                class.clone(),
            ];
            rec.extend(res.runs.iter().map(|r| format!("{:.6}", r.f1[c].f1)));
            rec.extend((res.runs.len()..n_runs).map(|_| String::new()));
            rec.push(format!("{:.6}", res.mean_f1[c]));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush()
        .map_err(|e| Error::InvalidConfig(format!("csv output failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Language, Network};
    use proptest::prelude::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn corpus_with(sizes: &[(&str, usize)]) -> Corpus {
        let mut docs = Vec::new();
        for (label, n) in sizes {
            for i in 0..*n {
                docs.push(Document::new(
                    format!("{label}{i}"),
                    Network::Vkontakte,
                    Language::Ru,
                    *label,
                    format!("{label} w{i}"),
                ));
            }
        }
        Corpus::new("t", docs).unwrap()
    }

    #[test]
    fn split_halves() {
        let c = corpus_with(&[("f", 30), ("r", 30), ("v", 30)]);
        let plan = stratified_split(&c, 11).unwrap();
        for cs in &plan.classes {
            assert_eq!((cs.train.len(), cs.test.len()), (15, 15));
            assert!(cs.train.iter().all(|i| !cs.test.contains(i)));
        }
        assert_eq!(plan, stratified_split(&c, 11).unwrap());
        assert_ne!(plan, stratified_split(&c, 12).unwrap());

        let odd = corpus_with(&[("a", 7), ("b", 2)]);
        let plan = stratified_split(&odd, 0).unwrap();
        assert_eq!(
            (plan.classes[0].train.len(), plan.classes[0].test.len()),
            (4, 3)
        );

        let tiny = corpus_with(&[("a", 5), ("b", 1)]);
        assert!(matches!(stratified_split(&tiny, 0), Err(Error::ClassTooSmall(l)) if l == "b"));
    }

    #[test]
    fn f1_examples() {
        let gold = s(&["a", "b", "c", "a"]);
        let all = s(&["a", "b", "c"]);
        for f in f1_scores(&gold, &gold, &all).unwrap() {
            assert_eq!(f.f1, 1.0);
        }
        // class A: TP=1, FP=1, FN=1
        let gold = s(&["A", "A", "B"]);
        let pred = s(&["A", "B", "A"]);
        let f = f1_scores(&gold, &pred, &s(&["A"])).unwrap();
        assert!((f[0].f1 - 0.5).abs() < 1e-15);
        assert!(!f[0].degenerate);

        let f = f1_scores(&gold, &pred, &s(&["Z"])).unwrap();
        assert_eq!(f[0].f1, 0.0);
        assert!(f[0].degenerate);

        assert!(matches!(
            f1_scores(&gold, &pred[..2], &all),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn seeds_differ_per_run() {
        let seeds: Vec<u64> = (0..5).map(|r| run_seed(7, r)).collect();
        let mut uniq = seeds.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 5);
    }

    fn labels_strategy() -> impl Strategy<Value = (Vec<String>, Vec<String>)> {
        prop::collection::vec((0usize..4, 0usize..4), 1..40).prop_map(|pairs| {
            let names = ["w", "x", "y", "z"];
            pairs
                .into_iter()
                .map(|(g, p)| (names[g].to_string(), names[p].to_string()))
                .unzip()
        })
    }

    proptest! {
        #[test]
        fn split_partitions_every_class(sizes in prop::collection::vec(2usize..12, 1..5), seed: u64) {
            let names = ["a", "b", "c", "d", "e"];
            let spec: Vec<(&str, usize)> = sizes.iter().enumerate().map(|(i, n)| (names[i], *n)).collect();
            let c = corpus_with(&spec);
            let plan = stratified_split(&c, seed).unwrap();
            let mut all = plan.train_indices();
            all.extend(plan.test_indices());
            all.sort();
            prop_assert_eq!(all, (0..c.len()).collect::<Vec<_>>());
            for cs in &plan.classes {
                let n = cs.train.len() + cs.test.len();
                prop_assert_eq!(cs.train.len(), n.div_ceil(2));
            }
        }

        #[test]
        fn f1_invariant_under_joint_permutation((gold, pred) in labels_strategy(), seed: u64) {
            let classes = s(&["w", "x", "y", "z"]);
            let base = f1_scores(&gold, &pred, &classes).unwrap();
            let mut idx: Vec<usize> = (0..gold.len()).collect();
            idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let g2: Vec<String> = idx.iter().map(|&i| gold[i].clone()).collect();
            let p2: Vec<String> = idx.iter().map(|&i| pred[i].clone()).collect();
            prop_assert_eq!(base, f1_scores(&g2, &p2, &classes).unwrap());
        }

        #[test]
        fn f1_follows_relabeling((gold, pred) in labels_strategy()) {
            let classes = s(&["w", "x", "y", "z"]);
            let rename = |l: &String| match l.as_str() { "w" => "z", "x" => "w", "y" => "x", _ => "y" }.to_string();
            let base = f1_scores(&gold, &pred, &classes).unwrap();
            let g2: Vec<String> = gold.iter().map(rename).collect();
            let p2: Vec<String> = pred.iter().map(rename).collect();
            let renamed: Vec<String> = classes.iter().map(rename).collect();
            let moved = f1_scores(&g2, &p2, &renamed).unwrap();
            for (a, b) in base.iter().zip(&moved) {
                prop_assert_eq!(a.f1, b.f1);
                prop_assert!((0.0..=1.0).contains(&a.f1));
            }
        }
    }
}
