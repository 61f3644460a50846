//! Keyword vocabulary and the three bag-of-words vector models.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VectorModel {
    /// Keyword presence (1) or absence (0).
    Bernoulli,
    /// Raw occurrence counts.
    PlainFreq,
    /// Occurrence counts divided by the document's token count.
    NormFreq,
}

impl VectorModel {
    pub const ALL: [VectorModel; 3] = [
        VectorModel::Bernoulli,
        VectorModel::PlainFreq,
        VectorModel::NormFreq,
    ];

    pub fn id(self) -> &'static str {
        match self {
            VectorModel::Bernoulli => "bernoulli",
            VectorModel::PlainFreq => "plain",
            VectorModel::NormFreq => "norm",
        }
    }
}

impl fmt::Display for VectorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for VectorModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bernoulli" => Ok(VectorModel::Bernoulli),
            "plain" | "plain_freq" => Ok(VectorModel::PlainFreq),
            "norm" | "norm_freq" | "normalized" => Ok(VectorModel::NormFreq),
            other => Err(Error::InvalidConfig(format!(
                "unknown vector model {other:?}"
            ))),
        }
    }
}

/// The top-k keywords of a document collection.
///
/// Tokens are ordered by descending frequency; equal frequencies are ordered
/// lexicographically so the selection does not depend on document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<usize>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Corpus frequency of the token at each vocabulary position.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn position(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }
}

pub fn build_vocabulary<'a, I>(token_lists: I, k: usize) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a [String]>,
{
    if k == 0 {
        return Err(Error::InvalidConfig(
            "vocabulary size must be at least 1".into(),
        ));
    }
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for tokens in token_lists {
        for tok in tokens {
            *freq.entry(tok.as_str()).or_default() += 1;
        }
    }
    if freq.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut ranked: Vec<(&str, usize)> = freq.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(k);

    let tokens: Vec<String> = ranked.iter().map(|(t, _)| t.to_string()).collect();
    let counts = ranked.iter().map(|(_, n)| *n).collect();
    let index = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(Vocabulary {
        tokens,
        counts,
        index,
    })
}

/// Vocabulary over the tokens of `docs`.
pub fn vocabulary_from_documents(docs: &[&Document], k: usize) -> Result<Vocabulary> {
    build_vocabulary(docs.iter().map(|d| d.tokens.as_slice()), k)
}

pub fn vectorize(tokens: &[String], vocab: &Vocabulary, model: VectorModel) -> Vec<f64> {
    let mut row = vec![0.0; vocab.len()];
    for tok in tokens {
        if let Some(i) = vocab.position(tok) {
            row[i] += 1.0;
        }
    }
    match model {
        VectorModel::PlainFreq => {}
        VectorModel::Bernoulli => {
            for v in &mut row {
                if *v > 0.0 {
                    *v = 1.0;
                }
            }
        }
        VectorModel::NormFreq => {
            if !tokens.is_empty() {
                let len = tokens.len() as f64;
                for v in &mut row {
                    *v /= len;
                }
            }
        }
    }
    row
}

/// A vectorized document collection aligned to one vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub model: VectorModel,
    pub vocab: Vocabulary,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

impl FeatureMatrix {
    pub fn n_features(&self) -> usize {
        self.vocab.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Writes the matrix as CSV: vocabulary header plus a trailing `label` column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let csv_err = |e: csv::Error| Error::InvalidConfig(format!("csv output failed: {e}"));
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.vocab.tokens().iter().map(String::as_str).collect();
        header.push("label");
        w.write_record(&header).map_err(csv_err)?;
        for (row, label) in self.rows.iter().zip(&self.labels) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(label.clone());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidConfig(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

pub fn build_matrix(
    docs: &[&Document],
    vocab: &Vocabulary,
    model: VectorModel,
) -> Result<FeatureMatrix> {
    if docs.is_empty() || vocab.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(FeatureMatrix {
        model,
        vocab: vocab.clone(),
        rows: docs
            .iter()
            .map(|d| vectorize(&d.tokens, vocab, model))
            .collect(),
        labels: docs.iter().map(|d| d.label.clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Language, Network};
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn vocab_of(lists: &[Vec<String>], k: usize) -> Vocabulary {
        build_vocabulary(lists.iter().map(Vec::as_slice), k).unwrap()
    }

    #[test]
    fn vocabulary_selection() {
        let v = vocab_of(&[toks("a b c a b a")], 2);
        assert_eq!(v.tokens(), ["a", "b"]);
        assert_eq!(v.counts(), [3, 2]);

        let v = vocab_of(&[toks("b a"), toks("a b")], 1);
        assert_eq!(v.tokens(), ["a"]);

        let many: Vec<String> = (0..500).map(|i| format!("t{i}")).collect();
        let v = vocab_of(&[many], 1000);
        assert_eq!(v.len(), 500);
    }

    #[test]
    fn vocabulary_errors() {
        let empty: Vec<Vec<String>> = vec![vec![]];
        assert!(matches!(
            build_vocabulary(empty.iter().map(Vec::as_slice), 10),
            Err(Error::EmptyCorpus)
        ));
        assert!(build_vocabulary([toks("a").as_slice()], 0).is_err());
    }

    #[test]
    fn vector_models() {
        let v = vocab_of(&[toks("a a b")], 2);
        let doc = toks("a a c");
        assert_eq!(vectorize(&doc, &v, VectorModel::Bernoulli), [1.0, 0.0]);
        assert_eq!(vectorize(&doc, &v, VectorModel::PlainFreq), [2.0, 0.0]);
        let norm = vectorize(&doc, &v, VectorModel::NormFreq);
        assert!((norm[0] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(norm[1], 0.0);
        assert_eq!(vectorize(&[], &v, VectorModel::NormFreq), [0.0, 0.0]);
    }

    #[test]
    fn matrix_alignment() {
        let docs: Vec<Document> = ["x y", "y z", "q"]
            .iter()
            .enumerate()
            .map(|(i, t)| {
                Document::new(
                    format!("d{i}"),
                    Network::Twitter,
                    Language::En,
                    format!("c{i}"),
                    *t,
                )
            })
            .collect();
        let refs: Vec<&Document> = docs.iter().collect();
        let vocab = vocabulary_from_documents(&refs[..2], 1000).unwrap();
        let m = build_matrix(&refs, &vocab, VectorModel::Bernoulli).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.labels, ["c0", "c1", "c2"]);
        assert!(m.rows[2].iter().all(|&v| v == 0.0));
        assert!(m.rows.iter().flatten().all(|&v| v == 0.0 || v == 1.0));

        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "y,x,z,label");
        assert_eq!(text.lines().count(), 4);
    }

    fn token_lists() -> impl Strategy<Value = Vec<Vec<String>>> {
        prop::collection::vec(
            prop::collection::vec("[a-f]{1,2}".prop_map(String::from), 0..15),
            1..8,
        )
    }

    proptest! {
        #[test]
        fn model_relations(lists in token_lists(), k in 1usize..20) {
            prop_assume!(lists.iter().any(|l| !l.is_empty()));
            let vocab = vocab_of(&lists, k);
            for doc in &lists {
                let plain = vectorize(doc, &vocab, VectorModel::PlainFreq);
                let bern = vectorize(doc, &vocab, VectorModel::Bernoulli);
                let norm = vectorize(doc, &vocab, VectorModel::NormFreq);
                for ((p, b), n) in plain.iter().zip(&bern).zip(&norm) {
                    prop_assert_eq!(*b, if *p > 0.0 { 1.0 } else { 0.0 });
                    prop_assert_eq!(p.fract(), 0.0);
                    prop_assert!((0.0..=1.0).contains(n));
                    if !doc.is_empty() {
                        prop_assert!((n - p / doc.len() as f64).abs() < 1e-12);
                    }
                }
                prop_assert!(norm.iter().sum::<f64>() <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn vocabulary_ignores_document_order(lists in token_lists(), k in 1usize..20) {
            prop_assume!(lists.iter().any(|l| !l.is_empty()));
            let mut rev = lists.clone();
            rev.reverse();
            prop_assert_eq!(vocab_of(&lists, k), vocab_of(&rev, k));
        }
    }
}
