//! Labeled community-page texts and their normalization into tokens.
//!
//! A corpus file is JSON Lines: one object per line with the keys `id`,
//! `network`, `language`, `label` and `text`. Blank lines are skipped.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_properties::emoji::{self, UnicodeEmoji};
use unicode_properties::general_category::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Network {
    Twitter,
    Vkontakte,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Ru,
}

/// One community page: its raw text, labels and normalized tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub network: Network,
    pub language: Language,
    /// Interest class (e.g. `football`).
    pub label: String,
    pub raw_text: String,
    pub tokens: Vec<String>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        network: Network,
        language: Language,
        label: impl Into<String>,
        raw_text: impl Into<String>,
    ) -> Self {
        let raw_text = raw_text.into();
        let tokens = normalize_text(&raw_text);
        Self {
            id: id.into(),
            network,
            language,
            label: label.into(),
            raw_text,
            tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub name: String,
    pub documents: Vec<Document>,
    /// Distinct labels in order of first appearance.
    pub classes: Vec<String>,
}

impl Corpus {
    /// Builds a corpus, rejecting empty or repeated ids.
    pub fn new(name: impl Into<String>, documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut classes: Vec<String> = Vec::new();
        for doc in &documents {
            if doc.id.is_empty() || !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
            if !classes.contains(&doc.label) {
                classes.push(doc.label.clone());
            }
        }
        Ok(Self {
            name: name.into(),
            documents,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Indices of the documents carrying `label`, in corpus order.
    pub fn indices_of(&self, label: &str) -> Vec<usize> {
        self.documents
            .iter()
            .enumerate()
            .filter(|(_, d)| d.label == label)
            .map(|(i, _)| i)
            .collect()
    }
}

fn is_emoji(c: char) -> bool {
    // The Emoji property also covers ASCII digits, '#' and '*' (keycap bases).
    if c.is_ascii() {
        return false;
    }
    c.is_emoji_char_or_emoji_component()
        || emoji::is_zwj(c)
        || emoji::is_emoji_presentation_selector(c)
        || emoji::is_text_presentation_selector(c)
}

fn is_punctuation(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
}

/// Lowercases `raw`, splits on Unicode whitespace, drops hashtag tokens and
/// strips emoji and punctuation characters. Empty tokens are discarded.
///
/// ```
/// use maiclass::corpus::normalize_text;
/// assert_eq!(normalize_text("Go VEGAN!!! #health 🌱"), ["go", "vegan"]);
/// ```
pub fn normalize_text(raw: &str) -> Vec<String> {
    let folded = caseless::default_case_fold_str(raw).to_lowercase();
    folded
        .split_whitespace()
        .filter(|tok| !tok.starts_with('#'))
        .map(|tok| {
            tok.chars()
                // letters with no lowercase mapping (e.g. mathematical capitals) are dropped
                .filter(|&c| !is_emoji(c) && !is_punctuation(c) && !c.is_uppercase())
                .collect::<String>()
        })
        .filter(|tok| !tok.is_empty())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    network: Network,
    language: Language,
    label: String,
    text: String,
}

/// Parses corpus records from an in-memory JSON Lines string.
pub fn parse_corpus(name: &str, content: &str) -> Result<Corpus> {
    let mut documents = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        if rec.id.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                reason: "empty id".into(),
            });
        }
        if !seen.insert(rec.id.clone()) {
            return Err(Error::DuplicateId(rec.id));
        }
        documents.push(Document::new(
            rec.id,
            rec.network,
            rec.language,
            rec.label,
            rec.text,
        ));
    }
    Corpus::new(name, documents)
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    match format {
        CorpusFormat::Jsonl => parse_corpus(&name, &content),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Documents per class, in corpus class order.
    pub class_counts: Vec<(String, usize)>,
    pub expected_per_class: usize,
    /// Ids of documents whose token list is empty.
    pub empty_documents: Vec<String>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn unbalanced_classes(&self) -> Vec<&str> {
        self.class_counts
            .iter()
            .filter(|(_, n)| *n != self.expected_per_class)
            .map(|(c, _)| c.as_str())
            .collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (class, n) in &self.class_counts {
            let mark = if *n == self.expected_per_class {
                "ok"
            } else {
                "UNBALANCED"
            };
            writeln!(f, "{class}\t{n}\t{mark}")?;
        }
        for id in &self.empty_documents {
            writeln!(f, "empty document: {id}")?;
        }
        write!(f, "{}", if self.passed { "PASS" } else { "FAIL" })
    }
}

pub fn validate_corpus(corpus: &Corpus, expected_per_class: usize) -> ValidationReport {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in &corpus.documents {
        *counts.entry(doc.label.as_str()).or_default() += 1;
    }
    let class_counts: Vec<(String, usize)> = corpus
        .classes
        .iter()
        .map(|c| (c.clone(), counts.get(c.as_str()).copied().unwrap_or(0)))
        .collect();
    let empty_documents: Vec<String> = corpus
        .documents
        .iter()
        .filter(|d| d.tokens.is_empty())
        .map(|d| d.id.clone())
        .collect();
    let passed =
        empty_documents.is_empty() && class_counts.iter().all(|(_, n)| *n == expected_per_class);
    ValidationReport {
        class_counts,
        expected_per_class,
        empty_documents,
        passed,
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(Error::InvalidConfig(format!(
                "unknown corpus format {other:?}"
            ))),
        }
    }
}
