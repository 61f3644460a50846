//! The published score table as data, and every aggregate derived from it.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::classifiers::Algorithm;
use crate::corpus::{Language, Network};
use crate::error::{Error, Result};
use crate::features::VectorModel;
use crate::stats::{describe, mann_whitney_u, UTestResult};

const PUBLISHED_TABLE: &str = include_str!("../tables/table2.tsv");
const FIXTURE_HEADER: [&str; 5] = ["model", "classifier", "corpus", "mai", "f1"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mai {
    Football,
    Rock,
    Vegetarianism,
}

impl Mai {
    pub const ALL: [Mai; 3] = [Mai::Football, Mai::Rock, Mai::Vegetarianism];

    pub fn id(self) -> &'static str {
        match self {
            Mai::Football => "football",
            Mai::Rock => "rock",
            Mai::Vegetarianism => "vegetarianism",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Mai::Football => "Football",
            Mai::Rock => "Rock",
            Mai::Vegetarianism => "Vegetarianism",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Mai::Football => "F",
            Mai::Rock => "R",
            Mai::Vegetarianism => "V",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for Mai {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mai::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown MaI {s:?}")))
    }
}

/// A (network, language) corpus of the score table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Source {
    VkRu,
    TRu,
    TEn,
}

impl Source {
    pub const ALL: [Source; 3] = [Source::VkRu, Source::TRu, Source::TEn];

    pub fn id(self) -> &'static str {
        match self {
            Source::VkRu => "vk_ru",
            Source::TRu => "t_ru",
            Source::TEn => "t_en",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Source::VkRu => "Vk Ru",
            Source::TRu => "T Ru",
            Source::TEn => "T En",
        }
    }

    pub fn network(self) -> Network {
        match self {
            Source::VkRu => Network::Vkontakte,
            Source::TRu | Source::TEn => Network::Twitter,
        }
    }

    pub fn language(self) -> Language {
        match self {
            Source::VkRu | Source::TRu => Language::Ru,
            Source::TEn => Language::En,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Source::ALL
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown corpus {s:?}")))
    }
}

const N_MODELS: usize = 3;
const N_ALGOS: usize = 12;
const N_COLS: usize = 9;
const N_CELLS: usize = N_MODELS * N_ALGOS * N_COLS;

fn model_index(m: VectorModel) -> usize {
    VectorModel::ALL
        .iter()
        .position(|&x| x == m)
        .expect("listed in ALL")
}

fn algo_index(a: Algorithm) -> usize {
    Algorithm::ALL
        .iter()
        .position(|&x| x == a)
        .expect("listed in ALL")
}

fn cell_index(m: VectorModel, a: Algorithm, s: Source, mai: Mai) -> usize {
    (model_index(m) * N_ALGOS + algo_index(a)) * N_COLS + s.index() * 3 + mai.index()
}

/// Mean F1 for every (vector model, classifier, corpus, MaI) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    cells: Vec<f64>,
}

impl ScoreTable {
    /// The table shipped with the crate.
    pub fn published() -> Self {
        parse_fixture(PUBLISHED_TABLE).expect("shipped fixture is valid")
    }

    pub fn get(&self, model: VectorModel, algo: Algorithm, source: Source, mai: Mai) -> f64 {
        self.cells[cell_index(model, algo, source, mai)]
    }

    /// The nine cells of one row, corpora outermost.
    pub fn row(&self, model: VectorModel, algo: Algorithm) -> &[f64] {
        let start = (model_index(model) * N_ALGOS + algo_index(algo)) * N_COLS;
        &self.cells[start..start + N_COLS]
    }

    /// All 108 cells of one vector-model block.
    pub fn block(&self, model: VectorModel) -> &[f64] {
        let start = model_index(model) * N_ALGOS * N_COLS;
        &self.cells[start..start + N_ALGOS * N_COLS]
    }
}

fn cell_key(m: VectorModel, a: Algorithm, s: Source, mai: Mai) -> String {
    format!("{}/{}/{}/{}", m.id(), a.id(), s.id(), mai.id())
}

/// Parses the tab-separated fixture: a `model classifier corpus mai f1`
/// header followed by one line per cell.
pub fn parse_fixture(content: &str) -> Result<ScoreTable> {
    let mut cells: Vec<Option<f64>> = vec![None; N_CELLS];
    let mut lines = content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let parse_err = |line: usize, reason: String| Error::Parse { line, reason };

    match lines.next() {
        Some((_, header)) if header.split('\t').map(str::trim).eq(FIXTURE_HEADER) => {}
        Some((i, _)) => {
            return Err(parse_err(
                i + 1,
                "expected header model\\tclassifier\\tcorpus\\tmai\\tf1".into(),
            ))
        }
        None => return Err(parse_err(1, "empty fixture".into())),
    }

    for (i, line) in lines {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != FIXTURE_HEADER.len() {
            return Err(parse_err(
                lineno,
                format!("expected 5 fields, found {}", fields.len()),
            ));
        }
        let key_err = |e: Error| parse_err(lineno, e.to_string());
        let model: VectorModel = fields[0].parse().map_err(key_err)?;
        let algo: Algorithm = fields[1].parse().map_err(key_err)?;
        let source: Source = fields[2].parse().map_err(key_err)?;
        let mai: Mai = fields[3].parse().map_err(key_err)?;
        if fields[4].is_empty() {
            return Err(Error::MissingCell {
                model: model.id().into(),
                classifier: algo.id().into(),
                column: format!("{}/{}", source.id(), mai.id()),
            });
        }
        let value: f64 = fields[4]
            .parse()
            .map_err(|_| parse_err(lineno, format!("not a number: {:?}", fields[4])))?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Range {
                key: cell_key(model, algo, source, mai),
                value,
            });
        }
        let slot = &mut cells[cell_index(model, algo, source, mai)];
        if slot.is_some() {
            return Err(parse_err(
                lineno,
                format!("duplicate cell {}", cell_key(model, algo, source, mai)),
            ));
        }
        *slot = Some(value);
    }

    for model in VectorModel::ALL {
        for algo in Algorithm::ALL {
            for source in Source::ALL {
                for mai in Mai::ALL {
                    if cells[cell_index(model, algo, source, mai)].is_none() {
                        return Err(Error::MissingCell {
                            model: model.id().into(),
                            classifier: algo.id().into(),
                            column: format!("{}/{}", source.id(), mai.id()),
                        });
                    }
                }
            }
        }
    }
    Ok(ScoreTable {
        cells: cells
            .into_iter()
            .map(|c| c.expect("checked above"))
            .collect(),
    })
}

pub fn load_fixture(path: &Path) -> Result<ScoreTable> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fixture(&content)
}

/// Which frequency block contributes a classifier's second score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FreqVariant {
    Plain,
    Normalized,
    /// Either block; used where both carry the same scores. Reads the plain block.
    Either,
}

impl FreqVariant {
    pub fn id(self) -> &'static str {
        match self {
            FreqVariant::Plain => "plain",
            FreqVariant::Normalized => "normalized",
            FreqVariant::Either => "either",
        }
    }

    fn model(self) -> VectorModel {
        match self {
            FreqVariant::Plain | FreqVariant::Either => VectorModel::PlainFreq,
            FreqVariant::Normalized => VectorModel::NormFreq,
        }
    }
}

impl FromStr for FreqVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(FreqVariant::Plain),
            "normalized" | "norm" => Ok(FreqVariant::Normalized),
            "either" => Ok(FreqVariant::Either),
            other => Err(Error::InvalidConfig(format!(
                "unknown frequency variant {other:?}"
            ))),
        }
    }
}

impl fmt::Display for FreqVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SelectionRule {
    assignments: Vec<(Algorithm, FreqVariant)>,
}

impl SelectionRule {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Plain for SVM lin., Bern. NB, LR and DT; normalized for the other SVMs
    /// and both networks; either for Mult. and Gaus. NB; `knn` for K-N.
    pub fn published(knn: FreqVariant) -> Self {
        use Algorithm::*;
        use FreqVariant::*;
        let mut rule = Self::empty();
        for (a, v) in [
            (SvmLinear, Plain),
            (SvmPoly, Normalized),
            (SvmRbf, Normalized),
            (SvmSigmoid, Normalized),
            (MlpLbfgs, Normalized),
            (MlpAdam, Normalized),
            (NbBernoulli, Plain),
            (NbMultinomial, Either),
            (NbGaussian, Either),
            (LogisticRegression, Plain),
            (DecisionTree, Plain),
            (Knn, knn),
        ] {
            rule.assign(a, v);
        }
        rule
    }

    /// Replaces any earlier assignment of `algo`.
    pub fn assign(&mut self, algo: Algorithm, variant: FreqVariant) -> &mut Self {
        match self.assignments.iter_mut().find(|(a, _)| *a == algo) {
            Some(slot) => slot.1 = variant,
            None => self.assignments.push((algo, variant)),
        }
        self
    }

    pub fn variant(&self, algo: Algorithm) -> Option<FreqVariant> {
        self.assignments
            .iter()
            .find(|(a, _)| *a == algo)
            .map(|(_, v)| *v)
    }
}

/// Per MaI and corpus: the 12 Bernoulli scores followed by the 12 selected
/// frequency scores, classifiers in table order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreSets {
    sets: [[Vec<f64>; 3]; 3],
}

impl ScoreSets {
    pub fn subset(&self, mai: Mai, source: Source) -> &[f64] {
        &self.sets[mai.index()][source.index()]
    }

    /// The 72 scores of one MaI, corpora in table order.
    pub fn mai_set(&self, mai: Mai) -> Vec<f64> {
        self.sets[mai.index()].concat()
    }
}

pub fn select_scores(table: &ScoreTable, rule: &SelectionRule) -> Result<ScoreSets> {
    let variants = Algorithm::ALL
        .into_iter()
        .map(|a| {
            rule.variant(a)
                .ok_or_else(|| Error::IncompleteRule(a.id().into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sets: [[Vec<f64>; 3]; 3] = Default::default();
    for mai in Mai::ALL {
        for source in Source::ALL {
            let set = &mut sets[mai.index()][source.index()];
            set.extend(
                Algorithm::ALL
                    .into_iter()
                    .map(|a| table.get(VectorModel::Bernoulli, a, source, mai)),
            );
            set.extend(
                Algorithm::ALL
                    .into_iter()
                    .zip(&variants)
                    .map(|(a, v)| table.get(v.model(), a, source, mai)),
            );
        }
    }
    Ok(ScoreSets { sets })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaiRow {
    pub mai: Mai,
    pub total: f64,
    /// Indexed like [`Source::ALL`].
    pub source_sums: [f64; 3],
    pub vk_mean: f64,
    pub twitter_mean: f64,
    pub ru_mean: f64,
    pub en_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaiSummary {
    pub rows: Vec<MaiRow>,
}

fn sum(values: &[f64]) -> f64 {
    crate::stats::exact_sum(values)
}

fn mean_over<F: Fn(Source) -> bool>(sets: &ScoreSets, mai: Mai, keep: F) -> f64 {
    let values: Vec<f64> = Source::ALL
        .into_iter()
        .filter(|&s| keep(s))
        .flat_map(|s| sets.subset(mai, s).iter().copied())
        .collect();
    sum(&values) / values.len() as f64
}

pub fn mai_summary(sets: &ScoreSets) -> MaiSummary {
    let rows = Mai::ALL
        .into_iter()
        .map(|mai| MaiRow {
            mai,
            total: sum(&sets.mai_set(mai)),
            source_sums: Source::ALL.map(|s| sum(sets.subset(mai, s))),
            vk_mean: mean_over(sets, mai, |s| s.network() == Network::Vkontakte),
            twitter_mean: mean_over(sets, mai, |s| s.network() == Network::Twitter),
            ru_mean: mean_over(sets, mai, |s| s.language() == Language::Ru),
            en_mean: mean_over(sets, mai, |s| s.language() == Language::En),
        })
        .collect();
    MaiSummary { rows }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowSum {
    pub model: VectorModel,
    pub algorithm: Algorithm,
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockStats {
    pub model: VectorModel,
    pub ones: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub first: String,
    pub second: String,
    pub result: UTestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaperReport {
    pub knn: Option<FreqVariant>,
    pub continuity: bool,
    pub row_sums: Vec<RowSum>,
    pub blocks: Vec<BlockStats>,
    pub summary: MaiSummary,
    /// Indexed like [`Mai::ALL`].
    pub medians: [f64; 3],
    pub comparisons: Vec<Comparison>,
}

impl PaperReport {
    pub fn row_sum(&self, model: VectorModel, algo: Algorithm) -> f64 {
        self.row_sums
            .iter()
            .find(|r| r.model == model && r.algorithm == algo)
            .map(|r| r.sum)
            .expect("every row is summed")
    }

    pub fn block(&self, model: VectorModel) -> &BlockStats {
        self.blocks
            .iter()
            .find(|b| b.model == model)
            .expect("every block is present")
    }
}

/// Derived aggregates with the continuity correction off.
pub fn reproduce_paper_stats(table: &ScoreTable, rule: &SelectionRule) -> Result<PaperReport> {
    reproduce_paper_stats_with(table, rule, false)
}

pub fn reproduce_paper_stats_with(
    table: &ScoreTable,
    rule: &SelectionRule,
    continuity: bool,
) -> Result<PaperReport> {
    let sets = select_scores(table, rule)?;

    let mut row_sums = Vec::with_capacity(N_MODELS * N_ALGOS);
    for model in VectorModel::ALL {
        for algorithm in Algorithm::ALL {
            row_sums.push(RowSum {
                model,
                algorithm,
                sum: sum(table.row(model, algorithm)),
            });
        }
    }
    let blocks = VectorModel::ALL
        .into_iter()
        .map(|model| {
            let cells = table.block(model);
            BlockStats {
                model,
                ones: cells.iter().filter(|&&v| v == 1.0).count(),
                mean: sum(cells) / cells.len() as f64,
            }
        })
        .collect();

    let mut medians = [0.0; 3];
    for mai in Mai::ALL {
        medians[mai.index()] = describe(&sets.mai_set(mai))?.median;
    }

    let whole = |m: Mai| (m.label().to_string(), sets.mai_set(m));
    let part = |m: Mai, s: Source| {
        (
            format!("{} {}", m.label(), s.label()),
            sets.subset(m, s).to_vec(),
        )
    };
    // first-named sample carries U1
    let pairs = [
        (whole(Mai::Rock), whole(Mai::Vegetarianism)),
        (whole(Mai::Football), whole(Mai::Rock)),
        (whole(Mai::Football), whole(Mai::Vegetarianism)),
        (
            part(Mai::Football, Source::VkRu),
            part(Mai::Football, Source::TRu),
        ),
        (
            part(Mai::Football, Source::TEn),
            part(Mai::Football, Source::TRu),
        ),
        (part(Mai::Rock, Source::VkRu), part(Mai::Rock, Source::TRu)),
    ];
    let comparisons = pairs
        .into_iter()
        .map(|((first, x), (second, y))| {
            Ok(Comparison {
                first,
                second,
                result: mann_whitney_u(&x, &y, continuity)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PaperReport {
        knn: rule.variant(Algorithm::Knn),
        continuity,
        row_sums,
        blocks,
        summary: mai_summary(&sets),
        medians,
        comparisons,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::InvalidConfig(format!(
                "unknown report format {other:?}"
            ))),
        }
    }
}

pub fn render(report: &PaperReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => render_markdown(report),
        ReportFormat::Csv => render_csv(report),
    }
}

pub fn render_summary_markdown(summary: &MaiSummary) -> String {
    let mut out = String::new();
    out.push_str(
        "| MaI | Total | Vk Ru | T Ru | T En | Vk, mean | T, mean | Ru, mean | En, mean |\n",
    );
    out.push_str("|---|---|---|---|---|---|---|---|---|\n");
    for r in &summary.rows {
        let _ = writeln!(
            out,
            "| {} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} |",
            r.mai.short(),
            r.total,
            r.source_sums[0],
            r.source_sums[1],
            r.source_sums[2],
            r.vk_mean,
            r.twitter_mean,
            r.ru_mean,
            r.en_mean
        );
    }
    out
}

fn render_markdown(report: &PaperReport) -> String {
    let mut out = String::new();
    out.push_str("# Score table aggregates\n\n");
    let knn = report.knn.map_or("unassigned", FreqVariant::id);
    let _ = writeln!(
        out,
        "K-N frequency variant: {knn}. Continuity correction: {}.\n",
        if report.continuity { "on" } else { "off" }
    );

    out.push_str("## Row sums\n\n| Model | Classifier | Sum |\n|---|---|---|\n");
    for r in &report.row_sums {
        let _ = writeln!(
            out,
            "| {} | {} | {:.3} |",
            r.model.id(),
            r.algorithm.label(),
            r.sum
        );
    }

    out.push_str(
        "\n## Vector-model blocks\n\n| Model | Cells equal to 1.0 | Mean |\n|---|---|---|\n",
    );
    for b in &report.blocks {
        let _ = writeln!(out, "| {} | {} | {:.3} |", b.model.id(), b.ones, b.mean);
    }

    out.push_str("\n## Sums of MaI scores\n\n");
    out.push_str(&render_summary_markdown(&report.summary));

    out.push_str("\n## Medians\n\n| MaI | Median |\n|---|---|\n");
    for mai in Mai::ALL {
        let _ = writeln!(
            out,
            "| {} | {:.3} |",
            mai.label(),
            report.medians[mai.index()]
        );
    }

    out.push_str(
        "\n## Mann-Whitney U\n\n| First | Second | n1 | n2 | Statistic | p (two-sided) |\n",
    );
    out.push_str("|---|---|---|---|---|---|\n");
    for c in &report.comparisons {
        let r = &c.result;
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | U={:.1} | {:.4} |",
            c.first, c.second, r.n1, r.n2, r.u1, r.p_two_sided
        );
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_csv(report: &PaperReport) -> String {
    let mut out = String::from("section,key,value\n");
    let mut line = |section: &str, key: &str, value: f64| {
        let _ = writeln!(out, "{section},{},{value:.3}", csv_field(key));
    };
    for r in &report.row_sums {
        line(
            "row_sum",
            &format!("{}/{}", r.model.id(), r.algorithm.id()),
            r.sum,
        );
    }
    for b in &report.blocks {
        line("block_ones", b.model.id(), b.ones as f64);
        line("block_mean", b.model.id(), b.mean);
    }
    for r in &report.summary.rows {
        let m = r.mai.id();
        line("mai_total", m, r.total);
        for (s, v) in Source::ALL.iter().zip(r.source_sums) {
            line("mai_sum", &format!("{m}/{}", s.id()), v);
        }
        line("mai_mean", &format!("{m}/vk"), r.vk_mean);
        line("mai_mean", &format!("{m}/t"), r.twitter_mean);
        line("mai_mean", &format!("{m}/ru"), r.ru_mean);
        line("mai_mean", &format!("{m}/en"), r.en_mean);
    }
    for mai in Mai::ALL {
        line("median", mai.id(), report.medians[mai.index()]);
    }
    for c in &report.comparisons {
        let key = format!("{} vs {}", c.first, c.second);
        line("u_statistic", &key, c.result.u1);
        line("p_two_sided", &key, c.result.p_two_sided);
    }
    out
}
