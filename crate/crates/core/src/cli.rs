//! `maiclass` command-line interface.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::classifiers::Algorithm;
use crate::corpus::{load_corpus, validate_corpus, CorpusFormat};
use crate::error::{Error, Result};
use crate::eval::{run_grid, write_results_csv, ExperimentConfig};
use crate::features::VectorModel;
use crate::report::{
    load_fixture, render, reproduce_paper_stats_with, FreqVariant, ReportFormat, ScoreTable,
    SelectionRule,
};
use crate::stats::{mann_whitney_u_with, AgreementTable, PMethod, UTestOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "maiclass",
    version,
    about = "Interest classification of community pages"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check class balance and empty documents of a JSONL corpus.
    Validate {
        corpus: PathBuf,
        #[arg(long, default_value_t = 30)]
        per_class: usize,
    },
    /// Run the repeated stratified-split evaluation and write per-class F1 as CSV.
    Eval(EvalArgs),
    /// Two-sided Mann-Whitney U test between two files of numbers.
    Utest {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        no_continuity: bool,
        #[arg(long, value_enum, default_value_t = MethodArg::Asymptotic)]
        method: MethodArg,
    },
    /// Percent agreement per column of a 0/1 rater table.
    Agreement { table: PathBuf },
    /// Recompute every aggregate of the published score table.
    Reproduce {
        /// Defaults to the table shipped with the crate.
        #[arg(long)]
        fixture: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = KnnArg::Plain)]
        knn: KnnArg,
        #[arg(long)]
        continuity: bool,
        #[arg(long, value_enum, default_value_t = FormatArg::Markdown)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct EvalArgs {
    corpus: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelArg::Bernoulli)]
    model: ModelArg,
    /// Classifier id or `all`.
    #[arg(long, default_value = "all", value_parser = algo_values())]
    algo: String,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    vocab: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn algo_values() -> clap::builder::PossibleValuesParser {
    let mut ids: Vec<&'static str> = Algorithm::ALL.iter().map(|a| a.id()).collect();
    ids.push("all");
    clap::builder::PossibleValuesParser::new(ids)
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Bernoulli,
    Plain,
    Norm,
    All,
}

impl ModelArg {
    fn models(self) -> Vec<VectorModel> {
        match self {
            ModelArg::Bernoulli => vec![VectorModel::Bernoulli],
            ModelArg::Plain => vec![VectorModel::PlainFreq],
            ModelArg::Norm => vec![VectorModel::NormFreq],
            ModelArg::All => VectorModel::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KnnArg {
    Plain,
    Normalized,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Markdown,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Asymptotic,
    Exact,
    Auto,
}

/// Runs the CLI on the process streams.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_cli_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI writing results to `out` and diagnostics to `err`.
pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                EXIT_USAGE
            } else {
                let _ = write!(out, "{}", e.render());
                EXIT_OK
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {e}", e.name());
            EXIT_DOMAIN
        }
    }
}

fn write_err(path: Option<&Path>, e: io::Error) -> Error {
    Error::io(
        path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
        e,
    )
}

/// Writes `text` to `path` when given, otherwise to `out`.
fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| write_err(Some(p), e)),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| write_err(None, e)),
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Validate { corpus, per_class } => {
            let c = load_corpus(&corpus, CorpusFormat::Jsonl)?;
            let report = validate_corpus(&c, per_class);
            emit(&format!("{report}\n"), None, out)?;
            Ok(if report.passed { EXIT_OK } else { EXIT_DOMAIN })
        }
        Command::Eval(args) => {
            let corpus = load_corpus(&args.corpus, CorpusFormat::Jsonl)?;
            let algorithms = if args.algo == "all" {
                Algorithm::ALL.to_vec()
            } else {
                vec![args.algo.parse()?]
            };
            let cfg = ExperimentConfig {
                runs: args.runs as usize,
                vocab_k: args.vocab as usize,
                master_seed: args.seed,
            };
            let results = run_grid(&corpus, &args.model.models(), &algorithms, &cfg)?;
            match &args.out {
                Some(p) => {
                    let f = File::create(p).map_err(|e| Error::io(p, e))?;
                    write_results_csv(&results, BufWriter::new(f))?;
                }
                None => write_results_csv(&results, &mut *out)?,
            }
            Ok(EXIT_OK)
        }
        Command::Utest {
            a,
            b,
            no_continuity,
            method,
        } => {
            let x = read_numbers(&a)?;
            let y = read_numbers(&b)?;
            let opts = UTestOptions {
                continuity: !no_continuity,
                method: match method {
                    MethodArg::Asymptotic => PMethod::Asymptotic,
                    MethodArg::Exact => PMethod::Exact,
                    MethodArg::Auto => PMethod::Auto,
                },
            };
            let r = mann_whitney_u_with(&x, &y, opts)?;
            let text = format!(
                "statistic=U1={:.1} U2={:.1} n1={} n2={} z={:.6} pvalue={:.6} two-sided method={:?} continuity={} tie_groups={}\n",
                r.u1, r.u2, r.n1, r.n2, r.z, r.p_two_sided, r.method, r.continuity_applied, r.tie_groups
            );
            emit(&text, None, out)?;
            Ok(EXIT_OK)
        }
        Command::Agreement { table } => {
            let f = File::open(&table).map_err(|e| Error::io(&table, e))?;
            let t = AgreementTable::from_csv(f)?;
            let mut text = String::new();
            for (name, pct) in t.samples.iter().zip(t.percent()) {
                text.push_str(&format!("{name}\t{pct}\n"));
            }
            emit(&text, None, out)?;
            Ok(EXIT_OK)
        }
        Command::Reproduce {
            fixture,
            knn,
            continuity,
            format,
            out: out_path,
        } => {
            let table = match &fixture {
                Some(p) => load_fixture(p)?,
                None => ScoreTable::published(),
            };
            let knn = match knn {
                KnnArg::Plain => FreqVariant::Plain,
                KnnArg::Normalized => FreqVariant::Normalized,
            };
            let report =
                reproduce_paper_stats_with(&table, &SelectionRule::published(knn), continuity)?;
            let format = match format {
                FormatArg::Markdown => ReportFormat::Markdown,
                FormatArg::Csv => ReportFormat::Csv,
            };
            emit(&render(&report, format), out_path.as_deref(), out)?;
            Ok(EXIT_OK)
        }
    }
}

/// Numbers separated by commas or whitespace; `#` starts a comment.
fn read_numbers(path: &Path) -> Result<Vec<f64>> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line = line.split('#').next().unwrap_or_default();
        for tok in line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: i + 1,
                reason: format!("not a number: {tok:?}"),
            })?;
            values.push(v);
        }
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("maiclass").chain(args.iter().copied());
        let code = run_cli_with(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(&["eval", "x.jsonl", "--model", "bogus"]).0, EXIT_USAGE);
        assert_eq!(run(&["eval", "x.jsonl", "--algo", "svm"]).0, EXIT_USAGE);
        assert_eq!(run(&["eval", "x.jsonl", "--runs", "0"]).0, EXIT_USAGE);
        assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run(&[]).0, EXIT_USAGE);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("reproduce"));
    }

    #[test]
    fn missing_file_is_domain_error() {
        let (code, _, err) = run(&["agreement", "/nonexistent/table.csv"]);
        assert_eq!(code, EXIT_DOMAIN);
        assert!(err.starts_with("error[IoError]"), "{err}");
    }

    #[test]
    fn reproduce_default_fixture() {
        let (code, out, _) = run(&["reproduce"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("U=2562.0"));
    }
}
