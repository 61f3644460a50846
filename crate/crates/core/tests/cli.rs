mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn maiclass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maiclass"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tables")
        .join(name)
}

fn write_corpus(dir: &Path) -> String {
    let path = dir.join("corpus.jsonl");
    std::fs::write(&path, common::synthetic_jsonl(3)).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn reproduce_shipped_fixture() {
    let table = fixture("table2.tsv");
    let out = maiclass(&["reproduce", "--fixture", table.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = text(&out.stdout);
    assert!(report.contains("U=2562.0"));
    assert!(report.contains("| F | 67.040 | 20.570 | 22.816 | 23.654 |"));
}

#[test]
fn reproduce_knn_flag_changes_selection() {
    let out = maiclass(&["reproduce", "--knn", "normalized"]);
    assert_eq!(out.status.code(), Some(0));
    let report = text(&out.stdout);
    assert!(report.contains("K-N frequency variant: normalized"));
    assert!(!report.contains("U=2562.0"));
}

#[test]
fn reproduce_writes_only_the_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.csv");
    let out = maiclass(&[
        "reproduce",
        "--format",
        "csv",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(&target).unwrap();
    assert!(csv.starts_with("section,key,value\n"));
    assert!(csv.contains("u_statistic,Rock vs Vegetarianism,2562.000"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn reproduce_reports_fixture_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsv");
    let shipped = std::fs::read_to_string(fixture("table2.tsv")).unwrap();
    std::fs::write(&bad, shipped.replacen("\t0.958\n", "\t\n", 1)).unwrap();
    let out = maiclass(&["reproduce", "--fixture", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("error[MissingCell]"));

    std::fs::write(&bad, shipped.replacen("\t0.958\n", "\t1.2\n", 1)).unwrap();
    let out = maiclass(&["reproduce", "--fixture", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("error[RangeError]"));
}

#[test]
fn eval_is_deterministic_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let args = [
        "eval",
        corpus.as_str(),
        "--model",
        "bernoulli",
        "--algo",
        "nb_multinomial",
        "--runs",
        "5",
        "--seed",
        "7",
    ];
    let a = maiclass(&args);
    let b = maiclass(&args);
    assert_eq!(a.status.code(), Some(0), "{}", text(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let csv = text(&a.stdout);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("spec,model,class,run_1,run_2,run_3,run_4,run_5,mean")
    );
    assert_eq!(lines.count(), 3);
}

#[test]
fn eval_usage_errors() {
    let out = maiclass(&["eval", "corpus.jsonl", "--model", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("bogus"));
    assert_eq!(
        maiclass(&["eval", "corpus.jsonl", "--unknown-flag"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        maiclass(&["eval", "corpus.jsonl", "--seed", "-x"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn eval_domain_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.jsonl");
    let record = |id: &str| {
        format!(
            r#"{{"id":"{id}","network":"twitter","language":"en","label":"rock","text":"guitar riff"}}"#
        )
    };
    std::fs::write(&path, format!("{}\n{}\n", record("a"), record("b"))).unwrap();
    let out = maiclass(&["eval", path.to_str().unwrap(), "--algo", "knn"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        text(&out.stderr).contains("error[DegenerateLabels]"),
        "{}",
        text(&out.stderr)
    );

    std::fs::write(&path, "{not json}\n").unwrap();
    let out = maiclass(&["eval", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("error[ParseError]"));
}

#[test]
fn validate_reports_balance() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let ok = maiclass(&["validate", &corpus, "--per-class", "30"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(text(&ok.stdout).ends_with("PASS\n"));
    let bad = maiclass(&["validate", &corpus, "--per-class", "29"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(text(&bad.stdout).contains("rock\t30\tUNBALANCED"));
}

#[test]
fn utest_and_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    std::fs::write(&a, "1\n2\n").unwrap();
    std::fs::write(&b, "3,4\n").unwrap();
    let out = maiclass(&["utest", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stdout).starts_with("statistic=U1=0.0 U2=4.0"));

    std::fs::write(&b, "# nothing\n").unwrap();
    let out = maiclass(&[
        "utest",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--no-continuity",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("error[EmptySample]"));

    let out = maiclass(&["agreement", fixture("table1.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        text(&out.stdout),
        "Rock\t50\nReenactment\t100\nFootball\t100\nVegetarianism\t100\nControl\t90\n"
    );
}
