use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/synthetic-corpus")
}

fn wrac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wrac"))
        .args(args)
        .env_remove("WRAC_LLM_MODE")
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn ingest_writes_units_and_summary() {
    let out = tempfile::tempdir().unwrap();
    let o = wrac(&["ingest", "--corpus", corpus().to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("northwind-bank"));
    assert!(out.path().join("parse_summary.json").is_file());
    let units = fs::read_dir(out.path().join("units")).unwrap().count();
    assert!(units > 0);
}

#[test]
fn eval_then_retrieve_and_compare() {
    let out = tempfile::tempdir().unwrap();
    let run = |method: &str| {
        let dir = out.path().join(method);
        let o = wrac(&[
            "eval",
            "--corpus",
            corpus().to_str().unwrap(),
            "--method",
            method,
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", text(&o.stderr));
        assert!(text(&o.stdout).contains("Avg Recall@6"));
        dir
    };
    let a = run("fixed");
    let b = run("wrac-structural");
    for file in ["chunks.jsonl", "index.json", "per_query.jsonl", "metrics.json", "report.txt"] {
        assert!(b.join(file).is_file(), "{file} missing");
    }

    let o = wrac(&["retrieve", "--index", b.join("index.json").to_str().unwrap(), "--query", "roaming charges", "--k", "3"]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let lines: Vec<String> = text(&o.stdout).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].trim_start().starts_with("1 "));

    let o = wrac(&["compare", a.to_str().unwrap(), b.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("Retrieval Deltas"));
    assert!(out.path().join("compare.txt").is_file());
}

#[test]
fn unknown_method_is_a_usage_error() {
    let o = wrac(&["eval", "--corpus", corpus().to_str().unwrap(), "--method", "semantic"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("semantic"));
}

#[test]
fn compare_warns_about_missing_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    fs::create_dir_all(&a).unwrap();
    fs::create_dir_all(&b).unwrap();
    let row = r#"{"org":"o","method":"fixed","file":"f.md","chars":10,"input_tokens":0,"output_tokens":0,"cached_tokens":0,"wall_seconds":0.0}"#;
    fs::write(a.join("usage.jsonl"), format!("{row}\n")).unwrap();
    let o = wrac(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(text(&o.stderr).contains("warning"));
}

#[test]
fn empty_corpus_fails() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir_all(dir.path().join("docs")).unwrap();
    let o = wrac(&[
        "chunk",
        "--corpus",
        dir.path().to_str().unwrap(),
        "--method",
        "fixed",
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("no documents"), "{}", text(&o.stderr));
}
