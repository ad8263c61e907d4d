use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybrid-rank"))
}

fn config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/mini.toml")
}

fn run(args: &[&str], out: &Path) -> Output {
    let o = bin()
        .args(args)
        .arg("--config")
        .arg(config())
        .arg("--output-dir")
        .arg(out)
        .env("HYBRID_RANK_CACHE_DIR", out.join("corpus-cache"))
        .output()
        .unwrap();
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn pipeline(out: &Path) -> Value {
    for stage in ["ingest", "fit", "train", "tune"] {
        run(&[stage], out);
    }
    run(&["rank", "--ranker", "tfidf"], out);
    run(&["rank", "--ranker", "boe"], out);
    let s = out.join("scores");
    run(
        &[
            "fuse",
            s.join("tfidf.tsv").to_str().unwrap(),
            s.join("boe.tsv").to_str().unwrap(),
        ],
        out,
    );
    let o = run(
        &[
            "evaluate",
            "--scores",
            s.join("tfidf+boe.tsv").to_str().unwrap(),
        ],
        out,
    );
    stdout_json(&o)
}

fn assert_json_close(got: &Value, want: &Value, path: &str) {
    match (got, want) {
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            assert!((a - b).abs() <= 1e-12, "{path}: {a} vs {b}");
        }
        (Value::Object(a), Value::Object(b)) => {
            assert_eq!(
                a.keys().collect::<Vec<_>>(),
                b.keys().collect::<Vec<_>>(),
                "{path}"
            );
            for (k, v) in a {
                assert_json_close(v, &b[k], &format!("{path}.{k}"));
            }
        }
        _ => assert_eq!(got, want, "{path}"),
    }
}

#[test]
fn full_pipeline_matches_the_golden_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = pipeline(dir.path());
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/mini_fused_report.json");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(
            &golden,
            format!("{}\n", serde_json::to_string_pretty(&report).unwrap()),
        )
        .unwrap();
    }
    let want: Value = serde_json::from_str(&std::fs::read_to_string(&golden).unwrap()).unwrap();
    assert_json_close(&report, &want, "report");
    // the report file on disk carries the same numbers
    let on_disk: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("reports/tfidf+boe.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(on_disk["mrr"], report["mrr"]);
}

#[test]
fn evaluating_twice_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    run(&["ingest"], dir.path());
    run(&["fit"], dir.path());
    let a = run(&["evaluate", "--ranker", "tfidf"], dir.path()).stdout;
    let file_a = std::fs::read(dir.path().join("reports/tfidf.json")).unwrap();
    let b = run(&["evaluate", "--ranker", "tfidf"], dir.path()).stdout;
    let file_b = std::fs::read(dir.path().join("reports/tfidf.json")).unwrap();
    assert_eq!(a, b);
    assert_eq!(file_a, file_b);
}

#[test]
fn unknown_ranker_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["rank", "--ranker", "word2vec", "--config"])
        .arg(config())
        .arg("--output-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("word2vec"));
}

#[test]
fn missing_artifacts_fail_with_a_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["rank", "--ranker", "bm25", "--config"])
        .arg(config())
        .arg("--output-dir")
        .arg(dir.path())
        .env("HYBRID_RANK_CACHE_DIR", dir.path().join("c"))
        .output()
        .unwrap();
    assert!(!o.status.success());
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "missing_artifact");
    assert_eq!(err["error"]["stage"], "ingest");
}

#[test]
fn bad_overrides_fail_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["ingest", "--set", "train.no_such_key=1", "--config"])
        .arg(config())
        .arg("--output-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!o.status.success());
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn custom_queries_are_ranked_against_the_pool() {
    let dir = tempfile::tempdir().unwrap();
    run(&["ingest"], dir.path());
    run(&["fit"], dir.path());
    let q = dir.path().join("queries.tsv");
    std::fs::write(&q, "#query_id\ttext\nmine\tsome words that may not match\n").unwrap();
    let o = run(
        &["rank", "--ranker", "bm25", "--queries", q.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(stdout_json(&o)["queries"], 1);
    let top = std::fs::read_to_string(dir.path().join("topk/bm25.tsv")).unwrap();
    assert_eq!(top.lines().count(), 1 + 10);
}
