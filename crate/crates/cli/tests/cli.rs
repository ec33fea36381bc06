use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use axum::http::StatusCode;
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};
use tempfile::TempDir;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).to_string_lossy().into_owned()
}

fn gecforge(args: &[&str], stdin: Option<&[u8]>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gecforge"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let input = stdin.unwrap_or_default().to_vec();
    let mut pipe = child.stdin.take().unwrap();
    let writer = std::thread::spawn(move || {
        let _ = pipe.write_all(&input);
    });
    let out = child.wait_with_output().unwrap();
    writer.join().unwrap();
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn read_json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn pipeline_composes_over_standard_streams() {
    let paragraphs = std::fs::read(fixture("paragraphs.tsv")).unwrap();
    let split = gecforge(&["--no-manifest", "split"], Some(&paragraphs));
    assert_eq!(split.status.code(), Some(0), "{}", stderr(&split));
    assert_eq!(stdout(&split).lines().count(), 11);
    assert!(stdout(&split).contains("en\tHe said approx. nothing.\n"));

    let corrupt = gecforge(&["--no-manifest", "corrupt", "--seed", "1"], Some(&split.stdout));
    assert_eq!(corrupt.status.code(), Some(0), "{}", stderr(&corrupt));
    let stats = gecforge(&["--no-manifest", "stats"], Some(&corrupt.stdout));
    assert_eq!(stats.status.code(), Some(0));
    let json: Value = serde_json::from_str(stdout(&stats).trim()).unwrap();
    assert_eq!(json["n_pairs"], 11);
    assert!(stderr(&stats).is_empty());
}

#[test]
fn corrupt_is_reproducible_across_runs_and_threads() {
    let dir = TempDir::new().unwrap();
    let input = fixture("paragraphs.tsv");
    let mut outputs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "1"), ("c", "4")] {
        let out = path(&dir, name);
        let plans = path(&dir, &format!("{name}.plans"));
        let manifest = path(&dir, &format!("{name}.json"));
        let run = gecforge(
            &["--threads", threads, "--manifest", &manifest, "corrupt", "--seed", "42", "--from-paragraphs", "-i", &input, "-o", &out, "--plans", &plans],
            None,
        );
        assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
        outputs.push((std::fs::read(&out).unwrap(), std::fs::read(&plans).unwrap()));
        let m = read_json(&manifest);
        assert_eq!(m["subcommand"], "corrupt");
        assert_eq!(m["seed"], 42);
        assert_eq!(m["config"]["p_uncorrupted"], 0.02);
        assert_eq!(m["counts"]["written"], 11);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);

    let other = gecforge(&["--no-manifest", "corrupt", "--seed", "43", "-i", &input], None);
    assert_ne!(other.stdout, gecforge(&["--no-manifest", "corrupt", "--seed", "42", "-i", &input], None).stdout);
}

#[test]
fn corrupt_plans_replay() {
    let dir = TempDir::new().unwrap();
    let plans = path(&dir, "plans.jsonl");
    let out = gecforge(&["--no-manifest", "corrupt", "--seed", "7", "--from-paragraphs", "-i", &fixture("paragraphs.tsv"), "--plans", &plans], None);
    let text = std::fs::read_to_string(&plans).unwrap();
    for (line, plan) in stdout(&out).lines().zip(text.lines()) {
        let fields: Vec<&str> = line.split('\t').collect();
        let plan: gecforge::CorruptionPlan = serde_json::from_str(plan).unwrap();
        assert_eq!(gecforge::apply_plan(fields[2], &plan).unwrap(), fields[1]);
    }
}

#[test]
fn corrupt_config_errors_are_fatal() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.json");
    std::fs::write(&bad, r#"{"p_uncorrupted": 0.1, "op_wieghts": {}}"#).unwrap();
    let out = gecforge(&["corrupt", "--seed", "1", "--config", &bad], Some(b"en\ta b\n"));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr(&out).lines().count(), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("op_wieghts"));

    let missing_seed = gecforge(&["corrupt"], Some(b"en\ta b\n"));
    assert_eq!(missing_seed.status.code(), Some(1));
    assert_eq!(stderr(&missing_seed).lines().count(), 1);

    let unreadable = gecforge(&["stats", "-i", "/nonexistent/input.tsv"], None);
    assert_eq!(unreadable.status.code(), Some(1));
}

#[test]
fn corrupt_rejects_overlong_sentences() {
    let dir = TempDir::new().unwrap();
    let config = path(&dir, "config.json");
    let rejects = path(&dir, "rejects.tsv");
    std::fs::write(&config, r#"{"max_sentence_bytes": 10}"#).unwrap();
    let out = gecforge(
        &["--no-manifest", "corrupt", "--seed", "1", "--config", &config, "--rejects", &rejects],
        Some(b"en\tshort\nen\tthis one is far too long\n"),
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout(&out).lines().count(), 1);
    let rejected = std::fs::read_to_string(&rejects).unwrap();
    assert_eq!(rejected, "en\tthis one is far too long\t\tsentence is 24 bytes, over the 10-byte cap\n");
}

#[test]
fn stats_formats_and_missing_targets() {
    let both = gecforge(&["--no-manifest", "stats", "--format", "both"], Some(b"en\ta b c\ta b c\nen\ta b c\ta x c\n"));
    assert_eq!(
        stdout(&both),
        concat!(
            r#"{"n_pairs":2,"n_source_tokens":6,"n_target_tokens":6,"lr":100.0,"wer":16.67,"sub":16.67,"del":0.0,"ins":0.0}"#,
            "\n      LR      WER      Sub      Del      Ins\n  100.00    16.67    16.67     0.00     0.00\n"
        )
    );
    let missing = gecforge(&["--no-manifest", "stats"], Some(b"en\ta b\ta b\nen\tno target\n"));
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("no target\t\tstatistics require a target"));
}

#[test]
fn filter_keeps_half_of_the_fixture() {
    let out = gecforge(&["--no-manifest", "filter", "--keep", "0.5", "--scorer", "builtin:neg_wer", "-i", &fixture("ten.tsv")], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let kept = stdout(&out);
    assert_eq!(kept.lines().count(), 5);
    // the four identical pairs (score 0) and the best remaining one by id
    assert!(kept.contains("The cat sat on the mat ."));
    assert!(!kept.contains("Completely different"));

    let ten = std::fs::read(fixture("ten.tsv")).unwrap();
    let piped = gecforge(&["--no-manifest", "filter", "--preset", "drop50", "--scorer", "builtin:neg_wer"], Some(&ten));
    assert_eq!(piped.stdout, out.stdout);

    let lm = gecforge(&["--no-manifest", "filter", "--preset", "drop90", "--scorer", "builtin:char_lm", "-i", &fixture("ten.tsv")], None);
    assert_eq!(stdout(&lm).lines().count(), 1);

    let bad_keep = gecforge(&["filter", "--keep", "0", "--scorer", "builtin:neg_wer"], Some(&ten));
    assert_eq!(bad_keep.status.code(), Some(1));
}

#[test]
fn relabel_with_identity_rewriter() {
    let out = gecforge(&["--no-manifest", "relabel", "--rewriter", "builtin:identity"], Some(b"en\ta b\tx y\nde\tc d\n"));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "en\ta b\ta b\nde\tc d\tc d\n");
}

fn failing_rewriter() -> String {
    async fn rewrite(Json(body): Json<Value>) -> (StatusCode, Json<Value>) {
        let items = body["items"].as_array().unwrap();
        if items.iter().any(|i| i["id"] == 40) {
            return (StatusCode::BAD_GATEWAY, Json(json!({})));
        }
        let out: Vec<Value> = items.iter().map(|i| json!({"id": i["id"], "target": i["source"].as_str().unwrap().to_uppercase()})).collect();
        (StatusCode::OK, Json(json!({ "items": out })))
    }
    let (tx, rx) = std::sync::mpsc::channel::<SocketAddr>();
    std::thread::spawn(move || {
        tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap().block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, Router::new().route("/rewrite", post(rewrite))).await.unwrap();
        });
    });
    format!("http://{}", rx.recv().unwrap())
}

#[test]
fn relabel_partial_failure_exits_two() {
    let url = failing_rewriter();
    let dir = TempDir::new().unwrap();
    let rejects = path(&dir, "rejects.tsv");
    let manifest = path(&dir, "manifest.json");
    let input: String = (0..100).map(|i| format!("en\tsentence {i}\tnoisy\n")).collect();
    let out = gecforge(
        &["--manifest", &manifest, "relabel", "--endpoint", &url, "--backoff-ms", "1", "--rejects", &rejects],
        Some(input.as_bytes()),
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let main = stdout(&out);
    assert_eq!(main.lines().count(), 68);
    assert!(main.starts_with("en\tsentence 0\tSENTENCE 0\n"));
    let rejected = std::fs::read_to_string(&rejects).unwrap();
    assert_eq!(rejected.lines().count(), 32);
    assert!(rejected.lines().all(|l| l.split('\t').count() == 4 && l.ends_with("HTTP 502 after 3 retries")));
    let m = read_json(&manifest);
    assert_eq!(m["counts"]["written"], 68);
    assert_eq!(m["counts"]["rejected"], 32);

    let clean: String = (0..10).map(|i| format!("en\tsentence {i}\n")).collect();
    let ok = gecforge(&["--no-manifest", "relabel", "--endpoint", &url, "--rejects", &rejects], Some(clean.as_bytes()));
    assert_eq!(ok.status.code(), Some(0));
    assert!(std::fs::read_to_string(&rejects).unwrap().is_empty());
}

#[test]
fn evaluate_perfect_and_partial() {
    let gold = fixture("eval.m2");
    let perfect = gecforge(&["--no-manifest", "evaluate", "--gold", &gold, "--hyp", &fixture("eval_perfect.txt")], None);
    assert_eq!(stdout(&perfect), "Precision : 1.0000\nRecall : 1.0000\nF_0.5 : 1.0000\n");

    let partial = gecforge(&["--no-manifest", "evaluate", "--gold", &gold, "--hyp", &fixture("eval_partial.txt"), "--json"], None);
    let report: Value = serde_json::from_str(stdout(&partial).trim()).unwrap();
    assert_eq!((report["tp"].as_u64(), report["fp"].as_u64(), report["fn"].as_u64()), (Some(2), Some(1), Some(2)));
    assert!((report["f_beta"].as_f64().unwrap() - 0.625).abs() < 1e-9);
    assert_eq!(report["beta"], 0.5);

    let detok = gecforge(&["--no-manifest", "evaluate", "--gold", &gold, "--hyp", &fixture("eval_detok.txt"), "--retokenize"], None);
    assert_eq!(stdout(&detok), stdout(&perfect));
    let untouched = gecforge(&["--no-manifest", "evaluate", "--gold", &gold, "--hyp", &fixture("eval_detok.txt")], None);
    assert_ne!(stdout(&untouched), stdout(&perfect));

    let typed = gecforge(&["--no-manifest", "evaluate", "--gold", &gold, "--hyp", &fixture("eval_partial.txt"), "--per-type"], None);
    assert!(stdout(&typed).contains("# per-type false positives use the coarse type of the system edit"));

    let short = gecforge(&["evaluate", "--gold", &gold, "--hyp", &fixture("ten.tsv")], None);
    assert_eq!(short.status.code(), Some(1));
    assert!(stderr(&short).contains("has 10 lines but the gold file has 3 sentences"));
}

#[test]
fn evaluate_reports_malformed_gold() {
    let malformed = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/malformed/04_overlapping_edits.m2");
    let out = gecforge(&["evaluate", "--gold", malformed.to_str().unwrap(), "--hyp", &fixture("eval_perfect.txt")], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 7: edit overlaps another edit of annotator 0"), "{}", stderr(&out));
}

#[test]
fn retokenize_lines() {
    let out = gecforge(&["--no-manifest", "retokenize"], Some("It's been cloudy, right?\n3.14 is pi\n".as_bytes()));
    assert_eq!(stdout(&out), "It 's been cloudy , right ?\n3.14 is pi\n");
}

#[test]
fn malformed_input_is_skipped_or_fatal() {
    let dir = TempDir::new().unwrap();
    let report = path(&dir, "report.json");
    let input = b"en\ta\ta\nen\tone\ttwo\tthree\nen\tb\tb\n";
    let skip = gecforge(&["--no-manifest", "--report", &report, "stats"], Some(input));
    assert_eq!(skip.status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(&report).unwrap(),
        "{\"read\":2,\"skipped\":1,\"errors\":[{\"line\":2,\"kind\":\"wrong_field_count\"}]}\n"
    );
    let strict = gecforge(&["--strict", "stats"], Some(input));
    assert_eq!(strict.status.code(), Some(1));
    assert!(stderr(&strict).contains("wrong field count at line 2"));
}

#[test]
fn manifest_goes_to_stderr_by_default() {
    let out = gecforge(&["retokenize"], Some(b"a b\n"));
    let manifest: Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert_eq!(manifest["subcommand"], "retokenize");
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["input"], "-");
    let quiet = gecforge(&["--no-manifest", "retokenize"], Some(b"a b\n"));
    assert!(quiet.stderr.is_empty());
}
