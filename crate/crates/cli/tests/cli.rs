//! End-to-end tests over the compiled binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const HB_CORPUS: &str = r#"{"seq":1,"symbols":["window","door","wall","roof"],"label":"house"}
{"seq":2,"symbols":["window","door","hull","deck"],"label":"boat"}
{"seq":3,"symbols":["wall","roof"]}
{"seq":4,"symbols":["hull","deck"]}
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cogweave"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn build_snapshot(dir: &Path) -> std::path::PathBuf {
    let corpus = dir.join("hb.jsonl");
    fs::write(&corpus, HB_CORPUS).unwrap();
    let out = dir.join("hb.model.json");
    let output = run(&[
        "build",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let summary = stdout_json(&output);
    assert_eq!(summary["units"], 3);
    assert_eq!(summary["types"], 2);
    out
}

#[test]
fn build_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("hb.jsonl");
    fs::write(&corpus, HB_CORPUS).unwrap();
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    for out in [&out_a, &out_b] {
        let output = run(&[
            "build",
            "--corpus",
            corpus.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success());
    }
    assert_eq!(fs::read(&out_a).unwrap(), fs::read(&out_b).unwrap());
}

#[test]
fn recall_ranks_house_then_boat() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let output = run(&[
        "recall",
        "--snapshot",
        snapshot.to_str().unwrap(),
        "--symbols",
        "window,wall,roof",
    ]);
    let trace = stdout_json(&output);
    assert_eq!(trace["ranking"][0]["type"], "house");
    assert_eq!(trace["ranking"][1]["type"], "boat");
    assert!(trace["ranking"][0]["score"].as_f64() > trace["ranking"][1]["score"].as_f64());

    let output = run(&[
        "recall",
        "--snapshot",
        snapshot.to_str().unwrap(),
        "--symbols",
        "window,hull,deck",
    ]);
    let trace = stdout_json(&output);
    assert_eq!(trace["ranking"][0]["type"], "boat");
}

#[test]
fn recall_unknown_symbol_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let output = run(&[
        "recall",
        "--snapshot",
        snapshot.to_str().unwrap(),
        "--symbols",
        "mast",
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("mast"));
}

#[test]
fn recall_empty_symbols_gives_all_zero_ranking() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let output = run(&[
        "recall",
        "--snapshot",
        snapshot.to_str().unwrap(),
        "--symbols",
        "",
    ]);
    let trace = stdout_json(&output);
    assert_eq!(trace["rounds"].as_array().unwrap().len(), 1);
    for entry in trace["ranking"].as_array().unwrap() {
        assert_eq!(entry["score"], 0.0);
    }
}

#[test]
fn bind_check_answers_the_full_matrix() {
    let output = run(&["bind-check", "--pairs", "red:circle,blue:square"]);
    let result = stdout_json(&output);
    let checks = result["checks"].as_object().unwrap();
    assert_eq!(checks.len(), 4);
    assert_eq!(checks["red:circle"], true);
    assert_eq!(checks["blue:square"], true);
    assert_eq!(checks["red:square"], false);
    assert_eq!(checks["blue:circle"], false);
}

#[test]
fn bind_check_rejects_malformed_pairs() {
    let output = run(&["bind-check", "--pairs", "red-circle"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn logic_run_settles_on_the_scaffold() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let output = run(&[
        "logic-run",
        "--net",
        snapshot.to_str().unwrap(),
        "--stimulus",
        "window",
        "--max-steps",
        "50",
    ]);
    let result = stdout_json(&output);
    assert_eq!(result["outcome"], "settled");
    // every unit group activates: the stimulus spreads over co-occurrence links
    assert_eq!(result["winners"].as_array().unwrap().len(), 3);
}

#[test]
fn logic_run_executes_a_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let schedule = dir.path().join("schedule.json");
    fs::write(&schedule, "[0, 2]").unwrap();
    let output = run(&[
        "logic-run",
        "--net",
        snapshot.to_str().unwrap(),
        "--schedule",
        schedule.to_str().unwrap(),
    ]);
    let result = stdout_json(&output);
    let steps = result["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 2);
    assert_eq!(steps[0]["group"], 0);
    assert_eq!(steps[0]["won"], true);
    assert_eq!(steps[1]["group"], 2);
    assert_eq!(steps[1]["won"], true);
}

#[test]
fn export_dot_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    for target in ["trees", "net", "logic"] {
        let a = run(&[
            "export-dot",
            "--snapshot",
            snapshot.to_str().unwrap(),
            "--target",
            target,
        ]);
        let b = run(&[
            "export-dot",
            "--snapshot",
            snapshot.to_str().unwrap(),
            "--target",
            target,
        ]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
        assert!(String::from_utf8_lossy(&a.stdout).starts_with("digraph"));
    }
    let bad = run(&[
        "export-dot",
        "--snapshot",
        snapshot.to_str().unwrap(),
        "--target",
        "bogus",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn stats_reports_the_unit_tables() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let output = run(&["stats", "--snapshot", snapshot.to_str().unwrap()]);
    let stats = stdout_json(&output);
    asserteq_units(&stats);
    // regularity is perfectly flat on this corpus
    for report in stats["level2"]["regularity"].as_array().unwrap() {
        assert_eq!(report["coefficient_of_variation"], 0.0);
    }
}

fn asserteq_units(stats: &serde_json::Value) {
    let units = stats["level1"]["units"].as_array().unwrap();
    assert_eq!(units.len(), 3);
    assert_eq!(units[0]["labels"][0], "window");
    assert_eq!(stats["level3"]["units"].as_array().unwrap().len(), 1);
    assert_eq!(stats["types"], serde_json::json!(["house", "boat"]));
}

#[test]
fn empty_corpus_aborts_with_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("empty.jsonl");
    fs::write(&corpus, "").unwrap();
    let output = run(&[
        "build",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        dir.path().join("x.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("no events"));
}

#[test]
fn malformed_corpus_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("bad.jsonl");
    fs::write(&corpus, "{\"seq\":1,\"symbols\":[\"a\",\"b\"]}\nnot json\n").unwrap();
    let output = run(&[
        "build",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        dir.path().join("x.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("line 2"));
}

#[test]
fn truncated_snapshot_fails_to_load() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let text = fs::read_to_string(&snapshot).unwrap();
    let cut = dir.path().join("cut.json");
    fs::write(&cut, &text[..text.len() / 2]).unwrap();
    let output = run(&["stats", "--snapshot", cut.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn future_snapshot_version_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let text = fs::read_to_string(&snapshot).unwrap();
    let bumped = dir.path().join("future.json");
    fs::write(
        &bumped,
        text.replace("\"format_version\": 1", "\"format_version\": 99"),
    )
    .unwrap();
    let output = run(&["stats", "--snapshot", bumped.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("unsupported"));
}

#[test]
fn recall_answers_match_before_and_after_reload() {
    // the snapshot is the only state: a second process must answer identically
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let args = [
        "recall",
        "--snapshot",
        snapshot.to_str().unwrap(),
        "--symbols",
        "window,wall,roof",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn build_accepts_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("hb.jsonl");
    fs::write(&corpus, HB_CORPUS).unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"rounds": 3, "theta": 0.5}"#).unwrap();
    let out = dir.path().join("m.json");
    let output = run(&[
        "build",
        "--corpus",
        corpus.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());

    let bad_config = dir.path().join("bad.json");
    fs::write(&bad_config, r#"{"nonsense": true}"#).unwrap();
    let output = run(&[
        "build",
        "--corpus",
        corpus.to_str().unwrap(),
        "--config",
        bad_config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_required_argument_is_a_usage_error() {
    let output = run(&["recall"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn colliding_type_paths_abort_the_build() {
    // two labels with identical ensembles claim one canonical path
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("twins.jsonl");
    fs::write(
        &corpus,
        "{\"seq\":1,\"symbols\":[\"fin\",\"tail\"],\"label\":\"shark\"}\n\
         {\"seq\":2,\"symbols\":[\"fin\",\"tail\"],\"label\":\"dolphin\"}\n",
    )
    .unwrap();
    let output = run(&[
        "build",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        dir.path().join("x.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("collision"));
}
