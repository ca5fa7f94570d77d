use std::io::Write;
use std::process::{Command, Output, Stdio};

fn cdam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Last row of a trace CSV as (header, values).
fn last_row(csv: &str) -> (Vec<String>, Vec<String>) {
    let mut lines = csv.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let last = lines.last().unwrap().split(',').map(String::from).collect();
    (header, last)
}

#[test]
fn simulate_pure_auto_recovers_trigger() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = cdam(&[
        "simulate", "--graph", "cycle:30", "--patterns", "random:1000", "--a", "1", "--h", "0",
        "--steps", "101", "--trigger", "5", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, row) = last_row(&std::fs::read_to_string(out.join("trace.csv")).unwrap());
    let r: Vec<(usize, f64)> = header
        .iter()
        .zip(&row)
        .filter_map(|(h, v)| Some((h.strip_prefix("r_")?.parse().ok()?, v.parse().ok()?)))
        .collect();
    assert_eq!(r.len(), 30);
    let best = r.iter().max_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
    assert_eq!(best.0, 5);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn invalid_trigger_is_usage_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = cdam(&[
        "simulate", "--graph", "cycle:30", "--trigger", "30", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn mismatched_graph_and_patterns_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = cdam(&[
        "simulate", "--graph", "cycle:10", "--patterns", "automaton", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_experiment_lists_valid_names() {
    let o = cdam(&["experiment", "no-such-thing"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("four-modes") && err.contains("automaton-sweep"), "{err}");
}

#[test]
fn miyashita_report_has_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let o = cdam(&["experiment", "miyashita", "--n", "300", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let r2 = report["statistics"]["r_squared"].as_f64().unwrap();
    assert!(r2.is_finite() && r2 <= 1.0);
}

#[test]
fn automaton_script_answers_husband() {
    let o = cdam(&["automaton", "--start", "Marge", "--script", "husband"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().last().unwrap().contains("--> Homer"), "{text}");
}

#[test]
fn automaton_repl_quits_cleanly_and_keeps_state_on_unknown_label() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("t.jsonl");
    let mut child = Command::new(env!("CARGO_BIN_EXE_cdam"))
        .args(["automaton", "--out", log.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b":state Bart\nnephew\n:quit\nwife\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("still at Bart"));
    // nothing after :quit is processed
    assert!(!stdout(&o).contains("--wife-->"));
    let entries = std::fs::read_to_string(log).unwrap();
    assert_eq!(entries.lines().count(), 2);
}

#[test]
fn replay_reproduces_trace_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    let o = cdam(&[
        "simulate", "--graph", "barbell:5,2", "--patterns", "random:200", "--a", "-0.5", "--h",
        "1.5", "--seed", "7", "--steps", "40", "--trigger", "3", "--out", first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = cdam(&[
        "replay",
        first.join("manifest.json").to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read(first.join("trace.csv")).unwrap(),
        std::fs::read(second.join("trace.csv")).unwrap()
    );
}
