use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_credhier")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const TOY: &[&str] = &["analyze", "--simulate-toy", "--k", "1000", "--seed", "3", "--tau", "0.8"];

fn toy(extra: &[&str]) -> Output {
    let args: Vec<&str> = TOY.iter().chain(extra).copied().collect();
    run(&args)
}

#[test]
fn toy_catalog_has_one_ranked_permutation() {
    let o = toy(&[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["manifest"]["n"], 5);
    assert_eq!(doc["manifest"]["seed"], 3);
    assert!(doc["manifest"].get("timings").is_none());
    let rps: Vec<&serde_json::Value> = doc["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["kind"] == "ranked_permutation")
        .collect();
    assert_eq!(rps.len(), 1);
    assert_eq!(rps[0]["treatments"], serde_json::json!(["A", "B"]));
    assert_eq!(rps[0]["rank_lo"], 1);
    assert_eq!(rps[0]["rank_hi"], 2);
}

#[test]
fn json_is_byte_identical_across_runs_and_threads() {
    let a = toy(&["--threads", "1"]);
    let b = toy(&["--threads", "4"]);
    let c = toy(&[]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    assert!(a.stdout.ends_with(b"}\n"));
}

#[test]
fn timings_are_opt_in() {
    let doc: serde_json::Value = serde_json::from_slice(&toy(&["--timings"]).stdout).unwrap();
    assert!(doc["manifest"]["timings"]["total"].as_f64().is_some());
}

#[test]
fn no_trim_leaves_every_entry_unflagged() {
    let doc: serde_json::Value = serde_json::from_slice(&toy(&["--no-trim"]).stdout).unwrap();
    let entries = doc["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    assert!(entries.iter().all(|e| e["redundant"] == false));
}

#[test]
fn sensitivity_reports_tau_star() {
    let doc: serde_json::Value = serde_json::from_slice(&toy(&["--sensitivity"]).stdout).unwrap();
    let ts = doc["manifest"]["tau_star"].as_f64().unwrap();
    assert!((ts - (0.8 - 2.0 * (0.8f64 * 0.2 / 1000.0).sqrt())).abs() < 1e-12);
    assert!(doc["sensitivity"]["added"].is_array());
}

#[test]
fn table_and_csv_views() {
    let t = stdout(&toy(&["--format", "table"]));
    assert!(t.contains("Ranked permutation"));
    assert!(t.contains("(A, B)_1^2"));
    let c = stdout(&toy(&["--format", "csv"]));
    assert!(c.starts_with("kind,key,question,count,k,pi_hat,redundant,rules\n"));
}

#[test]
fn writes_to_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let o = toy(&["--output", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(doc["entries"].is_array());
}

#[test]
fn effects_and_ranks_files() {
    let dir = tempfile::tempdir().unwrap();
    let effects = dir.path().join("effects.csv");
    std::fs::write(&effects, "X,Y,Z\n0.1,0.5,0.9\n0.2,0.4,0.8\n0.15,0.6,0.7\n").unwrap();
    let o = run(&["analyze", "--input", effects.to_str().unwrap(), "--tau", "0.95"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["manifest"]["labels"], serde_json::json!(["X", "Y", "Z"]));

    // larger is better reverses the hierarchy
    let o = run(&["analyze", "--input", effects.to_str().unwrap(), "--tau", "0.9", "--direction", "higher", "--format", "table"]);
    assert!(stdout(&o).contains("(Z, Y)_1^2"));

    let ranks = dir.path().join("ranks.csv");
    std::fs::write(&ranks, "r1,r2,r3\nX,Y,Z\nX,Y,Z\nY,X,Z\n").unwrap();
    let o = run(&["analyze", "--ranks-input", ranks.to_str().unwrap(), "--tau", "0.6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn count_matches_closed_form() {
    let o = run(&["count", "5", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["total"], 1005);
    assert!(stdout(&run(&["count", "9"])).contains("2501295"));
    assert_eq!(run(&["count", "1"]).status.code(), Some(3));
}

#[test]
fn plot_data_flags_hdr_ranks() {
    let o = run(&["plot-data", "--simulate-toy", "--k", "1000", "--seed", "3", "--tau", "0.8"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("treatment,rank,count,probability,in_hdr"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 25);
    for t in ["A", "B", "C", "D", "E"] {
        let total: u64 = rows.iter().filter(|r| r[0] == t).map(|r| r[2].parse::<u64>().unwrap()).sum();
        assert_eq!(total, 1000);
        assert!(rows.iter().any(|r| r[0] == t && r[4] == "true"));
    }
    let j = run(&["plot-data", "--simulate-toy", "--seed", "3", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(doc.as_array().unwrap().len(), 5);
}

#[test]
fn oracle_check_passes_and_catches_faults() {
    let o = run(&["oracle-check", "--n", "5", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("PASS"));
    let o = run(&["oracle-check", "--n", "5", "--seed", "7", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).starts_with("FAIL"));
    let o = run(&["oracle-check", "--n", "12"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["analyze", "--input", "/no/such/file.csv"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "--simulate-toy", "--tau", "0"]).status.code(), Some(3));
    assert_eq!(run(&["analyze", "--simulate-toy", "--mid", "-1"]).status.code(), Some(3));
    assert_eq!(run(&["analyze"]).status.code(), Some(3));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "A,B\n1.0,oops\n").unwrap();
    assert_eq!(run(&["analyze", "--input", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn env_overrides_flags_defaults() {
    let o = Command::new(env!("CARGO_BIN_EXE_credhier"))
        .args(["analyze", "--simulate-toy", "--k", "1000", "--seed", "3"])
        .env("CREDHIER_TAU", "0.8")
        .output()
        .unwrap();
    assert_eq!(o.stdout, toy(&[]).stdout);
}
