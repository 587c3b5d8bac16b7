use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mistakebound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

/// Drops the trailing runtime column of every CSV line.
fn without_runtime(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const PLANTED: &str = r#"[
  {"id": "wp", "mode": "bandit", "class": {"kind": "experts", "n": 8, "k": 2, "r": 1},
   "learner": {"name": "weighted_plurality"},
   "adversary": {"name": "oblivious", "planted": {"target": 3, "length": 40, "corruptions": 1}},
   "horizon": 40, "seed": 9, "trials": 200, "bound": "weighted_plurality"},
  {"id": "soa", "mode": "bandit", "class": {"kind": "experts", "n": 4, "k": 2, "r": 1},
   "learner": {"name": "bandit_rand_soa"}, "adversary": {"name": "value_optimal"},
   "horizon": 12, "seed": 10, "trials": 200, "exact": true, "bound": "exact_lower"}
]"#;

#[test]
fn value_of_two_fresh_experts() {
    let o = run(&["value", "--state", r#"{"counts": [2], "k": 2}"#]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!(v["duality_gap"].as_f64().unwrap() < 1e-9);
}

#[test]
fn value_reads_a_state_file_and_fixed_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "state.json", r#"{"counts": [0, 0, 9], "k": 3}"#);
    let o = run(&["value", "--state", &p, "--horizon", "20", "--no-dual"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert!((v["value"].as_f64().unwrap() - 6.262632791074613).abs() < 1e-9);
    assert_eq!(v["horizon"].as_u64(), Some(20));
    assert!(v["dual_value"].is_null());
}

#[test]
fn value_of_a_class_state() {
    let o = run(&[
        "value",
        "--state",
        r#"{"class": {"kind": "constant", "k": 3, "r": 0}}"#,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!((json(&o)["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn empty_state_is_a_configuration_error() {
    let o = run(&["value", "--state", r#"{"counts": [0, 0], "k": 2}"#]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["value", "--state", "{not json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.json", PLANTED);
    let a = run(&["simulate", "--scenario", &p, "--seed", "77"]);
    let b = run(&["simulate", "--scenario", &p, "--seed", "77"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(without_runtime(&stdout(&a)), without_runtime(&stdout(&b)));
    let lines = stdout(&a).lines().count();
    assert_eq!(lines, 3, "header plus one row per scenario");
}

#[test]
fn simulate_json_with_audit() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.json", PLANTED);
    let o = run(&[
        "simulate",
        "--scenario",
        &p,
        "--trials",
        "20",
        "--audit",
        "--out",
        "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for r in reports {
        assert_eq!(r["trials"].as_u64(), Some(20));
        assert_eq!(r["certificates_ok"].as_bool(), Some(true));
        assert!(!r["audit"].as_array().unwrap().is_empty());
    }
}

#[test]
fn violated_bound_exits_with_one() {
    // Truncated at kr/2 rounds, the geometric adversary forces only 3/4
    // expected mistakes for k = 2, r = 2.
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "g.json",
        r#"{"id": "geo", "mode": "bandit", "class": {"kind": "experts", "n": 2, "k": 2, "r": 2},
            "learner": {"name": "uniform"}, "adversary": {"name": "geometric"},
            "horizon": 10, "seed": 4, "trials": 5000, "bound": "adaptive_lower"}"#,
    );
    let o = run(&["simulate", "--scenario", &p]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("bound violated: geo"));
}

#[test]
fn bad_scenario_files_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.json", r#"{"id": "x", "mode": "bandit"}"#);
    assert_eq!(run(&["simulate", "--scenario", &p]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    let o = run(&["simulate", "--scenario", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_lists_every_suite() {
    let o = run(&["verify", "--list"]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o)
        .lines()
        .map(|l| l.split('\t').next().unwrap().to_string())
        .collect();
    assert_eq!(
        names,
        [
            "dual",
            "oracle",
            "experts-rand",
            "potential",
            "lemma",
            "experts-det",
            "reduction",
            "constant",
            "hdk",
            "dt",
            "determinism"
        ]
    );
}

#[test]
fn verify_runs_named_suites() {
    let o = run(&["verify", "lemma", "oracle"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("suite,criterion,id,measured,relation,bound,tolerance,satisfied\n"));
    assert!(out.lines().skip(1).all(|l| l.ends_with(",true")));
    assert!(stderr(&o).contains("lemma"));
    assert_eq!(run(&["verify", "nonsense"]).status.code(), Some(2));
}

#[test]
fn verify_accepts_a_manifest_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "m.json",
        r#"{"version": 1, "suites": [{"suite": "lemma", "criterion": 5, "k_min": 2, "k_max": 4, "resolution": 2000}]}"#,
    );
    let o = run(&["verify", "--manifest", &p, "--out", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&o)[0]["suite"].as_str(), Some("lemma"));
    let bad = write(dir.path(), "v.json", r#"{"version": 99, "suites": []}"#);
    assert_eq!(run(&["verify", "--manifest", &bad]).status.code(), Some(2));
}

#[test]
fn lemma_fk_reports_the_closed_form() {
    let o = run(&["lemma-fk", "--k-max", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 4);
    assert!(stderr(&o).contains("note: k = 2"));
    assert_eq!(
        run(&["lemma-fk", "--resolution", "10"]).status.code(),
        Some(2)
    );
}
