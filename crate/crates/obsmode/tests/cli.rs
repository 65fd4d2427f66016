use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use obsmode::casestudy::generate_grid_casestudy;
use obsmode::formats::{load_model, model_to_json, to_canonical_json, StrategyFile};
use obsmode::fuzz::random_instance;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_obsmode"))
}

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generated_grid_inspects_to_76_states() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.json");
    let out = run(&["casestudy", "grid", "--out", s(&path)]);
    assert!(out.status.success());
    let out = run(&["inspect", s(&path)]);
    assert_eq!(json(&out)["states"], 76);
    assert_eq!(json(&out)["actions"], 5);
}

#[test]
fn bundled_models_are_canonical() {
    for name in ["running.json", "grid.json"] {
        let text = std::fs::read_to_string(example(name)).unwrap();
        let model = load_model(&example(name)).unwrap();
        assert_eq!(model_to_json(&model), text, "{name}");
    }
    assert_eq!(load_model(&example("running.json")).unwrap().state_count(), 7);
    assert_eq!(load_model(&example("grid.json")).unwrap(), generate_grid_casestudy());
}

#[test]
fn synth_then_verify_running_example() {
    let dir = tempfile::tempdir().unwrap();
    let strat = dir.path().join("c1.json");
    let model = example("running.json");
    let out = run(&["synth", s(&model), "--formula", "F star", "--out", s(&strat)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&strat).unwrap()).unwrap();
    assert_eq!(file["total"], "1");
    assert_eq!(file["convention"], "target");

    let out = run(&["verify", s(&model), "--strategy", s(&strat)]);
    assert!(out.status.success());
    let report = json(&out);
    assert_eq!(report["satisfies"], true);
    assert_eq!(report["worst_case_cost"], "1");
    assert!(report["worst_case_steps"].as_u64().unwrap() <= 3);

    let out = run(&["verify", s(&model), "--strategy", s(&strat), "--formula", "F !star"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["--labeling", "source", "verify", s(&model), "--strategy", s(&strat)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn grid_bound_ten_costs_two_and_eight_is_infeasible() {
    let model = example("grid.json");
    let out = run(&["synth", s(&model), "--formula", "(! dang) U target", "--bound", "10"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["total"], "2");
    let out = run(&["synth", s(&model), "--formula", "(! dang) U target", "--bound", "8"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let model = example("grid.json");
    let args = ["synth", s(&model), "--formula", "(! dang) U target", "--bound", "12"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let sim = |seed: &str| {
        let dir = tempfile::tempdir().unwrap();
        let strat = dir.path().join("s.json");
        std::fs::write(&strat, run(&args).stdout).unwrap();
        run(&["simulate", s(&model), "--strategy", s(&strat), "--runs", "5", "--seed", seed]).stdout
    };
    assert_eq!(sim("3"), sim("3"));
    let fuzz = ["fuzz", "--seeds", "0..20"];
    assert_eq!(run(&fuzz).stdout, run(&fuzz).stdout);
}

#[test]
fn strategy_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let strat = dir.path().join("b.json");
    let model = example("grid.json");
    let out = run(&["synth", s(&model), "--formula", "(! dang) U target", "--bound", "9", "--out", s(&strat)]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&strat).unwrap();
    let file = StrategyFile::parse(&text, "b.json").unwrap();
    assert_eq!(file.to_json(), text);
    assert_eq!(file.kind, "bounded");
    assert_eq!(file.bound, Some(9));
    assert!(!file.revisions.is_empty());
}

#[test]
fn exhaustive_simulation_reaches_the_goal_on_every_branch() {
    let dir = tempfile::tempdir().unwrap();
    let strat = dir.path().join("u.json");
    let model = example("grid.json");
    let out = run(&["synth", s(&model), "--formula", "(! dang) U target", "--out", s(&strat)]);
    assert!(out.status.success());
    let out = run(&["simulate", s(&model), "--strategy", s(&strat), "--adversary", "exhaustive"]);
    assert!(out.status.success());
    let lines: Vec<Value> =
        String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let finals: Vec<&Value> = lines.iter().filter(|l| l["status"] == "satisfied").collect();
    assert_eq!(finals.len(), 3, "one run per grid");
    assert!(finals.iter().all(|l| l["cost"] == "1"));
    let first_states: Vec<&str> =
        lines.iter().filter(|l| l["step"] == 1).map(|l| l["state"].as_str().unwrap()).collect();
    assert_eq!(first_states, ["s_111", "s_211", "s_311"]);
}

#[test]
fn trace_is_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let out = run(&["synth", s(&example("running.json")), "--formula", "F star", "--trace", s(&trace)]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(trace).unwrap();
    let rounds: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!rounds.is_empty());
    assert_eq!(rounds[0]["round"], 1);
}

#[test]
fn input_errors_exit_two_with_machine_readable_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"states\": [\"s1\",\n").unwrap();
    let out = run(&["inspect", s(&path)]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "json");
    assert!(err["offset"].as_u64().unwrap() > 0);

    std::fs::write(&path, r#"{"states":["s"],"actions":[],"transitions":[],"init":"x","ap":[],"observations":[],"modes":[],"init_mode":"m"}"#).unwrap();
    let out = run(&["inspect", s(&path)]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "invalid");
    assert!(!err["violations"].as_array().unwrap().is_empty());

    let out = run(&["synth", s(&example("running.json")), "--formula", "F (star"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compile_formula_emits_json_and_dot() {
    let out = run(&["compile-formula", "(! dang) U target", "--ap", "dang,target"]);
    assert_eq!(json(&out)["states"], 3);
    assert_eq!(json(&out)["accepting"].as_array().unwrap().len(), 1);
    let out = run(&["compile-formula", "(! dang) U target", "--ap", "dang,target", "--dot"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("digraph dfa"));
}

#[test]
fn sweep_and_belief_dot() {
    let model = example("running.json");
    let out = run(&["sweep", s(&model), "--formula", "F star", "--k-max", "4"]);
    let totals: Vec<String> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["total"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(totals, ["inf", "2", "1", "1"]);
    let out = run(&["inspect", s(&model), "--formula", "F star", "--belief", "--dot"]);
    let dot = String::from_utf8(out.stdout).unwrap();
    assert!(dot.starts_with("digraph belief"));
    assert!(dot.contains("a, m2 / 1"));
}

#[test]
fn seed_one_matches_golden_instance() {
    let inst = random_instance(1);
    let doc = serde_json::json!({"formula": inst.formula, "model": inst.model});
    let golden = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/random_seed_1.json"),
    )
    .unwrap();
    assert_eq!(to_canonical_json(&doc), golden);
}

#[test]
fn seed_environment_variable_selects_the_default_seed() {
    let out = bin().args(["fuzz"]).env("OBSMODE_SEED", "42").output().unwrap();
    assert!(out.status.success());
    let first: Value = serde_json::from_str(String::from_utf8(out.stdout).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(first["seed"], 42);
}
