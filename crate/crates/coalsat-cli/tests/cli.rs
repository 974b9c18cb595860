//! End-to-end tests against the compiled binary: exit codes, JSON shape,
//! model schema, and the differential corpus mode.

use std::path::PathBuf;
use std::process::{Command, Output};

fn coalsat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coalsat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

#[test]
fn satisfiable_input_exits_zero_with_a_sat_verdict() {
    let out = coalsat(&["--formula", "p | ~p"]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout_json(&out)["verdict"], "sat");
}

#[test]
fn global_assumption_refutes_the_diamond() {
    let out = coalsat(&["--assumption", "~p", "--formula", "<>p"]);
    assert_eq!(exit_code(&out), 1);
    assert_eq!(stdout_json(&out)["verdict"], "unsat");
}

#[test]
fn counting_validity_negation_exits_one() {
    let out = coalsat(&[
        "--logic",
        "presburger",
        "--formula",
        "~((2*#(true) < 1) | (2*#(true) > 1))",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert_eq!(stdout_json(&out)["verdict"], "unsat");
}

#[test]
fn probabilistic_window_ships_a_model_in_schema() {
    let out = coalsat(&[
        "--logic",
        "prob",
        "--assumption",
        "a",
        "--formula",
        "(2*w(a) < 1) & (2*w(a) > 0)",
        "--emit-model",
    ]);
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["verdict"], "sat");
    let model = &doc["model"];
    let states = model["states"].as_array().expect("states array");
    assert!(!states.is_empty());
    for edge in model["edges"].as_array().expect("edges array") {
        assert!(edge["from"].is_u64());
        assert!(edge["to"].is_u64());
        let w = edge["weight"].as_str().expect("probabilistic weights are strings");
        assert!(w.chars().all(|c| c.is_ascii_digit() || c == '/'));
    }
    // Every state satisfies the global assumption `a`.
    let atoms = model["atoms"].as_object().expect("atoms object");
    assert_eq!(atoms.len(), states.len());
    for names in atoms.values() {
        assert!(names.as_array().unwrap().iter().any(|n| n == "a"));
    }
    assert!(model["nominals"].as_object().expect("nominals object").is_empty());
}

#[test]
fn multigraph_model_weights_are_json_integers() {
    let out = coalsat(&[
        "--logic",
        "presburger",
        "--formula",
        "#(a) =mod 2= 0 & #(a) > 0",
        "--emit-model",
    ]);
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    let edges = doc["model"]["edges"].as_array().expect("edges");
    assert!(!edges.is_empty());
    assert!(edges.iter().all(|e| e["weight"].is_u64()));
}

#[test]
fn nonlinear_probabilistic_input_exits_two_under_a_small_budget() {
    let out = coalsat(&["--logic", "prob", "--formula", "w(p)*w(p) = 1/2", "--budget", "2"]);
    assert_eq!(exit_code(&out), 2);
    assert_eq!(stdout_json(&out)["verdict"], "unknown");
}

#[test]
fn malformed_formula_exits_three() {
    let out = coalsat(&["--formula", "(("]);
    assert_eq!(exit_code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
}

#[test]
fn unknown_flag_exits_three() {
    let out = coalsat(&["--no-such-flag"]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn missing_formula_exits_three() {
    let out = coalsat(&[]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn kind_mismatch_exits_three() {
    let out = coalsat(&["--formula", "#(p) > 0"]);
    assert_eq!(exit_code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("kind mismatch"));
}

#[test]
fn kripke_flag_requires_the_counting_logic() {
    let out = coalsat(&["--logic", "prob", "--kripke", "--formula", "w(p) > 0"]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn hybrid_satisfaction_operator_is_accepted() {
    let out = coalsat(&[
        "--logic",
        "presburger",
        "--formula",
        "'i & @'i p",
        "--emit-model",
        "--stats",
    ]);
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["verdict"], "sat");
    assert!(doc["stats"]["instances"].as_u64().unwrap() >= 1);
    let noms = doc["model"]["nominals"].as_object().expect("nominals object");
    assert!(noms.contains_key("i"), "the user nominal names a state: {doc}");
    // Reserved internal nominals never leak into the output.
    assert!(noms.keys().all(|k| !k.starts_with('#')));
}

#[test]
fn kripke_reading_refutes_duplicate_nominal_mass() {
    let multi = coalsat(&["--logic", "presburger", "--formula", "#('i) > 1"]);
    assert_eq!(exit_code(&multi), 0);
    let kripke = coalsat(&["--logic", "presburger", "--kripke", "--formula", "#('i) > 1"]);
    assert_eq!(exit_code(&kripke), 1);
}

#[test]
fn stats_block_carries_all_counters() {
    let out = coalsat(&["--formula", "<>p", "--stats"]);
    assert_eq!(exit_code(&out), 0);
    let stats = stdout_json(&out);
    let stats = stats["stats"].as_object().expect("stats object");
    for key in [
        "solver_calls",
        "memo_hits",
        "iterations",
        "types",
        "sequents",
        "propagations",
        "expansions",
        "edges",
        "edge_checks",
        "assignments_tried",
        "instances",
    ] {
        assert!(stats.contains_key(key), "missing counter {key}");
    }
}

#[test]
fn oracle_cross_check_reports_its_verdict() {
    let sat = coalsat(&["--formula", "<>p", "--oracle-states", "2", "--oracle-weight", "1"]);
    assert_eq!(exit_code(&sat), 0);
    assert_eq!(stdout_json(&sat)["oracle"], "sat");

    let unsat = coalsat(&[
        "--assumption",
        "~p",
        "--formula",
        "<>p",
        "--oracle-states",
        "2",
        "--oracle-weight",
        "1",
    ]);
    assert_eq!(exit_code(&unsat), 1);
    assert_eq!(stdout_json(&unsat)["oracle"], "none");
}

#[test]
fn algorithms_are_selectable_and_agree() {
    for algorithm in ["elim", "caching", "worklist"] {
        let out = coalsat(&["--algorithm", algorithm, "--assumption", "~p", "--formula", "<>p"]);
        assert_eq!(exit_code(&out), 1, "algorithm {algorithm}");
    }
}

#[test]
fn differential_corpus_run_agrees_across_procedures() {
    let path: PathBuf =
        std::env::temp_dir().join(format!("coalsat-cli-test-{}.corpus", std::process::id()));
    std::fs::write(
        &path,
        "# comment line\n\
         true |- p | ~p\n\
         ~p |- <>p\n\
         #(true) > 0 |- [](p -> p)\n\
         #(a) =mod 2= 0 |- #(a) < 3\n",
    )
    .expect("corpus written");
    let out = coalsat(&[
        "--logic",
        "presburger",
        "--differential",
        path.to_str().expect("utf-8 temp path"),
    ]);
    let _ = std::fs::remove_file(&path);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["problems"], 4);
    assert_eq!(doc["agreed"], true);
    assert_eq!(doc["disagreements"], 0);
}

#[test]
fn differential_without_a_corpus_file_exits_three() {
    let out = coalsat(&["--differential"]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn missing_corpus_file_reports_a_readable_error() {
    let out = coalsat(&["--differential", "/nonexistent/never.corpus"]);
    assert_eq!(exit_code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
}
