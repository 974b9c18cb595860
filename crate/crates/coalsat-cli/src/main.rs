//! Command-line front-end for the solver library: single problems with
//! JSON output, corpus differential runs across all three decision
//! procedures, and an optional cross-check against the bounded
//! model-search oracle.
//!
//! Exit codes: 0 sat, 1 unsat (or differential disagreement), 2 unknown,
//! 3 usage or formula parse error, 4 resource cap exceeded, 5 internal
//! error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, ValueEnum};
use num::ToPrimitive;
use serde_json::{json, Map, Value};

use coalsat::corpus::parse_corpus;
use coalsat::formula::{Fid, Store};
use coalsat::model::certify_model;
use coalsat::oracle::oracle_search;
use coalsat::parse::{adapt_to_logic, parse};
use coalsat::{decide, Algorithm, Error, Logic, Model, Options, Stats, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LogicArg {
    K,
    Presburger,
    Prob,
}

impl From<LogicArg> for Logic {
    fn from(a: LogicArg) -> Logic {
        match a {
            LogicArg::K => Logic::K,
            LogicArg::Presburger => Logic::Presburger,
            LogicArg::Prob => Logic::Prob,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    Elim,
    Caching,
    Worklist,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Algorithm {
        match a {
            AlgorithmArg::Elim => Algorithm::Elim,
            AlgorithmArg::Caching => Algorithm::Caching,
            AlgorithmArg::Worklist => Algorithm::Worklist,
        }
    }
}

/// Satisfiability under global assumptions for coalgebraic modal logics.
#[derive(Parser, Debug)]
#[command(name = "coalsat", version, about)]
struct Cli {
    /// Instance logic.
    #[arg(long, value_enum, default_value = "k")]
    logic: LogicArg,

    /// Decision procedure.
    #[arg(long, value_enum, default_value = "elim")]
    algorithm: AlgorithmArg,

    /// Global assumption, required to hold at every state.
    #[arg(long, default_value = "true")]
    assumption: String,

    /// Goal formula; required unless --differential is given.
    #[arg(long)]
    formula: Option<String>,

    /// Force the hybrid pipeline even for nominal-free input.
    #[arg(long)]
    hybrid: bool,

    /// Kripke-faithful nominal reading (Presburger only).
    #[arg(long)]
    kripke: bool,

    /// Include the witness model in the JSON output on SAT.
    #[arg(long)]
    emit_model: bool,

    /// Include solver statistics in the JSON output.
    #[arg(long)]
    stats: bool,

    /// Depth budget for nonlinear probabilistic constraints.
    #[arg(long)]
    budget: Option<u32>,

    /// Seed for randomized expansion orders.
    #[arg(long)]
    seed: Option<u64>,

    /// Run every corpus line through all three procedures and require
    /// identical verdicts.
    #[arg(long, requires = "corpus")]
    differential: bool,

    /// Corpus file: one `<assumption> |- <formula>` per line.
    #[arg(value_name = "CORPUS", requires = "differential")]
    corpus: Option<PathBuf>,

    /// Cross-check against the bounded model oracle with this state cap.
    #[arg(long, value_name = "N")]
    oracle_states: Option<usize>,

    /// Oracle weight bound: multigraph multiplicities or probabilistic
    /// weight denominators (default 4).
    #[arg(long, value_name = "N")]
    oracle_weight: Option<u32>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Parse { .. } | Error::KindMismatch(_) => 3,
                Error::Resource(_) => 4,
                _ => 5,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Error> {
    if cli.differential {
        let path = cli.corpus.as_ref().expect("clap enforces CORPUS with --differential");
        return differential(cli, path);
    }
    let Some(formula) = &cli.formula else {
        eprintln!("error: --formula is required unless --differential is given");
        return Ok(3);
    };
    single(cli, &cli.assumption, formula)
}

fn options(cli: &Cli) -> Options {
    let mut opts = Options {
        logic: cli.logic.into(),
        algorithm: cli.algorithm.into(),
        hybrid: cli.hybrid,
        kripke: cli.kripke,
        want_model: cli.emit_model,
        seed: cli.seed,
        ..Options::default()
    };
    if let Some(b) = cli.budget {
        opts.poly_budget = b;
    }
    opts
}

fn prepare(store: &mut Store, logic: Logic, text: &str) -> Result<Fid, Error> {
    let f = parse(store, text)?;
    adapt_to_logic(store, f, logic)
}

fn single(cli: &Cli, assumption: &str, formula: &str) -> Result<u8, Error> {
    let opts = options(cli);
    let mut store = Store::new();
    let psi = prepare(&mut store, opts.logic, assumption)?;
    let phi0 = prepare(&mut store, opts.logic, formula)?;
    let out = decide(&mut store, psi, phi0, &opts)?;

    let mut doc = Map::new();
    doc.insert("verdict".into(), json!(verdict_str(out.verdict)));
    if cli.emit_model {
        if let Some(model) = &out.model {
            // Re-validate before anything is printed; a model that fails
            // its own check must never reach the output.
            certify_model(&store, model, psi, phi0)?;
            doc.insert("model".into(), model_json(&store, model));
        }
    }
    if cli.stats {
        doc.insert("stats".into(), stats_json(&out.stats));
    }
    if let Some(max_states) = cli.oracle_states {
        let bound = cli.oracle_weight.unwrap_or(4);
        let hit = oracle_search(&store, psi, phi0, opts.logic, max_states, bound);
        if hit.is_some() && out.verdict == Verdict::Unsat {
            return Err(Error::Internal(
                "oracle found a model for a formula the solver refuted".into(),
            ));
        }
        doc.insert("oracle".into(), json!(if hit.is_some() { "sat" } else { "none" }));
    }
    println!("{}", Value::Object(doc));
    Ok(match out.verdict {
        Verdict::Sat => 0,
        Verdict::Unsat => 1,
        Verdict::Unknown => 2,
    })
}

fn differential(cli: &Cli, path: &PathBuf) -> Result<u8, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        col: 0,
        msg: format!("cannot read {}: {e}", path.display()),
    })?;
    let problems = parse_corpus(&text)?;
    let logic: Logic = cli.logic.into();
    let mut disagreements = 0usize;
    let mut oracle_violations = 0usize;
    let mut unknowns = 0usize;
    for (i, problem) in problems.iter().enumerate() {
        let mut verdicts = Vec::new();
        for algorithm in [Algorithm::Elim, Algorithm::Caching, Algorithm::Worklist] {
            let mut opts = options(cli);
            opts.algorithm = algorithm;
            opts.want_model = false;
            let mut store = Store::new();
            let psi = prepare(&mut store, logic, &problem.assumption)?;
            let phi0 = prepare(&mut store, logic, &problem.formula)?;
            verdicts.push(decide(&mut store, psi, phi0, &opts)?.verdict);
        }
        if verdicts.iter().any(|v| *v != verdicts[0]) {
            eprintln!(
                "disagreement on line entry {}: {} |- {} gave {:?}",
                i + 1,
                problem.assumption,
                problem.formula,
                verdicts
            );
            disagreements += 1;
        }
        if verdicts.contains(&Verdict::Unknown) {
            unknowns += 1;
        }
        if let Some(max_states) = cli.oracle_states {
            let bound = cli.oracle_weight.unwrap_or(4);
            let mut store = Store::new();
            let psi = prepare(&mut store, logic, &problem.assumption)?;
            let phi0 = prepare(&mut store, logic, &problem.formula)?;
            let hit = oracle_search(&store, psi, phi0, logic, max_states, bound);
            if hit.is_some() && verdicts[0] == Verdict::Unsat {
                eprintln!(
                    "oracle violation on entry {}: {} |- {} is oracle-satisfiable",
                    i + 1,
                    problem.assumption,
                    problem.formula
                );
                oracle_violations += 1;
            }
        }
    }
    let agreed = disagreements == 0 && oracle_violations == 0;
    println!(
        "{}",
        json!({
            "problems": problems.len(),
            "agreed": agreed,
            "disagreements": disagreements,
            "oracle_violations": oracle_violations,
            "unknown_verdicts": unknowns,
        })
    );
    Ok(if agreed { 0 } else { 1 })
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Sat => "sat",
        Verdict::Unsat => "unsat",
        Verdict::Unknown => "unknown",
    }
}

fn stats_json(s: &Stats) -> Value {
    json!({
        "solver_calls": s.solver_calls,
        "memo_hits": s.memo_hits,
        "iterations": s.iterations,
        "types": s.types,
        "sequents": s.sequents,
        "propagations": s.propagations,
        "expansions": s.expansions,
        "edges": s.edges,
        "edge_checks": s.edge_checks,
        "assignments_tried": s.assignments_tried,
        "instances": s.instances,
    })
}

fn model_json(store: &Store, model: &Model) -> Value {
    let (num_states, valuation, nominals) = match model {
        Model::Multi(m) => (m.num_states, &m.atom_valuation, &m.nominal_assignment),
        Model::Prob(m) => (m.num_states, &m.atom_valuation, &m.nominal_assignment),
    };
    let edges: Vec<Value> = match model {
        Model::Multi(m) => m
            .transitions
            .iter()
            .enumerate()
            .flat_map(|(from, row)| {
                row.iter().map(move |(to, w)| {
                    let weight = w
                        .to_i64()
                        .map(Value::from)
                        .unwrap_or_else(|| Value::from(w.to_string()));
                    json!({"from": from, "to": to, "weight": weight})
                })
            })
            .collect(),
        Model::Prob(m) => m
            .weights
            .iter()
            .enumerate()
            .flat_map(|(from, row)| {
                row.iter()
                    .map(move |(to, w)| json!({"from": from, "to": to, "weight": w.to_string()}))
            })
            .collect(),
    };
    let mut atoms = Map::new();
    for (state, names) in valuation.iter().enumerate() {
        let list: Vec<Value> =
            names.iter().map(|id| Value::from(store.name(*id).to_string())).collect();
        atoms.insert(state.to_string(), Value::from(list));
    }
    let mut noms = Map::new();
    for (id, state) in nominals {
        noms.insert(store.name(*id).to_string(), Value::from(*state));
    }
    json!({
        "states": (0..num_states).collect::<Vec<usize>>(),
        "edges": edges,
        "atoms": Value::Object(atoms),
        "nominals": Value::Object(noms),
    })
}
