//! Satisfiability under global assumptions for coalgebraic modal logics.
//!
//! The library decides whether a formula φ is satisfiable in a model that
//! globally satisfies an assumption ψ, for three instance logics sharing
//! one engine:
//!
//! * relational modal logic K (multigraph semantics, edge counts ignored),
//! * Presburger modal logic: linear-arithmetic constraints `Σ cᵢ·♯(φᵢ) REL v`
//!   on successor counts, including congruences,
//! * probabilistic modal logic: polynomial inequalities `p(w(φ₁),…) ≥ 0`
//!   on successor weights of a subdistribution.
//!
//! Three decision procedures run over a shared one-step satisfiability
//! interface: full type elimination, global caching with propagation, and
//! a concrete worklist procedure with targeted dependency wakeups. The
//! hybrid extension (nominals, `@`, the universal modality) reduces to the
//! core engine. Satisfiable outcomes can ship a concrete witness model that
//! is re-checked by an independent model checker before being returned.

pub mod bitset;
pub mod caching;
pub mod corpus;
pub mod elim;
pub mod error;
pub mod fixpoint;
pub mod formula;
pub mod graph;
pub mod hybrid;
pub mod intsolve;
pub mod logic_k;
pub mod logic_presburger;
pub mod logic_prob;
pub mod model;
pub mod onestep;
pub mod oracle;
pub mod parse;
pub mod poly;
pub mod realsolve;
pub mod render;
pub mod simplex;
pub mod worklist;

pub use error::{Error, Result};
pub use model::{Model, Multigraph, SubdistModel};

/// Instance logic selecting the one-step solver and the model kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Logic {
    K,
    Presburger,
    Prob,
}

/// Decision procedure selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Full type elimination (global fixpoint over all types).
    Elim,
    /// Global caching: expand on demand, propagate over the whole graph.
    Caching,
    /// Concrete worklist with dependency-directed re-checks.
    Worklist,
}

/// Three-valued outcome. `Unknown` only arises where the polynomial
/// back-end is incomplete (probabilistic logic, nonlinear constraints).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
}

/// Tuning knobs and caps. `Default` matches the CLI defaults.
#[derive(Clone, Debug)]
pub struct Options {
    pub logic: Logic,
    pub algorithm: Algorithm,
    /// Force the hybrid pipeline even for nominal-free input.
    pub hybrid: bool,
    /// Kripke-faithful reading of nominals (Presburger only): every
    /// nominal denotes a state with no duplicate incoming multiplicity.
    pub kripke: bool,
    /// Extract and certify a witness model on SAT.
    pub want_model: bool,
    /// Seed for randomized expansion orders; `None` means deterministic
    /// first-in-first-out behavior.
    pub seed: Option<u64>,
    /// Depth budget for the interval branch-and-prune polynomial back-end.
    pub poly_budget: u32,
    /// Cap on hybrid nominal-assignment enumeration.
    pub assignment_cap: u64,
    /// Cap on materialized successor candidates per state.
    pub child_cap: usize,
    /// States materialized per expansion step (caching/worklist).
    pub batch: usize,
    /// Propagation cadence for global caching (in expansion steps).
    pub propagate_every: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            logic: Logic::K,
            algorithm: Algorithm::Elim,
            hybrid: false,
            kripke: false,
            want_model: false,
            seed: None,
            poly_budget: 24,
            assignment_cap: 1_000_000,
            child_cap: 1 << 16,
            batch: 64,
            propagate_every: 1,
        }
    }
}

/// Instrumentation counters, all monotone over a run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// One-step satisfiability solver invocations (after memoization).
    pub solver_calls: u64,
    /// One-step results served from the memo table.
    pub memo_hits: u64,
    /// Fixpoint iterations (elimination rounds or propagation sweeps).
    pub iterations: u64,
    /// Types constructed (elimination) or surviving.
    pub types: u64,
    /// Sequents materialized in the proof graph.
    pub sequents: u64,
    /// Propagation passes over the cached graph.
    pub propagations: u64,
    /// Expansion steps.
    pub expansions: u64,
    /// Hyperedges created (worklist).
    pub edges: u64,
    /// Hyperedge check events processed (worklist).
    pub edge_checks: u64,
    /// Hybrid nominal assignments enumerated.
    pub assignments_tried: u64,
    /// Reduced instances solved (hybrid universal-modality expansion).
    pub instances: u64,
}

/// Result of a decision run.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub verdict: Verdict,
    /// Witness model, present iff requested and the verdict is SAT.
    pub model: Option<Model>,
    pub stats: Stats,
}

/// Decides ψ-satisfiability of φ0 with the configured algorithm.
///
/// Inputs using nominals, `@` or the universal modality are routed to the
/// hybrid pipeline automatically (as are runs with the `hybrid` or
/// `kripke` flags set); the hybrid pipeline always solves by type
/// elimination. Backend incompleteness surfaces as `Verdict::Unknown`
/// with empty statistics, never as an error; resource-cap and input
/// errors still fail. When a model is requested from an algorithm that
/// does not construct one, a witness is re-derived by type elimination;
/// in the rare case that the re-derivation is undecided (nonlinear
/// probabilistic constraints under a tight budget) the SAT verdict stands
/// and the model is omitted.
pub fn decide(
    store: &mut formula::Store,
    psi: formula::Fid,
    phi0: formula::Fid,
    opts: &Options,
) -> Result<Outcome> {
    let needs_hybrid = opts.hybrid
        || opts.kripke
        || store.needs_hybrid(psi)
        || store.needs_hybrid(phi0);
    let run = if needs_hybrid {
        hybrid::decide_hybrid(store, psi, phi0, opts)
    } else {
        let cl = formula::Closure::build(store, psi, phi0)?;
        match opts.algorithm {
            Algorithm::Elim => elim::decide_elim(store, &cl, opts),
            Algorithm::Caching => caching::decide_caching(store, &cl, opts),
            Algorithm::Worklist => worklist::decide_worklist(store, &cl, opts),
        }
    };
    let mut out = match run {
        Ok(out) => out,
        Err(Error::Incomplete(_)) => {
            return Ok(Outcome {
                verdict: Verdict::Unknown,
                model: None,
                stats: Stats::default(),
            })
        }
        Err(e) => return Err(e),
    };
    if out.verdict == Verdict::Sat && opts.want_model && out.model.is_none() {
        let cl = formula::Closure::build(store, psi, phi0)?;
        match elim::decide_elim(store, &cl, opts) {
            Ok(witness_run) if witness_run.verdict == Verdict::Sat => {
                out.model = witness_run.model;
            }
            Ok(_) => {
                return Err(Error::Internal(
                    "type elimination contradicts the SAT verdict during witness derivation"
                        .into(),
                ))
            }
            Err(Error::Incomplete(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{adapt_to_logic, parse};

    fn prepared(logic: Logic, psi: &str, phi0: &str) -> (formula::Store, formula::Fid, formula::Fid) {
        let mut store = formula::Store::new();
        let psi = parse(&mut store, psi).unwrap();
        let psi = adapt_to_logic(&mut store, psi, logic).unwrap();
        let phi0 = parse(&mut store, phi0).unwrap();
        let phi0 = adapt_to_logic(&mut store, phi0, logic).unwrap();
        (store, psi, phi0)
    }

    #[test]
    fn all_algorithms_answer_and_ship_models() {
        for algorithm in [Algorithm::Elim, Algorithm::Caching, Algorithm::Worklist] {
            let (mut store, psi, phi0) = prepared(Logic::K, "<>true", "<>p | ~p");
            let opts = Options { algorithm, want_model: true, ..Options::default() };
            let out = decide(&mut store, psi, phi0, &opts).unwrap();
            assert_eq!(out.verdict, Verdict::Sat, "{algorithm:?}");
            assert!(out.model.is_some(), "{algorithm:?}");

            let (mut store, psi, phi0) = prepared(Logic::K, "~p", "<>p");
            let out = decide(&mut store, psi, phi0, &opts).unwrap();
            assert_eq!(out.verdict, Verdict::Unsat, "{algorithm:?}");
            assert!(out.model.is_none());
        }
    }

    #[test]
    fn hybrid_inputs_reroute_any_algorithm() {
        let (mut store, psi, phi0) = prepared(Logic::K, "true", "@'i p");
        let opts =
            Options { algorithm: Algorithm::Caching, want_model: true, ..Options::default() };
        let out = decide(&mut store, psi, phi0, &opts).unwrap();
        assert_eq!(out.verdict, Verdict::Sat);
        assert!(out.stats.instances >= 1, "hybrid pipeline was not used");
        assert!(out.model.is_some());
    }

    #[test]
    fn incompleteness_surfaces_as_unknown() {
        let (mut store, psi, phi0) = prepared(Logic::Prob, "true", "w(p)*w(p) = 1/2");
        let opts = Options { logic: Logic::Prob, poly_budget: 2, ..Options::default() };
        let out = decide(&mut store, psi, phi0, &opts).unwrap();
        assert_eq!(out.verdict, Verdict::Unknown);
    }
}
