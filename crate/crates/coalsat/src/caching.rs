//! Global caching: grow the sequent graph on demand from the root, and
//! between expansion steps propagate definite satisfiability (E) and
//! definite unsatisfiability (A) over the partial graph. Either answer
//! for the root is sound the moment propagation reaches it; if neither
//! arrives early, a final exact recomputation over the fully expanded
//! graph decides.
//!
//! E is computed as the greatest fixpoint of S ↦ sat-step(S ∪ E) and A as
//! the least fixpoint of S ↦ unsat-step(S ∪ A); seeding with the previous
//! values makes repeated propagation incremental without losing either
//! soundness invariant (E below the greatest fixpoint, A above nothing it
//! should not contain).
//!
//! During expansion a state's one-step check runs against the successor
//! candidates materialized so far. For E that is a sound
//! under-approximation: fewer candidate rows only strengthen the one-step
//! problem. For A the state check is gated on full materialization, since
//! refutation must consider every candidate.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bitset::Bitset;
use crate::error::Result;
use crate::fixpoint::{kleene_mu, kleene_nu};
use crate::formula::{Closure, Store};
use crate::graph::{reject_nominals, Ctx, NodeKind};
use crate::{Options, Outcome, Verdict};

/// One satisfiability-propagation step over the ensured part of the
/// graph: a non-state passes if any rule conclusion is in `s`, a state if
/// its one-step pair against its materialized candidates within `s` is
/// satisfiable.
fn eg_step(ctx: &mut Ctx, s: &Bitset) -> Result<Bitset> {
    let n = ctx.arena.len();
    let mut out = Bitset::new(n);
    for id in 0..n {
        enum Check {
            Done(bool),
            State(Vec<usize>),
        }
        let check = match ctx.kind.get(id).and_then(|k| k.as_ref()) {
            None => continue,
            Some(NodeKind::NonState(apps)) => Check::Done(
                apps.iter().any(|app| app.conclusions.iter().any(|&c| s.contains(c))),
            ),
            Some(NodeKind::State(cg)) => Check::State(
                cg.materialized.iter().copied().filter(|&c| s.contains(c)).collect(),
            ),
        };
        let keep = match check {
            Check::Done(b) => b,
            Check::State(kids) => ctx.one_step_state(id, &kids)?,
        };
        if keep {
            out.insert(id);
        }
    }
    Ok(out)
}

/// One refutation-propagation step: a non-state is refuted if some rule
/// application has all conclusions in `s` (a clash has none), a fully
/// materialized state if its one-step pair against the candidates outside
/// `s` is unsatisfiable.
fn ag_step(ctx: &mut Ctx, s: &Bitset) -> Result<Bitset> {
    let n = ctx.arena.len();
    let mut out = Bitset::new(n);
    for id in 0..n {
        enum Check {
            Done(bool),
            State(Vec<usize>),
        }
        let check = match ctx.kind.get(id).and_then(|k| k.as_ref()) {
            None => continue,
            Some(NodeKind::NonState(apps)) => Check::Done(
                apps.iter().any(|app| app.conclusions.iter().all(|&c| s.contains(c))),
            ),
            Some(NodeKind::State(cg)) => {
                if !cg.fully_materialized() {
                    continue;
                }
                Check::State(
                    cg.materialized.iter().copied().filter(|&c| !s.contains(c)).collect(),
                )
            }
        };
        let keep = match check {
            Check::Done(b) => b,
            Check::State(kids) => !ctx.one_step_state(id, &kids)?,
        };
        if keep {
            out.insert(id);
        }
    }
    Ok(out)
}

/// Recomputes E and A seeded with their previous values; returns the
/// fixpoint iteration count.
fn propagate(ctx: &mut Ctx, e: &mut Bitset, a: &mut Bitset) -> Result<u64> {
    let n = ctx.arena.len();
    e.grow(n);
    a.grow(n);
    let e_prev = e.clone();
    let (e_new, it_e) = kleene_nu(Bitset::full(n), |s| eg_step(ctx, &s.union(&e_prev)))?;
    *e = e_new;
    let a_prev = a.clone();
    let (a_new, it_a) = kleene_mu(Bitset::new(n), |s| ag_step(ctx, &s.union(&a_prev)))?;
    *a = a_new;

    // Soundness invariants: E under the unseeded greatest fixpoint, A
    // under the unseeded least fixpoint, and never both verdicts at once.
    #[cfg(debug_assertions)]
    {
        let (e_ref, _) = kleene_nu(Bitset::full(n), |s| eg_step(ctx, s))?;
        debug_assert!(e.is_subset(&e_ref), "E escaped its greatest fixpoint");
        let (a_ref, _) = kleene_mu(Bitset::new(n), |s| ag_step(ctx, s))?;
        debug_assert!(a.is_subset(&a_ref), "A escaped its least fixpoint");
        debug_assert!(e.intersection(a).is_empty(), "a sequent is both proven and refuted");
    }

    Ok(it_e + it_a)
}

/// Decides ψ-satisfiability of φ0 by global caching. Expansion order is
/// first-in-first-out, or uniformly random over the frontier when a seed
/// is set; the verdict is independent of the order. Never returns a
/// model: satisfiable callers wanting one re-derive it by elimination.
pub fn decide_caching(store: &Store, cl: &Closure, opts: &Options) -> Result<Outcome> {
    reject_nominals(store, cl)?;
    let mut ctx = Ctx::new(store, cl, opts);
    let mut gamma0 = Bitset::new(cl.len());
    gamma0.insert(cl.psi);
    gamma0.insert(cl.phi0);
    let (g0, _) = ctx.arena.intern(gamma0);

    let mut e = Bitset::new(0);
    let mut a = Bitset::new(0);
    let mut frontier: VecDeque<usize> = VecDeque::new();
    let mut queued: Vec<bool> = vec![true];
    frontier.push_back(g0);
    let mut rng = opts.seed.map(ChaCha8Rng::seed_from_u64);

    let mut early = None;
    while !frontier.is_empty() {
        let id = match &mut rng {
            Some(r) => frontier.swap_remove_back(r.gen_range(0..frontier.len())).unwrap(),
            None => frontier.pop_front().unwrap(),
        };
        queued[id] = false;

        let before = ctx.arena.len();
        ctx.ensure_kind(id)?;
        let mut requeue = false;
        if let Some(NodeKind::State(cg)) = ctx.kind[id].as_mut() {
            let cl = ctx.cl;
            cg.materialize(cl, &mut ctx.arena, opts.batch.max(1), opts.child_cap)?;
            requeue = !cg.fully_materialized();
        }
        ctx.stats.expansions += 1;

        queued.resize(ctx.arena.len(), false);
        for nid in before..ctx.arena.len() {
            if !queued[nid] {
                queued[nid] = true;
                frontier.push_back(nid);
            }
        }
        if requeue && !queued[id] {
            queued[id] = true;
            frontier.push_back(id);
        }

        if opts.propagate_every > 0
            && ctx.stats.expansions % opts.propagate_every as u64 == 0
        {
            ctx.stats.iterations += propagate(&mut ctx, &mut e, &mut a)?;
            ctx.stats.propagations += 1;
            if e.contains(g0) {
                early = Some(Verdict::Sat);
                break;
            }
            if a.contains(g0) {
                early = Some(Verdict::Unsat);
                break;
            }
        }
    }

    let verdict = match early {
        Some(v) => v,
        None => {
            // The frontier is exhausted, so every state is fully
            // materialized and the satisfiability recomputation is exact.
            let n = ctx.arena.len();
            e.grow(n);
            let e_prev = e.clone();
            let (e_final, it) =
                kleene_nu(Bitset::full(n), |s| eg_step(&mut ctx, &s.union(&e_prev)))?;
            ctx.stats.iterations += it;
            ctx.stats.propagations += 1;
            if e_final.contains(g0) {
                Verdict::Sat
            } else {
                Verdict::Unsat
            }
        }
    };

    let mut stats = ctx.stats;
    stats.sequents = ctx.arena.len() as u64;
    Ok(Outcome { verdict, model: None, stats })
}

/// Builds the counting chain φ_n = ♯(φ_{n−1}) > 0 with φ_0 = p, whose
/// graph stays linear in n while its closure has exponentially many
/// types. Shared by tests and benchmarks.
pub fn counting_chain(store: &mut Store, depth: usize) -> (crate::formula::Fid, crate::formula::Fid) {
    use num::{BigInt, One, Zero};
    let mut f = store.atom("p");
    for _ in 0..depth {
        f = store.count(vec![(BigInt::one(), f)], crate::formula::IntRel::Gt, BigInt::zero());
    }
    let psi = store.top();
    (psi, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{adapt_to_logic, parse};
    use crate::{Logic, Options};

    fn run(logic: Logic, psi: &str, phi0: &str, opts: Options) -> Outcome {
        let mut store = Store::new();
        let psi = parse(&mut store, psi).unwrap();
        let psi = adapt_to_logic(&mut store, psi, logic).unwrap();
        let phi0 = parse(&mut store, phi0).unwrap();
        let phi0 = adapt_to_logic(&mut store, phi0, logic).unwrap();
        let cl = Closure::build(&mut store, psi, phi0).unwrap();
        decide_caching(&store, &cl, &Options { logic, ..opts }).unwrap()
    }

    #[test]
    fn diamond_against_global_negation_is_unsat() {
        let out = run(Logic::K, "~p", "<>p", Options::default());
        assert_eq!(out.verdict, Verdict::Unsat);
    }

    #[test]
    fn global_diamond_is_sat() {
        let out = run(Logic::K, "<>true", "true", Options::default());
        assert_eq!(out.verdict, Verdict::Sat);
    }

    #[test]
    fn propositional_clash_is_refuted() {
        let out = run(Logic::K, "true", "p & ~p", Options::default());
        assert_eq!(out.verdict, Verdict::Unsat);
    }

    #[test]
    fn disjunction_picks_a_branch() {
        let out = run(Logic::K, "true", "(p | ~<>true) & <>p", Options::default());
        assert_eq!(out.verdict, Verdict::Sat);
    }

    #[test]
    fn chain_graph_stays_linear() {
        let mut store = Store::new();
        let (psi, phi0) = counting_chain(&mut store, 4);
        let cl = Closure::build(&mut store, psi, phi0).unwrap();
        let opts = Options { logic: Logic::Presburger, ..Options::default() };
        let out = decide_caching(&store, &cl, &opts).unwrap();
        assert_eq!(out.verdict, Verdict::Sat);
        assert!(out.stats.sequents <= 20, "materialized {}", out.stats.sequents);
        assert!(crate::elim::all_types(&store, &cl).len() >= 1 << 4);
    }

    #[test]
    fn expansion_order_does_not_change_the_verdict() {
        for (psi, phi0, want) in [
            ("~p", "<>p", Verdict::Unsat),
            ("<>true", "p", Verdict::Sat),
            ("p -> <>p", "p & ~<>~p", Verdict::Sat),
        ] {
            for seed in [None, Some(1u64), Some(7), Some(42)] {
                let out = run(
                    Logic::K,
                    psi,
                    phi0,
                    Options { seed, ..Options::default() },
                );
                assert_eq!(out.verdict, want, "psi={psi} phi0={phi0} seed={seed:?}");
            }
        }
    }

    #[test]
    fn final_only_propagation_agrees() {
        for (psi, phi0, want) in
            [("~p", "<>p", Verdict::Unsat), ("<>true", "true", Verdict::Sat)]
        {
            let out = run(
                Logic::K,
                psi,
                phi0,
                Options { propagate_every: 0, ..Options::default() },
            );
            assert_eq!(out.verdict, want);
        }
    }

    #[test]
    fn probabilistic_overweight_is_refuted() {
        let out = run(Logic::Prob, "true", "w(p) > 1/2 & w(~p) > 1/2", Options::default());
        assert_eq!(out.verdict, Verdict::Unsat);
    }

    #[test]
    fn small_batches_still_terminate() {
        let out = run(
            Logic::K,
            "true",
            "<>p & <>~p & <>q",
            Options { batch: 1, ..Options::default() },
        );
        assert_eq!(out.verdict, Verdict::Sat);
    }
}
