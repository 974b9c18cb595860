//! Concrete worklist procedure over the sequent hypergraph.
//!
//! Every sequent added to the graph starts optimistic (α = 1) and is
//! revoked (α = 0) only on definite refutation; revocations wake exactly
//! the hyperedges registered as depending on the revoked sequent. Each
//! sequent contributes one propositional hyperedge per rule application
//! and, for states, a single modal hyperedge whose targets are the
//! successor candidates, materialized lazily while the edge is processed.
//!
//! Processing an edge first extends the graph (defining one undefined
//! target, materializing candidates as needed) and then evaluates, in the
//! same step:
//!
//! * a propositional edge whose conclusions are all refuted refutes its
//!   source (a clash has no conclusions and refutes immediately); one
//!   with a live conclusion registers there and parks its siblings;
//! * a modal edge with every candidate present and decided refutes its
//!   source if the one-step problem over the live candidates is
//!   unsatisfiable, and otherwise registers on the live candidates it
//!   used; with candidates still missing it may already register once the
//!   one-step problem over the current live ones is satisfiable — future
//!   candidates only add freedom — or requeues itself to make progress.
//!
//! The registration discipline bounds the evaluations per edge: a modal
//! edge is evaluated at most twice per candidate, a propositional one at
//! most once plus once per conclusion.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bitset::Bitset;
use crate::error::Result;
use crate::formula::{Closure, Store};
use crate::graph::{reject_nominals, Ctx, NodeKind};
use crate::{Options, Outcome, Verdict};

#[derive(Clone, Debug)]
struct Edge {
    source: usize,
    modal: bool,
    /// Rule conclusions (propositional edges only; modal targets live in
    /// the source's candidate generator).
    conclusions: Vec<usize>,
}

/// Per-edge evaluation record, for the complexity audit.
#[derive(Clone, Debug)]
pub struct EdgeAudit {
    pub modal: bool,
    pub checks: u64,
    /// Conclusion count (propositional) or materialized candidate count.
    pub targets: usize,
    /// Full candidate count (modal edges; equals `targets` for
    /// propositional ones).
    pub candidates_total: u128,
}

struct Run<'a> {
    ctx: Ctx<'a>,
    g0: usize,
    /// None = not yet added; true = live, false = refuted.
    alpha: Vec<Option<bool>>,
    /// Edges registered as depending on each sequent.
    d: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    checks: Vec<u64>,
    source_edges: Vec<Vec<usize>>,
    in_w: Vec<bool>,
    w: VecDeque<usize>,
    rng: Option<ChaCha8Rng>,
    batch: usize,
}

impl<'a> Run<'a> {
    fn grow_nodes(&mut self) {
        let n = self.ctx.arena.len();
        if self.alpha.len() < n {
            self.alpha.resize(n, None);
            self.d.resize_with(n, Vec::new);
            self.source_edges.resize_with(n, Vec::new);
        }
    }

    fn push_w(&mut self, eid: usize) {
        if !self.in_w[eid] {
            self.in_w[eid] = true;
            self.w.push_back(eid);
        }
    }

    fn pop_w(&mut self) -> Option<usize> {
        loop {
            let eid = match &mut self.rng {
                Some(r) => {
                    if self.w.is_empty() {
                        return None;
                    }
                    let i = r.gen_range(0..self.w.len());
                    self.w.swap_remove_back(i).unwrap()
                }
                None => self.w.pop_front()?,
            };
            // Entries parked by a sibling registration are left in place
            // and skipped here.
            if self.in_w[eid] {
                self.in_w[eid] = false;
                return Some(eid);
            }
        }
    }

    /// Adds a sequent to the graph as live, creating and queueing its
    /// edges. Each sequent is defined at most once.
    fn define(&mut self, id: usize) -> Result<()> {
        debug_assert!(self.alpha[id].is_none(), "sequent defined twice");
        self.alpha[id] = Some(true);
        self.ctx.ensure_kind(id)?;
        self.grow_nodes();
        let new_edges: Vec<Edge> = match self.ctx.kind[id].as_ref().unwrap() {
            NodeKind::State(_) => {
                vec![Edge { source: id, modal: true, conclusions: vec![] }]
            }
            NodeKind::NonState(apps) => apps
                .iter()
                .map(|app| Edge {
                    source: id,
                    modal: false,
                    conclusions: app.conclusions.clone(),
                })
                .collect(),
        };
        for e in new_edges {
            let eid = self.edges.len();
            self.edges.push(e);
            self.checks.push(0);
            self.in_w.push(false);
            self.source_edges[id].push(eid);
            self.push_w(eid);
        }
        self.ctx.stats.expansions += 1;
        Ok(())
    }

    /// Revokes a sequent, waking its dependents. Returns true when the
    /// root itself was revoked.
    fn set0(&mut self, id: usize) -> bool {
        if self.alpha[id] == Some(false) {
            return false;
        }
        self.alpha[id] = Some(false);
        let woken: Vec<usize> = self.d[id].drain(..).collect();
        for eid in woken {
            self.push_w(eid);
        }
        #[cfg(debug_assertions)]
        self.assert_refutations_sound();
        id == self.g0
    }

    fn register(&mut self, eid: usize, on: &[usize]) {
        for &c in on {
            debug_assert_eq!(self.alpha[c], Some(true), "registered on a dead sequent");
            if !self.d[c].contains(&eid) {
                self.d[c].push(eid);
            }
        }
    }

    /// Materialized candidate ids of a state (clone; the list is small).
    fn candidates(&self, id: usize) -> Vec<usize> {
        match self.ctx.kind[id].as_ref().unwrap() {
            NodeKind::State(cg) => cg.materialized.clone(),
            NodeKind::NonState(_) => unreachable!("modal edge on a non-state"),
        }
    }

    fn fully_materialized(&self, id: usize) -> bool {
        match self.ctx.kind[id].as_ref().unwrap() {
            NodeKind::State(cg) => cg.fully_materialized(),
            NodeKind::NonState(_) => unreachable!("modal edge on a non-state"),
        }
    }

    /// Every refuted sequent must lie in the least refutation fixpoint
    /// over the currently defined subgraph; checked after each revocation.
    /// One-step incompleteness is treated as refutable here, which only
    /// enlarges the reference fixpoint and never raises a false alarm.
    #[cfg(debug_assertions)]
    fn assert_refutations_sound(&mut self) {
        use crate::error::Error;
        use crate::fixpoint::kleene_mu;
        let n = self.ctx.arena.len();
        let alpha = std::mem::take(&mut self.alpha);
        let ctx = &mut self.ctx;
        let step = |x: &Bitset| -> Result<Bitset> {
            let mut out = Bitset::new(n);
            for id in 0..n {
                if alpha.get(id).copied().flatten().is_none() {
                    continue;
                }
                enum Check {
                    Done(bool),
                    State(Vec<usize>),
                }
                let check = match ctx.kind.get(id).and_then(|k| k.as_ref()) {
                    None => continue,
                    Some(NodeKind::NonState(apps)) => Check::Done(apps.iter().any(|app| {
                        app.conclusions.iter().all(|&c| x.contains(c))
                    })),
                    Some(NodeKind::State(cg)) => {
                        if !cg.fully_materialized()
                            || cg.materialized.iter().any(|&c| alpha[c].is_none())
                        {
                            continue;
                        }
                        Check::State(
                            cg.materialized
                                .iter()
                                .copied()
                                .filter(|&c| !x.contains(c))
                                .collect(),
                        )
                    }
                };
                let refuted = match check {
                    Check::Done(b) => b,
                    Check::State(kids) => match ctx.one_step_state(id, &kids) {
                        Ok(sat) => !sat,
                        Err(Error::Incomplete(_)) => true,
                        Err(e) => return Err(e),
                    },
                };
                if refuted {
                    out.insert(id);
                }
            }
            Ok(out)
        };
        let (mu, _) = kleene_mu(Bitset::new(n), step).expect("refutation recheck failed");
        for id in 0..n {
            if alpha.get(id).copied().flatten() == Some(false) {
                debug_assert!(mu.contains(id), "sequent {id} revoked without justification");
            }
        }
        self.alpha = alpha;
    }

    /// Termination invariants at an empty worklist: dependencies point at
    /// live sequents only, every live non-state has a registered edge,
    /// and every live state's one-step problem over its registered
    /// supporters is satisfiable.
    #[cfg(debug_assertions)]
    fn assert_termination_invariants(&mut self) {
        for id in 0..self.alpha.len() {
            if !self.d[id].is_empty() {
                debug_assert_eq!(
                    self.alpha[id],
                    Some(true),
                    "dependency list on a non-live sequent"
                );
            }
        }
        let n = self.alpha.len();
        for id in 0..n {
            if self.alpha[id] != Some(true) {
                continue;
            }
            match self.ctx.kind[id].as_ref().unwrap() {
                NodeKind::NonState(apps) => {
                    if apps.is_empty() {
                        continue;
                    }
                    let registered = self.source_edges[id]
                        .iter()
                        .any(|eid| self.d.iter().any(|list| list.contains(eid)));
                    debug_assert!(registered, "live non-state {id} watches nothing");
                }
                NodeKind::State(_) => {
                    let eid = self.source_edges[id][0];
                    let supporters: Vec<usize> = (0..n)
                        .filter(|&c| self.d[c].contains(&eid))
                        .collect();
                    match self.ctx.one_step_state(id, &supporters) {
                        Ok(sat) => debug_assert!(sat, "live state {id} lacks one-step support"),
                        Err(crate::error::Error::Incomplete(_)) => {}
                        Err(e) => panic!("termination recheck failed: {e}"),
                    }
                }
            }
        }
    }

    fn finish(mut self, verdict: Verdict) -> (Outcome, Vec<EdgeAudit>) {
        let audit: Vec<EdgeAudit> = self
            .edges
            .iter()
            .enumerate()
            .map(|(eid, e)| {
                if e.modal {
                    let (mat, total) = match self.ctx.kind[e.source].as_ref().unwrap() {
                        NodeKind::State(cg) => (cg.materialized.len(), cg.total()),
                        NodeKind::NonState(_) => unreachable!(),
                    };
                    EdgeAudit {
                        modal: true,
                        checks: self.checks[eid],
                        targets: mat,
                        candidates_total: total,
                    }
                } else {
                    EdgeAudit {
                        modal: false,
                        checks: self.checks[eid],
                        targets: e.conclusions.len(),
                        candidates_total: e.conclusions.len() as u128,
                    }
                }
            })
            .collect();
        for a in &audit {
            if a.modal {
                debug_assert!(
                    a.checks <= 2 * a.targets.max(1) as u64,
                    "modal edge over-checked: {a:?}"
                );
            } else {
                debug_assert!(
                    a.checks <= a.targets as u64 + 1,
                    "propositional edge over-checked: {a:?}"
                );
            }
        }
        self.ctx.stats.sequents = self.ctx.arena.len() as u64;
        self.ctx.stats.edges = self.edges.len() as u64;
        (Outcome { verdict, model: None, stats: self.ctx.stats }, audit)
    }
}

/// Decides ψ-satisfiability of φ0 by the worklist procedure, returning
/// the per-edge evaluation audit alongside the outcome. Never returns a
/// model; satisfiable callers wanting one re-derive it by elimination.
pub fn decide_worklist_audited(
    store: &Store,
    cl: &Closure,
    opts: &Options,
) -> Result<(Outcome, Vec<EdgeAudit>)> {
    reject_nominals(store, cl)?;
    let mut ctx = Ctx::new(store, cl, opts);
    let mut gamma0 = Bitset::new(cl.len());
    gamma0.insert(cl.psi);
    gamma0.insert(cl.phi0);
    let (g0, _) = ctx.arena.intern(gamma0);
    let mut run = Run {
        ctx,
        g0,
        alpha: Vec::new(),
        d: Vec::new(),
        edges: Vec::new(),
        checks: Vec::new(),
        source_edges: Vec::new(),
        in_w: Vec::new(),
        w: VecDeque::new(),
        rng: opts.seed.map(ChaCha8Rng::seed_from_u64),
        batch: opts.batch.max(1),
    };
    run.grow_nodes();
    run.define(g0)?;

    while let Some(eid) = run.pop_w() {
        let src = run.edges[eid].source;
        if run.alpha[src] == Some(false) {
            continue;
        }

        // Expansion: bring one more target into the graph if any is
        // missing, materializing candidates as needed.
        if run.edges[eid].modal {
            let undef =
                run.candidates(src).into_iter().find(|&c| run.alpha[c].is_none());
            if let Some(u) = undef {
                run.define(u)?;
            } else {
                while !run.fully_materialized(src) {
                    let added = {
                        let ctx = &mut run.ctx;
                        let cl = ctx.cl;
                        match ctx.kind[src].as_mut().unwrap() {
                            NodeKind::State(cg) => {
                                cg.materialize(cl, &mut ctx.arena, run.batch, ctx.child_cap)?
                            }
                            NodeKind::NonState(_) => unreachable!(),
                        }
                    };
                    run.grow_nodes();
                    if let Some(u) =
                        added.into_iter().find(|&c| run.alpha[c].is_none())
                    {
                        run.define(u)?;
                        break;
                    }
                }
            }
        } else if let Some(u) = run.edges[eid]
            .conclusions
            .iter()
            .copied()
            .find(|&c| run.alpha[c].is_none())
        {
            run.define(u)?;
        }

        // Evaluation, in the same processing step.
        run.checks[eid] += 1;
        run.ctx.stats.edge_checks += 1;
        if run.edges[eid].modal {
            let cands = run.candidates(src);
            let complete = run.fully_materialized(src)
                && cands.iter().all(|&c| run.alpha[c].is_some());
            let live: Vec<usize> =
                cands.into_iter().filter(|&c| run.alpha[c] == Some(true)).collect();
            let sat = run.ctx.one_step_state(src, &live)?;
            if sat {
                run.register(eid, &live);
            } else if complete {
                if run.set0(src) {
                    return Ok(run.finish(Verdict::Unsat));
                }
            } else {
                run.push_w(eid);
            }
        } else {
            let concl = run.edges[eid].conclusions.clone();
            if concl.iter().all(|&c| run.alpha[c] == Some(false)) {
                if run.set0(src) {
                    return Ok(run.finish(Verdict::Unsat));
                }
            } else if let Some(&c) =
                concl.iter().find(|&&c| run.alpha[c] == Some(true))
            {
                run.register(eid, &[c]);
                // The rule is answered; park the source's other queued
                // edges until the watched conclusion changes status.
                for i in 0..run.source_edges[src].len() {
                    let sib = run.source_edges[src][i];
                    run.in_w[sib] = false;
                }
            } else {
                unreachable!("propositional edge left undecided after expansion");
            }
        }
    }

    #[cfg(debug_assertions)]
    run.assert_termination_invariants();

    let verdict =
        if run.alpha[g0] == Some(true) { Verdict::Sat } else { Verdict::Unsat };
    Ok(run.finish(verdict))
}

/// Decides ψ-satisfiability of φ0 by the worklist procedure.
pub fn decide_worklist(store: &Store, cl: &Closure, opts: &Options) -> Result<Outcome> {
    decide_worklist_audited(store, cl, opts).map(|(out, _)| out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caching::counting_chain;
    use crate::parse::{adapt_to_logic, parse};
    use crate::{Logic, Options};

    fn run(logic: Logic, psi: &str, phi0: &str, opts: Options) -> Outcome {
        let mut store = Store::new();
        let psi = parse(&mut store, psi).unwrap();
        let psi = adapt_to_logic(&mut store, psi, logic).unwrap();
        let phi0 = parse(&mut store, phi0).unwrap();
        let phi0 = adapt_to_logic(&mut store, phi0, logic).unwrap();
        let cl = Closure::build(&mut store, psi, phi0).unwrap();
        decide_worklist(&store, &cl, &Options { logic, ..opts }).unwrap()
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
    fn propositional_clash_cascades_to_the_root() {
        let out = run(Logic::K, "true", "p & ~p", Options::default());
        assert_eq!(out.verdict, Verdict::Unsat);
    }

    #[test]
    fn deadlock_satisfies_a_negated_diamond() {
        let out = run(Logic::K, "true", "~<>true", Options::default());
        assert_eq!(out.verdict, Verdict::Sat);
    }

    #[test]
    fn disjunction_picks_a_branch() {
        let out = run(Logic::K, "true", "(p | ~<>true) & <>p", Options::default());
        assert_eq!(out.verdict, Verdict::Sat);
    }

    #[test]
    fn probabilistic_overweight_is_refuted() {
        let out = run(Logic::Prob, "true", "w(p) > 1/2 & w(~p) > 1/2", Options::default());
        assert_eq!(out.verdict, Verdict::Unsat);
    }

    #[test]
    fn chain_graph_stays_linear() {
        let mut store = Store::new();
        let (psi, phi0) = counting_chain(&mut store, 4);
        let cl = Closure::build(&mut store, psi, phi0).unwrap();
        let opts = Options { logic: Logic::Presburger, ..Options::default() };
        let out = decide_worklist(&store, &cl, &opts).unwrap();
        assert_eq!(out.verdict, Verdict::Sat);
        assert!(out.stats.sequents <= 20, "materialized {}", out.stats.sequents);
    }

    #[test]
    fn edge_audit_respects_bounds() {
        for (logic, psi, phi0) in [
            (Logic::K, "p -> <>p", "p & <>~p"),
            (Logic::K, "~p", "<>p"),
            (Logic::Presburger, "true", "#(p) = 3 & #(~p) < 2"),
            (Logic::Prob, "true", "w(p) > 1/2 & w(q) > 1/3"),
        ] {
            let mut store = Store::new();
            let psi = parse(&mut store, psi).unwrap();
            let psi = adapt_to_logic(&mut store, psi, logic).unwrap();
            let phi0 = parse(&mut store, phi0).unwrap();
            let phi0 = adapt_to_logic(&mut store, phi0, logic).unwrap();
            let cl = Closure::build(&mut store, psi, phi0).unwrap();
            let opts = Options { logic, ..Options::default() };
            let (_, audit) = decide_worklist_audited(&store, &cl, &opts).unwrap();
            assert!(!audit.is_empty());
            for a in &audit {
                if a.modal {
                    assert!(a.checks <= 2 * a.targets.max(1) as u64, "{a:?}");
                    assert!(a.checks as u128 <= 2 * a.candidates_total.max(1), "{a:?}");
                } else {
                    assert!(a.checks <= a.targets as u64 + 1, "{a:?}");
                }
            }
        }
    }

    #[test]
    fn processing_order_does_not_change_the_verdict() {
        for (psi, phi0, want) in [
            ("~p", "<>p", Verdict::Unsat),
            ("<>true", "p", Verdict::Sat),
            ("p -> <>p", "p & ~<>~p", Verdict::Sat),
        ] {
            for seed in [None, Some(3u64), Some(11), Some(99)] {
                let out = run(Logic::K, psi, phi0, Options { seed, ..Options::default() });
                assert_eq!(out.verdict, want, "psi={psi} phi0={phi0} seed={seed:?}");
            }
        }
    }

    #[test]
    fn single_candidate_batches_terminate() {
        let out = run(
            Logic::K,
            "true",
            "<>p & <>~p & <>q",
            Options { batch: 1, ..Options::default() },
        );
        assert_eq!(out.verdict, Verdict::Sat);
    }
}
