//! Hybrid satisfiability: nominals, satisfaction operators `@` and the
//! universal modality, layered on top of plain type elimination.
//!
//! The pipeline for deciding `φ0` under global assumption `ψ`:
//!
//! 1. optionally add Kripke-faithfulness constraints (Presburger only):
//!    each user nominal `'i` gets the global conjunct `¬(♯('i) > 1)`;
//! 2. eliminate `@`: `@'i χ` becomes `[∀]('i → χ)`, bottom up;
//! 3. fold the assumption into one formula, `φ := φ0 ∧ [∀]ψ`;
//! 4. reduce the universal modality: for every guess `U` over the
//!    distinct `[∀]`-subformulas of `φ`, emit a `[∀]`-free instance whose
//!    assumption asserts the guessed-true bodies globally and pins a
//!    refuting state onto a fresh nominal for each guessed-false body;
//! 5. solve each instance by nominal-aware type elimination: a fresh goal
//!    nominal `i*` turns "the goal holds somewhere" into a global
//!    constraint, and satisfiability is equivalent to some consistent
//!    assignment `β` of nominals to types whose image survives the
//!    greatest elimination fixpoint seeded with the `β`-compatible types.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num::BigInt;

use crate::bitset::Bitset;
use crate::elim::{all_types, extract_model, nu_elim, StepCache};
use crate::error::{Error, Result};
use crate::formula::{Closure, Fid, IntRel, Node, Sequent, Store};
use crate::model::{certify_model, Model};
use crate::{Logic, Options, Outcome, Stats, Verdict};

/// Largest number of distinct `[∀]`-subformulas the reduction will
/// expand; beyond it the 2^n instance blowup is refused as a resource
/// error rather than attempted.
const MAX_UNIVERSALS: usize = 16;

/// One `[∀]`-free instance of the universal-modality reduction.
#[derive(Clone, Debug)]
pub struct Reduced {
    /// Global assumption `ψ_U`.
    pub assumption: Fid,
    /// Main goal `φ[U]`, to hold in some state.
    pub goal: Fid,
    /// Modal variant only: one extra goal `¬ψ_k[U]` per guessed-false
    /// body, each to hold in some (separate) state. Empty in the hybrid
    /// variant, where fresh nominals pin those states inside
    /// `assumption` instead.
    pub side_goals: Vec<Fid>,
}

fn collect_nominals(store: &Store, f: Fid, seen: &mut BTreeSet<Fid>, out: &mut BTreeSet<u32>) {
    if !seen.insert(f) {
        return;
    }
    if let Node::Nom(id) = store.node(f) {
        out.insert(*id);
    }
    for g in store.subformulas(f) {
        collect_nominals(store, g, seen, out);
    }
}

/// Rewrites every `@'i χ` into `[∀]('i → χ)`, innermost first.
fn elim_at(store: &mut Store, f: Fid, memo: &mut HashMap<Fid, Fid>) -> Fid {
    if let Some(&g) = memo.get(&f) {
        return g;
    }
    let out = match store.node(f).clone() {
        Node::Bot | Node::Atom(_) | Node::Nom(_) => f,
        Node::At(i, g) => {
            let g = elim_at(store, g, memo);
            let name = store.name(i).to_string();
            let nom = store.nom(&name);
            let imp = store.implies(nom, g);
            store.univ(imp)
        }
        Node::Neg(g) => {
            let g = elim_at(store, g, memo);
            store.neg(g)
        }
        Node::And(a, b) => {
            let a = elim_at(store, a, memo);
            let b = elim_at(store, b, memo);
            store.and(a, b)
        }
        Node::Dia(g) => {
            let g = elim_at(store, g, memo);
            store.dia(g)
        }
        Node::Univ(g) => {
            let g = elim_at(store, g, memo);
            store.univ(g)
        }
        Node::Count { terms, rel, bound } => {
            let terms = terms
                .into_iter()
                .map(|(c, a)| (c, elim_at(store, a, memo)))
                .collect();
            store.count(terms, rel, bound)
        }
        Node::Wpoly { poly, args } => {
            let args = args.into_iter().map(|a| elim_at(store, a, memo)).collect();
            store.wpoly(poly, args)
        }
    };
    memo.insert(f, out);
    out
}

/// Distinct `[∀]`-subformulas of `f` in depth-first preorder, recursing
/// into the bodies so nested occurrences are enumerated too.
fn collect_univs(store: &Store, f: Fid, seen: &mut BTreeSet<Fid>, out: &mut Vec<Fid>) {
    if !seen.insert(f) {
        return;
    }
    if matches!(store.node(f), Node::Univ(_)) {
        out.push(f);
    }
    for g in store.subformulas(f) {
        collect_univs(store, g, seen, out);
    }
}

/// `f[U]`: replaces each outermost `[∀]`-subformula of `f` by its guessed
/// truth value. Recursion stops at a replaced node, so occurrences nested
/// inside another `[∀]` are untouched in this pass (they are substituted
/// when that body itself is rewritten).
fn subst_univ(
    store: &mut Store,
    f: Fid,
    index: &HashMap<Fid, usize>,
    mask: u64,
    memo: &mut HashMap<Fid, Fid>,
) -> Fid {
    if let Some(&k) = index.get(&f) {
        return if mask >> k & 1 == 1 { store.top() } else { store.bot() };
    }
    if let Some(&g) = memo.get(&f) {
        return g;
    }
    let out = match store.node(f).clone() {
        Node::Bot | Node::Atom(_) | Node::Nom(_) => f,
        Node::Univ(_) => unreachable!("universal subformula missing from the guess index"),
        Node::At(i, g) => {
            let g = subst_univ(store, g, index, mask, memo);
            let name = store.name(i).to_string();
            store.at(&name, g)
        }
        Node::Neg(g) => {
            let g = subst_univ(store, g, index, mask, memo);
            store.neg(g)
        }
        Node::And(a, b) => {
            let a = subst_univ(store, a, index, mask, memo);
            let b = subst_univ(store, b, index, mask, memo);
            store.and(a, b)
        }
        Node::Dia(g) => {
            let g = subst_univ(store, g, index, mask, memo);
            store.dia(g)
        }
        Node::Count { terms, rel, bound } => {
            let terms = terms
                .into_iter()
                .map(|(c, a)| (c, subst_univ(store, a, index, mask, memo)))
                .collect();
            store.count(terms, rel, bound)
        }
        Node::Wpoly { poly, args } => {
            let args = args
                .into_iter()
                .map(|a| subst_univ(store, a, index, mask, memo))
                .collect();
            store.wpoly(poly, args)
        }
    };
    memo.insert(f, out);
    out
}

/// Expands the universal modality away: `φ` is satisfiable (in some state
/// of a model of the instance's global assumption) iff some returned
/// instance is. Guesses are emitted with larger sets of true bodies
/// first, i.e. masks descending. In the hybrid variant each guessed-false
/// body is refuted at a fresh pinned nominal inside `assumption`; in the
/// modal variant the refutations are returned as `side_goals`, each to be
/// checked separately against the same `assumption`.
pub fn reduce_universal(store: &mut Store, phi: Fid, hybrid: bool) -> Result<Vec<Reduced>> {
    let mut seen = BTreeSet::new();
    let mut univs = Vec::new();
    collect_univs(store, phi, &mut seen, &mut univs);
    let n = univs.len();
    if n > MAX_UNIVERSALS {
        return Err(Error::Resource(format!(
            "{n} distinct universal subformulas would need 2^{n} reduction instances"
        )));
    }
    let index: HashMap<Fid, usize> = univs.iter().enumerate().map(|(k, &u)| (u, k)).collect();
    let bodies: Vec<Fid> = univs
        .iter()
        .map(|&u| match store.node(u) {
            Node::Univ(g) => *g,
            _ => unreachable!("collect_univs returned a non-universal"),
        })
        .collect();
    let mut out = Vec::with_capacity(1usize << n);
    for mask in (0..(1u64 << n)).rev() {
        let mut memo = HashMap::new();
        let goal = subst_univ(store, phi, &index, mask, &mut memo);
        let mut conj = Vec::new();
        let mut side_goals = Vec::new();
        for (k, &body) in bodies.iter().enumerate() {
            let body = subst_univ(store, body, &index, mask, &mut memo);
            if mask >> k & 1 == 1 {
                conj.push(body);
            } else {
                let refuted = store.neg(body);
                if hybrid {
                    let pin = store.fresh_nom();
                    conj.push(store.implies(pin, refuted));
                } else {
                    side_goals.push(refuted);
                }
            }
        }
        let assumption = store.big_and(&conj);
        out.push(Reduced { assumption, goal, side_goals });
    }
    Ok(out)
}

/// `β(m) = t` must agree with every earlier choice: a chosen type
/// contains a nominal exactly when it is that nominal's own type.
fn consistent(types: &[Sequent], nom_idxs: &[usize], beta: &[usize], t: usize) -> bool {
    let m = beta.len();
    beta.iter().enumerate().all(|(j, &tj)| {
        let same = tj == t;
        types[tj].contains(nom_idxs[m]) == same && types[t].contains(nom_idxs[j]) == same
    })
}

/// Tests one complete assignment: seeds the elimination fixpoint with the
/// `β`-image plus every nominal-free type and accepts iff the whole image
/// survives. On acceptance the witness model is extracted with the
/// nominals denoting their assigned states.
#[allow(clippy::too_many_arguments)]
fn try_assignment(
    store: &Store,
    cl: &Closure,
    opts: &Options,
    types: &[Sequent],
    nom_idxs: &[usize],
    beta: &[usize],
    cache: &mut StepCache,
    stats: &mut Stats,
    saw_unknown: &mut bool,
) -> Result<Option<Model>> {
    let mut init = Bitset::new(types.len());
    for &t in beta {
        init.insert(t);
    }
    for (t, ty) in types.iter().enumerate() {
        if nom_idxs.iter().all(|&ni| !ty.contains(ni)) {
            init.insert(t);
        }
    }
    let fix = nu_elim(store, cl, opts.logic, opts.poly_budget, types, init, cache);
    let (survivors, witnesses, rounds, calls) = match fix {
        Ok(x) => x,
        Err(Error::Incomplete(_)) => {
            *saw_unknown = true;
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    stats.iterations += rounds;
    stats.solver_calls += calls;
    if !beta.iter().all(|&t| survivors.contains(t)) {
        return Ok(None);
    }
    let mut assignment = BTreeMap::new();
    for (m, &ni) in nom_idxs.iter().enumerate() {
        match store.node(cl.items[ni]) {
            Node::Nom(name) => assignment.insert(*name, beta[m]),
            _ => return Err(Error::Internal("non-nominal in the nominal index list".into())),
        };
    }
    let model = extract_model(store, cl, opts.logic, types, &survivors, &witnesses, &assignment)?;
    Ok(Some(model))
}

/// Depth-first enumeration of consistent assignments, one nominal at a
/// time. Every candidate consideration counts against the budget.
#[allow(clippy::too_many_arguments)]
fn enumerate(
    store: &Store,
    cl: &Closure,
    opts: &Options,
    types: &[Sequent],
    nom_idxs: &[usize],
    cands: &[Vec<usize>],
    beta: &mut Vec<usize>,
    budget: &mut u64,
    cache: &mut StepCache,
    stats: &mut Stats,
    saw_unknown: &mut bool,
) -> Result<Option<Model>> {
    let m = beta.len();
    if m == nom_idxs.len() {
        return try_assignment(store, cl, opts, types, nom_idxs, beta, cache, stats, saw_unknown);
    }
    for &t in &cands[m] {
        if *budget == 0 {
            return Err(Error::Resource(
                "nominal assignment enumeration exceeded the configured cap".into(),
            ));
        }
        *budget -= 1;
        stats.assignments_tried += 1;
        if !consistent(types, nom_idxs, beta, t) {
            continue;
        }
        beta.push(t);
        let found = enumerate(
            store, cl, opts, types, nom_idxs, cands, beta, budget, cache, stats, saw_unknown,
        )?;
        if found.is_some() {
            return Ok(found);
        }
        beta.pop();
    }
    Ok(None)
}

/// Decides global satisfiability of one reduced instance (the instance
/// formula is both the assumption and the goal). `Ok(None)` means refuted
/// or, when `saw_unknown` was set, undetermined.
fn solve_instance(
    store: &mut Store,
    chi: Fid,
    opts: &Options,
    budget: &mut u64,
    stats: &mut Stats,
    saw_unknown: &mut bool,
) -> Result<Option<Model>> {
    let cl = Closure::build(store, chi, chi)?;
    let types = all_types(store, &cl);
    stats.types += types.len() as u64;
    let nom_idxs = cl.nominals(store);
    let cands: Vec<Vec<usize>> = nom_idxs
        .iter()
        .map(|&ni| (0..types.len()).filter(|&t| types[t].contains(ni)).collect())
        .collect();
    let mut beta = Vec::with_capacity(nom_idxs.len());
    let mut cache = StepCache::default();
    let found = enumerate(
        store,
        &cl,
        opts,
        &types,
        &nom_idxs,
        &cands,
        &mut beta,
        budget,
        &mut cache,
        stats,
        saw_unknown,
    )?;
    stats.memo_hits += cache.hits;
    Ok(found)
}

/// Drops the reserved pin and goal nominals from a model's assignment;
/// user-facing models should only name user nominals.
fn strip_reserved(store: &Store, mut model: Model) -> Model {
    let keep = |id: &u32| !store.name(*id).starts_with('#');
    match &mut model {
        Model::Multi(m) => m.nominal_assignment.retain(|id, _| keep(id)),
        Model::Prob(m) => m.nominal_assignment.retain(|id, _| keep(id)),
    }
    model
}

/// Decides ψ-satisfiability of φ0 with nominals, `@` and the universal
/// modality admitted in both formulas. Instances are solved by type
/// elimination regardless of the configured algorithm. On SAT the model
/// is always extracted and certified against the original inputs; it is
/// returned only when requested. An `Incomplete` error means some
/// instance was undetermined and none was accepted.
pub fn decide_hybrid(store: &mut Store, psi: Fid, phi0: Fid, opts: &Options) -> Result<Outcome> {
    let mut stats = Stats::default();

    // Kripke-faithful reading: nominals denote singleton states.
    let mut psi_k = psi;
    if opts.kripke {
        if opts.logic != Logic::Presburger {
            return Err(Error::KindMismatch(
                "the Kripke-faithful nominal reading needs graded counting; \
                 use the Presburger logic"
                    .into(),
            ));
        }
        let mut seen = BTreeSet::new();
        let mut noms = BTreeSet::new();
        collect_nominals(store, psi, &mut seen, &mut noms);
        collect_nominals(store, phi0, &mut seen, &mut noms);
        for id in noms {
            let name = store.name(id).to_string();
            let nom = store.nom(&name);
            let over = store.count(vec![(BigInt::from(1), nom)], IntRel::Gt, BigInt::from(1));
            let at_most_once = store.neg(over);
            psi_k = store.and(psi_k, at_most_once);
        }
    }

    // `@`-elimination, then fold the assumption into the goal.
    let mut memo = HashMap::new();
    let psi_e = elim_at(store, psi_k, &mut memo);
    let phi0_e = elim_at(store, phi0, &mut memo);
    let global = store.univ(psi_e);
    let phi = store.and(phi0_e, global);

    let instances = reduce_universal(store, phi, true)?;
    let mut budget = opts.assignment_cap;
    let mut saw_unknown = false;
    for inst in &instances {
        stats.instances += 1;
        let istar = store.fresh_nom();
        let fold = store.implies(istar, inst.goal);
        let chi = store.and(inst.assumption, fold);
        if let Some(model) =
            solve_instance(store, chi, opts, &mut budget, &mut stats, &mut saw_unknown)?
        {
            certify_model(store, &model, psi_k, phi0)?;
            let model = strip_reserved(store, model);
            return Ok(Outcome {
                verdict: Verdict::Sat,
                model: opts.want_model.then_some(model),
                stats,
            });
        }
    }
    if saw_unknown {
        return Err(Error::Incomplete(
            "some reduction instance was undetermined by the one-step backend".into(),
        ));
    }
    Ok(Outcome { verdict: Verdict::Unsat, model: None, stats })
}
