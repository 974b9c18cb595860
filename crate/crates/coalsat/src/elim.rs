//! Type elimination: enumerate every ψ-type of the closure, then repeatedly
//! discard types whose modal requirements are one-step unsatisfiable over
//! the current survivor set. The greatest fixpoint of that elimination
//! step carries exactly the satisfiable types, and its one-step witnesses
//! assemble into a concrete model.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num::{BigInt, BigRational, Zero};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::formula::{Closure, Node, Sequent, Store};
use crate::graph::{reject_nominals, render_sequent};
use crate::model::{certify_model, Model, Multigraph, SubdistModel};
use crate::onestep::{self, pair_for_type, valuation_of, Valuation, Weight, Witness};
use crate::{Logic, Options, Outcome, Stats, Verdict};

/// Memo for one-step verdicts, shared across elimination rounds and
/// across hybrid assignment retries. A one-step pair is determined, up
/// to row order and multiplicity, by the type's modal-literal signature
/// and the *set* of live argument valuations; feasibility and witnesses
/// (keyed by valuation) never depend on row multiplicity, so results
/// transfer between pairs with equal keys. Never reuse a cache across
/// closures, logics or budgets.
#[derive(Default)]
pub struct StepCache {
    map: HashMap<(Vec<bool>, BTreeSet<Valuation>), (Verdict, Option<Witness>)>,
    /// Results served from the map instead of the solver.
    pub hits: u64,
}

/// Sets index `i` to `v`; false means the assignment clashed.
fn set(a: &mut [Option<bool>], i: usize, v: bool, changed: &mut bool) -> bool {
    match a[i] {
        Some(x) => x == v,
        None => {
            a[i] = Some(v);
            *changed = true;
            true
        }
    }
}

/// Sweeps the propositional coherence constraints to a fixpoint; false
/// means the partial assignment admits no type.
fn propagate(store: &Store, cl: &Closure, a: &mut [Option<bool>]) -> bool {
    loop {
        let mut changed = false;
        for i in 0..cl.len() {
            match store.node(cl.items[i]) {
                Node::Bot => {
                    if !set(a, i, false, &mut changed) {
                        return false;
                    }
                }
                Node::Neg(_) => {
                    let j = cl.nneg_link[i];
                    match (a[i], a[j]) {
                        (Some(x), Some(y)) => {
                            if x == y {
                                return false;
                            }
                        }
                        (Some(x), None) => {
                            a[j] = Some(!x);
                            changed = true;
                        }
                        (None, Some(y)) => {
                            a[i] = Some(!y);
                            changed = true;
                        }
                        (None, None) => {}
                    }
                }
                Node::And(_, _) => {
                    let l = cl.sub_links[i][0];
                    let r = cl.sub_links[i][1];
                    let ok = match a[i] {
                        Some(true) => set(a, l, true, &mut changed) && set(a, r, true, &mut changed),
                        Some(false) => match (a[l], a[r]) {
                            (Some(true), Some(true)) => false,
                            (Some(true), None) => set(a, r, false, &mut changed),
                            (None, Some(true)) => set(a, l, false, &mut changed),
                            _ => true,
                        },
                        None => match (a[l], a[r]) {
                            (Some(true), Some(true)) => set(a, i, true, &mut changed),
                            (Some(false), _) | (_, Some(false)) => set(a, i, false, &mut changed),
                            _ => true,
                        },
                    };
                    if !ok {
                        return false;
                    }
                }
                _ => {}
            }
        }
        if !changed {
            return true;
        }
    }
}

fn search(store: &Store, cl: &Closure, mut a: Vec<Option<bool>>, out: &mut Vec<Sequent>) {
    if !propagate(store, cl, &mut a) {
        return;
    }
    match a.iter().position(|x| x.is_none()) {
        None => {
            let t = Bitset::from_iter(
                cl.len(),
                a.iter().enumerate().filter(|(_, x)| **x == Some(true)).map(|(i, _)| i),
            );
            debug_assert!(cl.is_type(store, &t), "enumerated a non-type");
            out.push(t);
        }
        Some(i) => {
            let mut b = a.clone();
            b[i] = Some(true);
            search(store, cl, b, out);
            a[i] = Some(false);
            search(store, cl, a, out);
        }
    }
}

/// Enumerates all ψ-types of the closure in a fixed deterministic order
/// (branching true-first on the lowest free index).
pub fn all_types(store: &Store, cl: &Closure) -> Vec<Sequent> {
    let mut a = vec![None; cl.len()];
    a[cl.psi] = Some(true);
    let mut out = Vec::new();
    search(store, cl, a, &mut out);
    out
}

/// One elimination round: keeps exactly the members of `cur` whose
/// one-step pair against the live types is satisfiable, recording each
/// witness. Exposed for the property tests.
pub fn elim_step(
    store: &Store,
    cl: &Closure,
    logic: Logic,
    poly_budget: u32,
    types: &[Sequent],
    cur: &Bitset,
    calls: &mut u64,
    cache: &mut StepCache,
) -> Result<(Bitset, HashMap<usize, Witness>)> {
    let live: Vec<Sequent> = cur.iter().map(|t| types[t].clone()).collect();
    let modal = cl.modal_atoms(store);
    let mut next = Bitset::new(types.len());
    let mut witnesses = HashMap::new();
    for t in cur.iter() {
        let pair = pair_for_type(store, cl, &types[t], &live);
        let sig: Vec<bool> = modal.iter().map(|&m| types[t].contains(m)).collect();
        let rows: BTreeSet<Valuation> = pair.constraint.iter().cloned().collect();
        let key = (sig, rows);
        let (verdict, witness) = if let Some((v, w)) = cache.map.get(&key) {
            cache.hits += 1;
            #[cfg(debug_assertions)]
            if let Some(w) = w {
                debug_assert!(
                    onestep::check_witness(logic, &pair, w),
                    "cached witness fails on a key-equivalent pair"
                );
            }
            (*v, w.clone())
        } else {
            *calls += 1;
            let res = onestep::solve(logic, &pair, poly_budget)?;
            cache.map.insert(key, (res.verdict, res.witness.clone()));
            (res.verdict, res.witness)
        };
        match verdict {
            Verdict::Sat => {
                next.insert(t);
                witnesses.insert(t, witness.expect("verified SAT carries a witness"));
            }
            Verdict::Unsat => {}
            Verdict::Unknown => {
                return Err(Error::Incomplete(format!(
                    "one-step solver gave up on type {}",
                    render_sequent(store, cl, &types[t])
                )))
            }
        }
    }
    Ok((next, witnesses))
}

/// Greatest fixpoint of the elimination step from `init`, with the
/// witnesses of the stabilizing round (so each witness's constraint rows
/// are the fixpoint itself). Returns (survivors, witnesses, rounds,
/// solver calls). Shared by the hybrid pipeline, which seeds `init` with
/// a nominal-compatible subset.
pub fn nu_elim(
    store: &Store,
    cl: &Closure,
    logic: Logic,
    poly_budget: u32,
    types: &[Sequent],
    init: Bitset,
    cache: &mut StepCache,
) -> Result<(Bitset, HashMap<usize, Witness>, u64, u64)> {
    let mut cur = init;
    let mut rounds = 0u64;
    let mut calls = 0u64;
    loop {
        let (next, witnesses) =
            elim_step(store, cl, logic, poly_budget, types, &cur, &mut calls, cache)?;
        rounds += 1;
        debug_assert!(next.is_subset(&cur));
        if next == cur {
            return Ok((cur, witnesses, rounds, calls));
        }
        cur = next;
    }
}

/// Assembles a concrete model from the surviving types and their
/// stabilized one-step witnesses. State `p` is the `p`-th survivor; each
/// witness valuation is resolved to the first survivor matching it, and
/// weights onto a common target accumulate. `nominal_assignment` maps
/// name ids to *type indices* (each one a survivor); core callers pass
/// an empty map.
pub fn extract_model(
    store: &Store,
    cl: &Closure,
    logic: Logic,
    types: &[Sequent],
    survivors: &Bitset,
    witnesses: &HashMap<usize, Witness>,
    nominal_assignment: &BTreeMap<u32, usize>,
) -> Result<Model> {
    let alive: Vec<usize> = survivors.iter().collect();
    let live: Vec<Sequent> = alive.iter().map(|&t| types[t].clone()).collect();
    let pos: HashMap<usize, usize> = alive.iter().enumerate().map(|(p, &t)| (t, p)).collect();

    let atom_valuation: Vec<BTreeSet<u32>> = live
        .iter()
        .map(|t| {
            (0..cl.len())
                .filter_map(|i| match store.node(cl.items[i]) {
                    Node::Atom(name) if t.contains(i) => Some(*name),
                    _ => None,
                })
                .collect()
        })
        .collect();

    let mut noms: BTreeMap<u32, usize> = BTreeMap::new();
    for (&name, &t) in nominal_assignment {
        let p = pos.get(&t).ok_or_else(|| {
            Error::Internal("nominal assigned to an eliminated type".into())
        })?;
        noms.insert(name, *p);
    }

    // One transition row per survivor, from its stabilized witness.
    let mut int_rows: Vec<Vec<(usize, BigInt)>> = Vec::with_capacity(alive.len());
    let mut rat_rows: Vec<Vec<(usize, BigRational)>> = Vec::with_capacity(alive.len());
    for &t in &alive {
        let w = witnesses
            .get(&t)
            .ok_or_else(|| Error::MissingWitness(format!("survivor type {t} has no witness")))?;
        let pair = pair_for_type(store, cl, &types[t], &live);
        let mut ints: BTreeMap<usize, BigInt> = BTreeMap::new();
        let mut rats: BTreeMap<usize, BigRational> = BTreeMap::new();
        for (val, weight) in w {
            let target = (0..live.len())
                .find(|&u| valuation_of(&pair, &live[u]) == *val)
                .ok_or_else(|| {
                    Error::Internal("witness valuation matches no surviving type".into())
                })?;
            match (logic, weight) {
                (Logic::K | Logic::Presburger, Weight::Int(m)) => {
                    *ints.entry(target).or_default() += m;
                }
                (Logic::Prob, Weight::Rat(r)) => {
                    *rats.entry(target).or_insert_with(BigRational::zero) += r;
                }
                _ => return Err(Error::Internal("witness weight kind mismatch".into())),
            }
        }
        int_rows.push(ints.into_iter().filter(|(_, m)| !m.is_zero()).collect());
        rat_rows.push(rats.into_iter().filter(|(_, r)| !r.is_zero()).collect());
    }

    let model = match logic {
        Logic::K | Logic::Presburger => Model::Multi(Multigraph {
            num_states: alive.len(),
            transitions: int_rows,
            atom_valuation,
            nominal_assignment: noms,
        }),
        Logic::Prob => Model::Prob(SubdistModel {
            num_states: alive.len(),
            weights: rat_rows,
            atom_valuation,
            nominal_assignment: noms,
        }),
    };

    // Truth lemma, checked in debug builds: each closure member holds in
    // the model exactly at the states whose type contains it.
    #[cfg(debug_assertions)]
    {
        for i in 0..cl.len() {
            if matches!(store.node(cl.items[i]), Node::Nom(n) if !model.nominal_assignment().contains_key(n))
            {
                continue;
            }
            let got = crate::model::model_check(store, &model, cl.items[i])?;
            let want = Bitset::from_iter(
                alive.len(),
                live.iter().enumerate().filter(|(_, t)| t.contains(i)).map(|(p, _)| p),
            );
            debug_assert_eq!(got, want, "truth lemma violated at closure index {i}");
        }
    }

    Ok(model)
}

/// Decides ψ-satisfiability of φ0 by full type elimination. On SAT a
/// witness model is always extracted and certified by the independent
/// model checker; it is returned only when requested.
pub fn decide_elim(store: &Store, cl: &Closure, opts: &Options) -> Result<Outcome> {
    reject_nominals(store, cl)?;
    let types = all_types(store, cl);
    let mut stats = Stats { types: types.len() as u64, ..Stats::default() };
    let init = Bitset::full(types.len());
    let mut cache = StepCache::default();
    let (survivors, witnesses, rounds, calls) =
        nu_elim(store, cl, opts.logic, opts.poly_budget, &types, init, &mut cache)?;
    stats.iterations = rounds;
    stats.solver_calls = calls;
    stats.memo_hits = cache.hits;
    if !survivors.iter().any(|t| types[t].contains(cl.phi0)) {
        return Ok(Outcome { verdict: Verdict::Unsat, model: None, stats });
    }
    let model = extract_model(
        store,
        cl,
        opts.logic,
        &types,
        &survivors,
        &witnesses,
        &BTreeMap::new(),
    )?;
    certify_model(store, &model, cl.items[cl.psi], cl.items[cl.phi0])?;
    Ok(Outcome {
        verdict: Verdict::Sat,
        model: opts.want_model.then_some(model),
        stats,
    })
}
