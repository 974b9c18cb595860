//! Shared sequent-graph machinery for the on-the-fly decision procedures:
//! sequent interning, propositional rule applications, lazy successor
//! generation for states, and a memoizing one-step oracle.
//!
//! Sequents are read conjunctively. A *state* contains only modal
//! literals; everything else is saturated by the propositional rules
//! below. Children of a state are the candidate successor sequents: the
//! global assumption plus one polarity pick per distinct argument formula
//! of the state's modal literals.

use std::collections::HashMap;

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::formula::{Closure, Node, Sequent, Store};
use crate::onestep;
use crate::{Logic, Options, Stats, Verdict};

/// Interning arena for sequents; the id is the insertion index, so ids
/// are stable and enumeration order is generation order.
#[derive(Default)]
pub struct Arena {
    seqs: Vec<Sequent>,
    index: HashMap<Sequent, usize>,
}

impl Arena {
    pub fn new() -> Arena {
        Arena::default()
    }

    pub fn len(&self) -> usize {
        self.seqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seqs.is_empty()
    }

    /// Returns the id and whether the sequent was newly added.
    pub fn intern(&mut self, s: Sequent) -> (usize, bool) {
        if let Some(&id) = self.index.get(&s) {
            return (id, false);
        }
        let id = self.seqs.len();
        self.index.insert(s.clone(), id);
        self.seqs.push(s);
        (id, true)
    }

    pub fn get(&self, id: usize) -> &Sequent {
        &self.seqs[id]
    }

    pub fn lookup(&self, s: &Sequent) -> Option<usize> {
        self.index.get(s).copied()
    }
}

/// One propositional rule application: the principal member and the
/// conclusions it rewrites to. A sequent is satisfiable iff some
/// conclusion of some application is; it is refutable once every
/// conclusion of a single application is (zero conclusions = clash).
#[derive(Clone, Debug)]
pub struct RuleApp<T> {
    /// Closure index of the principal member.
    pub pivot: usize,
    pub conclusions: Vec<T>,
}

/// All propositional rule applications on a sequent, one per applicable
/// member in ascending index order:
///
/// * `⊥`            clashes (no conclusions),
/// * `¬⊥`           is discharged,
/// * `φ₁ ∧ φ₂`      is split into both conjuncts,
/// * `¬(φ₁ ∧ φ₂)`   branches on `∼φ₁` / `∼φ₂`,
/// * `¬¬φ`          collapses to `φ`.
///
/// Modal literals and nominal literals have no propositional rules.
pub fn prop_rules(store: &Store, cl: &Closure, gamma: &Sequent) -> Vec<RuleApp<Sequent>> {
    let mut apps = Vec::new();
    for i in gamma.iter() {
        match store.node(cl.items[i]) {
            Node::Bot => apps.push(RuleApp { pivot: i, conclusions: vec![] }),
            Node::And(_, _) => {
                let mut c = gamma.clone();
                c.remove(i);
                c.insert(cl.sub_links[i][0]);
                c.insert(cl.sub_links[i][1]);
                apps.push(RuleApp { pivot: i, conclusions: vec![c] });
            }
            Node::Neg(_) => {
                let inner = cl.sub_links[i][0];
                match store.node(cl.items[inner]) {
                    Node::Bot => {
                        let mut c = gamma.clone();
                        c.remove(i);
                        apps.push(RuleApp { pivot: i, conclusions: vec![c] });
                    }
                    Node::Neg(_) => {
                        let mut c = gamma.clone();
                        c.remove(i);
                        c.insert(cl.sub_links[inner][0]);
                        apps.push(RuleApp { pivot: i, conclusions: vec![c] });
                    }
                    Node::And(_, _) => {
                        let conclusions = cl.sub_links[inner]
                            .iter()
                            .map(|&sub| {
                                let mut c = gamma.clone();
                                c.remove(i);
                                c.insert(cl.nneg_link[sub]);
                                c
                            })
                            .collect();
                        apps.push(RuleApp { pivot: i, conclusions });
                    }
                    _ => {}
                }
            }
            _ => {}
        }
    }
    apps
}

/// Lazy enumerator for the successor candidates of a state.
///
/// One polarity key per distinct argument formula (identified with its
/// normalized negation) of the state's modal literals, sorted ascending.
/// Candidate `k` contains the assumption plus, for each key `j`, the key
/// itself or its negation partner according to bit `j` of `k`; distinct
/// indices give distinct sequents.
pub struct ChildGen {
    keys: Vec<usize>,
    total: u128,
    next: u128,
    /// Arena ids of the candidates generated so far, in enumeration order.
    pub materialized: Vec<usize>,
}

impl ChildGen {
    pub fn new(store: &Store, cl: &Closure, gamma: &Sequent) -> Result<ChildGen> {
        debug_assert!(cl.is_state(store, gamma), "child generation needs a state");
        let mut keys: Vec<usize> = Vec::new();
        for i in gamma.iter() {
            let (_, base) = cl.literal(store, i);
            for arg in store.modal_args(cl.items[base]) {
                let cidx = cl.index_of[&arg];
                keys.push(cidx.min(cl.nneg_link[cidx]));
            }
        }
        keys.sort_unstable();
        keys.dedup();
        if keys.len() > 120 {
            return Err(Error::Resource(format!(
                "state has {} distinct successor argument formulas",
                keys.len()
            )));
        }
        let total = 1u128 << keys.len();
        Ok(ChildGen { keys, total, next: 0, materialized: Vec::new() })
    }

    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn fully_materialized(&self) -> bool {
        self.next == self.total
    }

    /// Generates up to `count` further candidates, interning each.
    /// Returns the arena ids added to `materialized` by this call.
    pub fn materialize(
        &mut self,
        cl: &Closure,
        arena: &mut Arena,
        count: usize,
        cap: usize,
    ) -> Result<Vec<usize>> {
        let mut added = Vec::new();
        for _ in 0..count {
            if self.next == self.total {
                break;
            }
            if self.materialized.len() >= cap {
                return Err(Error::Resource(format!(
                    "successor candidate cap {cap} exceeded"
                )));
            }
            let mut child = Bitset::new(cl.len());
            child.insert(cl.psi);
            for (j, &key) in self.keys.iter().enumerate() {
                if (self.next >> j) & 1 == 1 {
                    child.insert(cl.nneg_link[key]);
                } else {
                    child.insert(key);
                }
            }
            let (id, _) = arena.intern(child);
            self.materialized.push(id);
            added.push(id);
            self.next += 1;
        }
        Ok(added)
    }
}

/// Classification of an arena node, computed on first touch.
pub enum NodeKind {
    State(ChildGen),
    NonState(Vec<RuleApp<usize>>),
}

/// Shared engine context: the arena, per-node classification, and a
/// memoized one-step oracle for states.
pub struct Ctx<'a> {
    pub store: &'a Store,
    pub cl: &'a Closure,
    pub logic: Logic,
    pub poly_budget: u32,
    pub child_cap: usize,
    pub arena: Arena,
    pub kind: Vec<Option<NodeKind>>,
    memo: HashMap<(usize, Vec<usize>), bool>,
    pub stats: Stats,
}

impl<'a> Ctx<'a> {
    pub fn new(store: &'a Store, cl: &'a Closure, opts: &Options) -> Ctx<'a> {
        Ctx {
            store,
            cl,
            logic: opts.logic,
            poly_budget: opts.poly_budget,
            child_cap: opts.child_cap,
            arena: Arena::new(),
            kind: Vec::new(),
            memo: HashMap::new(),
            stats: Stats::default(),
        }
    }

    /// Ensures `kind[id]` is computed, interning rule conclusions of a
    /// non-state as a side effect.
    pub fn ensure_kind(&mut self, id: usize) -> Result<()> {
        if self.kind.len() <= id {
            self.kind.resize_with(id + 1, || None);
        }
        if self.kind[id].is_some() {
            return Ok(());
        }
        let gamma = self.arena.get(id).clone();
        let k = if self.cl.is_state(self.store, &gamma) {
            NodeKind::State(ChildGen::new(self.store, self.cl, &gamma)?)
        } else {
            let apps = prop_rules(self.store, self.cl, &gamma)
                .into_iter()
                .map(|app| RuleApp {
                    pivot: app.pivot,
                    conclusions: app
                        .conclusions
                        .into_iter()
                        .map(|c| self.arena.intern(c).0)
                        .collect(),
                })
                .collect();
            NodeKind::NonState(apps)
        };
        if self.kind.len() <= self.arena.len() {
            self.kind.resize_with(self.arena.len(), || None);
        }
        self.kind[id] = Some(k);
        Ok(())
    }

    /// One-step satisfiability of state `id` against a child set, given
    /// by arena ids (order and duplicates are irrelevant). An unknown
    /// from the solver aborts the whole run rather than defaulting.
    pub fn one_step_state(&mut self, id: usize, children: &[usize]) -> Result<bool> {
        let mut key: Vec<usize> = children.to_vec();
        key.sort_unstable();
        key.dedup();
        if let Some(&b) = self.memo.get(&(id, key.clone())) {
            self.stats.memo_hits += 1;
            return Ok(b);
        }
        let seqs: Vec<Sequent> = key.iter().map(|&c| self.arena.get(c).clone()).collect();
        let pair = onestep::pair_for_state(self.store, self.cl, self.arena.get(id), &seqs)?;
        self.stats.solver_calls += 1;
        let res = onestep::solve(self.logic, &pair, self.poly_budget)?;
        let b = match res.verdict {
            Verdict::Sat => true,
            Verdict::Unsat => false,
            Verdict::Unknown => {
                return Err(Error::Incomplete(format!(
                    "one-step solver gave up on state {}",
                    render_sequent(self.store, self.cl, self.arena.get(id))
                )))
            }
        };
        self.memo.insert((id, key), b);
        Ok(b)
    }
}

/// The core engines handle nominal-free sequents only; nominal reasoning
/// goes through the hybrid pipeline.
pub fn reject_nominals(store: &Store, cl: &Closure) -> Result<()> {
    if cl.nominals(store).is_empty() {
        Ok(())
    } else {
        Err(Error::KindMismatch(
            "nominals require the hybrid pipeline (enable hybrid mode)".into(),
        ))
    }
}

/// Renders a sequent as a comma-separated set, in closure index order.
pub fn render_sequent(store: &Store, cl: &Closure, seq: &Sequent) -> String {
    let body: Vec<String> =
        seq.iter().map(|i| crate::render::render(store, cl.items[i])).collect();
    format!("{{{}}}", body.join(", "))
}
