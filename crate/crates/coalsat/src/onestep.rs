//! One-step pairs: the interface between the satisfiability algorithms and
//! the per-logic one-step solvers.
//!
//! A one-step pair is a clean modal conjunctive clause over fresh variables
//! together with an explicit list of admissible valuations (the lax DNF
//! representation). The algorithms build pairs from types or states; the
//! instance solvers decide them and return weighted-valuation witnesses,
//! which [`check_witness`] re-verifies against the lifting semantics.

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::formula::{Closure, IntRel, Node, Sequent, Store};
use crate::poly::Poly;
use crate::{Logic, Verdict};
use num::integer::Integer;
use num::{BigInt, BigRational, One, Signed, Zero};
use std::collections::BTreeMap;

/// A fresh one-step variable, recording the sign of its source modal
/// literal and the closure index of the argument formula it stands for.
/// Type pairs key variables by modal atom (sign always positive); state
/// pairs key them by signed literal, which keeps clauses clean even when a
/// state contains both ♥ρ and ¬♥ρ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarInfo {
    pub sign: bool,
    pub arg_cidx: usize,
}

/// A clause literal over pair variables. Atoms are nullary, so they carry
/// their name instead of variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lit {
    Atom { sign: bool, name: u32 },
    Dia { sign: bool, var: usize },
    Count { sign: bool, terms: Vec<(BigInt, usize)>, rel: IntRel, bound: BigInt },
    Wpoly { sign: bool, poly: Poly, vars: Vec<usize> },
}

impl Lit {
    pub fn sign(&self) -> bool {
        match self {
            Lit::Atom { sign, .. }
            | Lit::Dia { sign, .. }
            | Lit::Count { sign, .. }
            | Lit::Wpoly { sign, .. } => *sign,
        }
    }
}

/// Total assignment of the pair's variables, in variable order.
pub type Valuation = Vec<bool>;

/// One-step model: weighted valuations, only positive weights stored.
pub type Witness = BTreeMap<Valuation, Weight>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Weight {
    Int(BigInt),
    Rat(BigRational),
}

#[derive(Clone, Debug)]
pub struct OneStepPair {
    pub vars: Vec<VarInfo>,
    pub clause: Vec<Lit>,
    /// One valuation per source sequent, in source order (no deduplication:
    /// witness extraction maps constraint rows back to sequents).
    pub constraint: Vec<Valuation>,
}

#[derive(Clone, Debug)]
pub struct OneStepResult {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

impl OneStepResult {
    pub fn sat(witness: Witness) -> Self {
        OneStepResult { verdict: Verdict::Sat, witness: Some(witness) }
    }

    pub fn unsat() -> Self {
        OneStepResult { verdict: Verdict::Unsat, witness: None }
    }

    pub fn unknown() -> Self {
        OneStepResult { verdict: Verdict::Unknown, witness: None }
    }
}

/// Builds the one-step pair of a type Γ against a set S of types.
///
/// One variable per argument position of each modal atom of Σ, in closure
/// index order; the clause has one literal per modal atom, signed by Γ's
/// membership. The constraint has one valuation per Δ ∈ S assigning each
/// variable the truth of "argument ∈ Δ", so S ⊆ S′ gives a pointwise
/// weaker constraint (monotonicity of the elimination functional).
pub fn pair_for_type(
    store: &Store,
    cl: &Closure,
    gamma: &Sequent,
    s: &[Sequent],
) -> OneStepPair {
    let mut vars: Vec<VarInfo> = Vec::new();
    let mut clause: Vec<Lit> = Vec::new();
    for ma in cl.modal_atoms(store) {
        let sign = gamma.contains(ma);
        match store.node(cl.items[ma]) {
            Node::Atom(name) => clause.push(Lit::Atom { sign, name: *name }),
            Node::Dia(g) => {
                let var = vars.len();
                vars.push(VarInfo { sign: true, arg_cidx: cl.index_of[g] });
                clause.push(Lit::Dia { sign, var });
            }
            Node::Count { terms, rel, bound } => {
                let mut tvars = Vec::with_capacity(terms.len());
                for (c, a) in terms {
                    let var = vars.len();
                    vars.push(VarInfo { sign: true, arg_cidx: cl.index_of[a] });
                    tvars.push((c.clone(), var));
                }
                clause.push(Lit::Count { sign, terms: tvars, rel: rel.clone(), bound: bound.clone() });
            }
            Node::Wpoly { poly, args } => {
                let mut pvars = Vec::with_capacity(args.len());
                for a in args {
                    let var = vars.len();
                    vars.push(VarInfo { sign: true, arg_cidx: cl.index_of[a] });
                    pvars.push(var);
                }
                clause.push(Lit::Wpoly { sign, poly: poly.clone(), vars: pvars });
            }
            _ => unreachable!("modal_atoms returns only modal atoms"),
        }
    }
    let constraint = s
        .iter()
        .map(|delta| vars.iter().map(|v| delta.contains(v.arg_cidx)).collect())
        .collect();
    OneStepPair { vars, clause, constraint }
}

/// Builds the one-step pair of a state Γ (modal literals only) against a
/// subset of its children.
///
/// One variable per modal literal of Γ (sign in the key). Each child
/// valuation assigns a variable true iff the argument is in the child,
/// false iff its normalized negation is; a child containing neither is
/// malformed.
pub fn pair_for_state(
    store: &Store,
    cl: &Closure,
    gamma: &Sequent,
    children: &[Sequent],
) -> Result<OneStepPair> {
    let mut vars: Vec<VarInfo> = Vec::new();
    let mut clause: Vec<Lit> = Vec::new();
    for i in gamma.iter() {
        let (sign, base) = cl.literal(store, i);
        match store.node(cl.items[base]) {
            Node::Atom(name) => clause.push(Lit::Atom { sign, name: *name }),
            Node::Dia(g) => {
                let var = vars.len();
                vars.push(VarInfo { sign, arg_cidx: cl.index_of[g] });
                clause.push(Lit::Dia { sign, var });
            }
            Node::Count { terms, rel, bound } => {
                let mut tvars = Vec::with_capacity(terms.len());
                for (c, a) in terms {
                    let var = vars.len();
                    vars.push(VarInfo { sign, arg_cidx: cl.index_of[a] });
                    tvars.push((c.clone(), var));
                }
                clause.push(Lit::Count { sign, terms: tvars, rel: rel.clone(), bound: bound.clone() });
            }
            Node::Wpoly { poly, args } => {
                let mut pvars = Vec::with_capacity(args.len());
                for a in args {
                    let var = vars.len();
                    vars.push(VarInfo { sign, arg_cidx: cl.index_of[a] });
                    pvars.push(var);
                }
                clause.push(Lit::Wpoly { sign, poly: poly.clone(), vars: pvars });
            }
            _ => {
                return Err(Error::MalformedChild(format!(
                    "sequent member {} is not a modal literal",
                    crate::render::render(store, cl.items[i])
                )))
            }
        }
    }
    let mut constraint = Vec::with_capacity(children.len());
    for delta in children {
        let mut val = Vec::with_capacity(vars.len());
        for v in &vars {
            let rho = v.arg_cidx;
            let nrho = cl.nneg_link[rho];
            if delta.contains(rho) {
                val.push(true);
            } else if delta.contains(nrho) {
                val.push(false);
            } else {
                return Err(Error::MalformedChild(format!(
                    "child decides neither {} nor its negation",
                    crate::render::render(store, cl.items[rho])
                )));
            }
        }
        constraint.push(val);
    }
    Ok(OneStepPair { vars, clause, constraint })
}

/// Re-verifies a SAT witness against the pair under the lifting semantics
/// of the given logic. Returns false on any violation: support outside the
/// constraint, a non-total or wrongly-typed valuation, non-positive
/// weights, probabilistic mass above 1, or a falsified clause literal.
pub fn check_witness(logic: Logic, pair: &OneStepPair, witness: &Witness) -> bool {
    for (val, weight) in witness {
        if val.len() != pair.vars.len() {
            return false;
        }
        if !pair.constraint.iter().any(|row| row == val) {
            return false;
        }
        match (logic, weight) {
            (Logic::K, Weight::Int(w)) | (Logic::Presburger, Weight::Int(w)) => {
                if !w.is_positive() {
                    return false;
                }
            }
            (Logic::Prob, Weight::Rat(w)) => {
                if !w.is_positive() {
                    return false;
                }
            }
            _ => return false,
        }
    }
    if logic == Logic::Prob {
        let mass: BigRational = witness
            .values()
            .map(|w| match w {
                Weight::Rat(r) => r.clone(),
                Weight::Int(_) => unreachable!("weight kinds checked above"),
            })
            .sum();
        if mass > BigRational::one() {
            return false;
        }
    }

    // Atom literals: the one-step model's propositional part is the set of
    // positively asserted atoms, so the literal set must be consistent.
    let positive_atoms: Vec<u32> = pair
        .clause
        .iter()
        .filter_map(|l| match l {
            Lit::Atom { sign: true, name } => Some(*name),
            _ => None,
        })
        .collect();

    // Per-variable masses.
    let int_mass = |var: usize| -> BigInt {
        witness
            .iter()
            .filter(|(val, _)| val[var])
            .map(|(_, w)| match w {
                Weight::Int(n) => n.clone(),
                Weight::Rat(_) => BigInt::zero(),
            })
            .sum()
    };
    let rat_mass = |var: usize| -> BigRational {
        witness
            .iter()
            .filter(|(val, _)| val[var])
            .map(|(_, w)| match w {
                Weight::Rat(r) => r.clone(),
                Weight::Int(_) => BigRational::zero(),
            })
            .sum()
    };

    for lit in &pair.clause {
        let holds = match lit {
            Lit::Atom { sign, name } => {
                // Positive atom literals hold by construction; a negative
                // literal fails iff the same atom is also asserted.
                *sign || !positive_atoms.contains(name)
            }
            Lit::Dia { sign, var } => {
                let positive = match logic {
                    Logic::Prob => rat_mass(*var).is_positive(),
                    _ => int_mass(*var).is_positive(),
                };
                positive == *sign
            }
            Lit::Count { sign, terms, rel, bound } => {
                let sum: BigInt = terms.iter().map(|(c, v)| c * int_mass(*v)).sum();
                let cmp = match rel {
                    IntRel::Lt => sum < *bound,
                    IntRel::Gt => sum > *bound,
                    IntRel::Eq => sum == *bound,
                    IntRel::Mod(k) => (&sum - bound).mod_floor(k).is_zero(),
                };
                cmp == *sign
            }
            Lit::Wpoly { sign, poly, vars } => {
                let point: Vec<BigRational> = vars.iter().map(|&v| rat_mass(v)).collect();
                (poly.eval(&point) >= BigRational::zero()) == *sign
            }
        };
        if !holds {
            return false;
        }
    }
    true
}

/// Builds the sequent-membership valuation of a sequent against a pair's
/// variables: the row that `pair_for_type` would produce for it.
pub fn valuation_of(pair: &OneStepPair, delta: &Bitset) -> Valuation {
    pair.vars.iter().map(|v| delta.contains(v.arg_cidx)).collect()
}

/// Solves a one-step pair with the instance solver of the given logic.
/// Every SAT answer is re-verified against the pair semantics before it is
/// returned; a failing witness is a solver bug and surfaces as an internal
/// error. The budget only affects the probabilistic backend.
pub fn solve(logic: Logic, pair: &OneStepPair, budget: u32) -> Result<OneStepResult> {
    let res = match logic {
        Logic::K => crate::logic_k::solve_k(pair),
        Logic::Presburger => crate::logic_presburger::solve_presburger(pair),
        Logic::Prob => crate::logic_prob::solve_prob(pair, budget),
    };
    if res.verdict == Verdict::Sat {
        let witness = res
            .witness
            .as_ref()
            .ok_or_else(|| Error::Internal("SAT one-step result without witness".into()))?;
        if !check_witness(logic, pair, witness) {
            return Err(Error::Internal("one-step witness failed verification".into()));
        }
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The relational three-diamond pair: variables in closure order,
    /// clause signed by Γ, one constraint row per element of S.
    #[test]
    fn type_pair_structure() {
        let mut st = Store::new();
        let a = st.atom("a");
        let b = st.atom("b");
        let c = st.atom("c");
        let da = st.dia(a);
        let db = st.dia(b);
        let dc = st.dia(c);
        let dab = st.and(da, db);
        let phi = st.and(dab, dc);
        let cl = Closure::build(&mut st, phi, phi).unwrap();
        let ia = cl.index_of[&a];
        let ib = cl.index_of[&b];
        let ic = cl.index_of[&c];
        let mut gamma = Bitset::new(cl.len());
        gamma.insert(cl.nneg_link[cl.index_of[&da]]);
        gamma.insert(cl.nneg_link[cl.index_of[&db]]);
        gamma.insert(cl.index_of[&dc]);
        // S: all subsets of {a,b,c} satisfying c → a∨b, as sequents.
        let mut s: Vec<Sequent> = Vec::new();
        for bits in 0u32..8 {
            let (ha, hb, hc) = (bits & 1 != 0, bits & 2 != 0, bits & 4 != 0);
            if hc && !(ha || hb) {
                continue;
            }
            let mut d = Bitset::new(cl.len());
            if ha {
                d.insert(ia);
            }
            if hb {
                d.insert(ib);
            }
            if hc {
                d.insert(ic);
            }
            s.push(d);
        }
        let pair = pair_for_type(&st, &cl, &gamma, &s);
        // Only the diamonds carry variables; the atoms a,b,c are nullary
        // modal atoms and contribute sign-only literals.
        assert_eq!(pair.vars.len(), 3);
        assert_eq!(pair.constraint.len(), 7);
        assert_eq!(pair.clause.len(), 6);
        let dia_signs: Vec<bool> = pair
            .clause
            .iter()
            .filter_map(|l| match l {
                Lit::Dia { sign, .. } => Some(*sign),
                _ => None,
            })
            .collect();
        assert_eq!(dia_signs, vec![false, false, true]);
        // Every constraint row satisfies c → a∨b.
        for row in &pair.constraint {
            assert!(!row[2] || row[0] || row[1]);
        }
        // Empty S gives an empty constraint.
        let empty = pair_for_type(&st, &cl, &gamma, &[]);
        assert!(empty.constraint.is_empty());
    }

    /// A closure without modal atoms yields an empty clause.
    #[test]
    fn no_modal_atoms() {
        let mut st = Store::new();
        let top = st.top();
        let cl = Closure::build(&mut st, top, top).unwrap();
        let gamma = Bitset::from_iter(cl.len(), [cl.psi]);
        let pair = pair_for_type(&st, &cl, &gamma, &[gamma.clone()]);
        assert!(pair.clause.is_empty());
        assert!(pair.vars.is_empty());
        assert_eq!(pair.constraint.len(), 1);
    }

    /// Clashing state {◇p, ¬◇p}: two variables tied to p, clean clause.
    #[test]
    fn state_pair_clash_is_clean() {
        let mut st = Store::new();
        let p = st.atom("p");
        let dp = st.dia(p);
        let ndp = st.neg(dp);
        let both = st.and(dp, ndp);
        let cl = Closure::build(&mut st, both, both).unwrap();
        let gamma =
            Bitset::from_iter(cl.len(), [cl.index_of[&dp], cl.index_of[&ndp]]);
        let ip = cl.index_of[&p];
        let inp = cl.nneg_link[ip];
        let child_p = Bitset::from_iter(cl.len(), [ip]);
        let child_np = Bitset::from_iter(cl.len(), [inp]);
        let pair = pair_for_state(&st, &cl, &gamma, &[child_p.clone(), child_np]).unwrap();
        assert_eq!(pair.vars.len(), 2);
        assert_eq!(pair.clause.len(), 2);
        assert_eq!(pair.vars[0].arg_cidx, ip);
        assert_eq!(pair.vars[1].arg_cidx, ip);
        assert_ne!(pair.vars[0].sign, pair.vars[1].sign);
        assert_eq!(pair.constraint, vec![vec![true, true], vec![false, false]]);
        // A child deciding neither p nor ¬p is malformed.
        let empty_child = Bitset::new(cl.len());
        assert!(matches!(
            pair_for_state(&st, &cl, &gamma, &[child_p, empty_child]),
            Err(Error::MalformedChild(_))
        ));
    }

    fn count_pair() -> OneStepPair {
        OneStepPair {
            vars: vec![VarInfo { sign: true, arg_cidx: 0 }],
            clause: vec![Lit::Count {
                sign: true,
                terms: vec![(BigInt::one(), 0)],
                rel: IntRel::Gt,
                bound: BigInt::zero(),
            }],
            constraint: vec![vec![true], vec![false]],
        }
    }

    /// ♯(a)>0 accepts mass on a↦true and rejects mass on a↦false only.
    #[test]
    fn witness_check_presburger() {
        let pair = count_pair();
        let mut w = Witness::new();
        w.insert(vec![true], Weight::Int(BigInt::one()));
        assert!(check_witness(Logic::Presburger, &pair, &w));
        let mut w = Witness::new();
        w.insert(vec![false], Weight::Int(BigInt::one()));
        assert!(!check_witness(Logic::Presburger, &pair, &w));
        // Support outside the constraint is rejected even if the sums work.
        let narrow = OneStepPair { constraint: vec![vec![false]], ..count_pair() };
        let mut w = Witness::new();
        w.insert(vec![true], Weight::Int(BigInt::one()));
        assert!(!check_witness(Logic::Presburger, &narrow, &w));
    }

    /// Probabilistic pair 2w(a)<1 ∧ 2w(a)>0 accepts weight 1/4.
    #[test]
    fn witness_check_probabilistic() {
        let two_x = Poly::var(0).scale(&BigRational::from(BigInt::from(2)));
        let minus1 = Poly::constant(BigRational::from(BigInt::from(-1)));
        let pair = OneStepPair {
            vars: vec![VarInfo { sign: true, arg_cidx: 0 }],
            clause: vec![
                // ¬(2X − 1 ≥ 0) and ¬(−2X ≥ 0)
                Lit::Wpoly { sign: false, poly: two_x.add(&minus1), vars: vec![0] },
                Lit::Wpoly { sign: false, poly: two_x.neg(), vars: vec![0] },
            ],
            constraint: vec![vec![true], vec![false]],
        };
        let mut w = Witness::new();
        w.insert(vec![true], Weight::Rat(BigRational::new(BigInt::one(), BigInt::from(4))));
        assert!(check_witness(Logic::Prob, &pair, &w));
        // Weight 1/2 falsifies 2w(a)<1.
        let mut w = Witness::new();
        w.insert(vec![true], Weight::Rat(BigRational::new(BigInt::one(), BigInt::from(2))));
        assert!(!check_witness(Logic::Prob, &pair, &w));
        // Mass above 1 is rejected outright.
        let mut w = Witness::new();
        w.insert(vec![true], Weight::Rat(BigRational::new(BigInt::from(3), BigInt::from(4))));
        w.insert(vec![false], Weight::Rat(BigRational::new(BigInt::from(1), BigInt::from(2))));
        assert!(!check_witness(Logic::Prob, &pair, &w));
    }

    /// Atom literal consistency and diamond mass checks.
    #[test]
    fn witness_check_relational() {
        let pair = OneStepPair {
            vars: vec![VarInfo { sign: true, arg_cidx: 0 }],
            clause: vec![
                Lit::Atom { sign: true, name: 0 },
                Lit::Atom { sign: false, name: 0 },
                Lit::Dia { sign: true, var: 0 },
            ],
            constraint: vec![vec![true]],
        };
        let mut w = Witness::new();
        w.insert(vec![true], Weight::Int(BigInt::one()));
        assert!(!check_witness(Logic::K, &pair, &w));
        let consistent = OneStepPair {
            clause: vec![Lit::Atom { sign: true, name: 0 }, Lit::Dia { sign: true, var: 0 }],
            ..pair
        };
        assert!(check_witness(Logic::K, &consistent, &w));
        // Empty support fails a positive diamond.
        assert!(!check_witness(Logic::K, &consistent, &Witness::new()));
    }
}
