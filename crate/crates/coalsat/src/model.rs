//! Concrete coalgebra models and the model checker.
//!
//! Two model kinds: multigraphs (non-negative integer edge multiplicities,
//! interpreting K diamonds and Presburger atoms) and subdistribution models
//! (rational edge weights with per-state total mass ≤ 1, interpreting
//! probabilistic atoms). All arithmetic is exact.

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::formula::{Fid, IntRel, Node, Store};
use num::integer::Integer;
use num::{BigInt, BigRational, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Transition system with integer multiplicities.
#[derive(Clone, Debug)]
pub struct Multigraph {
    pub num_states: usize,
    /// Per state: (target, multiplicity) pairs with multiplicity > 0.
    pub transitions: Vec<Vec<(usize, BigInt)>>,
    /// Per state: set of atom name ids true there.
    pub atom_valuation: Vec<BTreeSet<u32>>,
    /// Nominal name id → the unique state it denotes.
    pub nominal_assignment: BTreeMap<u32, usize>,
}

/// Transition system with rational subdistributions.
#[derive(Clone, Debug)]
pub struct SubdistModel {
    pub num_states: usize,
    /// Per state: (target, weight) pairs with weight > 0; row sums ≤ 1.
    pub weights: Vec<Vec<(usize, BigRational)>>,
    pub atom_valuation: Vec<BTreeSet<u32>>,
    pub nominal_assignment: BTreeMap<u32, usize>,
}

#[derive(Clone, Debug)]
pub enum Model {
    Multi(Multigraph),
    Prob(SubdistModel),
}

impl Model {
    pub fn num_states(&self) -> usize {
        match self {
            Model::Multi(m) => m.num_states,
            Model::Prob(m) => m.num_states,
        }
    }

    pub fn atom_valuation(&self) -> &Vec<BTreeSet<u32>> {
        match self {
            Model::Multi(m) => &m.atom_valuation,
            Model::Prob(m) => &m.atom_valuation,
        }
    }

    pub fn nominal_assignment(&self) -> &BTreeMap<u32, usize> {
        match self {
            Model::Multi(m) => &m.nominal_assignment,
            Model::Prob(m) => &m.nominal_assignment,
        }
    }

    /// Structural sanity: targets in range, weights positive, probabilistic
    /// row sums ≤ 1, nominals assigned to existing states.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_states();
        match self {
            Model::Multi(m) => {
                for row in &m.transitions {
                    for (t, w) in row {
                        if *t >= n || !w.is_positive() {
                            return Err(Error::Internal("bad multigraph edge".into()));
                        }
                    }
                }
            }
            Model::Prob(m) => {
                for row in &m.weights {
                    let mut sum = BigRational::zero();
                    for (t, w) in row {
                        if *t >= n || !w.is_positive() {
                            return Err(Error::Internal("bad subdistribution edge".into()));
                        }
                        sum += w;
                    }
                    if sum > BigRational::from(BigInt::from(1)) {
                        return Err(Error::Internal("subdistribution row mass exceeds 1".into()));
                    }
                }
            }
        }
        for (_, s) in self.nominal_assignment() {
            if *s >= n {
                return Err(Error::Internal("nominal assigned to a missing state".into()));
            }
        }
        Ok(())
    }
}

/// Computes the extension ⟦φ⟧ ⊆ states. Fails on constructors that are
/// meaningless for the model kind, and on @/universal modality (those are
/// reduced before model checking).
pub fn model_check(store: &Store, model: &Model, root: Fid) -> Result<Bitset> {
    let mut memo: HashMap<Fid, Bitset> = HashMap::new();
    check(store, model, root, &mut memo)
}

fn check(store: &Store, model: &Model, f: Fid, memo: &mut HashMap<Fid, Bitset>) -> Result<Bitset> {
    if let Some(s) = memo.get(&f) {
        return Ok(s.clone());
    }
    let n = model.num_states();
    let out = match store.node(f).clone() {
        Node::Bot => Bitset::new(n),
        Node::Atom(a) => {
            Bitset::from_iter(n, (0..n).filter(|&s| model.atom_valuation()[s].contains(&a)))
        }
        Node::Nom(i) => match model.nominal_assignment().get(&i) {
            Some(&s) => Bitset::from_iter(n, [s]),
            None => {
                return Err(Error::KindMismatch(format!(
                    "nominal '{} has no denotation in the model",
                    store.name(i)
                )))
            }
        },
        Node::Neg(g) => {
            let inner = check(store, model, g, memo)?;
            Bitset::full(n).difference(&inner)
        }
        Node::And(a, b) => {
            let ea = check(store, model, a, memo)?;
            let eb = check(store, model, b, memo)?;
            ea.intersection(&eb)
        }
        Node::Dia(g) => {
            let m = match model {
                Model::Multi(m) => m,
                Model::Prob(_) => {
                    return Err(Error::KindMismatch(
                        "relational diamond against a probabilistic model".into(),
                    ))
                }
            };
            let inner = check(store, model, g, memo)?;
            Bitset::from_iter(
                n,
                (0..n).filter(|&s| m.transitions[s].iter().any(|(t, _)| inner.contains(*t))),
            )
        }
        Node::Count { terms, rel, bound } => {
            let m = match model {
                Model::Multi(m) => m,
                Model::Prob(_) => {
                    return Err(Error::KindMismatch(
                        "Presburger atom against a probabilistic model".into(),
                    ))
                }
            };
            let exts: Vec<Bitset> = terms
                .iter()
                .map(|(_, a)| check(store, model, *a, memo))
                .collect::<Result<_>>()?;
            let mut sat = Bitset::new(n);
            for s in 0..n {
                let mut sum = BigInt::zero();
                for ((c, _), ext) in terms.iter().zip(&exts) {
                    let mass: BigInt = m
                        .transitions[s]
                        .iter()
                        .filter(|(t, _)| ext.contains(*t))
                        .map(|(_, w)| w.clone())
                        .sum();
                    sum += c * mass;
                }
                let holds = match &rel {
                    IntRel::Lt => sum < bound,
                    IntRel::Gt => sum > bound,
                    IntRel::Eq => sum == bound,
                    IntRel::Mod(k) => (&sum - &bound).mod_floor(k).is_zero(),
                };
                if holds {
                    sat.insert(s);
                }
            }
            sat
        }
        Node::Wpoly { poly, args } => {
            let m = match model {
                Model::Prob(m) => m,
                Model::Multi(_) => {
                    return Err(Error::KindMismatch(
                        "probabilistic atom against a multigraph".into(),
                    ))
                }
            };
            let exts: Vec<Bitset> = args
                .iter()
                .map(|a| check(store, model, *a, memo))
                .collect::<Result<_>>()?;
            let mut sat = Bitset::new(n);
            for s in 0..n {
                let point: Vec<BigRational> = exts
                    .iter()
                    .map(|ext| {
                        m.weights[s]
                            .iter()
                            .filter(|(t, _)| ext.contains(*t))
                            .map(|(_, w)| w.clone())
                            .sum()
                    })
                    .collect();
                if poly.eval(&point) >= BigRational::zero() {
                    sat.insert(s);
                }
            }
            sat
        }
        Node::At(_, _) | Node::Univ(_) => {
            return Err(Error::KindMismatch(
                "satisfaction operators and the universal modality must be reduced before model checking"
                    .into(),
            ))
        }
    };
    memo.insert(f, out.clone());
    Ok(out)
}

/// Extended extension computation that also interprets @ and the universal
/// modality (all-or-nothing semantics). Used to certify hybrid outcomes
/// end-to-end against the original, unreduced input.
pub(crate) fn model_check_extended(store: &Store, model: &Model, root: Fid) -> Result<Bitset> {
    let n = model.num_states();
    match store.node(root).clone() {
        Node::Univ(g) => {
            let inner = model_check_extended(store, model, g)?;
            if inner.count() == n {
                Ok(Bitset::full(n))
            } else {
                Ok(Bitset::new(n))
            }
        }
        Node::At(i, g) => {
            let s = *model.nominal_assignment().get(&i).ok_or_else(|| {
                Error::KindMismatch(format!("nominal '{} has no denotation", store.name(i)))
            })?;
            let inner = model_check_extended(store, model, g)?;
            if inner.contains(s) {
                Ok(Bitset::full(n))
            } else {
                Ok(Bitset::new(n))
            }
        }
        Node::Neg(g) => {
            let inner = model_check_extended(store, model, g)?;
            Ok(Bitset::full(n).difference(&inner))
        }
        Node::And(a, b) => {
            let ea = model_check_extended(store, model, a)?;
            let eb = model_check_extended(store, model, b)?;
            Ok(ea.intersection(&eb))
        }
        _ => model_check(store, model, root),
    }
}

/// Certifies a witness model: the global assumption must hold at every
/// state and the goal somewhere. @/universal subformulas are interpreted
/// via the extended checker, so unreduced hybrid inputs certify too.
pub fn certify_model(store: &Store, model: &Model, psi: Fid, phi0: Fid) -> Result<()> {
    model.validate()?;
    let n = model.num_states();
    let global = model_check_extended(store, model, psi)?;
    if global.count() != n {
        return Err(Error::Internal(format!(
            "global assumption fails at states {:?}",
            Bitset::full(n).difference(&global).iter().collect::<Vec<_>>()
        )));
    }
    let goal = model_check_extended(store, model, phi0)?;
    if goal.is_empty() {
        return Err(Error::Internal("goal formula holds nowhere in the witness model".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::IntRel;

    fn single_state_multi(self_mult: u64) -> Model {
        Model::Multi(Multigraph {
            num_states: 1,
            transitions: vec![if self_mult > 0 {
                vec![(0, BigInt::from(self_mult))]
            } else {
                vec![]
            }],
            atom_valuation: vec![BTreeSet::new()],
            nominal_assignment: BTreeMap::new(),
        })
    }

    /// Single state with a self-loop of multiplicity 1 satisfies ♯(⊤)>0.
    #[test]
    fn self_loop_counts() {
        let mut st = Store::new();
        let top = st.top();
        let f = st.count(vec![(BigInt::from(1), top)], IntRel::Gt, BigInt::from(0));
        let m = single_state_multi(1);
        assert_eq!(model_check(&st, &m, f).unwrap().count(), 1);
    }

    /// A state with no transitions satisfies 2♯(⊤)<1 ∨ 2♯(⊤)>1 (total
    /// weight 0 satisfies the left disjunct).
    #[test]
    fn deadlock_satisfies_disjunction() {
        let mut st = Store::new();
        let top = st.top();
        let lt = st.count(vec![(BigInt::from(2), top)], IntRel::Lt, BigInt::from(1));
        let gt = st.count(vec![(BigInt::from(2), top)], IntRel::Gt, BigInt::from(1));
        let f = st.or(lt, gt);
        let m = single_state_multi(0);
        assert_eq!(model_check(&st, &m, f).unwrap().count(), 1);
        // Self-loop of multiplicity 1: 2·1 > 1, right disjunct holds.
        let m1 = single_state_multi(1);
        assert_eq!(model_check(&st, &m1, f).unwrap().count(), 1);
    }

    /// Single state with self-weight 1/4 satisfies 2w(⊤)<1 ∧ 2w(⊤)>0.
    #[test]
    fn quarter_weight_probabilistic() {
        let mut st = Store::new();
        let top = st.top();
        // 2w(⊤) < 1  ⇔  ¬(2X − 1 ≥ 0); 2w(⊤) > 0  ⇔  ¬(−2X ≥ 0).
        let two = BigRational::from(BigInt::from(2));
        let one = BigRational::from(BigInt::from(1));
        let p_lt = crate::poly::Poly::var(0).scale(&two).sub(&crate::poly::Poly::constant(one));
        let w_lt_atom = st.wpoly(p_lt, vec![top]);
        let lt = st.neg(w_lt_atom);
        let p_gt = crate::poly::Poly::var(0).scale(&-two);
        let w_gt_atom = st.wpoly(p_gt, vec![top]);
        let gt = st.neg(w_gt_atom);
        let f = st.and(lt, gt);
        let m = Model::Prob(SubdistModel {
            num_states: 1,
            weights: vec![vec![(0, BigRational::new(BigInt::from(1), BigInt::from(4)))]],
            atom_valuation: vec![BTreeSet::new()],
            nominal_assignment: BTreeMap::new(),
        });
        assert_eq!(model_check(&st, &m, f).unwrap().count(), 1);
    }

    /// Kind mismatch: probabilistic atom against a multigraph errors.
    #[test]
    fn kind_mismatch_rejected() {
        let mut st = Store::new();
        let top = st.top();
        let p = crate::poly::Poly::var(0);
        let f = st.wpoly(p, vec![top]);
        let m = single_state_multi(1);
        assert!(model_check(&st, &m, f).is_err());
    }

    /// ⟦φ∧ψ⟧ = ⟦φ⟧∩⟦ψ⟧ and ⟦¬φ⟧ = complement on a two-state model.
    #[test]
    fn boolean_laws() {
        let mut st = Store::new();
        let p = st.atom("p");
        let q = st.atom("q");
        let mut atoms0 = BTreeSet::new();
        atoms0.insert(st.intern_name("p"));
        let mut atoms1 = BTreeSet::new();
        atoms1.insert(st.intern_name("p"));
        atoms1.insert(st.intern_name("q"));
        let m = Model::Multi(Multigraph {
            num_states: 2,
            transitions: vec![vec![], vec![]],
            atom_valuation: vec![atoms0, atoms1],
            nominal_assignment: BTreeMap::new(),
        });
        let pq = st.and(p, q);
        let np = st.neg(p);
        let ep = model_check(&st, &m, p).unwrap();
        let eq_ = model_check(&st, &m, q).unwrap();
        let epq = model_check(&st, &m, pq).unwrap();
        let enp = model_check(&st, &m, np).unwrap();
        assert_eq!(epq, ep.intersection(&eq_));
        assert_eq!(enp, Bitset::full(2).difference(&ep));
    }
}
