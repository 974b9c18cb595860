//! Brute-force oracles for cross-checking the decision procedures.
//!
//! `oracle_search` enumerates every model within tiny bounds and returns
//! the first one the independent model checker certifies. A hit is
//! ground-truth SAT evidence; exhaustion only means "no model within the
//! bounds", so the UNSAT direction is inconclusive by design.
//!
//! `fm_feasible` decides linear-arithmetic feasibility by Fourier–Motzkin
//! elimination, an implementation with nothing in common with the simplex
//! back-end it cross-checks.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::formula::{Fid, Node, Store};
use crate::model::{certify_model, Model, Multigraph, SubdistModel};
use crate::realsolve::{LinConstraint, LinRel};
use crate::Logic;

/// Mixed-radix counter over the given radices, least significant digit
/// first. Zero radices yield nothing; an empty radix list yields exactly
/// the empty digit string.
struct Odometer {
    radices: Vec<usize>,
    digits: Vec<usize>,
    fresh: bool,
}

impl Odometer {
    fn new(radices: Vec<usize>) -> Self {
        let digits = vec![0; radices.len()];
        Odometer { radices, digits, fresh: true }
    }

    fn next(&mut self) -> Option<&[usize]> {
        if self.fresh {
            self.fresh = false;
            if self.radices.iter().any(|&r| r == 0) {
                return None;
            }
            return Some(&self.digits);
        }
        for i in 0..self.digits.len() {
            self.digits[i] += 1;
            if self.digits[i] < self.radices[i] {
                return Some(&self.digits);
            }
            self.digits[i] = 0;
        }
        None
    }
}

fn collect_names(store: &Store, f: Fid, seen: &mut BTreeSet<Fid>, atoms: &mut BTreeSet<u32>, noms: &mut BTreeSet<u32>) {
    if !seen.insert(f) {
        return;
    }
    match store.node(f) {
        Node::Atom(id) => {
            atoms.insert(*id);
        }
        Node::Nom(id) | Node::At(id, _) => {
            noms.insert(*id);
        }
        _ => {}
    }
    for g in store.subformulas(f) {
        collect_names(store, g, seen, atoms, noms);
    }
}

/// All rationals `p/q` with `0 ≤ p ≤ q ≤ bound`, deduplicated.
fn farey_values(bound: u32) -> Vec<BigRational> {
    let mut vals = BTreeSet::new();
    for q in 1..=bound.max(1) {
        for p in 0..=q {
            vals.insert(BigRational::new(BigInt::from(p), BigInt::from(q)));
        }
    }
    vals.into_iter().collect()
}

/// Candidate transition rows for one state. Relational semantics only
/// inspects edge presence, so logic K enumerates binary multiplicities
/// regardless of the weight bound; Presburger rows carry multiplicities
/// up to the bound; probabilistic rows draw weights from the
/// denominator-bounded grid and respect row sum ≤ 1.
fn row_choices(logic: Logic, n: usize, bound: u32) -> Vec<Vec<(usize, Model2Weight)>> {
    let mut rows = Vec::new();
    match logic {
        Logic::K | Logic::Presburger => {
            let cap = if logic == Logic::K { 1 } else { bound as usize };
            let mut odo = Odometer::new(vec![cap + 1; n]);
            while let Some(d) = odo.next() {
                let row: Vec<(usize, Model2Weight)> = d
                    .iter()
                    .enumerate()
                    .filter(|(_, &m)| m > 0)
                    .map(|(j, &m)| (j, Model2Weight::Int(BigInt::from(m))))
                    .collect();
                rows.push(row);
            }
        }
        Logic::Prob => {
            let grid = farey_values(bound);
            let one = BigRational::one();
            let mut odo = Odometer::new(vec![grid.len(); n]);
            while let Some(d) = odo.next() {
                let sum: BigRational = d.iter().map(|&k| grid[k].clone()).sum();
                if sum > one {
                    continue;
                }
                let row: Vec<(usize, Model2Weight)> = d
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| !grid[k].is_zero())
                    .map(|(j, &k)| (j, Model2Weight::Rat(grid[k].clone())))
                    .collect();
                rows.push(row);
            }
        }
    }
    rows
}

/// Weight of one enumerated edge; integral for multigraphs, rational for
/// subdistributions.
#[derive(Clone, Debug)]
enum Model2Weight {
    Int(BigInt),
    Rat(BigRational),
}

fn assemble(
    logic: Logic,
    n: usize,
    rows: &[Vec<(usize, Model2Weight)>],
    picks: &[usize],
    valuation: &[BTreeSet<u32>],
    noms: &BTreeMap<u32, usize>,
) -> Model {
    match logic {
        Logic::K | Logic::Presburger => Model::Multi(Multigraph {
            num_states: n,
            transitions: picks
                .iter()
                .map(|&r| {
                    rows[r]
                        .iter()
                        .map(|(j, w)| match w {
                            Model2Weight::Int(m) => (*j, m.clone()),
                            Model2Weight::Rat(_) => unreachable!("rational weight in a multigraph row"),
                        })
                        .collect()
                })
                .collect(),
            atom_valuation: valuation.to_vec(),
            nominal_assignment: noms.clone(),
        }),
        Logic::Prob => Model::Prob(SubdistModel {
            num_states: n,
            weights: picks
                .iter()
                .map(|&r| {
                    rows[r]
                        .iter()
                        .map(|(j, w)| match w {
                            Model2Weight::Rat(m) => (*j, m.clone()),
                            Model2Weight::Int(_) => unreachable!("integer weight in a subdistribution row"),
                        })
                        .collect()
                })
                .collect(),
            atom_valuation: valuation.to_vec(),
            nominal_assignment: noms.clone(),
        }),
    }
}

/// Exhaustively searches for a model of `φ0` under global `ψ` with at
/// most `max_states` states and weights bounded by `bound` (multigraph
/// multiplicities ≤ bound; probabilistic weights with denominators
/// ≤ bound). Returns the first certified hit. Cost grows as
/// `rows^(n²)`-ish, so keep the bounds tiny.
pub fn oracle_search(
    store: &Store,
    psi: Fid,
    phi0: Fid,
    logic: Logic,
    max_states: usize,
    bound: u32,
) -> Option<Model> {
    let mut seen = BTreeSet::new();
    let mut atom_ids = BTreeSet::new();
    let mut nom_ids = BTreeSet::new();
    collect_names(store, psi, &mut seen, &mut atom_ids, &mut nom_ids);
    collect_names(store, phi0, &mut seen, &mut atom_ids, &mut nom_ids);
    let atoms: Vec<u32> = atom_ids.into_iter().collect();
    let noms: Vec<u32> = nom_ids.into_iter().collect();

    for n in 1..=max_states {
        let rows = row_choices(logic, n, bound);
        let mut val_odo = Odometer::new(vec![2; n * atoms.len()]);
        while let Some(vd) = val_odo.next() {
            let valuation: Vec<BTreeSet<u32>> = (0..n)
                .map(|s| {
                    atoms
                        .iter()
                        .enumerate()
                        .filter(|(a, _)| vd[s * atoms.len() + a] == 1)
                        .map(|(_, &id)| id)
                        .collect()
                })
                .collect();
            let mut nom_odo = Odometer::new(vec![n; noms.len()]);
            while let Some(nd) = nom_odo.next() {
                let assignment: BTreeMap<u32, usize> =
                    noms.iter().zip(nd).map(|(&id, &s)| (id, s)).collect();
                let mut mat_odo = Odometer::new(vec![rows.len(); n]);
                while let Some(md) = mat_odo.next() {
                    let model = assemble(logic, n, &rows, md, &valuation, &assignment);
                    if certify_model(store, &model, psi, phi0).is_ok() {
                        return Some(model);
                    }
                }
            }
        }
    }
    None
}

/// One internal Fourier–Motzkin row: `coeffs · x < bound` when strict,
/// else `coeffs · x ≤ bound`.
#[derive(Clone)]
struct FmRow {
    coeffs: Vec<BigRational>,
    bound: BigRational,
    strict: bool,
}

/// Linear feasibility over free rational variables by Fourier–Motzkin
/// elimination; exact, exponential, and entirely independent of the
/// simplex back-end it cross-checks.
pub fn fm_feasible(num_vars: usize, cons: &[LinConstraint]) -> bool {
    let mut rows: Vec<FmRow> = Vec::new();
    for c in cons {
        let mut coeffs = c.coeffs.clone();
        coeffs.resize(num_vars, BigRational::zero());
        let neg = |v: &[BigRational]| v.iter().map(|x| -x.clone()).collect::<Vec<_>>();
        match c.rel {
            LinRel::Le => rows.push(FmRow { coeffs, bound: c.bound.clone(), strict: false }),
            LinRel::Lt => rows.push(FmRow { coeffs, bound: c.bound.clone(), strict: true }),
            LinRel::Ge => rows.push(FmRow { coeffs: neg(&coeffs), bound: -c.bound.clone(), strict: false }),
            LinRel::Gt => rows.push(FmRow { coeffs: neg(&coeffs), bound: -c.bound.clone(), strict: true }),
            LinRel::Eq => {
                rows.push(FmRow { coeffs: neg(&coeffs), bound: -c.bound.clone(), strict: false });
                rows.push(FmRow { coeffs, bound: c.bound.clone(), strict: false });
            }
        }
    }
    for var in 0..num_vars {
        let mut zero_rows = Vec::new();
        let mut uppers = Vec::new();
        let mut lowers = Vec::new();
        for r in rows {
            let c = r.coeffs[var].clone();
            if c.is_zero() {
                zero_rows.push(r);
            } else if c.is_positive() {
                uppers.push((r, c));
            } else {
                lowers.push((r, c));
            }
        }
        // x_var ≥ (lower bound)   combined with   x_var ≤ (upper bound):
        // scale both rows to unit coefficient and add.
        for (lo, lc) in &lowers {
            for (up, uc) in &uppers {
                let mut coeffs = vec![BigRational::zero(); num_vars];
                for (i, slot) in coeffs.iter_mut().enumerate() {
                    *slot = &lo.coeffs[i] / lc.clone().abs() + &up.coeffs[i] / uc.clone();
                }
                let bound = &lo.bound / lc.clone().abs() + &up.bound / uc.clone();
                debug_assert!(coeffs[var].is_zero());
                zero_rows.push(FmRow { coeffs, bound, strict: lo.strict || up.strict });
            }
        }
        rows = zero_rows;
    }
    rows.iter().all(|r| {
        debug_assert!(r.coeffs.iter().all(|c| c.is_zero()));
        if r.strict {
            r.bound.is_positive()
        } else {
            !r.bound.is_negative()
        }
    })
}
