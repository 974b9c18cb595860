//! One-step solver for Presburger modal logic: counting literals reduce to
//! non-negative integer linear systems, one variable per distinct
//! constraint valuation.

use crate::formula::IntRel;
use crate::intsolve::{feasible, IntRow, IntSystem};
use crate::onestep::{Lit, OneStepPair, OneStepResult, Valuation, Weight, Witness};
use num::{BigInt, One, Signed};
use std::collections::BTreeSet;

/// Reduction of a Presburger one-step pair: fixed rows plus, for each
/// branching negative literal (negated equality or congruence), the list of
/// alternative rows it may contribute. The satisfiable systems are exactly
/// the cartesian choices over `choices` appended to `base`.
#[derive(Clone, Debug)]
pub struct PresburgerReduction {
    /// Distinct constraint valuations in first-occurrence order; column j
    /// of every row is the multiplicity variable of `columns[j]`.
    pub columns: Vec<Valuation>,
    pub base: Vec<IntRow>,
    pub choices: Vec<Vec<IntRow>>,
}

fn dedup_columns(pair: &OneStepPair) -> Vec<Valuation> {
    let mut seen: BTreeSet<&Valuation> = BTreeSet::new();
    let mut columns = Vec::new();
    for rho in &pair.constraint {
        if seen.insert(rho) {
            columns.push(rho.clone());
        }
    }
    columns
}

fn row_coeffs(columns: &[Valuation], terms: &[(BigInt, usize)]) -> Vec<BigInt> {
    columns
        .iter()
        .map(|rho| {
            terms
                .iter()
                .filter(|(_, var)| rho[*var])
                .map(|(u, _)| u.clone())
                .sum()
        })
        .collect()
}

/// Translates every counting literal into integer rows over the column
/// variables. A positive `Σ u_i·♯(a_i) ∼ v` keeps its relation; negations
/// complement it: `¬(s > v)` becomes `−s > −v−1`, `¬(s < v)` becomes
/// `s > v−1`, `¬(s = v)` splits into `s > v` or `s < v`, and `¬(s ≡_k v)`
/// branches over the k−1 other residues.
pub fn reduce_presburger(pair: &OneStepPair) -> PresburgerReduction {
    let columns = dedup_columns(pair);
    let mut base = Vec::new();
    let mut choices = Vec::new();
    for lit in &pair.clause {
        let Lit::Count { sign, terms, rel, bound } = lit else { continue };
        let coeffs = row_coeffs(&columns, terms);
        if *sign {
            base.push(IntRow::new(coeffs, rel.clone(), bound.clone()));
            continue;
        }
        match rel {
            IntRel::Gt => {
                let neg: Vec<BigInt> = coeffs.iter().map(|c| -c).collect();
                base.push(IntRow::new(neg, IntRel::Gt, -bound - 1));
            }
            IntRel::Lt => {
                base.push(IntRow::new(coeffs, IntRel::Gt, bound - 1));
            }
            IntRel::Eq => {
                choices.push(vec![
                    IntRow::new(coeffs.clone(), IntRel::Gt, bound.clone()),
                    IntRow::new(coeffs, IntRel::Lt, bound.clone()),
                ]);
            }
            IntRel::Mod(k) => {
                let mut alts = Vec::new();
                let mut r = BigInt::one();
                while r < *k {
                    alts.push(IntRow::new(coeffs.clone(), IntRel::Mod(k.clone()), bound + &r));
                    r += 1;
                }
                choices.push(alts);
            }
        }
    }
    PresburgerReduction { columns, base, choices }
}

fn atoms_consistent(pair: &OneStepPair) -> bool {
    let mut pos: BTreeSet<u32> = BTreeSet::new();
    let mut neg: BTreeSet<u32> = BTreeSet::new();
    for lit in &pair.clause {
        if let Lit::Atom { sign, name } = lit {
            if *sign {
                pos.insert(*name);
            } else {
                neg.insert(*name);
            }
        }
    }
    pos.intersection(&neg).next().is_none()
}

/// Decides a Presburger one-step pair. Complete: branches depth-first over
/// the negative-literal alternatives in clause order with early exit, and
/// the integer backend never gives up. The witness assigns each column
/// valuation its multiplicity, zero entries dropped.
pub fn solve_presburger(pair: &OneStepPair) -> OneStepResult {
    if !atoms_consistent(pair) {
        return OneStepResult::unsat();
    }
    debug_assert!(pair
        .clause
        .iter()
        .all(|l| !matches!(l, Lit::Dia { .. } | Lit::Wpoly { .. })));
    let red = reduce_presburger(pair);
    let mut rows = red.base.clone();
    match branch(&red, &mut rows, 0) {
        Some(x) => {
            let mut witness = Witness::new();
            for (j, v) in x.iter().enumerate() {
                if v.is_positive() {
                    witness.insert(red.columns[j].clone(), Weight::Int(v.clone()));
                }
            }
            OneStepResult::sat(witness)
        }
        None => OneStepResult::unsat(),
    }
}

fn branch(red: &PresburgerReduction, rows: &mut Vec<IntRow>, next: usize) -> Option<Vec<BigInt>> {
    if next == red.choices.len() {
        let sys = IntSystem { num_vars: red.columns.len(), rows: rows.clone() };
        return feasible(&sys);
    }
    for alt in &red.choices[next] {
        rows.push(alt.clone());
        let hit = branch(red, rows, next + 1);
        rows.pop();
        if hit.is_some() {
            return hit;
        }
    }
    None
}
