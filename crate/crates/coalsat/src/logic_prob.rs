//! One-step solver for probabilistic modal logic with polynomial weight
//! inequalities, via reduction to real feasibility over subdistributions.

use crate::onestep::{Lit, OneStepPair, OneStepResult, Valuation, Weight, Witness};
use crate::poly::Poly;
use crate::realsolve::{
    lin_feasible, poly_feasible, LinConstraint, LinRel, PolyConstraint, PolyOutcome, PolyRel,
};
use num::{BigRational, One, Signed, Zero};
use std::collections::BTreeSet;

/// Polynomial system over one variable per distinct constraint valuation,
/// including the subdistribution simplex rows `x_ρ ≥ 0` and `Σ x_ρ ≤ 1`.
#[derive(Clone, Debug)]
pub struct PolySystem {
    pub columns: Vec<Valuation>,
    pub constraints: Vec<PolyConstraint>,
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

/// Substitutes each weight `w(a_i)` by the column mass `Σ_{ρ(a_i)} x_ρ` in
/// every polynomial literal: positive literals demand `poly ≥ 0`, negative
/// ones `poly < 0`. The simplex rows close the system.
pub fn reduce_prob(pair: &OneStepPair) -> PolySystem {
    let columns = dedup_columns(pair);
    let n = columns.len();
    let mut constraints = Vec::new();
    for lit in &pair.clause {
        let Lit::Wpoly { sign, poly, vars } = lit else { continue };
        let subs: Vec<Poly> = vars
            .iter()
            .map(|&v| {
                let mut mass = Poly::zero();
                for (c, rho) in columns.iter().enumerate() {
                    if rho[v] {
                        mass = mass.add(&Poly::var(c));
                    }
                }
                mass
            })
            .collect();
        let substituted = poly.substitute(&subs);
        let rel = if *sign { PolyRel::Ge } else { PolyRel::Lt };
        constraints.push(PolyConstraint::new(substituted, rel));
    }
    for c in 0..n {
        constraints.push(PolyConstraint::new(Poly::var(c), PolyRel::Ge));
    }
    let mut total = Poly::constant(BigRational::one());
    for c in 0..n {
        total = total.sub(&Poly::var(c));
    }
    constraints.push(PolyConstraint::new(total, PolyRel::Ge));
    PolySystem { columns, constraints }
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

/// Splits a linear polynomial into coefficient vector and constant term.
fn linear_parts(p: &Poly, n: usize) -> (Vec<BigRational>, BigRational) {
    let mut coeffs = vec![BigRational::zero(); n];
    let mut constant = BigRational::zero();
    for (m, c) in p.terms() {
        match m.iter().enumerate().find(|(_, &e)| e > 0) {
            None => constant = constant + c,
            Some((i, _)) => coeffs[i] = coeffs[i].clone() + c,
        }
    }
    (coeffs, constant)
}

fn witness_from_point(columns: &[Valuation], point: &[BigRational]) -> Witness {
    let mut witness = Witness::new();
    for (c, v) in point.iter().enumerate() {
        if v.is_positive() {
            witness.insert(columns[c].clone(), Weight::Rat(v.clone()));
        }
    }
    witness
}

/// Decides a probabilistic one-step pair. Linear systems go to the complete
/// rational solver; anything of higher degree goes to the interval search,
/// whose budget exhaustion surfaces as UNKNOWN rather than a verdict.
pub fn solve_prob(pair: &OneStepPair, budget: u32) -> OneStepResult {
    if !atoms_consistent(pair) {
        return OneStepResult::unsat();
    }
    debug_assert!(pair
        .clause
        .iter()
        .all(|l| !matches!(l, Lit::Dia { .. } | Lit::Count { .. })));
    let sys = reduce_prob(pair);
    let n = sys.columns.len();
    if sys.constraints.iter().all(|c| c.poly.is_linear()) {
        let rows: Vec<LinConstraint> = sys
            .constraints
            .iter()
            .map(|c| {
                let (coeffs, constant) = linear_parts(&c.poly, n);
                let rel = match c.rel {
                    PolyRel::Ge => LinRel::Ge,
                    PolyRel::Gt => LinRel::Gt,
                    PolyRel::Eq => LinRel::Eq,
                    PolyRel::Le => LinRel::Le,
                    PolyRel::Lt => LinRel::Lt,
                };
                LinConstraint::new(coeffs, rel, -constant)
            })
            .collect();
        return match lin_feasible(n, &rows) {
            Some(point) => OneStepResult::sat(witness_from_point(&sys.columns, &point)),
            None => OneStepResult::unsat(),
        };
    }
    match poly_feasible(n, &sys.constraints, budget) {
        PolyOutcome::Sat(point) => OneStepResult::sat(witness_from_point(&sys.columns, &point)),
        PolyOutcome::Unsat => OneStepResult::unsat(),
        PolyOutcome::Unknown => OneStepResult::unknown(),
    }
}
