//! One-step solver for relational modal logic over multigraph semantics.

use crate::onestep::{Lit, OneStepPair, OneStepResult, Weight, Witness};
use num::BigInt;
use std::collections::BTreeSet;

/// Decides a relational one-step pair. SAT iff the nullary atom literals
/// are consistent as a set and every positive diamond has a constraint
/// valuation that makes its argument true while keeping the argument of
/// every negative diamond false. The scan over valuations is deterministic
/// in constraint order, one selected valuation (weight 1) per positive
/// diamond. Complete; never returns UNKNOWN.
pub fn solve_k(pair: &OneStepPair) -> OneStepResult {
    let mut pos_atoms: BTreeSet<u32> = BTreeSet::new();
    let mut neg_atoms: BTreeSet<u32> = BTreeSet::new();
    let mut pos_dias: Vec<usize> = Vec::new();
    let mut neg_dias: Vec<usize> = Vec::new();
    for lit in &pair.clause {
        match lit {
            Lit::Atom { sign, name } => {
                if *sign {
                    pos_atoms.insert(*name);
                } else {
                    neg_atoms.insert(*name);
                }
            }
            Lit::Dia { sign, var } => {
                if *sign {
                    pos_dias.push(*var);
                } else {
                    neg_dias.push(*var);
                }
            }
            Lit::Count { .. } | Lit::Wpoly { .. } => {
                unreachable!("relational pairs carry only atoms and diamonds")
            }
        }
    }
    if pos_atoms.intersection(&neg_atoms).next().is_some() {
        return OneStepResult::unsat();
    }

    let mut witness: Witness = Witness::new();
    for &v in &pos_dias {
        let found = pair.constraint.iter().find(|rho| {
            rho[v] && neg_dias.iter().all(|&nv| !rho[nv])
        });
        match found {
            Some(rho) => {
                witness.insert(rho.clone(), Weight::Int(BigInt::from(1)));
            }
            None => return OneStepResult::unsat(),
        }
    }
    OneStepResult::sat(witness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::onestep::check_witness;
    use crate::Logic;

    fn dia(sign: bool, var: usize) -> Lit {
        Lit::Dia { sign, var }
    }

    fn pair(clause: Vec<Lit>, constraint: Vec<Vec<bool>>, nvars: usize) -> OneStepPair {
        use crate::onestep::VarInfo;
        OneStepPair {
            vars: (0..nvars).map(|i| VarInfo { sign: true, arg_cidx: i }).collect(),
            clause,
            constraint,
        }
    }

    /// ¬◇a ∧ ¬◇b ∧ ◇c where every c-valuation also makes a or b true: the
    /// positive diamond cannot be served.
    #[test]
    fn blocked_diamond_unsat() {
        // Valuations over (a, b, c) satisfying c → a ∨ b.
        let constraint: Vec<Vec<bool>> = (0..8u8)
            .map(|m| vec![m & 1 != 0, m & 2 != 0, m & 4 != 0])
            .filter(|v| !v[2] || v[0] || v[1])
            .collect();
        let p = pair(vec![dia(false, 0), dia(false, 1), dia(true, 2)], constraint, 3);
        assert_eq!(solve_k(&p).verdict, crate::Verdict::Unsat);
    }

    /// ◇a over both valuations of {a} is served by the a-true valuation.
    #[test]
    fn single_diamond_sat() {
        let p = pair(vec![dia(true, 0)], vec![vec![false], vec![true]], 1);
        let r = solve_k(&p);
        let w = r.witness.expect("sat");
        assert_eq!(w.len(), 1);
        assert!(w.contains_key(&vec![true]));
        assert!(check_witness(Logic::K, &p, &w));
    }

    /// ¬◇a alone is satisfied by having no successors at all.
    #[test]
    fn negative_diamond_empty_support() {
        let p = pair(vec![dia(false, 0)], vec![vec![true], vec![false]], 1);
        let r = solve_k(&p);
        let w = r.witness.expect("sat");
        assert!(w.is_empty());
        assert!(check_witness(Logic::K, &p, &w));
    }

    /// Clashing nullary atoms are inconsistent regardless of diamonds.
    #[test]
    fn atom_clash_unsat() {
        let p = OneStepPair {
            vars: vec![],
            clause: vec![
                Lit::Atom { sign: true, name: 0 },
                Lit::Atom { sign: false, name: 0 },
            ],
            constraint: vec![],
        };
        assert_eq!(solve_k(&p).verdict, crate::Verdict::Unsat);
    }

    /// Exhaustive agreement with a successor-set oracle on every pair shape
    /// with up to 3 variables: the oracle tries all subsets of constraint
    /// valuations as successor sets.
    #[test]
    fn matches_subset_oracle() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(0x0ace);
        for _ in 0..400 {
            let nvars = rng.gen_range(1..=3);
            let all: Vec<Vec<bool>> = (0..1u8 << nvars)
                .map(|m| (0..nvars).map(|i| m >> i & 1 == 1).collect())
                .collect();
            let constraint: Vec<Vec<bool>> =
                all.into_iter().filter(|_| rng.gen_bool(0.6)).collect();
            let nlits = rng.gen_range(1..=4);
            let clause: Vec<Lit> = (0..nlits)
                .map(|_| dia(rng.gen_bool(0.5), rng.gen_range(0..nvars)))
                .collect();
            let p = pair(clause.clone(), constraint.clone(), nvars);
            let solver_sat = solve_k(&p).verdict == crate::Verdict::Sat;
            let oracle_sat = (0..1usize << constraint.len()).any(|mask| {
                let succ: Vec<&Vec<bool>> = constraint
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, v)| v)
                    .collect();
                clause.iter().all(|l| match l {
                    Lit::Dia { sign: true, var } => succ.iter().any(|v| v[*var]),
                    Lit::Dia { sign: false, var } => succ.iter().all(|v| !v[*var]),
                    _ => unreachable!(),
                })
            });
            assert_eq!(solver_sat, oracle_sat, "pair {:?}", p);
        }
    }
}
