//! Kleene iteration for extremal fixpoints of monotone set functions over
//! finite powerset lattices, and a finite presentation of such functions
//! used by the randomized fixpoint-law tests.
//!
//! Both elimination and propagation are monotone functionals over a fixed
//! carrier; their greatest (least) fixpoints are reached by iterating from
//! the top (bottom) element. The functional is a fallible closure so that
//! one-step solver failures abort the iteration cleanly.

use crate::bitset::Bitset;
use crate::error::Result;

/// Greatest fixpoint by descending iteration from `start`.
///
/// Requires `f` monotone with `f(start) ⊆ start`; then the iterates form a
/// descending chain that stabilizes after at most `start.count() + 1`
/// applications. Returns the fixpoint and the number of applications.
pub fn kleene_nu<F>(start: Bitset, mut f: F) -> Result<(Bitset, u64)>
where
    F: FnMut(&Bitset) -> Result<Bitset>,
{
    let mut cur = start;
    let mut steps = 0u64;
    loop {
        let next = f(&cur)?;
        steps += 1;
        debug_assert!(next.is_subset(&cur), "descending iteration left the chain");
        if next == cur {
            return Ok((cur, steps));
        }
        cur = next;
    }
}

/// Least fixpoint by ascending iteration from `start` (usually the empty
/// set). Requires `f` monotone with `f(start) ⊇ start`.
pub fn kleene_mu<F>(start: Bitset, mut f: F) -> Result<(Bitset, u64)>
where
    F: FnMut(&Bitset) -> Result<Bitset>,
{
    let mut cur = start;
    let mut steps = 0u64;
    loop {
        let next = f(&cur)?;
        steps += 1;
        debug_assert!(cur.is_subset(&next), "ascending iteration left the chain");
        if next == cur {
            return Ok((cur, steps));
        }
        cur = next;
    }
}

/// A monotone set function in trigger/payload form:
/// `F(S) = ∪ { payload_j | trigger_j ⊆ S }`.
///
/// Every monotone function on a finite powerset has such a presentation
/// (take one pair per input set), and random instances of it drive the
/// fixpoint-law tests.
#[derive(Clone, Debug)]
pub struct TriggerFn {
    pub universe: usize,
    pub pairs: Vec<(Bitset, Bitset)>,
}

impl TriggerFn {
    pub fn apply(&self, s: &Bitset) -> Bitset {
        let mut out = Bitset::new(self.universe);
        for (trigger, payload) in &self.pairs {
            if trigger.is_subset(s) {
                out.union_with(payload);
            }
        }
        out
    }

    /// νF from the full carrier. Safe because `apply` never leaves the
    /// carrier, so the first iterate descends.
    pub fn nu(&self) -> Bitset {
        let full = Bitset::full(self.universe);
        // Descend manually: apply(full) need not be ⊆ full argument-wise
        // for kleene_nu's contract, but it is set-wise (same universe).
        kleene_nu(full, |s| Ok(self.apply(s))).expect("infallible").0
    }

    /// μF from the empty set.
    pub fn mu(&self) -> Bitset {
        let empty = Bitset::new(self.universe);
        kleene_mu(empty, |s| Ok(self.apply(s))).expect("infallible").0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Successor-survival on a line: only elements whose successor
    /// survives stay, so the greatest fixpoint from {0..4} is empty and
    /// stabilization takes the full n+1 rounds.
    #[test]
    fn nu_drains_a_line() {
        let n = 5;
        let (fix, steps) = kleene_nu(Bitset::full(n), |s| {
            Ok(Bitset::from_iter(n, s.iter().filter(|&i| i + 1 < n && s.contains(i + 1))))
        })
        .unwrap();
        assert!(fix.is_empty());
        assert_eq!(steps, 6);
    }

    /// Reachability closure: μ of S ↦ {0} ∪ successors(S) fills the line.
    #[test]
    fn mu_fills_a_line() {
        let n = 5;
        let (fix, steps) = kleene_mu(Bitset::new(n), |s| {
            let mut next = Bitset::from_iter(n, [0]);
            for i in s.iter() {
                next.insert(i);
                if i + 1 < n {
                    next.insert(i + 1);
                }
            }
            Ok(next)
        })
        .unwrap();
        assert_eq!(fix, Bitset::full(n));
        assert_eq!(steps, 6);
    }

    /// An error from the functional aborts the iteration.
    #[test]
    fn errors_propagate() {
        let r = kleene_nu(Bitset::full(3), |_| {
            Err(crate::error::Error::Incomplete("boom".into()))
        });
        assert!(r.is_err());
    }

    fn random_fn(rng: &mut StdRng, universe: usize) -> TriggerFn {
        let pairs = (0..rng.gen_range(1..=6))
            .map(|_| {
                let trigger =
                    Bitset::from_iter(universe, (0..universe).filter(|_| rng.gen_bool(0.3)));
                let payload =
                    Bitset::from_iter(universe, (0..universe).filter(|_| rng.gen_bool(0.4)));
                (trigger, payload)
            })
            .collect();
        TriggerFn { universe, pairs }
    }

    /// The seeding laws νS.F(S ∪ νF) = νF and μS.F(S ∪ μF) = μF on random
    /// monotone functions (the full-scale run lives in the acceptance
    /// suite; this is a smoke-sized version).
    #[test]
    fn seeded_fixpoints_are_stable() {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        for _ in 0..100 {
            let universe = rng.gen_range(1..=12);
            let f = random_fn(&mut rng, universe);
            let nu = f.nu();
            let (nu2, _) =
                kleene_nu(Bitset::full(universe), |s| Ok(f.apply(&s.union(&nu)))).unwrap();
            assert_eq!(nu2, nu);
            let mu = f.mu();
            let (mu2, _) =
                kleene_mu(Bitset::new(universe), |s| Ok(f.apply(&s.union(&mu)))).unwrap();
            assert_eq!(mu2, mu);
        }
    }

    /// Iteration length never exceeds carrier size + 1.
    #[test]
    fn iteration_length_bound() {
        let mut rng = StdRng::seed_from_u64(0xbead);
        for _ in 0..200 {
            let universe = rng.gen_range(1..=12);
            let f = random_fn(&mut rng, universe);
            let (_, steps) = kleene_nu(Bitset::full(universe), |s| Ok(f.apply(s))).unwrap();
            assert!(steps as usize <= universe + 1);
            let (_, steps) = kleene_mu(Bitset::new(universe), |s| Ok(f.apply(s))).unwrap();
            assert!(steps as usize <= universe + 1);
        }
    }
}
