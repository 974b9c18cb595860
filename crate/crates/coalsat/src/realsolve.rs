//! Feasibility over the rationals: a complete solver for linear systems
//! with strict and weak inequalities, and an interval branch-and-prune
//! search for polynomial systems over the unit box.

use crate::poly::Poly;
use crate::simplex::{solve_lp, LinRow, LpOutcome, RowRel};
use num::{BigRational, One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinRel {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

/// One linear constraint `coeffs · x REL bound` over free rational variables.
#[derive(Clone, Debug)]
pub struct LinConstraint {
    pub coeffs: Vec<BigRational>,
    pub rel: LinRel,
    pub bound: BigRational,
}

impl LinConstraint {
    pub fn new(coeffs: Vec<BigRational>, rel: LinRel, bound: BigRational) -> Self {
        LinConstraint { coeffs, rel, bound }
    }

    pub fn holds_at(&self, point: &[BigRational]) -> bool {
        let mut s = BigRational::zero();
        for (c, x) in self.coeffs.iter().zip(point) {
            s = s + c * x;
        }
        match self.rel {
            LinRel::Le => s <= self.bound,
            LinRel::Lt => s < self.bound,
            LinRel::Ge => s >= self.bound,
            LinRel::Gt => s > self.bound,
            LinRel::Eq => s == self.bound,
        }
    }
}

/// Decides a mixed strict/weak linear system over free variables exactly,
/// returning a satisfying point if one exists. Complete: `None` means the
/// system has no rational (equivalently, no real) solution.
///
/// Encoding: each free variable is split into a difference of two
/// non-negative ones, and strictness is handled by a shared slack variable
/// delta that pads every strict row (`s < b` becomes `s + delta ≤ b`). The
/// resulting LP maximizes delta with a cap of 1; the system is strictly
/// satisfiable iff the optimum is positive, because any strict solution
/// admits a uniform positive slack and vice versa.
pub fn lin_feasible(num_vars: usize, cons: &[LinConstraint]) -> Option<Vec<BigRational>> {
    let delta = 2 * num_vars;
    let width = delta + 1;
    let mut rows: Vec<LinRow> = Vec::with_capacity(cons.len() + 1);
    for c in cons {
        debug_assert_eq!(c.coeffs.len(), num_vars);
        let mut coeffs = vec![BigRational::zero(); width];
        for (i, a) in c.coeffs.iter().enumerate() {
            coeffs[2 * i] = a.clone();
            coeffs[2 * i + 1] = -a;
        }
        let rel = match c.rel {
            LinRel::Le => RowRel::Le,
            LinRel::Ge => RowRel::Ge,
            LinRel::Eq => RowRel::Eq,
            LinRel::Lt => {
                coeffs[delta] = BigRational::one();
                RowRel::Le
            }
            LinRel::Gt => {
                coeffs[delta] = -BigRational::one();
                RowRel::Ge
            }
        };
        rows.push(LinRow::new(coeffs, rel, c.bound.clone()));
    }
    let mut cap = vec![BigRational::zero(); width];
    cap[delta] = BigRational::one();
    rows.push(LinRow::new(cap, RowRel::Le, BigRational::one()));
    let mut objective = vec![BigRational::zero(); width];
    objective[delta] = BigRational::one();

    match solve_lp(width, &rows, Some(&objective)) {
        LpOutcome::Optimal { point, value } if value.is_positive() => {
            let x: Vec<BigRational> =
                (0..num_vars).map(|i| &point[2 * i] - &point[2 * i + 1]).collect();
            debug_assert!(cons.iter().all(|c| c.holds_at(&x)));
            Some(x)
        }
        LpOutcome::Optimal { .. } | LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("delta is capped at 1"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyRel {
    Ge,
    Gt,
    Eq,
    Le,
    Lt,
}

/// One polynomial constraint `poly REL 0`.
#[derive(Clone, Debug)]
pub struct PolyConstraint {
    pub poly: Poly,
    pub rel: PolyRel,
}

impl PolyConstraint {
    pub fn new(poly: Poly, rel: PolyRel) -> Self {
        PolyConstraint { poly, rel }
    }

    pub fn holds_at(&self, point: &[BigRational]) -> bool {
        let v = self.poly.eval(point);
        match self.rel {
            PolyRel::Ge => !v.is_negative(),
            PolyRel::Gt => v.is_positive(),
            PolyRel::Eq => v.is_zero(),
            PolyRel::Le => !v.is_positive(),
            PolyRel::Lt => v.is_negative(),
        }
    }

    /// True when the constraint cannot hold anywhere in a box whose value
    /// range for `poly` is `[lo, hi]`.
    fn refuted_by_range(&self, lo: &BigRational, hi: &BigRational) -> bool {
        match self.rel {
            PolyRel::Ge => hi.is_negative(),
            PolyRel::Gt => !hi.is_positive(),
            PolyRel::Eq => lo.is_positive() || hi.is_negative(),
            PolyRel::Le => lo.is_positive(),
            PolyRel::Lt => !lo.is_negative(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolyOutcome {
    Sat(Vec<BigRational>),
    Unsat,
    Unknown,
}

struct BoxSearch<'a> {
    cons: &'a [PolyConstraint],
    budget: u32,
    saw_unknown: bool,
    /// Pruned sub-boxes with the index of the refuting constraint, kept in
    /// debug builds to re-check that an Unsat verdict covers the whole box.
    #[cfg(debug_assertions)]
    pruned: Vec<(Vec<BigRational>, Vec<BigRational>, usize)>,
}

impl<'a> BoxSearch<'a> {
    fn candidate(&self, lo: &[BigRational], hi: &[BigRational]) -> Option<Vec<BigRational>> {
        let n = lo.len();
        let half = BigRational::new(1.into(), 2.into());
        let center: Vec<BigRational> =
            (0..n).map(|i| (&lo[i] + &hi[i]) * &half).collect();
        if self.cons.iter().all(|c| c.holds_at(&center)) {
            return Some(center);
        }
        // Corners often witness constraints the center misses (weights 0 or
        // 1); enumerating them is only affordable in low dimension.
        if n <= 6 {
            for mask in 0..(1usize << n) {
                let corner: Vec<BigRational> = (0..n)
                    .map(|i| if mask >> i & 1 == 1 { hi[i].clone() } else { lo[i].clone() })
                    .collect();
                if self.cons.iter().all(|c| c.holds_at(&corner)) {
                    return Some(corner);
                }
            }
        }
        None
    }

    fn search(
        &mut self,
        lo: &[BigRational],
        hi: &[BigRational],
        depth: u32,
    ) -> Option<Vec<BigRational>> {
        for (ci, c) in self.cons.iter().enumerate() {
            let (rlo, rhi) = c.poly.eval_interval(lo, hi);
            if c.refuted_by_range(&rlo, &rhi) {
                #[cfg(debug_assertions)]
                self.pruned.push((lo.to_vec(), hi.to_vec(), ci));
                #[cfg(not(debug_assertions))]
                let _ = ci;
                return None;
            }
        }
        if let Some(p) = self.candidate(lo, hi) {
            return Some(p);
        }
        if depth >= self.budget || lo.is_empty() {
            // Constant systems are decided exactly above, so an empty box
            // only reaches here when intervals and candidates disagree,
            // which cannot happen; the guard is for the depth budget.
            self.saw_unknown = true;
            return None;
        }
        // Split the widest dimension (lowest index on ties) at its
        // midpoint, lower half first.
        let mut split = 0;
        for i in 1..lo.len() {
            if &hi[i] - &lo[i] > &hi[split] - &lo[split] {
                split = i;
            }
        }
        let mid = (&lo[split] + &hi[split]) * BigRational::new(1.into(), 2.into());
        let mut sub_hi = hi.to_vec();
        sub_hi[split] = mid.clone();
        if let Some(p) = self.search(lo, &sub_hi, depth + 1) {
            return Some(p);
        }
        let mut sub_lo = lo.to_vec();
        sub_lo[split] = mid;
        self.search(&sub_lo, hi, depth + 1)
    }
}

/// Searches the unit box `[0, 1]^n` for a rational solution of the system.
/// Sound in both directions but incomplete: `Unknown` is returned when the
/// depth budget runs out before every sub-box is either pruned or witnessed.
pub fn poly_feasible(num_vars: usize, cons: &[PolyConstraint], budget: u32) -> PolyOutcome {
    for c in cons {
        debug_assert!(c.poly.num_vars() <= num_vars);
    }
    let lo = vec![BigRational::zero(); num_vars];
    let hi = vec![BigRational::one(); num_vars];
    let mut s = BoxSearch {
        cons,
        budget,
        saw_unknown: false,
        #[cfg(debug_assertions)]
        pruned: Vec::new(),
    };
    if let Some(p) = s.search(&lo, &hi, 0) {
        debug_assert!(cons.iter().all(|c| c.holds_at(&p)));
        return PolyOutcome::Sat(p);
    }
    if s.saw_unknown {
        return PolyOutcome::Unknown;
    }
    // Every leaf was pruned; in debug builds re-check each certificate and
    // that the pruned boxes tile the full unit box by volume.
    #[cfg(debug_assertions)]
    {
        let mut vol = BigRational::zero();
        for (blo, bhi, ci) in &s.pruned {
            let (rlo, rhi) = cons[*ci].poly.eval_interval(blo, bhi);
            assert!(cons[*ci].refuted_by_range(&rlo, &rhi));
            let mut v = BigRational::one();
            for i in 0..blo.len() {
                v = v * (&bhi[i] - &blo[i]);
            }
            vol = vol + v;
        }
        assert_eq!(vol, BigRational::one(), "pruned boxes must tile the unit box");
    }
    PolyOutcome::Unsat
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    fn r(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// 0 < 2x < 1 with 0 ≤ x ≤ 1 is strictly satisfiable; maximizing the
    /// slack lands exactly in the middle of the open interval.
    #[test]
    fn strict_band_is_satisfiable() {
        let cons = vec![
            LinConstraint::new(vec![r(2)], LinRel::Lt, r(1)),
            LinConstraint::new(vec![r(2)], LinRel::Gt, r(0)),
            LinConstraint::new(vec![r(1)], LinRel::Ge, r(0)),
            LinConstraint::new(vec![r(1)], LinRel::Le, r(1)),
        ];
        let x = lin_feasible(1, &cons).expect("satisfiable");
        assert!(x[0] > r(0) && x[0] < rat(1, 2));
        assert_eq!(x[0], rat(1, 4));
    }

    /// x ≥ 1 together with x ≤ 0 has no solution.
    #[test]
    fn contradictory_bounds() {
        let cons = vec![
            LinConstraint::new(vec![r(1)], LinRel::Ge, r(1)),
            LinConstraint::new(vec![r(1)], LinRel::Le, r(0)),
        ];
        assert!(lin_feasible(1, &cons).is_none());
    }

    /// The empty system is satisfiable at the origin.
    #[test]
    fn empty_system() {
        assert_eq!(lin_feasible(2, &[]), Some(vec![r(0), r(0)]));
    }

    /// Free variables may go negative: x + y = 0 with x ≥ 2 forces y = −2.
    #[test]
    fn negative_values_reachable() {
        let cons = vec![
            LinConstraint::new(vec![r(1), r(1)], LinRel::Eq, r(0)),
            LinConstraint::new(vec![r(1), r(0)], LinRel::Ge, r(2)),
        ];
        let x = lin_feasible(2, &cons).expect("satisfiable");
        assert_eq!(&x[0] + &x[1], r(0));
        assert!(x[0] >= r(2));
        assert!(x[1] <= r(-2));
    }

    /// A strict constraint that only weakly holds is unsatisfiable:
    /// x ≥ 1, x ≤ 1, x < 1.
    #[test]
    fn strictness_matters() {
        let cons = vec![
            LinConstraint::new(vec![r(1)], LinRel::Ge, r(1)),
            LinConstraint::new(vec![r(1)], LinRel::Le, r(1)),
            LinConstraint::new(vec![r(1)], LinRel::Lt, r(1)),
        ];
        assert!(lin_feasible(1, &cons).is_none());
    }

    /// x² = 2 has no solution in [0, 1]: both defining inequalities force
    /// the square to 2 while the box caps it at 1, so the very first
    /// interval evaluation refutes the whole box.
    #[test]
    fn irrational_target_refuted() {
        let xx = Poly::var(0).mul(&Poly::var(0));
        let c1 = PolyConstraint::new(xx.add(&Poly::constant(r(-2))), PolyRel::Ge);
        let c2 = PolyConstraint::new(Poly::constant(r(2)).sub(&xx), PolyRel::Ge);
        assert_eq!(poly_feasible(1, &[c1, c2], 24), PolyOutcome::Unsat);
    }

    /// xy = 1/4 with x = y = 1/2 is witnessed by the box center at depth 0.
    #[test]
    fn center_witness() {
        let xy = Poly::var(0).mul(&Poly::var(1));
        let cons = vec![
            PolyConstraint::new(xy.add(&Poly::constant(rat(-1, 4))), PolyRel::Eq),
            PolyConstraint::new(Poly::var(0).add(&Poly::constant(rat(-1, 2))), PolyRel::Eq),
            PolyConstraint::new(Poly::var(1).add(&Poly::constant(rat(-1, 2))), PolyRel::Eq),
        ];
        match poly_feasible(2, &cons, 24) {
            PolyOutcome::Sat(p) => assert_eq!(p, vec![rat(1, 2), rat(1, 2)]),
            o => panic!("expected sat, got {:?}", o),
        }
    }

    /// −x² − 1 ≥ 0 is impossible; the root box is pruned before any split.
    #[test]
    fn negative_definite_pruned_immediately() {
        let xx = Poly::var(0).mul(&Poly::var(0));
        let p = xx.neg().add(&Poly::constant(r(-1)));
        assert_eq!(poly_feasible(1, &[PolyConstraint::new(p, PolyRel::Ge)], 0), PolyOutcome::Unsat);
    }

    /// An equation with an irrational root inside the box neither prunes
    /// nor witnesses, so the budget runs out: x² = 1/2.
    #[test]
    fn budget_exhaustion_reports_unknown() {
        let xx = Poly::var(0).mul(&Poly::var(0));
        let p = xx.add(&Poly::constant(rat(-1, 2)));
        assert_eq!(poly_feasible(1, &[PolyConstraint::new(p, PolyRel::Eq)], 8), PolyOutcome::Unknown);
    }

    /// Corners matter: x(1−x) ≤ 0 within [0,1] only holds at the endpoints,
    /// which the corner scan finds without splitting.
    #[test]
    fn corner_witness() {
        let p = Poly::var(0).mul(&Poly::constant(r(1)).sub(&Poly::var(0)));
        match poly_feasible(1, &[PolyConstraint::new(p, PolyRel::Le)], 24) {
            PolyOutcome::Sat(p) => assert!(p[0] == r(0) || p[0] == r(1)),
            o => panic!("expected sat, got {:?}", o),
        }
    }
}
