//! Dense two-phase simplex over exact rationals.
//!
//! Solves `maximize c·x subject to rows, x ≥ 0` where each row is a weak
//! inequality or an equation. Bland's rule on both the entering and the
//! leaving choice rules out cycling, so the solver is complete: it always
//! terminates with Optimal, Infeasible, or Unbounded. No floating point
//! anywhere; callers that need strict inequalities or free variables
//! encode them (epsilon column, variable splitting) on top of this.

use num::{BigRational, One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowRel {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct LinRow {
    pub coeffs: Vec<BigRational>,
    pub rel: RowRel,
    pub bound: BigRational,
}

impl LinRow {
    pub fn new(coeffs: Vec<BigRational>, rel: RowRel, bound: BigRational) -> Self {
        LinRow { coeffs, rel, bound }
    }
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    /// Optimal point (structural variables only) and objective value.
    /// With no objective this is just a feasible point and value 0.
    Optimal { point: Vec<BigRational>, value: BigRational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// m × n constraint matrix in canonical form (basis columns are unit).
    a: Vec<Vec<BigRational>>,
    /// Right-hand sides, kept non-negative.
    b: Vec<BigRational>,
    /// Reduced-cost row for maximization: positive entry = improving column.
    obj: Vec<BigRational>,
    /// Current objective value.
    val: BigRational,
    /// Basic column of each row.
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.a[r][c].clone();
        debug_assert!(!piv.is_zero());
        for x in self.a[r].iter_mut() {
            *x = &*x / &piv;
        }
        self.b[r] = &self.b[r] / &piv;
        for i in 0..self.a.len() {
            if i == r {
                continue;
            }
            let f = self.a[i][c].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..self.a[i].len() {
                let d = &self.a[r][j] * &f;
                self.a[i][j] = &self.a[i][j] - d;
            }
            let d = &self.b[r] * &f;
            self.b[i] = &self.b[i] - d;
        }
        let f = self.obj[c].clone();
        if !f.is_zero() {
            for j in 0..self.obj.len() {
                let d = &self.a[r][j] * &f;
                self.obj[j] = &self.obj[j] - d;
            }
            let d = &self.b[r] * &f;
            self.val = &self.val + d;
        }
        self.basis[r] = c;
    }

    /// Runs Bland-rule simplex to optimality. Returns false on unbounded.
    fn optimize(&mut self) -> bool {
        loop {
            // Entering: smallest-index column with positive reduced cost.
            let Some(c) = (0..self.obj.len()).find(|&j| self.obj[j].is_positive()) else {
                return true;
            };
            // Leaving: minimum ratio; ties by smallest basic column index.
            let mut best: Option<(usize, BigRational)> = None;
            for r in 0..self.a.len() {
                if !self.a[r][c].is_positive() {
                    continue;
                }
                let ratio = &self.b[r] / &self.a[r][c];
                let better = match &best {
                    None => true,
                    Some((br, bratio)) => {
                        ratio < *bratio || (ratio == *bratio && self.basis[r] < self.basis[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

/// Maximizes `objective · x` subject to the rows and `x ≥ 0`. Pass `None`
/// for a pure feasibility check.
pub fn solve_lp(num_vars: usize, rows: &[LinRow], objective: Option<&[BigRational]>) -> LpOutcome {
    // Normalize to b ≥ 0 and count auxiliary columns.
    let mut norm: Vec<(Vec<BigRational>, RowRel, BigRational)> = Vec::with_capacity(rows.len());
    for row in rows {
        debug_assert_eq!(row.coeffs.len(), num_vars);
        if row.bound.is_negative() {
            let coeffs = row.coeffs.iter().map(|c| -c).collect();
            let rel = match row.rel {
                RowRel::Le => RowRel::Ge,
                RowRel::Ge => RowRel::Le,
                RowRel::Eq => RowRel::Eq,
            };
            norm.push((coeffs, rel, -&row.bound));
        } else {
            norm.push((row.coeffs.clone(), row.rel, row.bound.clone()));
        }
    }
    let m = norm.len();
    let n_slack: usize = norm.iter().filter(|(_, rel, _)| *rel != RowRel::Eq).count();
    let n_art: usize = norm.iter().filter(|(_, rel, _)| *rel != RowRel::Le).count();
    let total = num_vars + n_slack + n_art;

    let mut a = vec![vec![BigRational::zero(); total]; m];
    let mut b = Vec::with_capacity(m);
    let mut basis = vec![0usize; m];
    let mut slack_at = num_vars;
    let mut art_at = num_vars + n_slack;
    let mut art_cols = Vec::new();
    for (i, (coeffs, rel, bound)) in norm.iter().enumerate() {
        for (j, c) in coeffs.iter().enumerate() {
            a[i][j] = c.clone();
        }
        b.push(bound.clone());
        match rel {
            RowRel::Le => {
                a[i][slack_at] = BigRational::one();
                basis[i] = slack_at;
                slack_at += 1;
            }
            RowRel::Ge => {
                a[i][slack_at] = -BigRational::one();
                slack_at += 1;
                a[i][art_at] = BigRational::one();
                basis[i] = art_at;
                art_cols.push(art_at);
                art_at += 1;
            }
            RowRel::Eq => {
                a[i][art_at] = BigRational::one();
                basis[i] = art_at;
                art_cols.push(art_at);
                art_at += 1;
            }
        }
    }

    let mut t = Tableau { a, b, obj: vec![BigRational::zero(); total], val: BigRational::zero(), basis };

    // Phase I: maximize −Σ artificials; feasible iff the optimum is 0.
    if !art_cols.is_empty() {
        for &c in &art_cols {
            t.obj[c] = -BigRational::one();
        }
        // Canonicalize: basic artificial columns must have zero reduced cost.
        // Adding row r to obj means subtracting with factor −1, so the value
        // at the initial basis picks up −b[r] per artificial row.
        for r in 0..m {
            if art_cols.contains(&t.basis[r]) {
                for j in 0..total {
                    let d = t.a[r][j].clone();
                    t.obj[j] = &t.obj[j] + d;
                }
                t.val = &t.val - &t.b[r];
            }
        }
        let bounded = t.optimize();
        debug_assert!(bounded, "phase I objective is bounded by 0");
        if t.val.is_negative() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-valued artificials out of the basis. Rows where that is
        // impossible are all-zero over real columns, hence redundant: drop
        // them. Afterwards the artificial columns (which sit at the end) can
        // be deleted wholesale, restoring a clean canonical tableau.
        let mut r = 0;
        while r < t.a.len() {
            if art_cols.contains(&t.basis[r]) {
                debug_assert!(t.b[r].is_zero());
                match (0..num_vars + n_slack).find(|&j| !t.a[r][j].is_zero()) {
                    Some(c) => {
                        t.pivot(r, c);
                        r += 1;
                    }
                    None => {
                        t.a.remove(r);
                        t.b.remove(r);
                        t.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        for row in t.a.iter_mut() {
            row.truncate(num_vars + n_slack);
        }
    }
    let width = num_vars + n_slack;

    // Phase II objective over structural variables.
    t.obj = vec![BigRational::zero(); width];
    t.val = BigRational::zero();
    if let Some(c) = objective {
        debug_assert_eq!(c.len(), num_vars);
        for (j, cj) in c.iter().enumerate() {
            t.obj[j] = cj.clone();
        }
        for r in 0..t.a.len() {
            let bc = t.basis[r];
            let f = t.obj[bc].clone();
            if !f.is_zero() {
                for j in 0..width {
                    let d = &t.a[r][j] * &f;
                    t.obj[j] = &t.obj[j] - d;
                }
                let d = &t.b[r] * &f;
                t.val = &t.val + d;
            }
        }
        if !t.optimize() {
            return LpOutcome::Unbounded;
        }
    }

    let mut point = vec![BigRational::zero(); num_vars];
    for r in 0..t.a.len() {
        if t.basis[r] < num_vars {
            point[t.basis[r]] = t.b[r].clone();
        }
    }
    LpOutcome::Optimal { point, value: t.val }
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

    /// max x+y with x+y ≤ 1 and x ≤ 1/2 attains 1.
    #[test]
    fn bounded_maximum() {
        let rows = vec![
            LinRow::new(vec![r(1), r(1)], RowRel::Le, r(1)),
            LinRow::new(vec![r(1), r(0)], RowRel::Le, rat(1, 2)),
        ];
        match solve_lp(2, &rows, Some(&[r(1), r(1)])) {
            LpOutcome::Optimal { point, value } => {
                assert_eq!(value, r(1));
                assert_eq!(&point[0] + &point[1], r(1));
            }
            o => panic!("expected optimal, got {:?}", o),
        }
    }

    /// Conflicting bounds are infeasible.
    #[test]
    fn infeasible_detected() {
        let rows = vec![
            LinRow::new(vec![r(1)], RowRel::Ge, r(1)),
            LinRow::new(vec![r(1)], RowRel::Le, r(0)),
        ];
        assert!(matches!(solve_lp(1, &rows, None), LpOutcome::Infeasible));
    }

    /// Maximizing an unconstrained variable is unbounded.
    #[test]
    fn unbounded_detected() {
        assert!(matches!(solve_lp(1, &[], Some(&[r(1)])), LpOutcome::Unbounded));
    }

    /// Equations pin the solution exactly: x+y=2, x−y=0 gives (1,1).
    #[test]
    fn equations_solve_exactly() {
        let rows = vec![
            LinRow::new(vec![r(1), r(1)], RowRel::Eq, r(2)),
            LinRow::new(vec![r(1), r(-1)], RowRel::Eq, r(0)),
        ];
        match solve_lp(2, &rows, Some(&[r(1), r(0)])) {
            LpOutcome::Optimal { point, value } => {
                assert_eq!(point, vec![r(1), r(1)]);
                assert_eq!(value, r(1));
            }
            o => panic!("expected optimal, got {:?}", o),
        }
    }

    /// Feasibility with no objective returns some point of the polytope.
    #[test]
    fn pure_feasibility() {
        let rows = vec![LinRow::new(vec![r(2), r(3)], RowRel::Eq, r(6))];
        match solve_lp(2, &rows, None) {
            LpOutcome::Optimal { point, .. } => {
                let lhs = &point[0] * r(2) + &point[1] * r(3);
                assert_eq!(lhs, r(6));
                assert!(!point[0].is_negative() && !point[1].is_negative());
            }
            o => panic!("expected a feasible point, got {:?}", o),
        }
    }

    /// Degenerate ties do not cycle (Bland's rule).
    #[test]
    fn degenerate_terminates() {
        // Classic cycling-prone tableau (Beale): terminates under Bland.
        let rows = vec![
            LinRow::new(vec![rat(1, 4), r(-60), rat(-1, 25), r(9)], RowRel::Le, r(0)),
            LinRow::new(vec![rat(1, 2), r(-90), rat(-1, 50), r(3)], RowRel::Le, r(0)),
            LinRow::new(vec![r(0), r(0), r(1), r(0)], RowRel::Le, r(1)),
        ];
        let obj = [rat(3, 4), r(-150), rat(1, 50), r(-6)];
        match solve_lp(4, &rows, Some(&obj)) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(1, 20)),
            o => panic!("expected optimal, got {:?}", o),
        }
    }
}
