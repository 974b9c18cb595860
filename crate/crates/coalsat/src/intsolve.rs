//! Non-negative integer feasibility for linear systems with strict
//! inequalities, equations, and modular constraints.
//!
//! The pipeline: rewrite every row into equations over extended variables
//! (one fresh slack per inequality, a signed multiple of the modulus per
//! congruence branch), test plain integer solvability of each equation
//! system by column reduction, then decide each equation system. Systems
//! with small coefficients, which is everything assembled from formula
//! multiplicities, go to a digit automaton: processing variable bits
//! little-endian leaves a bounded carry vector per row, and reachability
//! of the zero carry decides feasibility without ever caring how large
//! the witness is. Systems the automaton cannot take (huge coefficients,
//! very many rows) go to branch and bound over the exact LP relaxation
//! instead, where solutions are bounded a priori: a feasible system has
//! a witness no larger than `B = (n+2)·((m+1)·a)^(2m+1)` with `a` the
//! largest absolute coefficient or right-hand side, so clamping the
//! search box to `[0, B]` keeps it finite without losing completeness.

use std::collections::{HashMap, VecDeque};

use crate::formula::IntRel;
use crate::simplex::{solve_lp, LinRow, LpOutcome, RowRel};
use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

/// One row `coeffs · x REL bound` over non-negative integer variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntRow {
    pub coeffs: Vec<BigInt>,
    pub rel: IntRel,
    pub bound: BigInt,
}

impl IntRow {
    pub fn new(coeffs: Vec<BigInt>, rel: IntRel, bound: BigInt) -> Self {
        IntRow { coeffs, rel, bound }
    }

    pub fn holds_at(&self, point: &[BigInt]) -> bool {
        let mut s = BigInt::zero();
        for (c, x) in self.coeffs.iter().zip(point) {
            s += c * x;
        }
        match &self.rel {
            IntRel::Lt => s < self.bound,
            IntRel::Gt => s > self.bound,
            IntRel::Eq => s == self.bound,
            IntRel::Mod(k) => {
                debug_assert!(k.is_positive());
                (s - &self.bound).mod_floor(k).is_zero()
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct IntSystem {
    pub num_vars: usize,
    pub rows: Vec<IntRow>,
}

/// A pure equation system `Σ coeffs · x = bound` over non-negative integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqSystem {
    pub num_vars: usize,
    pub rows: Vec<(Vec<BigInt>, BigInt)>,
}

/// Rewrites a mixed system into equation systems over extended variables.
/// Strict bounds absorb into a slack (`s > v` into `s − y = v+1`, `s < v`
/// into `s + y = v−1`); each congruence `s ≡_k v` splits into the two
/// branches `s − k·y = v` and `s + k·y = v`, so the result is the cartesian
/// product over all congruence rows. Original variables keep their indices;
/// slacks follow in row order.
pub fn normalize(sys: &IntSystem) -> Vec<EqSystem> {
    let n = sys.num_vars;
    let extra = sys.rows.iter().filter(|r| r.rel != IntRel::Eq).count();
    let width = n + extra;

    // Template rows with a per-congruence slot for the branch sign.
    let mut slack_at = n;
    let mut template: Vec<(Vec<BigInt>, BigInt)> = Vec::with_capacity(sys.rows.len());
    let mut mod_slots: Vec<(usize, usize, BigInt)> = Vec::new();
    for (ri, row) in sys.rows.iter().enumerate() {
        let mut coeffs = vec![BigInt::zero(); width];
        coeffs[..n].clone_from_slice(&row.coeffs);
        let bound = match &row.rel {
            IntRel::Eq => row.bound.clone(),
            IntRel::Gt => {
                coeffs[slack_at] = -BigInt::one();
                slack_at += 1;
                &row.bound + 1
            }
            IntRel::Lt => {
                coeffs[slack_at] = BigInt::one();
                slack_at += 1;
                &row.bound - 1
            }
            IntRel::Mod(k) => {
                debug_assert!(k.is_positive());
                mod_slots.push((ri, slack_at, k.clone()));
                slack_at += 1;
                row.bound.clone()
            }
        };
        template.push((coeffs, bound));
    }

    let mut branches = Vec::with_capacity(1 << mod_slots.len());
    for choice in 0..(1usize << mod_slots.len()) {
        let mut rows = template.clone();
        for (bit, (ri, col, k)) in mod_slots.iter().enumerate() {
            // Bit clear: subtract a multiple of k; bit set: add one.
            rows[*ri].0[*col] = if choice >> bit & 1 == 0 { -k } else { k.clone() };
        }
        branches.push(EqSystem { num_vars: width, rows });
    }
    branches
}

/// Integer solvability of `A·x = b` with x unrestricted in sign, by
/// unimodular column reduction to echelon form followed by forward
/// substitution with divisibility checks. A cheap complete pretest that
/// rejects systems like `2x = 1` or parity ladders before any LP work.
fn z_solvable(eq: &EqSystem) -> bool {
    let m = eq.rows.len();
    let n = eq.num_vars;
    let mut a: Vec<Vec<BigInt>> = eq.rows.iter().map(|(c, _)| c.clone()).collect();
    let mut residual: Vec<BigInt> = eq.rows.iter().map(|(_, b)| b.clone()).collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();

    let mut p = 0;
    for r in 0..m {
        if p >= n {
            break;
        }
        // Gather the row's gcd into column p, zeroing the columns after it.
        loop {
            let best = (p..n)
                .filter(|&j| !a[r][j].is_zero())
                .min_by_key(|&j| a[r][j].abs());
            let Some(jmin) = best else { break };
            if jmin != p {
                for row in a.iter_mut() {
                    row.swap(p, jmin);
                }
            }
            let mut reduced_all = true;
            for j in p + 1..n {
                if a[r][j].is_zero() {
                    continue;
                }
                let q = a[r][j].div_floor(&a[r][p]);
                if !q.is_zero() {
                    for row in a.iter_mut() {
                        let d = &row[p] * &q;
                        row[j] -= d;
                    }
                }
                if !a[r][j].is_zero() {
                    reduced_all = false;
                }
            }
            if reduced_all {
                break;
            }
        }
        if !a[r][p].is_zero() {
            pivots.push((r, p));
            p += 1;
        }
    }

    // Forward substitution: each pivot row determines one column value;
    // rows without a pivot must have zero residual.
    let mut next_pivot = 0;
    for r in 0..m {
        if next_pivot < pivots.len() && pivots[next_pivot].0 == r {
            let (_, col) = pivots[next_pivot];
            next_pivot += 1;
            let (q, rem) = residual[r].div_rem(&a[r][col]);
            if !rem.is_zero() {
                return false;
            }
            if !q.is_zero() {
                for i in 0..m {
                    let d = &a[i][col] * &q;
                    residual[i] -= d;
                }
            }
        } else if !residual[r].is_zero() {
            return false;
        }
    }
    true
}

fn magnitude_bound(eq: &EqSystem) -> BigInt {
    let mut a = BigInt::one();
    for (coeffs, bound) in &eq.rows {
        for c in coeffs {
            if c.abs() > a {
                a = c.abs();
            }
        }
        if bound.abs() > a {
            a = bound.abs();
        }
    }
    let n = BigInt::from(eq.num_vars as u64);
    let m = BigInt::from(eq.rows.len() as u64);
    let base: BigInt = (m + 1) * a;
    let exp = 2 * eq.rows.len() as u32 + 1;
    (n + 2) * num::pow::pow(base, exp as usize)
}

fn lp_relaxation(eq: &EqSystem, lo: &[BigInt], hi: &[BigInt]) -> Option<Vec<BigRational>> {
    let n = eq.num_vars;
    let mut rows: Vec<LinRow> = Vec::with_capacity(eq.rows.len() + 2 * n);
    for (coeffs, bound) in &eq.rows {
        rows.push(LinRow::new(
            coeffs.iter().map(|c| BigRational::from(c.clone())).collect(),
            RowRel::Eq,
            BigRational::from(bound.clone()),
        ));
    }
    for i in 0..n {
        if lo[i].is_positive() {
            let mut c = vec![BigRational::zero(); n];
            c[i] = BigRational::one();
            rows.push(LinRow::new(c, RowRel::Ge, BigRational::from(lo[i].clone())));
        }
        let mut c = vec![BigRational::zero(); n];
        c[i] = BigRational::one();
        rows.push(LinRow::new(c, RowRel::Le, BigRational::from(hi[i].clone())));
    }
    // Minimize the coordinate sum. A pure feasibility solve may return a
    // vertex at the witness-bound walls, and branching near such huge
    // values stalls; pulling the relaxation toward the origin lands it
    // next to the small witnesses that feasible systems of this size
    // always have.
    let objective: Vec<BigRational> = vec![-BigRational::one(); n];
    match solve_lp(n, &rows, Some(&objective)) {
        LpOutcome::Optimal { point, .. } => Some(point),
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("feasibility LP is box-bounded"),
    }
}

/// Lattice solvability of the system residual to the box: variables
/// pinned to a single value substitute into the right-hand side, and the
/// rest must still admit an integer (sign-unrestricted) solution. Boxes
/// routinely pin variables to values that strand the remaining lattice,
/// e.g. `-2y + 2z = -1` after pinning the odd-coefficient variables, and
/// the relaxation stays feasible along the whole slope of such a system,
/// so without this check the search refutes it one unit box at a time.
fn residual_z_solvable(eq: &EqSystem, lo: &[BigInt], hi: &[BigInt]) -> bool {
    let rows = eq
        .rows
        .iter()
        .map(|(coeffs, bound)| {
            let mut c = coeffs.clone();
            let mut b = bound.clone();
            for i in 0..eq.num_vars {
                if lo[i] == hi[i] && !c[i].is_zero() {
                    b -= &c[i] * &lo[i];
                    c[i] = BigInt::zero();
                }
            }
            (c, b)
        })
        .collect();
    z_solvable(&EqSystem { num_vars: eq.num_vars, rows })
}

/// Branch and bound over the box `[lo, hi]` on the most fractional
/// relaxation variable. While a node has `fuel`, the interval splits at
/// the relaxation value (floor/ceiling children), which walks straight
/// into the solution region on well-behaved instances but only
/// guarantees unit progress per level; once fuel runs out the split
/// point moves to the interval midpoint, which halves the width no
/// matter where the relaxation lands. The work list is explicit because
/// the guided phase can descend thousands of nodes deep on adversarial
/// geometry, deeper than any sane call stack.
fn branch_and_bound(
    eq: &EqSystem,
    lo: Vec<BigInt>,
    hi: Vec<BigInt>,
    fuel: u32,
) -> Option<Vec<BigInt>> {
    let mut work = vec![(lo, hi, fuel)];
    while let Some((lo, hi, fuel)) = work.pop() {
        if !residual_z_solvable(eq, &lo, &hi) {
            continue;
        }
        let Some(point) = lp_relaxation(eq, &lo, &hi) else {
            continue;
        };
        // Most fractional variable; ties go to the lowest index.
        let mut pick: Option<(usize, BigRational, BigRational)> = None;
        for (i, v) in point.iter().enumerate() {
            let frac = v - v.floor();
            if frac.is_zero() {
                continue;
            }
            let dist = std::cmp::min(frac.clone(), BigRational::one() - &frac);
            match &pick {
                Some((_, _, best)) if dist <= *best => {}
                _ => pick = Some((i, v.clone(), dist)),
            }
        }
        let Some((i, v, _)) = pick else {
            return Some(point.iter().map(|v| v.to_integer()).collect());
        };
        // A fractional value needs room: lo[i] = hi[i] would force it
        // integral.
        debug_assert!(lo[i] < hi[i]);
        let guided = fuel > 0;
        let split = if guided {
            v.floor().to_integer()
        } else {
            (&lo[i] + &hi[i]).div_floor(&BigInt::from(2))
        };
        let fuel = fuel.saturating_sub(1);

        let mut lower = (lo.clone(), hi.clone(), fuel);
        lower.1[i] = split.clone();
        let mut upper = (lo, hi, fuel);
        upper.0[i] = &split + 1;

        // Guided splits take the floor side first; midpoint splits take
        // the half containing the relaxation value. The preferred child
        // goes on top of the stack.
        if guided || v <= BigRational::from(split) {
            work.push(upper);
            work.push(lower);
        } else {
            work.push(lower);
            work.push(upper);
        }
    }
    None
}

/// Cap on stored automaton states; past it the search gives up and the
/// caller falls back to branch and bound. Systems built from formula
/// multiplicities stay in the low thousands.
const DIGIT_MAX_STATES: usize = 200_000;

/// The automaton works in `i64` carries, so every coefficient and bound
/// must be small enough that a carry plus one column sum cannot overflow.
fn digit_limits(eq: &EqSystem) -> bool {
    let small = BigInt::from(1u32 << 20);
    eq.num_vars <= 64
        && eq.rows.len() <= 16
        && eq
            .rows
            .iter()
            .all(|(c, b)| b.abs() <= small && c.iter().all(|x| x.abs() <= small))
}

/// Little-endian digit search for `A·x = b` over non-negative integers.
///
/// Fixing the low `k` bits of every variable leaves the per-row residue
/// `(b − A·x_low) / 2^k` to be covered by the remaining bits. The search
/// walks states `(j, t)`: within one bit level, variables are decided one
/// at a time, `t` holding the carry with the contributions of variables
/// `0..j` already subtracted. At `j = n` a carry that is even in every
/// row halves into the next level; an odd component is a dead end. Any
/// state with `t = 0` accepts, since all remaining digits can be zero.
/// Carries contract into `|t_i| ≤ 2·Σ_j |a_ij|` once the bits of `b` are
/// consumed, so the reachable space is finite and breadth-first search
/// decides feasibility exactly, no matter how large the smallest witness
/// is. Per-variable decision keeps the branching factor at two, so width
/// (many variables) costs only path length, never fan-out.
///
/// Returns `None` when the state cap is hit (inconclusive), otherwise
/// the definitive answer.
fn digit_search(eq: &EqSystem) -> Option<Option<Vec<BigInt>>> {
    let n = eq.num_vars;
    let a: Vec<Vec<i64>> = eq
        .rows
        .iter()
        .map(|(c, _)| c.iter().map(|x| x.to_i64().expect("digit_limits bounds coeffs")).collect())
        .collect();
    let start: Vec<i64> =
        eq.rows.iter().map(|(_, b)| b.to_i64().expect("digit_limits bounds rhs")).collect();
    if start.iter().all(|&c| c == 0) {
        return Some(Some(vec![BigInt::zero(); n]));
    }

    type State = (usize, Vec<i64>);
    // Edge label: 0/1 = digit chosen for variable `prev.0`, 2 = halving.
    let mut parent: HashMap<State, (State, u8)> = HashMap::new();
    let mut queue: VecDeque<State> = VecDeque::new();
    let root: State = (0, start);
    queue.push_back(root.clone());
    let mut accept: Option<State> = None;
    'search: while let Some(state) = queue.pop_front() {
        let (j, t) = &state;
        let steps: &[u8] = if *j < n { &[0, 1] } else { &[2] };
        for &label in steps {
            let next: State = match label {
                0 => (j + 1, t.clone()),
                1 => (j + 1, t.iter().enumerate().map(|(i, v)| v - a[i][*j]).collect()),
                _ => {
                    if t.iter().any(|v| v & 1 != 0) {
                        continue;
                    }
                    (0, t.iter().map(|v| v >> 1).collect())
                }
            };
            if parent.contains_key(&next) || next == root {
                continue;
            }
            if parent.len() >= DIGIT_MAX_STATES {
                return None;
            }
            parent.insert(next.clone(), (state.clone(), label));
            if next.1.iter().all(|&v| v == 0) {
                accept = Some(next);
                break 'search;
            }
            queue.push_back(next);
        }
    }

    let Some(mut cur) = accept else {
        return Some(None);
    };
    // Replay the path root -> accept; digits appear lowest bit first.
    let mut path = Vec::new();
    while cur != root {
        let (prev, label) = parent[&cur].clone();
        path.push((prev.0, label));
        cur = prev;
    }
    path.reverse();
    let mut x = vec![BigInt::zero(); n];
    let mut level = 0usize;
    for (var, label) in path {
        match label {
            1 => x[var] += BigInt::one() << level,
            2 => level += 1,
            _ => {}
        }
    }
    Some(Some(x))
}

fn eq_feasible(eq: &EqSystem) -> Option<Vec<BigInt>> {
    let probe_t = std::time::Instant::now();
    let out = eq_feasible_inner(eq);
    if probe_t.elapsed().as_millis() > 200 {
        eprintln!(
            "SLOW eq_feasible {:?} sat={} digit_limits={} {:?}",
            probe_t.elapsed(),
            out.is_some(),
            digit_limits(eq),
            eq
        );
    }
    out
}

fn eq_feasible_inner(eq: &EqSystem) -> Option<Vec<BigInt>> {
    if !z_solvable(eq) {
        return None;
    }
    if digit_limits(eq) {
        if let Some(answer) = digit_search(eq) {
            let sol = answer?;
            debug_assert!(eq
                .rows
                .iter()
                .all(|(c, b)| c.iter().zip(&sol).map(|(ci, xi)| ci * xi).sum::<BigInt>() == *b));
            return Some(sol);
        }
    }
    // Any feasible system has a witness within [0, cap]^n, so searching
    // the clamped box is complete.
    let cap = magnitude_bound(eq);
    let lo = vec![BigInt::zero(); eq.num_vars];
    let hi = vec![cap; eq.num_vars];
    let fuel = 64 * eq.num_vars.max(1) as u32;
    let sol = branch_and_bound(eq, lo, hi, fuel)?;
    debug_assert!(eq
        .rows
        .iter()
        .all(|(c, b)| c.iter().zip(&sol).map(|(ci, xi)| ci * xi).sum::<BigInt>() == *b));
    Some(sol)
}

fn raw_feasible(sys: &IntSystem) -> Option<Vec<BigInt>> {
    // Merge variables with identical coefficient columns: every row sees
    // only their sum, so the merged system is equifeasible, and a merged
    // witness expands by carrying the whole value on one representative.
    // One-step systems routinely hold a variable per successor candidate
    // (thousands) over a handful of distinct columns, and none of the
    // solving machinery below survives that many variables.
    let mut groups: HashMap<Vec<BigInt>, usize> = HashMap::new();
    let mut rep: Vec<usize> = Vec::with_capacity(sys.num_vars);
    let mut owner: Vec<usize> = Vec::new();
    for i in 0..sys.num_vars {
        let col: Vec<BigInt> = sys.rows.iter().map(|r| r.coeffs[i].clone()).collect();
        let next = groups.len();
        let g = *groups.entry(col).or_insert(next);
        if g == owner.len() {
            owner.push(i);
        }
        rep.push(g);
    }
    let reduced = IntSystem {
        num_vars: owner.len(),
        rows: sys
            .rows
            .iter()
            .map(|r| {
                IntRow::new(
                    owner.iter().map(|&i| r.coeffs[i].clone()).collect(),
                    r.rel.clone(),
                    r.bound.clone(),
                )
            })
            .collect(),
    };
    for branch in normalize(&reduced) {
        if let Some(ext) = eq_feasible(&branch) {
            let mut x = vec![BigInt::zero(); sys.num_vars];
            for (g, &i) in owner.iter().enumerate() {
                x[i] = ext[g].clone();
            }
            assert!(
                sys.rows.iter().all(|r| r.holds_at(&x)),
                "merged solution must project onto the original rows"
            );
            return Some(x);
        }
    }
    None
}

fn with_zero_rows(sys: &IntSystem, zeros: &[usize]) -> IntSystem {
    let mut out = sys.clone();
    for &i in zeros {
        let mut coeffs = vec![BigInt::zero(); sys.num_vars];
        coeffs[i] = BigInt::one();
        out.rows.push(IntRow::new(coeffs, IntRel::Eq, BigInt::zero()));
    }
    out
}

/// Decides the system over non-negative integers, returning a witness with
/// greedily minimized support: each originally nonzero variable is re-tried
/// at zero in ascending index order, keeping any re-solve that stays
/// feasible. Complete; never returns a spurious verdict.
pub fn feasible(sys: &IntSystem) -> Option<Vec<BigInt>> {
    let mut x = raw_feasible(sys)?;
    let mut zeros: Vec<usize> = Vec::new();
    for i in 0..sys.num_vars {
        if x[i].is_zero() {
            continue;
        }
        let mut attempt = zeros.clone();
        attempt.push(i);
        if let Some(better) = raw_feasible(&with_zero_rows(sys, &attempt)) {
            x = better;
            zeros = attempt;
        }
    }
    debug_assert!(sys.rows.iter().all(|r| r.holds_at(&x)));
    Some(x)
}
