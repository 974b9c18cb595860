//! Multivariate polynomials with exact rational coefficients.
//!
//! Used for probabilistic modal atoms p(w(φ1),…,w(φn)) ≥ 0 and for the real
//! feasibility backends. Terms are kept in a canonical order (monomials as
//! exponent vectors under lexicographic order), so structural equality and
//! hashing are meaningful and printing is deterministic.

use num::{BigRational, One, Zero};
use std::collections::BTreeMap;

/// Exponent vector, one entry per variable index, trailing zeros trimmed.
/// The empty vector is the constant monomial.
pub type Monomial = Vec<u32>;

fn trim(mut m: Monomial) -> Monomial {
    while m.last() == Some(&0) {
        m.pop();
    }
    m
}

/// A polynomial with `BigRational` coefficients over variables X0, X1, ….
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

// Ratios are kept reduced, so hashing numerator and denominator separately
// is consistent with equality.
impl std::hash::Hash for Poly {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for (m, c) in &self.terms {
            m.hash(state);
            c.numer().hash(state);
            c.denom().hash(state);
        }
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        p.add_term(vec![], c);
        p
    }

    pub fn var(i: usize) -> Self {
        let mut m = vec![0; i + 1];
        m[i] = 1;
        let mut p = Poly::zero();
        p.add_term(m, BigRational::one());
        p
    }

    /// Adds `c · X^m`, dropping the term if the coefficient cancels to zero.
    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let m = trim(m);
        let entry = self.terms.entry(m.clone()).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True iff the polynomial is a constant (possibly zero).
    pub fn constant_value(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&vec![]).cloned(),
            _ => None,
        }
    }

    /// Total degree; 0 for constants and the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.degree() <= 1
    }

    /// Largest variable index mentioned, plus one.
    pub fn num_vars(&self) -> usize {
        self.terms.keys().map(|m| m.len()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, c) in &other.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }

    pub fn neg(&self) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in &self.terms {
            p.add_term(m.clone(), -c.clone());
        }
        p
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut p = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let n = ma.len().max(mb.len());
                let mut m = vec![0u32; n];
                for (i, e) in ma.iter().enumerate() {
                    m[i] += e;
                }
                for (i, e) in mb.iter().enumerate() {
                    m[i] += e;
                }
                p.add_term(m, ca * cb);
            }
        }
        p
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        self.mul(&Poly::constant(c.clone()))
    }

    /// Substitutes X_i := subs[i] for every variable; `subs` must cover all
    /// variables the polynomial mentions.
    pub fn substitute(&self, subs: &[Poly]) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for (i, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    term = term.mul(&subs[i]);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Remaps variable indices: X_i becomes X_{map[i]}.
    pub fn remap(&self, map: &[usize]) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let n = m
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(i, _)| map[i] + 1)
                .max()
                .unwrap_or(0);
            let mut nm = vec![0u32; n];
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    nm[map[i]] += e;
                }
            }
            out.add_term(nm, c.clone());
        }
        out
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    t *= &point[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Interval evaluation over a box: returns exact rational lower and
    /// upper bounds of the polynomial's range over the box (sound, not
    /// necessarily tight).
    pub fn eval_interval(&self, lo: &[BigRational], hi: &[BigRational]) -> (BigRational, BigRational) {
        let mut acc = (BigRational::zero(), BigRational::zero());
        for (m, c) in &self.terms {
            let mut t = (c.clone(), c.clone());
            for (i, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    t = interval_mul(&t, &(lo[i].clone(), hi[i].clone()));
                }
            }
            acc = (acc.0 + t.0, acc.1 + t.1);
        }
        acc
    }
}

fn interval_mul(a: &(BigRational, BigRational), b: &(BigRational, BigRational)) -> (BigRational, BigRational) {
    let products = [&a.0 * &b.0, &a.0 * &b.1, &a.1 * &b.0, &a.1 * &b.1];
    let mut lo = products[0].clone();
    let mut hi = products[0].clone();
    for p in &products[1..] {
        if p < &lo {
            lo = p.clone();
        }
        if p > &hi {
            hi = p.clone();
        }
    }
    (lo, hi)
}

impl std::fmt::Debug for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", c)?;
            for (i, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    write!(f, "*X{}", i)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// (X0 + 1)·(X0 − 1) = X0² − 1, evaluated at 3 gives 8.
    #[test]
    fn mul_and_eval() {
        let p = Poly::var(0).add(&Poly::constant(rat(1, 1)));
        let q = Poly::var(0).sub(&Poly::constant(rat(1, 1)));
        let pq = p.mul(&q);
        assert_eq!(pq.degree(), 2);
        assert_eq!(pq.eval(&[rat(3, 1)]), rat(8, 1));
    }

    /// Substituting X0 := Y0 + Y1 into X0² expands to Y0² + 2·Y0·Y1 + Y1².
    #[test]
    fn substitution() {
        let sq = Poly::var(0).mul(&Poly::var(0));
        let sum = Poly::var(0).add(&Poly::var(1));
        let expanded = sq.substitute(&[sum]);
        assert_eq!(expanded.eval(&[rat(2, 1), rat(3, 1)]), rat(25, 1));
        assert_eq!(expanded.degree(), 2);
    }

    /// Interval bounds are sound: the true value at the box midpoint lies
    /// inside the computed interval.
    #[test]
    fn interval_soundness() {
        // X0·X1 − X0² on [0,1]×[0,1].
        let p = Poly::var(0).mul(&Poly::var(1)).sub(&Poly::var(0).mul(&Poly::var(0)));
        let (lo, hi) = p.eval_interval(&[rat(0, 1), rat(0, 1)], &[rat(1, 1), rat(1, 1)]);
        let mid = p.eval(&[rat(1, 2), rat(1, 2)]);
        assert!(lo <= mid && mid <= hi);
        // The range of X0·X1 − X0² over the unit box is [−1, 1] by the crude
        // product bound; sound bounds must contain [−1/4, 1/4].
        assert!(lo <= rat(-1, 4) && hi >= rat(1, 4));
    }

    /// Cancelling terms vanish entirely (canonical representation).
    #[test]
    fn cancellation() {
        let p = Poly::var(1).sub(&Poly::var(1));
        assert!(p.is_zero());
        assert_eq!(p.num_vars(), 0);
    }
}
