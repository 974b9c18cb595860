//! Lexer and recursive-descent parser for the concrete formula grammar,
//! plus per-logic adaptation of parsed formulas.
//!
//! Precedence, low to high:
//!
//! ```text
//! formula := iff
//! iff     := imp (`<->` imp)*             left associative
//! imp     := or (`->` imp)?               right associative
//! or      := and (`|` and)*
//! and     := unary (`&` unary)*
//! unary   := `~`u | `<>`u | `[]`u | `A` u | `@'i` u | primary
//! primary := `true` | `false` | atom | `'nominal` | `(` formula `)` | relatom
//! relatom := arith REL arith              REL ∈ { < > <= >= = =mod k= }
//! arith   := term ((`+`|`-`) term)*
//! term    := factor (`*` factor)*
//! factor  := `-` factor | INT (`/` INT)? | `#(` formula `)` | `w(` formula `)`
//! ```
//!
//! All sugar desugars here: `∨ → ↔` via `¬∧`, `[]φ = ~<>~φ`, weak counting
//! inequalities shift the bound by one, and probabilistic comparisons other
//! than `≥ 0` reduce via negation and polynomial negation.

use crate::error::{Error, Result};
use crate::formula::{Fid, IntRel, Node, Store};
use crate::poly::Poly;
use crate::Logic;
use num::{BigInt, BigRational, One, Signed, Zero};
use std::collections::HashMap;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    Iff,
    True,
    False,
    Ident(String),
    Nominal(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    Hash,
    At,
    Dia,
    Box_,
    UnivA,
    Lt,
    Gt,
    Le,
    Ge,
    EqTok,
    EqMod,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    kind: Tok,
    line: usize,
    col: usize,
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn starts_with(chars: &[char], pat: &str) -> bool {
    pat.len() <= chars.len() && pat.chars().zip(chars).all(|(a, &b)| a == b)
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0usize;
    let mut line = 1usize;
    let mut col = 1usize;
    let err = |line: usize, col: usize, msg: String| Error::Parse { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let (tl, tc) = (line, col);
        let rest = &chars[i..];
        // Multi-character operators use maximal munch.
        let (kind, width) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '~' => (Tok::Tilde, 1),
            '&' => (Tok::Amp, 1),
            '|' => (Tok::Pipe, 1),
            '+' => (Tok::Plus, 1),
            '*' => (Tok::Star, 1),
            '/' => (Tok::Slash, 1),
            '#' => (Tok::Hash, 1),
            '@' => (Tok::At, 1),
            '<' => {
                if starts_with(rest, "<->") {
                    (Tok::Iff, 3)
                } else if starts_with(rest, "<=") {
                    (Tok::Le, 2)
                } else if starts_with(rest, "<>") {
                    (Tok::Dia, 2)
                } else {
                    (Tok::Lt, 1)
                }
            }
            '>' => {
                if starts_with(rest, ">=") {
                    (Tok::Ge, 2)
                } else {
                    (Tok::Gt, 1)
                }
            }
            '-' => {
                if starts_with(rest, "->") {
                    (Tok::Arrow, 2)
                } else {
                    (Tok::Minus, 1)
                }
            }
            '=' => {
                // `=mod` only when "mod" is a complete word after the `=`.
                if starts_with(rest, "=mod")
                    && chars.get(i + 4).map_or(true, |&d| !is_ident_continue(d))
                {
                    (Tok::EqMod, 4)
                } else {
                    (Tok::EqTok, 1)
                }
            }
            '[' => {
                if starts_with(rest, "[]") {
                    (Tok::Box_, 2)
                } else {
                    return Err(err(tl, tc, "expected `]` after `[`".into()));
                }
            }
            '\'' => {
                if chars.get(i + 1) == Some(&'#') {
                    return Err(err(tl, tc, "the nominal namespace '# is reserved".into()));
                }
                if !chars.get(i + 1).map_or(false, |&d| d.is_ascii_alphabetic() || d == '_') {
                    return Err(err(tl, tc, "expected a nominal name after `'`".into()));
                }
                let mut j = i + 1;
                while chars.get(j).map_or(false, |&d| is_ident_continue(d)) {
                    j += 1;
                }
                let name: String = chars[i + 1..j].iter().collect();
                (Tok::Nominal(name), j - i)
            }
            '0'..='9' => {
                let mut j = i;
                while chars.get(j).map_or(false, |&d| d.is_ascii_digit()) {
                    j += 1;
                }
                let digits: String = chars[i..j].iter().collect();
                let n: BigInt = digits.parse().expect("digits parse as an integer");
                (Tok::Int(n), j - i)
            }
            'a'..='z' => {
                let mut j = i;
                while chars.get(j).map_or(false, |&d| is_ident_continue(d)) {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let width = j - i;
                match word.as_str() {
                    "true" => (Tok::True, width),
                    "false" => (Tok::False, width),
                    _ => (Tok::Ident(word), width),
                }
            }
            'A' if chars.get(i + 1).map_or(true, |&d| !is_ident_continue(d)) => (Tok::UnivA, 1),
            _ => return Err(err(tl, tc, format!("unexpected character `{}`", c))),
        };
        toks.push(Token { kind, line: tl, col: tc });
        i += width;
        col += width;
    }
    toks.push(Token { kind: Tok::Eof, line, col });
    Ok(toks)
}

/// Kind of arithmetic register: a `#(φ)` occurrence or a `w(φ)` occurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RegKind {
    CountOf,
    WeightOf,
}

struct Parser<'s> {
    toks: Vec<Token>,
    pos: usize,
    st: &'s mut Store,
}

impl<'s> Parser<'s> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].kind
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].kind
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].kind.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::Parse { line: t.line, col: t.col, msg: msg.into() })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {}", what))
        }
    }

    fn formula(&mut self) -> Result<Fid> {
        self.iff()
    }

    fn iff(&mut self) -> Result<Fid> {
        let mut l = self.imp()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let r = self.imp()?;
            l = self.st.iff(l, r);
        }
        Ok(l)
    }

    fn imp(&mut self) -> Result<Fid> {
        let l = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let r = self.imp()?;
            return Ok(self.st.implies(l, r));
        }
        Ok(l)
    }

    fn or(&mut self) -> Result<Fid> {
        let mut l = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let r = self.and()?;
            l = self.st.or(l, r);
        }
        Ok(l)
    }

    fn and(&mut self) -> Result<Fid> {
        let mut l = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let r = self.unary()?;
            l = self.st.and(l, r);
        }
        Ok(l)
    }

    fn unary(&mut self) -> Result<Fid> {
        match self.peek() {
            Tok::Tilde => {
                self.bump();
                let g = self.unary()?;
                Ok(self.st.neg(g))
            }
            Tok::Dia => {
                self.bump();
                let g = self.unary()?;
                Ok(self.st.dia(g))
            }
            Tok::Box_ => {
                self.bump();
                let g = self.unary()?;
                let ng = self.st.neg(g);
                let d = self.st.dia(ng);
                Ok(self.st.neg(d))
            }
            Tok::UnivA => {
                self.bump();
                let g = self.unary()?;
                Ok(self.st.univ(g))
            }
            Tok::At => {
                self.bump();
                match self.bump() {
                    Tok::Nominal(n) => {
                        let g = self.unary()?;
                        Ok(self.st.at(&n, g))
                    }
                    _ => {
                        self.pos = self.pos.saturating_sub(1);
                        self.err("expected a nominal after `@`")
                    }
                }
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Fid> {
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(self.st.top())
            }
            Tok::False => {
                self.bump();
                Ok(self.st.bot())
            }
            Tok::Nominal(n) => {
                self.bump();
                Ok(self.st.nom(&n))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Int(_) | Tok::Minus | Tok::Hash => self.relatom(),
            Tok::Ident(name) => {
                if name == "w" && *self.peek2() == Tok::LParen {
                    return self.relatom();
                }
                self.bump();
                Ok(self.st.atom(&name))
            }
            _ => self.err("expected a formula"),
        }
    }

    /// Relational atom: arithmetic, a comparison, arithmetic. The variable
    /// space of the polynomials is local to the atom.
    fn relatom(&mut self) -> Result<Fid> {
        let mut regs: Vec<(RegKind, Fid)> = Vec::new();
        let lhs = self.arith_expr(&mut regs)?;
        let rel_tok = &self.toks[self.pos];
        let (rel_line, rel_col) = (rel_tok.line, rel_tok.col);
        enum Rel {
            Lt,
            Gt,
            Le,
            Ge,
            Eq,
            Mod(BigInt),
        }
        let rel = match self.bump() {
            Tok::Lt => Rel::Lt,
            Tok::Gt => Rel::Gt,
            Tok::Le => Rel::Le,
            Tok::Ge => Rel::Ge,
            Tok::EqTok => Rel::Eq,
            Tok::EqMod => {
                let k = match self.bump() {
                    Tok::Int(k) => k,
                    _ => {
                        self.pos = self.pos.saturating_sub(1);
                        return self.err("expected a modulus after `=mod`");
                    }
                };
                if !k.is_positive() {
                    return Err(Error::Parse {
                        line: rel_line,
                        col: rel_col,
                        msg: "modulus must be positive".into(),
                    });
                }
                self.expect(Tok::EqTok, "`=` closing the modulus")?;
                Rel::Mod(k)
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return self.err("expected a comparison operator");
            }
        };
        let rhs = self.arith_expr(&mut regs)?;
        let d = lhs.sub(&rhs);
        let atom_err = |msg: &str| Error::Parse {
            line: rel_line,
            col: rel_col,
            msg: msg.into(),
        };

        let has_count = regs.iter().any(|(k, _)| *k == RegKind::CountOf);
        let has_weight = regs.iter().any(|(k, _)| *k == RegKind::WeightOf);
        if has_count && has_weight {
            return Err(atom_err("cannot mix counting and probability terms in one atom"));
        }

        if !has_count && !has_weight {
            // Pure constant comparison: evaluate statically.
            let c = d.constant_value().expect("no registers were created");
            let truth = match rel {
                Rel::Lt => c < BigRational::zero(),
                Rel::Gt => c > BigRational::zero(),
                Rel::Le => c <= BigRational::zero(),
                Rel::Ge => c >= BigRational::zero(),
                Rel::Eq => c.is_zero(),
                Rel::Mod(k) => {
                    if !c.is_integer() {
                        return Err(atom_err("modular relation requires integer values"));
                    }
                    num::Integer::mod_floor(&c.to_integer(), &k).is_zero()
                }
            };
            return Ok(if truth { self.st.top() } else { self.st.bot() });
        }

        if has_count {
            // Linear integer combination of #(...) registers.
            let mut coeffs = vec![BigInt::zero(); regs.len()];
            let mut d0 = BigInt::zero();
            for (m, c) in d.terms() {
                if !c.is_integer() {
                    return Err(atom_err("counting atoms need integer coefficients"));
                }
                let deg: u32 = m.iter().sum();
                if deg == 0 {
                    d0 = c.to_integer();
                } else if deg == 1 {
                    let v = m.iter().position(|&e| e == 1).expect("degree-one monomial");
                    coeffs[v] = c.to_integer();
                } else {
                    return Err(atom_err("counting atoms must be linear in #(...) terms"));
                }
            }
            let terms: Vec<(BigInt, Fid)> = regs
                .iter()
                .zip(&coeffs)
                .filter(|(_, c)| !c.is_zero())
                .map(|((_, f), c)| (c.clone(), *f))
                .collect();
            let b = -d0;
            let (rel, bound) = match rel {
                Rel::Lt => (IntRel::Lt, b),
                Rel::Gt => (IntRel::Gt, b),
                Rel::Eq => (IntRel::Eq, b),
                Rel::Ge => (IntRel::Gt, b - BigInt::one()),
                Rel::Le => (IntRel::Lt, b + BigInt::one()),
                Rel::Mod(k) => (IntRel::Mod(k), b),
            };
            return Ok(self.st.count(terms, rel, bound));
        }

        // Probabilistic polynomial atom.
        let args: Vec<Fid> = regs.iter().map(|(_, f)| *f).collect();
        match rel {
            Rel::Ge => Ok(self.st.wpoly(d, args)),
            Rel::Le => Ok(self.st.wpoly(d.neg(), args)),
            Rel::Gt => {
                let a = self.st.wpoly(d.neg(), args);
                Ok(self.st.neg(a))
            }
            Rel::Lt => {
                let a = self.st.wpoly(d, args);
                Ok(self.st.neg(a))
            }
            Rel::Eq => {
                let a1 = self.st.wpoly(d.clone(), args.clone());
                let a2 = self.st.wpoly(d.neg(), args);
                Ok(self.st.and(a1, a2))
            }
            Rel::Mod(_) => Err(atom_err("modular relation is not defined on weights")),
        }
    }

    fn arith_expr(&mut self, regs: &mut Vec<(RegKind, Fid)>) -> Result<Poly> {
        let mut p = self.arith_term(regs)?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let t = self.arith_term(regs)?;
                    p = p.add(&t);
                }
                Tok::Minus => {
                    self.bump();
                    let t = self.arith_term(regs)?;
                    p = p.sub(&t);
                }
                _ => return Ok(p),
            }
        }
    }

    fn arith_term(&mut self, regs: &mut Vec<(RegKind, Fid)>) -> Result<Poly> {
        let mut p = self.arith_factor(regs)?;
        while *self.peek() == Tok::Star {
            self.bump();
            let f = self.arith_factor(regs)?;
            p = p.mul(&f);
        }
        Ok(p)
    }

    fn arith_factor(&mut self, regs: &mut Vec<(RegKind, Fid)>) -> Result<Poly> {
        match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                let f = self.arith_factor(regs)?;
                Ok(f.neg())
            }
            Tok::Int(n) => {
                self.bump();
                if *self.peek() == Tok::Slash {
                    self.bump();
                    match self.bump() {
                        Tok::Int(den) => {
                            if den.is_zero() {
                                self.pos = self.pos.saturating_sub(1);
                                return self.err("zero denominator");
                            }
                            Ok(Poly::constant(BigRational::new(n, den)))
                        }
                        _ => {
                            self.pos = self.pos.saturating_sub(1);
                            self.err("expected a denominator after `/`")
                        }
                    }
                } else {
                    Ok(Poly::constant(BigRational::from(n)))
                }
            }
            Tok::Hash => {
                self.bump();
                self.expect(Tok::LParen, "`(` after `#`")?;
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Poly::var(self.reg_var(regs, RegKind::CountOf, f)))
            }
            Tok::Ident(w) if w == "w" => {
                self.bump();
                self.expect(Tok::LParen, "`(` after `w`")?;
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Poly::var(self.reg_var(regs, RegKind::WeightOf, f)))
            }
            _ => self.err("expected an arithmetic term"),
        }
    }

    fn reg_var(&self, regs: &mut Vec<(RegKind, Fid)>, kind: RegKind, f: Fid) -> usize {
        if let Some(i) = regs.iter().position(|&(k, g)| k == kind && g == f) {
            return i;
        }
        regs.push((kind, f));
        regs.len() - 1
    }
}

/// Parses a formula. Logic-agnostic: `<>`, `#`, and `w` may all appear;
/// use [`adapt_to_logic`] to specialize and validate for one logic.
pub fn parse(store: &mut Store, text: &str) -> Result<Fid> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, st: store };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return p.err("unexpected trailing input");
    }
    Ok(f)
}

/// Rewrites plain diamonds into the logic's native modality (`♯(φ)>0` for
/// Presburger, `w(φ)>0` for the probabilistic logic) and rejects atoms that
/// do not belong to the logic.
pub fn adapt_to_logic(store: &mut Store, f: Fid, logic: Logic) -> Result<Fid> {
    let mut memo = HashMap::new();
    adapt(store, f, logic, &mut memo)
}

fn adapt(st: &mut Store, f: Fid, logic: Logic, memo: &mut HashMap<Fid, Fid>) -> Result<Fid> {
    if let Some(&g) = memo.get(&f) {
        return Ok(g);
    }
    let out = match st.node(f).clone() {
        Node::Bot | Node::Atom(_) | Node::Nom(_) => f,
        Node::Neg(g) => {
            let g = adapt(st, g, logic, memo)?;
            st.neg(g)
        }
        Node::And(a, b) => {
            let a = adapt(st, a, logic, memo)?;
            let b = adapt(st, b, logic, memo)?;
            st.and(a, b)
        }
        Node::At(i, g) => {
            let g = adapt(st, g, logic, memo)?;
            let name = st.name(i).to_string();
            st.at(&name, g)
        }
        Node::Univ(g) => {
            let g = adapt(st, g, logic, memo)?;
            st.univ(g)
        }
        Node::Dia(g) => {
            let g = adapt(st, g, logic, memo)?;
            match logic {
                Logic::K => st.dia(g),
                Logic::Presburger => {
                    st.count(vec![(BigInt::one(), g)], IntRel::Gt, BigInt::zero())
                }
                Logic::Prob => {
                    // w(φ) > 0 desugars to ¬(−w(φ) ≥ 0).
                    let a = st.wpoly(Poly::var(0).neg(), vec![g]);
                    st.neg(a)
                }
            }
        }
        Node::Count { terms, rel, bound } => {
            if logic != Logic::Presburger {
                return Err(Error::KindMismatch(
                    "counting atoms belong to the Presburger logic".into(),
                ));
            }
            let mut new_terms = Vec::with_capacity(terms.len());
            for (c, a) in terms {
                new_terms.push((c, adapt(st, a, logic, memo)?));
            }
            st.count(new_terms, rel, bound)
        }
        Node::Wpoly { poly, args } => {
            if logic != Logic::Prob {
                return Err(Error::KindMismatch(
                    "weight atoms belong to the probabilistic logic".into(),
                ));
            }
            let mut new_args = Vec::with_capacity(args.len());
            for a in args {
                new_args.push(adapt(st, a, logic, memo)?);
            }
            st.wpoly(poly, new_args)
        }
    };
    memo.insert(f, out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `~(p & q)` parses to the negated conjunction.
    #[test]
    fn negated_conjunction() {
        let mut st = Store::new();
        let f = parse(&mut st, "~(p & q)").unwrap();
        let p = st.atom("p");
        let q = st.atom("q");
        let pq = st.and(p, q);
        assert_eq!(f, st.neg(pq));
    }

    /// `1*#(a) + 1*#(b) + -1*#(c) > 0` parses to a counting atom with the
    /// expected signed coefficients.
    #[test]
    fn counting_atom() {
        let mut st = Store::new();
        let f = parse(&mut st, "1*#(a) + 1*#(b) + -1*#(c) > 0").unwrap();
        let a = st.atom("a");
        let b = st.atom("b");
        let c = st.atom("c");
        let expect = st.count(
            vec![(BigInt::from(1), a), (BigInt::from(1), b), (BigInt::from(-1), c)],
            IntRel::Gt,
            BigInt::from(0),
        );
        assert_eq!(f, expect);
    }

    /// `w(a)*w(b) - w(a&b) >= 0` parses to a probabilistic polynomial atom
    /// over arguments a, b, a∧b.
    #[test]
    fn weight_polynomial_atom() {
        let mut st = Store::new();
        let f = parse(&mut st, "w(a)*w(b) - w(a&b) >= 0").unwrap();
        let a = st.atom("a");
        let b = st.atom("b");
        let ab = st.and(a, b);
        match st.node(f).clone() {
            Node::Wpoly { poly, args } => {
                assert_eq!(args, vec![a, b, ab]);
                let x0x1 = Poly::var(0).mul(&Poly::var(1));
                let expect = x0x1.sub(&Poly::var(2));
                assert_eq!(poly, expect);
            }
            n => panic!("expected a weight atom, got {:?}", n),
        }
    }

    /// Boolean sugar desugars through negation and conjunction.
    #[test]
    fn boolean_sugar() {
        let mut st = Store::new();
        let f = parse(&mut st, "p | q").unwrap();
        let p = st.atom("p");
        let q = st.atom("q");
        assert_eq!(f, st.or(p, q));
        let f = parse(&mut st, "p -> q").unwrap();
        assert_eq!(f, st.implies(p, q));
        let f = parse(&mut st, "p <-> q").unwrap();
        assert_eq!(f, st.iff(p, q));
        let f = parse(&mut st, "true").unwrap();
        assert_eq!(f, st.top());
        let f = parse(&mut st, "[]p").unwrap();
        let np = st.neg(p);
        let dnp = st.dia(np);
        assert_eq!(f, st.neg(dnp));
        // Implication is right associative, & binds tighter than |.
        let f1 = parse(&mut st, "p -> q -> p").unwrap();
        let qp = st.implies(q, p);
        assert_eq!(f1, st.implies(p, qp));
        let f2 = parse(&mut st, "p & q | p").unwrap();
        let pq = st.and(p, q);
        assert_eq!(f2, st.or(pq, p));
    }

    /// Weak counting inequalities shift the bound by one.
    #[test]
    fn weak_inequalities() {
        let mut st = Store::new();
        let f = parse(&mut st, "#(a) >= 2").unwrap();
        let a = st.atom("a");
        let expect = st.count(vec![(BigInt::from(1), a)], IntRel::Gt, BigInt::from(1));
        assert_eq!(f, expect);
        let f = parse(&mut st, "#(a) <= 2").unwrap();
        let expect = st.count(vec![(BigInt::from(1), a)], IntRel::Lt, BigInt::from(3));
        assert_eq!(f, expect);
        // Terms migrate across the relation: 2#(a) < #(b) + 1 becomes
        // 2#(a) − #(b) < 1.
        let f = parse(&mut st, "2*#(a) < #(b) + 1").unwrap();
        let b = st.atom("b");
        let expect = st.count(
            vec![(BigInt::from(2), a), (BigInt::from(-1), b)],
            IntRel::Lt,
            BigInt::from(1),
        );
        assert_eq!(f, expect);
    }

    /// Modular congruence: `#(a) =mod 2= 1`.
    #[test]
    fn modular_atom() {
        let mut st = Store::new();
        let f = parse(&mut st, "#(a) =mod 2= 1").unwrap();
        let a = st.atom("a");
        let expect = st.count(
            vec![(BigInt::from(1), a)],
            IntRel::Mod(BigInt::from(2)),
            BigInt::from(1),
        );
        assert_eq!(f, expect);
        assert!(parse(&mut st, "#(a) =mod 0= 1").is_err());
    }

    /// Probabilistic comparison sugar reduces everything to `≥ 0` atoms.
    #[test]
    fn probabilistic_sugar() {
        let mut st = Store::new();
        let f = parse(&mut st, "w(a) > 1/2").unwrap();
        let a = st.atom("a");
        // ¬(1/2 − w(a) ≥ 0)
        let half = Poly::constant(BigRational::new(BigInt::from(1), BigInt::from(2)));
        let d = Poly::var(0).sub(&half);
        let atom = st.wpoly(d.neg(), vec![a]);
        assert_eq!(f, st.neg(atom));
        let f = parse(&mut st, "w(a) = 1/2").unwrap();
        let a1 = st.wpoly(d.clone(), vec![a]);
        let a2 = st.wpoly(d.neg(), vec![a]);
        assert_eq!(f, st.and(a1, a2));
    }

    /// Constant comparisons fold to truth values.
    #[test]
    fn constant_folding() {
        let mut st = Store::new();
        assert_eq!(parse(&mut st, "1 > 0").unwrap(), st.top());
        assert_eq!(parse(&mut st, "1 < 0").unwrap(), st.bot());
        assert_eq!(parse(&mut st, "4 =mod 2= 0").unwrap(), st.top());
        assert_eq!(parse(&mut st, "0 =mod 2= 1").unwrap(), st.bot());
    }

    /// Hybrid syntax: nominals, @, and the universal modality.
    #[test]
    fn hybrid_syntax() {
        let mut st = Store::new();
        let f = parse(&mut st, "@'i (p & A 'j)").unwrap();
        let p = st.atom("p");
        let j = st.nom("j");
        let aj = st.univ(j);
        let body = st.and(p, aj);
        assert_eq!(f, st.at("i", body));
        let f = parse(&mut st, "#('i) > 1").unwrap();
        let i = st.nom("i");
        let expect = st.count(vec![(BigInt::from(1), i)], IntRel::Gt, BigInt::from(1));
        assert_eq!(f, expect);
    }

    /// Syntax errors carry line and column.
    #[test]
    fn error_positions() {
        let mut st = Store::new();
        match parse(&mut st, "p &\n& q") {
            Err(Error::Parse { line, col, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(col, 1);
            }
            other => panic!("expected a parse error, got {:?}", other),
        }
        assert!(parse(&mut st, "(p").is_err());
        assert!(parse(&mut st, "'#0").is_err());
        assert!(parse(&mut st, "p q").is_err());
        assert!(parse(&mut st, "#(p) > w(q)").is_err());
        assert!(parse(&mut st, "w(a) =mod 2= 0").is_err());
        assert!(parse(&mut st, "#(a)*#(b) > 0").is_err());
        assert!(parse(&mut st, "1/2*#(a) > 0").is_err());
        assert!(parse(&mut st, "Q").is_err());
    }

    /// Diamonds specialize per logic; foreign atoms are rejected.
    #[test]
    fn logic_adaptation() {
        let mut st = Store::new();
        let f = parse(&mut st, "<>p").unwrap();
        let p = st.atom("p");
        let k = adapt_to_logic(&mut st, f, Logic::K).unwrap();
        assert_eq!(k, st.dia(p));
        let pres = adapt_to_logic(&mut st, f, Logic::Presburger).unwrap();
        let expect = st.count(vec![(BigInt::from(1), p)], IntRel::Gt, BigInt::from(0));
        assert_eq!(pres, expect);
        let prob = adapt_to_logic(&mut st, f, Logic::Prob).unwrap();
        let watom = st.wpoly(Poly::var(0).neg(), vec![p]);
        assert_eq!(prob, st.neg(watom));
        let count = parse(&mut st, "#(a) > 0").unwrap();
        assert!(adapt_to_logic(&mut st, count, Logic::K).is_err());
        assert!(adapt_to_logic(&mut st, count, Logic::Prob).is_err());
        let wat = parse(&mut st, "w(a) >= 0").unwrap();
        assert!(adapt_to_logic(&mut st, wat, Logic::Presburger).is_err());
    }
}
