//! Formula syntax: hash-consed AST, normalized negation, and the closure of
//! a problem instance.
//!
//! The core AST has exactly the primitive constructors; derived connectives
//! (⊤, ∨, →, ↔, weak inequalities, strict probabilistic comparisons) exist
//! only in the parser and in the convenience constructors below, which
//! desugar immediately. Atoms are nullary modal operators, so a sequent
//! consisting of atoms and negated atoms is already a state.
//!
//! Formulas are interned: equal subtrees share one id, and sets of formulas
//! (sequents, types) are bitsets over closure indices.

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::poly::Poly;
use num::integer::Integer;
use num::{BigInt, BigRational, Signed, Zero};
use std::collections::{BTreeMap, HashMap};

/// Formula id: index into the [`Store`].
pub type Fid = u32;

/// Integer comparison relation of a Presburger atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IntRel {
    Lt,
    Gt,
    Eq,
    /// Congruence modulo a positive integer.
    Mod(BigInt),
}

/// One node of the hash-consed syntax tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Bot,
    /// Propositional atom (a nullary modality); payload is a name id.
    Atom(u32),
    /// Nominal: true at exactly one state; payload is a name id.
    Nom(u32),
    Neg(Fid),
    And(Fid, Fid),
    /// Relational diamond (logic K only).
    Dia(Fid),
    /// Presburger atom Σ coeff·♯(arg) REL bound over a multigraph.
    Count { terms: Vec<(BigInt, Fid)>, rel: IntRel, bound: BigInt },
    /// Probabilistic atom poly(w(arg_0),…,w(arg_{n−1})) ≥ 0.
    Wpoly { poly: Poly, args: Vec<Fid> },
    /// Satisfaction operator @'i φ (hybrid pipeline only; reduced away).
    At(u32, Fid),
    /// Universal modality A φ (hybrid pipeline only; reduced away).
    Univ(Fid),
}

/// Interning store for formulas and names.
#[derive(Default)]
pub struct Store {
    nodes: Vec<Node>,
    memo: HashMap<Node, Fid>,
    names: Vec<String>,
    name_ids: HashMap<String, u32>,
    fresh_count: u32,
}

impl Store {
    pub fn new() -> Self {
        Store::default()
    }

    pub fn node(&self, f: Fid) -> &Node {
        &self.nodes[f as usize]
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn intern_name(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.name_ids.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.name_ids.insert(name.to_string(), id);
        id
    }

    fn intern(&mut self, node: Node) -> Fid {
        if let Some(&f) = self.memo.get(&node) {
            return f;
        }
        let f = self.nodes.len() as Fid;
        self.nodes.push(node.clone());
        self.memo.insert(node, f);
        f
    }

    pub fn bot(&mut self) -> Fid {
        self.intern(Node::Bot)
    }

    pub fn top(&mut self) -> Fid {
        let b = self.bot();
        self.neg(b)
    }

    pub fn atom(&mut self, name: &str) -> Fid {
        let id = self.intern_name(name);
        self.intern(Node::Atom(id))
    }

    pub fn nom(&mut self, name: &str) -> Fid {
        let id = self.intern_name(name);
        self.intern(Node::Nom(id))
    }

    /// A nominal from the reserved namespace `'#0, '#1, …`, guaranteed
    /// distinct from anything the parser can produce.
    pub fn fresh_nom(&mut self) -> Fid {
        let name = format!("#{}", self.fresh_count);
        self.fresh_count += 1;
        self.nom(&name)
    }

    pub fn neg(&mut self, f: Fid) -> Fid {
        self.intern(Node::Neg(f))
    }

    pub fn and(&mut self, a: Fid, b: Fid) -> Fid {
        self.intern(Node::And(a, b))
    }

    /// Conjunction of a list; empty list is ⊤.
    pub fn big_and(&mut self, fs: &[Fid]) -> Fid {
        match fs.split_first() {
            None => self.top(),
            Some((&f, rest)) => {
                let mut acc = f;
                for &g in rest {
                    acc = self.and(acc, g);
                }
                acc
            }
        }
    }

    pub fn or(&mut self, a: Fid, b: Fid) -> Fid {
        let na = self.neg(a);
        let nb = self.neg(b);
        let c = self.and(na, nb);
        self.neg(c)
    }

    pub fn implies(&mut self, a: Fid, b: Fid) -> Fid {
        let nb = self.neg(b);
        let c = self.and(a, nb);
        self.neg(c)
    }

    pub fn iff(&mut self, a: Fid, b: Fid) -> Fid {
        let ab = self.implies(a, b);
        let ba = self.implies(b, a);
        self.and(ab, ba)
    }

    pub fn dia(&mut self, f: Fid) -> Fid {
        self.intern(Node::Dia(f))
    }

    pub fn at(&mut self, nominal: &str, f: Fid) -> Fid {
        let id = self.intern_name(nominal);
        self.intern(Node::At(id, f))
    }

    pub fn univ(&mut self, f: Fid) -> Fid {
        self.intern(Node::Univ(f))
    }

    /// Presburger atom, canonicalized: duplicate arguments merged, zero
    /// coefficients dropped, arguments sorted by formula id. An empty sum
    /// folds to the truth value of `0 REL bound`.
    pub fn count(&mut self, terms: Vec<(BigInt, Fid)>, rel: IntRel, bound: BigInt) -> Fid {
        if let IntRel::Mod(k) = &rel {
            debug_assert!(k.is_positive(), "modulus must be positive");
        }
        let mut merged: BTreeMap<Fid, BigInt> = BTreeMap::new();
        for (c, f) in terms {
            *merged.entry(f).or_insert_with(BigInt::zero) += c;
        }
        let canon: Vec<(BigInt, Fid)> =
            merged.into_iter().filter(|(_, c)| !c.is_zero()).map(|(f, c)| (c, f)).collect();
        if canon.is_empty() {
            let zero = BigInt::zero();
            let truth = match &rel {
                IntRel::Lt => zero < bound,
                IntRel::Gt => zero > bound,
                IntRel::Eq => zero == bound,
                IntRel::Mod(k) => bound.mod_floor(k).is_zero(),
            };
            return if truth { self.top() } else { self.bot() };
        }
        self.intern(Node::Count { terms: canon, rel, bound })
    }

    /// Probabilistic atom `poly(w(args)) ≥ 0`, canonicalized: duplicate and
    /// unused arguments removed (exponents merged), remaining arguments
    /// sorted by formula id. A constant polynomial folds to a truth value.
    pub fn wpoly(&mut self, poly: Poly, args: Vec<Fid>) -> Fid {
        // Merge duplicate argument formulas.
        let mut first_pos: BTreeMap<Fid, usize> = BTreeMap::new();
        let mut dedup: Vec<Fid> = Vec::new();
        let mut map = Vec::with_capacity(args.len());
        for &a in &args {
            let idx = *first_pos.entry(a).or_insert_with(|| {
                dedup.push(a);
                dedup.len() - 1
            });
            map.push(idx);
        }
        let poly = poly.remap(&map);
        // Drop arguments the polynomial no longer mentions.
        let mut used = vec![false; dedup.len()];
        for (m, _) in poly.terms() {
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    used[i] = true;
                }
            }
        }
        let mut kept: Vec<(Fid, usize)> =
            dedup.iter().enumerate().filter(|(i, _)| used[*i]).map(|(i, &f)| (f, i)).collect();
        kept.sort(); // ascending by formula id
        if kept.is_empty() {
            let c = poly.constant_value().expect("no variables used");
            return if c >= BigRational::zero() { self.top() } else { self.bot() };
        }
        let mut map2 = vec![0usize; dedup.len()];
        for (new_i, (_, old_i)) in kept.iter().enumerate() {
            map2[*old_i] = new_i;
        }
        let poly = poly.remap(&map2);
        let args: Vec<Fid> = kept.into_iter().map(|(f, _)| f).collect();
        self.intern(Node::Wpoly { poly, args })
    }

    /// Normalized negation: strips a leading negation or adds one.
    pub fn nneg(&mut self, f: Fid) -> Fid {
        match self.node(f) {
            Node::Neg(g) => *g,
            _ => self.neg(f),
        }
    }

    /// Direct subformulas.
    pub fn subformulas(&self, f: Fid) -> Vec<Fid> {
        match self.node(f) {
            Node::Bot | Node::Atom(_) | Node::Nom(_) => vec![],
            Node::Neg(g) | Node::Dia(g) | Node::Univ(g) | Node::At(_, g) => vec![*g],
            Node::And(a, b) => vec![*a, *b],
            Node::Count { terms, .. } => terms.iter().map(|(_, f)| *f).collect(),
            Node::Wpoly { args, .. } => args.clone(),
        }
    }

    /// True iff the formula (or any subformula) uses nominals, @ or the
    /// universal modality, and therefore needs the hybrid pipeline.
    pub fn needs_hybrid(&self, f: Fid) -> bool {
        match self.node(f) {
            Node::Nom(_) | Node::At(_, _) | Node::Univ(_) => true,
            _ => self.subformulas(f).into_iter().any(|g| self.needs_hybrid(g)),
        }
    }

    /// True iff the node is a modal atom (atoms are nullary modalities).
    pub fn is_modal_atom(&self, f: Fid) -> bool {
        matches!(self.node(f), Node::Atom(_) | Node::Dia(_) | Node::Count { .. } | Node::Wpoly { .. })
    }

    /// Argument formulas of a modal atom, in operator position order.
    pub fn modal_args(&self, f: Fid) -> Vec<Fid> {
        match self.node(f) {
            Node::Atom(_) => vec![],
            Node::Dia(g) => vec![*g],
            Node::Count { terms, .. } => terms.iter().map(|(_, a)| *a).collect(),
            Node::Wpoly { args, .. } => args.clone(),
            _ => panic!("modal_args on a non-modal-atom"),
        }
    }
}

/// A sequent: a subset of the closure, read conjunctively.
pub type Sequent = Bitset;

/// The closure Σ of {ψ, φ0}: all subformulas plus normalized negations,
/// with stable deterministic indices (depth-first insertion order, then
/// normalized-negation partners).
pub struct Closure {
    /// Member formulas; position is the closure index.
    pub items: Vec<Fid>,
    pub index_of: HashMap<Fid, usize>,
    /// Closure index of the normalized negation of each member.
    pub nneg_link: Vec<usize>,
    /// Closure indices of each member's direct subformulas.
    pub sub_links: Vec<Vec<usize>>,
    /// Index of the global assumption ψ.
    pub psi: usize,
    /// Index of the goal formula φ0.
    pub phi0: usize,
}

impl Closure {
    /// Builds the closure of {ψ, φ0}. Rejects formulas that still contain
    /// @ or the universal modality (the hybrid pipeline reduces them first).
    pub fn build(store: &mut Store, psi: Fid, phi0: Fid) -> Result<Closure> {
        let mut items: Vec<Fid> = Vec::new();
        let mut index_of: HashMap<Fid, usize> = HashMap::new();
        fn visit(
            store: &Store,
            f: Fid,
            items: &mut Vec<Fid>,
            index_of: &mut HashMap<Fid, usize>,
        ) -> Result<()> {
            if index_of.contains_key(&f) {
                return Ok(());
            }
            if matches!(store.node(f), Node::At(_, _) | Node::Univ(_)) {
                return Err(Error::KindMismatch(
                    "satisfaction operators and the universal modality must be reduced before closure"
                        .into(),
                ));
            }
            index_of.insert(f, items.len());
            items.push(f);
            for g in store.subformulas(f) {
                visit(store, g, items, index_of)?;
            }
            Ok(())
        }
        visit(store, psi, &mut items, &mut index_of)?;
        visit(store, phi0, &mut items, &mut index_of)?;
        // Normalized-negation partner pass: append missing partners in
        // current index order. A partner's subformula is always present.
        let mut i = 0;
        while i < items.len() {
            let f = items[i];
            let p = store.nneg(f);
            if !index_of.contains_key(&p) {
                index_of.insert(p, items.len());
                items.push(p);
            }
            i += 1;
        }
        let nneg_link = items
            .iter()
            .map(|&f| {
                let p = store.nneg(f);
                index_of[&p]
            })
            .collect();
        let sub_links = items
            .iter()
            .map(|&f| store.subformulas(f).into_iter().map(|g| index_of[&g]).collect())
            .collect();
        Ok(Closure {
            psi: index_of[&psi],
            phi0: index_of[&phi0],
            items,
            index_of,
            nneg_link,
            sub_links,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Decomposes a member into (sign, index of the un-negated base).
    pub fn literal(&self, store: &Store, idx: usize) -> (bool, usize) {
        match store.node(self.items[idx]) {
            Node::Neg(g) => (false, self.index_of[g]),
            _ => (true, idx),
        }
    }

    /// Closure indices of the positive modal atoms, ascending.
    pub fn modal_atoms(&self, store: &Store) -> Vec<usize> {
        (0..self.len()).filter(|&i| store.is_modal_atom(self.items[i])).collect()
    }

    /// Closure indices of the nominal members (positive occurrences).
    pub fn nominals(&self, store: &Store) -> Vec<usize> {
        (0..self.len()).filter(|&i| matches!(store.node(self.items[i]), Node::Nom(_))).collect()
    }

    /// A state is a sequent of modal literals only (nominals are not modal).
    pub fn is_state(&self, store: &Store, seq: &Sequent) -> bool {
        seq.iter().all(|i| {
            let (_, base) = self.literal(store, i);
            store.is_modal_atom(self.items[base])
        })
    }

    /// Checks the ψ-type invariants directly: ψ ∈ Γ, ⊥ ∉ Γ, negation
    /// coherence, and conjunction coherence.
    pub fn is_type(&self, store: &Store, seq: &Sequent) -> bool {
        if !seq.contains(self.psi) {
            return false;
        }
        for i in 0..self.len() {
            match store.node(self.items[i]) {
                Node::Bot => {
                    if seq.contains(i) {
                        return false;
                    }
                }
                Node::Neg(_) => {
                    let base = self.nneg_link[i];
                    if seq.contains(i) == seq.contains(base) {
                        return false;
                    }
                }
                Node::And(_, _) => {
                    let subs = &self.sub_links[i];
                    let both = seq.contains(subs[0]) && seq.contains(subs[1]);
                    if seq.contains(i) != both {
                        return false;
                    }
                }
                _ => {}
            }
        }
        true
    }
}
