//! Canonical formula printing, the exact inverse of the parser on
//! desugared ASTs: `parse(render(φ)) = φ`.
//!
//! Composite subformulas in argument positions are parenthesized; prefix
//! operators (`~ <> @ A`) are self-delimiting and stay bare. Counting and
//! weight atoms print every coefficient explicitly, so the output is a
//! canonical form, not a prettiest form.

use crate::formula::{Fid, IntRel, Node, Store};

pub fn render(store: &Store, f: Fid) -> String {
    match store.node(f) {
        Node::Bot => "false".into(),
        Node::Neg(g) if matches!(store.node(*g), Node::Bot) => "true".into(),
        Node::Atom(a) => store.name(*a).to_string(),
        Node::Nom(i) => format!("'{}", store.name(*i)),
        Node::Neg(g) => format!("~{}", render_sub(store, *g)),
        Node::And(a, b) => format!("{} & {}", render_sub(store, *a), render_sub(store, *b)),
        Node::Dia(g) => format!("<>{}", render_sub(store, *g)),
        Node::At(i, g) => format!("@'{} {}", store.name(*i), render_sub(store, *g)),
        Node::Univ(g) => format!("A {}", render_sub(store, *g)),
        Node::Count { terms, rel, bound } => {
            let lhs: Vec<String> =
                terms.iter().map(|(c, a)| format!("{}*#({})", c, render(store, *a))).collect();
            let rel_s = match rel {
                IntRel::Lt => " < ".to_string(),
                IntRel::Gt => " > ".to_string(),
                IntRel::Eq => " = ".to_string(),
                IntRel::Mod(k) => format!(" =mod {}= ", k),
            };
            format!("{}{}{}", lhs.join(" + "), rel_s, bound)
        }
        Node::Wpoly { poly, args } => {
            let mut pieces = Vec::new();
            for (m, c) in poly.terms() {
                let mut s = c.to_string();
                for (v, &e) in m.iter().enumerate() {
                    for _ in 0..e {
                        s.push_str(&format!("*w({})", render(store, args[v])));
                    }
                }
                pieces.push(s);
            }
            format!("{} >= 0", pieces.join(" + "))
        }
    }
}

/// Renders an argument-position subformula, parenthesizing the forms the
/// grammar cannot re-read bare (infix conjunction, relational atoms).
fn render_sub(store: &Store, f: Fid) -> String {
    let bare = match store.node(f) {
        Node::Bot | Node::Atom(_) | Node::Nom(_) => true,
        Node::Neg(_) | Node::Dia(_) | Node::At(_, _) | Node::Univ(_) => true,
        Node::And(_, _) | Node::Count { .. } | Node::Wpoly { .. } => false,
    };
    if bare {
        render(store, f)
    } else {
        format!("({})", render(store, f))
    }
}
