//! Corpus files and seeded random problem generation for the
//! differential and oracle suites.
//!
//! A corpus file holds one problem per line, `<assumption> |- <formula>`,
//! in the concrete formula grammar. A line starting with `#` is a
//! comment unless the `#` opens a counting atom (`#(`), so formulas may
//! begin with a counting atom without escaping.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::formula::{Closure, Store};
use crate::parse::{adapt_to_logic, parse};
use crate::Logic;

/// One corpus entry, still in concrete syntax; parsing is deferred so a
/// corpus file can be read once and run against several logics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub assumption: String,
    pub formula: String,
}

/// Parses corpus text. Malformed lines report their 1-based line number.
pub fn parse_corpus(text: &str) -> Result<Vec<Problem>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || (line.starts_with('#') && !line.starts_with("#(")) {
            continue;
        }
        let mut split = line.splitn(2, "|-");
        let assumption = split.next().unwrap_or("").trim();
        let formula = match split.next() {
            Some(f) => f.trim(),
            None => {
                return Err(Error::Parse {
                    line: i + 1,
                    col: 1,
                    msg: "corpus line lacks the `|-` separator".into(),
                })
            }
        };
        if assumption.is_empty() || formula.is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                col: 1,
                msg: "corpus line has an empty side".into(),
            });
        }
        out.push(Problem { assumption: assumption.to_string(), formula: formula.to_string() });
    }
    Ok(out)
}

/// Renders problems back to corpus-file text.
pub fn render_corpus(problems: &[Problem]) -> String {
    let mut s = String::new();
    for p in problems {
        s.push_str(&p.assumption);
        s.push_str(" |- ");
        s.push_str(&p.formula);
        s.push('\n');
    }
    s
}

fn leaf(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..10) {
        0..=3 => "p".into(),
        4..=7 => "q".into(),
        8 => "r".into(),
        _ => "true".into(),
    }
}

fn presburger_atom(rng: &mut ChaCha8Rng, depth: u32) -> String {
    let terms = rng.gen_range(1..=2);
    let mut lhs = String::new();
    for t in 0..terms {
        let coeff: i32 = loop {
            let c = rng.gen_range(-3..=3);
            if c != 0 {
                break c;
            }
        };
        if t > 0 {
            lhs.push_str(" + ");
        }
        lhs.push_str(&format!("{coeff}*#({})", sample(rng, Logic::Presburger, depth)));
    }
    match rng.gen_range(0..7) {
        0 => format!("{lhs} < {}", rng.gen_range(-4..=4)),
        1 | 2 => format!("{lhs} > {}", rng.gen_range(-4..=4)),
        3 => format!("{lhs} = {}", rng.gen_range(-2..=4)),
        4 => format!("{lhs} <= {}", rng.gen_range(-4..=4)),
        5 => format!("{lhs} >= {}", rng.gen_range(-4..=4)),
        _ => {
            let k = rng.gen_range(2..=3);
            format!("{lhs} =mod {k}= {}", rng.gen_range(0..k))
        }
    }
}

fn prob_atom(rng: &mut ChaCha8Rng, depth: u32) -> String {
    let terms = rng.gen_range(1..=2);
    let mut lhs = String::new();
    for t in 0..terms {
        let coeff: i32 = loop {
            let c = rng.gen_range(-2..=2);
            if c != 0 {
                break c;
            }
        };
        if t > 0 {
            lhs.push_str(" + ");
        }
        lhs.push_str(&format!("{coeff}*w({})", sample(rng, Logic::Prob, depth)));
    }
    let bound = ["0", "1", "1/4", "1/3", "1/2", "2/3", "3/4", "-1/2"][rng.gen_range(0..8)];
    let rel = ["<", ">", "<=", ">=", "="][rng.gen_range(0..5)];
    format!("{lhs} {rel} {bound}")
}

fn modal_atom(rng: &mut ChaCha8Rng, logic: Logic, depth: u32) -> String {
    match logic {
        Logic::K => {
            let inner = sample(rng, Logic::K, depth);
            if rng.gen_bool(0.5) {
                format!("<>{inner}")
            } else {
                format!("[]{inner}")
            }
        }
        Logic::Presburger => presburger_atom(rng, depth),
        Logic::Prob => prob_atom(rng, depth),
    }
}

fn sample(rng: &mut ChaCha8Rng, logic: Logic, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.3) {
        return leaf(rng);
    }
    match rng.gen_range(0..10) {
        0 | 1 => format!("~{}", sample(rng, logic, depth - 1)),
        2 | 3 => {
            format!("({} & {})", sample(rng, logic, depth - 1), sample(rng, logic, depth - 1))
        }
        4 | 5 => {
            format!("({} | {})", sample(rng, logic, depth - 1), sample(rng, logic, depth - 1))
        }
        6 => format!("({} -> {})", sample(rng, logic, depth - 1), sample(rng, logic, depth - 1)),
        _ => modal_atom(rng, logic, depth - 1),
    }
}

/// True iff the problem parses, adapts to the logic, and keeps its
/// closure within `max_closure` items.
fn fits(logic: Logic, problem: &Problem, max_closure: usize) -> bool {
    let mut store = Store::new();
    let Ok(psi) = parse(&mut store, &problem.assumption) else { return false };
    let Ok(psi) = adapt_to_logic(&mut store, psi, logic) else { return false };
    let Ok(phi0) = parse(&mut store, &problem.formula) else { return false };
    let Ok(phi0) = adapt_to_logic(&mut store, phi0, logic) else { return false };
    match Closure::build(&mut store, psi, phi0) {
        Ok(cl) => cl.len() <= max_closure,
        Err(_) => false,
    }
}

/// Generates `count` random problems for the logic, rejection-sampling
/// candidates until each closure fits in `max_closure` items. The same
/// seed always yields the same corpus. Probabilistic atoms stay in the
/// linear fragment, so the complete backend applies to every entry.
pub fn generate(logic: Logic, count: usize, seed: u64, max_closure: usize) -> Vec<Problem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let assumption =
            if rng.gen_bool(0.35) { "true".to_string() } else { sample(&mut rng, logic, 2) };
        let formula = sample(&mut rng, logic, 3);
        let problem = Problem { assumption, formula };
        if fits(logic, &problem, max_closure) {
            out.push(problem);
        }
    }
    out
}
