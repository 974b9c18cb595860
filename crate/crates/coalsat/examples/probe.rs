//! Throwaway timing probe for the three-procedure agreement stream.

use std::time::Instant;

use coalsat::corpus;
use coalsat::parse::{adapt_to_logic, parse};
use coalsat::{decide, Algorithm, Logic, Options};

fn main() {
    let logic = Logic::Presburger;
    let problem = &corpus::generate(logic, 30, 0xD1FF, 12)[0];
    let mut store = coalsat::formula::Store::new();
    let psi = parse(&mut store, &problem.assumption).unwrap();
    let psi = adapt_to_logic(&mut store, psi, logic).unwrap();
    let phi0 = parse(&mut store, &problem.formula).unwrap();
    let phi0 = adapt_to_logic(&mut store, phi0, logic).unwrap();
    let opts = Options {
        logic,
        algorithm: Algorithm::Elim,
        want_model: true,
        ..Options::default()
    };
    eprintln!("start: {} |- {}", problem.assumption, problem.formula);
    let t = Instant::now();
    let out = decide(&mut store, psi, phi0, &opts).unwrap();
    eprintln!("done {:?} in {:?} stats {:?}", out.verdict, t.elapsed(), out.stats);
}
