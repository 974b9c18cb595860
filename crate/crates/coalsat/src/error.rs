//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the solver library.
///
/// `Incomplete` is special: it signals that an incomplete backend (the
/// polynomial real-arithmetic solver) ran out of budget. The public entry
/// points catch it and turn it into [`crate::Verdict::Unknown`]; it is never
/// silently treated as UNSAT.
#[derive(Debug, Error)]
pub enum Error {
    /// Concrete-syntax error with source position.
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// Formula uses a constructor that is meaningless for the requested
    /// logic or model kind (e.g. a probabilistic atom against a multigraph).
    #[error("kind mismatch: {0}")]
    KindMismatch(String),

    /// A child sequent assigns neither the argument formula nor its
    /// normalized negation for some clause variable.
    #[error("malformed child: {0}")]
    MalformedChild(String),

    /// An incomplete backend could not decide; carries the offending item.
    #[error("backend incomplete: {0}")]
    Incomplete(String),

    /// A configured resource cap (child materialization, assignment count)
    /// was exceeded. Never a wrong answer, always an explicit error.
    #[error("resource cap exceeded: {0}")]
    Resource(String),

    /// Model extraction was asked for a sequent with no stored witness.
    #[error("missing one-step witness for sequent {0}")]
    MissingWitness(String),

    /// Internal invariant violation; indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
