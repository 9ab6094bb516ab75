//! Certified two-sided brackets for the Hausdorff dimension of limit sets of
//! continued-fraction-type conformal iterated function systems.
//!
//! The central objects are finite words of Moebius generators such as
//! `phi_b(x) = 1/(b - x)` on `[0, 1]`, their exact integer continuants, and
//! the partition sums `Phi_n(t) = sum over length-n words of ||phi'||^t`.
//! The growth rate `lambda(t) = lim Phi_n(t)^(1/n)` determines the dimension
//! of the limit set through the pressure equation `lambda(dim) = 1`, and
//! every bound this crate emits is a directed-rounded, machine-checkable
//! inequality: lower bounds only ever round down, upper bounds only ever
//! round up, and tails of infinite alphabets are bounded analytically rather
//! than truncated silently.
//!
//! Modules:
//! - [`round`]: outward-rounded floating-point primitives;
//! - [`moebius`]: exact continuant arithmetic for generator words;
//! - [`systems`]: the concrete IFS families and alphabet handling;
//! - [`pressure`]: partition sums, pressure brackets, dimension bisection;
//! - [`bounds`]: augmentation constants, insertion bounds, tail comparisons;
//! - [`spectrum`]: greedy spectrum construction and the dimension-gap demo;
//! - [`expansion`]: backward continued fraction digits and reconstruction.

pub mod bounds;
pub mod expansion;
pub mod moebius;
pub mod pressure;
pub mod round;
pub mod spectrum;
pub mod systems;

/// Library version embedded in every emitted report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A letter or parameter outside the domain of the requested operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Alphabet text that does not match the grammar `k`, `a..b`, `a..`.
    #[error("malformed alphabet {text:?}: {reason}")]
    ParseAlphabet { text: String, reason: String },
    /// A sum that provably diverges at the requested exponent.
    #[error("divergent sum: {0}")]
    Divergent(String),
    /// Exact enumeration would exceed the word budget.
    #[error("enumeration of {words} words exceeds the budget of {budget}")]
    BudgetExceeded { words: u128, budget: u128 },
    /// Continuant growth exceeded the fixed-width fast path.
    #[error("continuant overflow at depth {depth}; reduce the depth or alphabet")]
    Overflow { depth: u32 },
    /// A parabolic-only alphabet whose star system is empty.
    #[error("degenerate parabolic-only subsystem: {0}")]
    Degenerate(String),
    /// A combination of options the engine refuses rather than approximates.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
