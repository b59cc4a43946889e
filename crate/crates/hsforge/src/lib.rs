//! Exact computer algebra for truncated multivariate formal power series.
//!
//! `hsforge` implements, over a polynomial coefficient algebra
//! `A = k[x_1..x_n]` with `k` either the rationals or a prime field:
//!
//! * multi-indices of the free commutative monoid on a finite variable set,
//!   their order theory and finite co-ideals ([`multiindex`]);
//! * the truncated power series ring `A[[s]]_Δ` over a finite co-ideal `Δ`,
//!   with both the recursive and the closed-form (ordered partition) unit
//!   inversion, and the external product ([`series`]);
//! * substitution maps `A[[s]]_∇ → A[[t]]_Δ`, their coefficient family
//!   `C_e(φ,α)`, composition, addition, tensor products and the
//!   multiplicativity criterion on coefficient tables ([`substitution`]);
//! * the group of multivariate Hasse-Schmidt derivations in the generator
//!   image representation, with the substitution action `φ•D`, the twisted
//!   map `φ^D` and iterativity tests ([`hsderiv`]);
//! * the constructive expression of any HS-derivation as `φ•D` for a fixed
//!   generating `D`, and `m`-integration of truncated derivations
//!   ([`generate`]);
//! * an independent brute-force oracle for every closed formula, wired into
//!   a seeded self-check suite ([`oracle`]);
//! * canonical JSON documents and the `hsforge` command line ([`document`],
//!   [`cli`]).
//!
//! All arithmetic is exact; there are no floating point numbers anywhere.

pub mod algebra;
pub mod cli;
pub mod document;
pub mod generate;
pub mod hsderiv;
pub mod multiindex;
pub mod oracle;
pub mod series;
pub mod substitution;

mod book_tests;

/// Errors produced by the library.
///
/// Each variant classifies as either a document/validation failure or a
/// precondition violation; the CLI maps the classes to exit codes 1 and 2.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("ambient variable sets differ")]
    AmbientMismatch,
    #[error("coefficient rings differ")]
    RingMismatch,
    #[error("series universes differ")]
    UniverseMismatch,
    #[error("variable name collision: `{0}`")]
    NameCollision(String),
    #[error("not a sub-co-ideal of the source truncation")]
    NotSubCoIdeal,
    #[error("co-ideal is not downward closed below {0}")]
    NotDownwardClosed(String),
    #[error("a non-empty co-ideal must contain the zero index")]
    MissingZero,
    #[error("series is not a unit")]
    NonUnit,
    #[error("constant term must be exactly 1")]
    ConstantTermNotOne,
    #[error("substitution images must have zero constant term")]
    NonzeroConstantTerm,
    #[error("substitution map does not annihilate the source truncation")]
    ValidationFailed,
    #[error("norm constraint violated: need |alpha| <= |e|")]
    NormViolation,
    #[error("index lies outside the truncation co-ideal")]
    IndexOutsideTruncation,
    #[error("unsupported generating set: {0}")]
    UnsupportedGeneratingSet(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    /// Exit code class for the CLI: 1 for parse/validation failures,
    /// 2 for precondition violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_)
            | Error::DuplicateName(_)
            | Error::NotDownwardClosed(_)
            | Error::MissingZero
            | Error::NonzeroConstantTerm
            | Error::ValidationFailed
            | Error::NotPrime(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
