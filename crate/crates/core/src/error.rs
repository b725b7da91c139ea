use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} is singular at omega = {omega} (|denominator| = {modulus:e})")]
    Singular {
        what: &'static str,
        omega: f64,
        modulus: f64,
    },

    #[error("zero signal transfer at omega = {omega} (|chi_F| = {modulus:e})")]
    ZeroSignal { omega: f64, modulus: f64 },

    #[error("{0}")]
    ModeMismatch(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("characteristic coefficient a_{index} has imaginary residue {residue:e}")]
    ImaginaryResidue { index: usize, residue: f64 },

    #[error("eigenvalue solver did not converge")]
    EigenFailure,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no interval with positive damping contains omega = 1")]
    NoPositiveInterval,

    #[error("system is already unstable at the lower bracket G = {0}")]
    UnstableAtLowerBracket(f64),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
