//! Error type shared by every layer of the engine.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("conductor mismatch: Q(zeta_{0}) vs Q(zeta_{1})")]
    ConductorMismatch(u8, u8),

    #[error("division by zero")]
    DivisionByZero,

    #[error("series is not invertible: {0}")]
    NotInvertible(String),

    #[error("ambiguous substitution: {0}")]
    Ambiguous(String),

    #[error("insufficient precision: need coefficients through q^{requested}, known through q^{available}")]
    InsufficientPrecision { requested: String, available: String },

    #[error("divergent product: {0}")]
    Divergent(String),

    #[error("zero divisor: {0}")]
    ZeroDivisor(String),

    #[error("non-generic parameters: {0}")]
    NonGeneric(String),

    #[error("square root not representable: {0}")]
    Branch(String),

    #[error("integrality violated: {0}")]
    Integrality(String),

    #[error("{0}")]
    Usage(String),

    #[error("syntax error at offset {offset}: {message}")]
    Syntax {
        offset: usize,
        message: String,
        expected: Vec<String>,
    },

    #[error("unknown name `{name}` at offset {offset}")]
    UnknownName { name: String, offset: usize },

    #[error("`{name}` takes {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: String,
        got: usize,
    },

    #[error("{inner} [at {start}..{end}]")]
    AtSpan {
        start: usize,
        end: usize,
        inner: Box<Error>,
    },
}

impl Error {
    /// Attach a source span unless one is already present.
    pub fn at(self, start: usize, end: usize) -> Error {
        match self {
            e @ Error::AtSpan { .. } => e,
            e @ (Error::Syntax { .. } | Error::UnknownName { .. }) => e,
            e => Error::AtSpan {
                start,
                end,
                inner: Box::new(e),
            },
        }
    }

    /// The error with any span wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtSpan { inner, .. } => inner.root(),
            e => e,
        }
    }

    /// True for errors caused by bad input text or arguments rather than by
    /// a failed evaluation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self.root(),
            Error::Usage(_)
                | Error::Syntax { .. }
                | Error::UnknownName { .. }
                | Error::Arity { .. }
                | Error::ConductorMismatch(..)
        )
    }

    /// Process exit status for the command-line contract: 2 for usage and
    /// parse problems, 3 for evaluation failures.
    pub fn exit_code(&self) -> i32 {
        if self.is_usage() {
            2
        } else {
            3
        }
    }
}
