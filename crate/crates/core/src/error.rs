use thiserror::Error;

use crate::cnf::{Literal, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("literal {0} contradicts the assignment")]
    InconsistentAssignment(Literal),

    #[error("variable {0} is outside the allowed variable set")]
    UnknownVariable(Var),

    #[error("unknown variable name `{0}`")]
    UnknownName(String),

    #[error("invalid propagator: {0}")]
    InvalidPropagator(String),

    #[error("unit propagation returned bottom; the propagator does not compute a matching function on this input")]
    ProtocolViolation,

    #[error("input sets of the matching propagators differ")]
    MismatchedInputs,

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("expected {expected} input bits, got {actual}")]
    InputLength { expected: usize, actual: usize },

    #[error("circuit is not monotone")]
    NotMonotone,

    #[error("enumeration over {size} variables exceeds the limit of {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}
