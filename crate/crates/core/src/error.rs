use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("two-qubit gate needs distinct qubits, got ({0}, {0})")]
    DuplicateQubits(usize),

    #[error("gate {gate} {detail}")]
    ParameterMismatch { gate: &'static str, detail: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("{n_qubits} qubits exceeds the configured cap of {cap}")]
    TooManyQubits { n_qubits: usize, cap: usize },

    #[error("density matrix trace {0} deviates from 1")]
    BadTrace(f64),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("no transition in range")]
    NoTransition,

    #[error("first sweep point failed its acceptance check after {attempts} attempts")]
    FirstPointRejected { attempts: usize },
}
