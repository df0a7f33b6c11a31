use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("qubit {qubit} out of range for a {num_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("parameter slot {slot} out of range ({num_params} slots)")]
    SlotOutOfRange { slot: usize, num_params: usize },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical trouble.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Numerical(_) | Error::Degenerate(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
