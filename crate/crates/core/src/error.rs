use thiserror::Error;

use crate::expr::ParseError;

/// Errors raised by the operator-theory layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not a projector (deviation {deviation:.3e})")]
    NotProjector { deviation: f64 },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for {len} spectral values")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("function undefined at {at}")]
    FunctionUndefined { at: String },

    #[error("malformed region: {0}")]
    MalformedRegion(String),

    #[error("region grid {found:?} does not match the joint grid {expected:?}")]
    GridMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("spectrum of size {0} exceeds the supported grid axis of 64 values")]
    GridTooLarge(usize),

    #[error("value {0} is not in the value set of f(A,B)")]
    UnknownValue(f64),

    #[error("invalid generating chain: {0}")]
    InvalidChain(String),

    #[error("outer function is not monotone non-decreasing on the value set")]
    NotMonotone,

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("invalid measurement channel: {0}")]
    ChannelInvalid(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("coarse-graining identity violated (deviation {deviation:.3e}, mask {mask:?})")]
    CoarseGrainingMismatch { deviation: f64, mask: Vec<bool> },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("invalid input file: {0}")]
    InvalidFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
