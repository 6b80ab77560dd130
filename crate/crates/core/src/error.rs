use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    InvalidQubit { index: usize, n_qubits: usize },

    #[error("partial trace needs at least one kept qubit")]
    EmptyKeepSet,

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("negative eigenvalue {0:.3e} beyond tolerance")]
    NegativeEigenvalue(f64),

    #[error("trace {0} differs from one")]
    BadTrace(f64),

    #[error("unphysical correlation triple: eigenvalue {eigenvalue:.6e}")]
    UnphysicalTriple { eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("singular linear system")]
    SingularSystem,

    #[error("Kraus operators violate completeness (residual {0:.3e})")]
    IncompleteChannel(f64),

    #[error("expected {expected} per-qubit channels, got {got}")]
    CountMismatch { expected: usize, got: usize },

    #[error("state has {got} qubits, operation requires {required}")]
    WrongQubitCount { required: String, got: usize },

    #[error("series '{0}' not present in trajectory")]
    MissingSeries(String),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("pathological setting: {0}")]
    PathologicalSetting(String),
}

pub type Result<T> = std::result::Result<T, Error>;
