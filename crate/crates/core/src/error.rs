use std::path::PathBuf;

use num_complex::Complex64;

/// Errors raised by the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("register size mismatch: {left} vs {right} qubits")]
    SizeMismatch { left: usize, right: usize },

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("qubit index {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("registers wider than 64 qubits are not supported (got {0})")]
    TooManyQubits(usize),

    #[error("operator is not hermitian")]
    NotHermitian,

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("projection impossible: outcome probability {0:e}")]
    ProjectionImpossible(f64),

    #[error("Krylov exponential did not converge: residual {residual:e} at dimension {dimension}")]
    KrylovNotConverged { residual: f64, dimension: usize },

    #[error("path coordinate {0} outside the allowed interval")]
    PathCoordinate(f64),

    #[error("negative photon frequency {0}")]
    NegativeFrequency(f64),

    #[error("polarization vector has zero length")]
    ZeroPolarization,

    #[error("symmetry sector is empty")]
    EmptySector,

    #[error("dimension {dimension} exceeds the dense diagonalization limit {limit}")]
    DimensionTooLarge { dimension: usize, limit: usize },

    #[error("no bright state with transition dipole above {threshold:e}")]
    NoBrightState { threshold: f64 },

    #[error("parameter vector has length {got}, expected {expected}")]
    ParameterCount { got: usize, expected: usize },

    #[error("Trotter term has non-real coefficient {0}")]
    ComplexCoefficient(Complex64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("optimizer failure: {0}")]
    Optimizer(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_size(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::SizeMismatch { left, right })
    }
}
