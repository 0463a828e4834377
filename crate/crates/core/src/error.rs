//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max elementwise asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("trace deviates from 1 by {0:.3e}")]
    TraceNotOne(f64),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),

    #[error("{0} qubits outside the supported range 1..=3")]
    UnsupportedQubitCount(usize),

    #[error("subsystem index {index} out of range for {n_qubits} qubits")]
    SubsystemOutOfRange { index: usize, n_qubits: usize },

    #[error("cannot normalize a zero state vector")]
    ZeroState,

    #[error("post-selected component has zero norm: no coincidence support")]
    NoCoincidenceSupport,

    #[error("no coincidences observed in {0} samples")]
    NoCoincidences(u64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid measurement data: {0}")]
    InvalidData(String),

    #[error("expectation value has imaginary residue {0:.3e} above tolerance")]
    ImaginaryResidue(f64),

    #[error("probability {0} outside [0, 1] beyond tolerance")]
    ProbabilityOutOfRange(f64),

    #[error("degenerate fit input: {0}")]
    DegenerateFit(String),

    #[error(
        "maximum-likelihood estimation did not converge after {iterations} iterations \
         (relative log-likelihood change {relative_change:.3e})"
    )]
    MleNonConvergence {
        iterations: usize,
        relative_change: f64,
        /// Best iterate reached before the iteration cap.
        best: Box<crate::tomography::MleOutcome>,
    },

    #[error("bootstrap resample {resample} failed: {source}")]
    BootstrapResample {
        resample: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
