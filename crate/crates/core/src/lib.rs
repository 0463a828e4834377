//! Simulation and estimation toolkit for a three-photon time-bin GHZ
//! experiment.
//!
//! The crate models the full chain of such an experiment in silico:
//!
//! * [`quantum`] — exact linear algebra for up to three time-bin qubits
//!   (state vectors, density matrices, Pauli algebra, partial
//!   transpose/trace, Hermitian eigen-decomposition).
//! * [`photonic`] — the optical train: weak-coherent-pulse and photon-pair
//!   sources, the time-dependent beam splitter with post-selection, losses,
//!   detectors, fringe prediction and coincidence-rate estimates.
//! * [`tomography`] — the 64-setting projective measurement campaign,
//!   counting-noise simulation, linear inversion and maximum-likelihood
//!   density-matrix reconstruction with parametric bootstrap error bars.
//! * [`metrics`] — scalar figures of merit: fidelity, purity, entropies,
//!   tripartite negativity, entanglement witness, Mermin and CHSH values,
//!   fringe-visibility fitting.
//!
//! Time bins encode the computational basis as |t₁⟩ ↦ 0, |t₂⟩ ↦ 1, and the
//! qubit order A, B, C is most-significant-first throughout.

pub mod error;
pub mod metrics;
pub mod photonic;
pub mod quantum;
pub mod tomography;

pub use error::Error;
pub use quantum::{DensityMatrix, Pauli, StateVector};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
