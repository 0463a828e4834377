//! Scalar figures of merit for the reconstructed state: fidelity, purity,
//! entropies, tripartite negativity, entanglement witness, Mermin and CHSH
//! values, and fringe-visibility fitting.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::quantum::{
    eig_hermitian, expectation, partial_transpose, DensityMatrix, Pauli, StateVector,
};
use crate::{Error, Result};

/// Eigenvalues above this magnitude below zero count as genuinely negative
/// when summing partial-transpose spectra; smaller ones are noise floor.
pub const NEGATIVE_EIG_THRESHOLD: f64 = 1e-12;

/// ⟨ψ|ρ|ψ⟩ for a pure target.
pub fn fidelity(rho: &DensityMatrix, target: &StateVector) -> Result<f64> {
    if rho.dim() != target.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs target dimension {}",
            rho.dim(),
            target.dim()
        )));
    }
    let v = target.amplitudes();
    let val = v.dotc(&(rho.matrix() * v));
    if val.im.abs() >= 1e-10 {
        return Err(Error::ImaginaryResidue(val.im));
    }
    Ok(val.re)
}

/// (purity, linear entropy, von Neumann entropy).
///
/// Linear entropy carries the d/(d−1) normalization; von Neumann entropy is
/// in bits (log base 2) with 0·log 0 = 0.
pub fn purity_and_entropies(rho: &DensityMatrix) -> (f64, f64, f64) {
    let d = rho.dim() as f64;
    let purity = rho.purity();
    let linear = (d / (d - 1.0)) * (1.0 - purity);
    let (eigs, _) = eig_hermitian(rho.matrix()).expect("density matrix is Hermitian");
    let von_neumann = -eigs
        .iter()
        .filter(|&&l| l > NEGATIVE_EIG_THRESHOLD)
        .map(|&l| l * l.log2())
        .sum::<f64>();
    (purity, linear, von_neumann)
}

/// Bipartite negativity of the split (subsystem | rest): −2 times the sum of
/// negative partial-transpose eigenvalues.
pub fn bipartite_negativity(rho: &DensityMatrix, subsystem: usize) -> Result<f64> {
    let pt = partial_transpose(rho, subsystem)?;
    let (eigs, _) = eig_hermitian(&pt)?;
    let neg_sum: f64 = eigs.iter().filter(|&&l| l < -NEGATIVE_EIG_THRESHOLD).sum();
    Ok(-2.0 * neg_sum)
}

/// Geometric mean of the three single-qubit bipartite negativities; zero if
/// any of them is zero.
pub fn tripartite_negativity(rho: &DensityMatrix) -> Result<f64> {
    if rho.n_qubits() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "tripartite negativity needs 3 qubits, got {}",
            rho.n_qubits()
        )));
    }
    let mut product = 1.0f64;
    for q in 0..3 {
        let n = bipartite_negativity(rho, q)?;
        if n == 0.0 {
            return Ok(0.0);
        }
        product *= n;
    }
    Ok(product.cbrt())
}

/// tr(Wρ) for the witness W = I/2 − |GHZ⟩⟨GHZ|; negative values certify
/// GHZ-class entanglement.
pub fn witness_expectation(rho: &DensityMatrix) -> Result<f64> {
    Ok(0.5 - fidelity(rho, &StateVector::ghz_minus())?)
}

/// ⟨M⟩ together with its four joint-expectation terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MerminResult {
    /// ⟨XYY⟩ + ⟨YXY⟩ + ⟨YYX⟩ − ⟨XXX⟩.
    pub value: f64,
    /// (⟨XYY⟩, ⟨YXY⟩, ⟨YYX⟩, ⟨XXX⟩).
    pub terms: [f64; 4],
}

impl MerminResult {
    /// Local realism bounds |⟨M⟩| by 2.
    pub fn violates_local_realism(&self) -> bool {
        self.value.abs() > 2.0
    }
}

/// Evaluates the Mermin operator M = XYY + YXY + YYX − XXX on a 3-qubit
/// state.
pub fn mermin_expectation(rho: &DensityMatrix) -> Result<MerminResult> {
    if rho.n_qubits() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "Mermin operator needs 3 qubits, got {}",
            rho.n_qubits()
        )));
    }
    let xyy = expectation(rho, &Pauli::product(&[Pauli::X, Pauli::Y, Pauli::Y]))?;
    let yxy = expectation(rho, &Pauli::product(&[Pauli::Y, Pauli::X, Pauli::Y]))?;
    let yyx = expectation(rho, &Pauli::product(&[Pauli::Y, Pauli::Y, Pauli::X]))?;
    let xxx = expectation(rho, &Pauli::product(&[Pauli::X, Pauli::X, Pauli::X]))?;
    Ok(MerminResult {
        value: xyy + yxy + yyx - xxx,
        terms: [xyy, yxy, yyx, xxx],
    })
}

/// Equatorial analyzer cos(φ)·X + sin(φ)·Y, the observable a phase-set
/// interferometer measures.
fn equatorial(phi: f64) -> DMatrix<Complex64> {
    Pauli::X.matrix() * Complex64::new(phi.cos(), 0.0)
        + Pauli::Y.matrix() * Complex64::new(phi.sin(), 0.0)
}

/// Angles (a, a′, b, b′) maximizing [`chsh_value`] on |Φ⁺⟩.
pub const CHSH_OPTIMAL_ANGLES: [f64; 4] = [
    0.0,
    std::f64::consts::FRAC_PI_2,
    -std::f64::consts::FRAC_PI_4,
    std::f64::consts::FRAC_PI_4,
];

/// CHSH combination E(a,b) + E(a′,b) + E(a,b′) − E(a′,b′) with equatorial
/// analyzers at the given phases (a, a′, b, b′).
pub fn chsh_value(rho: &DensityMatrix, angles: [f64; 4]) -> Result<f64> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "CHSH needs a 2-qubit state, got {} qubits",
            rho.n_qubits()
        )));
    }
    let [a, a2, b, b2] = angles;
    let corr = |pa: f64, pb: f64| -> Result<f64> {
        expectation(rho, &equatorial(pa).kronecker(&equatorial(pb)))
    };
    Ok(corr(a, b)? + corr(a2, b)? + corr(a, b2)? - corr(a2, b2)?)
}

/// CHSH at the angles optimal for |Φ⁺⟩.
pub fn chsh_optimal(rho: &DensityMatrix) -> Result<f64> {
    chsh_value(rho, CHSH_OPTIMAL_ANGLES)
}

/// Result of a fringe fit c(φ) = (1 + V·cos(φ + φ₀))/2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VisibilityFit {
    pub visibility: f64,
    pub phase_offset: f64,
    pub rms_residual: f64,
}

/// Least-squares fit of the normalized fringe model to (phase, count)
/// samples. Requires at least 4 samples spanning more than π of phase.
pub fn fit_visibility(phases: &[f64], normalized_counts: &[f64]) -> Result<VisibilityFit> {
    if phases.len() != normalized_counts.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} phases vs {} counts",
            phases.len(),
            normalized_counts.len()
        )));
    }
    if phases.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "need at least 4 samples, got {}",
            phases.len()
        )));
    }
    let span = phases.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - phases.iter().cloned().fold(f64::INFINITY, f64::min);
    if span.is_nan() || span <= std::f64::consts::PI {
        return Err(Error::DegenerateFit(format!(
            "phase span {span:.3} rad does not exceed pi"
        )));
    }
    // The model is linear in (alpha, beta) = (V/2·cos φ₀, −V/2·sin φ₀):
    // c − 1/2 = alpha·cos φ + beta·sin φ. Solve the 2x2 normal equations.
    let (mut scc, mut sss, mut scs, mut scy, mut ssy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&phi, &c) in phases.iter().zip(normalized_counts) {
        let (s, co) = phi.sin_cos();
        let y = c - 0.5;
        scc += co * co;
        sss += s * s;
        scs += co * s;
        scy += co * y;
        ssy += s * y;
    }
    let det = scc * sss - scs * scs;
    if det.abs() < 1e-12 {
        return Err(Error::DegenerateFit(
            "singular normal equations in fringe fit".into(),
        ));
    }
    let alpha = (sss * scy - scs * ssy) / det;
    let beta = (scc * ssy - scs * scy) / det;
    let visibility = (2.0 * (alpha * alpha + beta * beta).sqrt()).min(1.0);
    let phase_offset = if visibility < 1e-12 {
        0.0
    } else {
        (-beta).atan2(alpha)
    };
    let mut ss = 0.0;
    for (&phi, &c) in phases.iter().zip(normalized_counts) {
        let model = (1.0 + visibility * (phi + phase_offset).cos()) / 2.0;
        ss += (c - model).powi(2);
    }
    Ok(VisibilityFit {
        visibility,
        phase_offset,
        rms_residual: (ss / phases.len() as f64).sqrt(),
    })
}

/// All scalar figures of merit of a 3-qubit state, with optional bootstrap
/// standard deviations keyed by metric name.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub fidelity: f64,
    pub purity: f64,
    pub linear_entropy: f64,
    pub von_neumann_entropy: f64,
    pub tripartite_negativity: f64,
    pub witness_expectation: f64,
    pub mermin_value: f64,
    /// (⟨XYY⟩, ⟨YXY⟩, ⟨YYX⟩, ⟨XXX⟩).
    pub mermin_terms: [f64; 4],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap_sigma: Option<BTreeMap<String, f64>>,
}

impl MetricReport {
    pub fn evaluate(rho: &DensityMatrix) -> Result<Self> {
        let f = fidelity(rho, &StateVector::ghz_minus())?;
        let (purity, linear, von_neumann) = purity_and_entropies(rho);
        let mermin = mermin_expectation(rho)?;
        Ok(Self {
            fidelity: f,
            purity,
            linear_entropy: linear,
            von_neumann_entropy: von_neumann,
            tripartite_negativity: tripartite_negativity(rho)?,
            witness_expectation: witness_expectation(rho)?,
            mermin_value: mermin.value,
            mermin_terms: mermin.terms,
            bootstrap_sigma: None,
        })
    }

    /// Range checks on every metric; a small slack absorbs eigenvalue noise
    /// at the PSD boundary.
    pub fn check_ranges(&self) -> Result<()> {
        let tol = 1e-9;
        let in_range = |name: &str, v: f64, lo: f64, hi: f64| -> Result<()> {
            if v < lo - tol || v > hi + tol {
                return Err(Error::InvalidData(format!(
                    "{name} = {v} outside [{lo}, {hi}]"
                )));
            }
            Ok(())
        };
        in_range("fidelity", self.fidelity, 0.0, 1.0)?;
        in_range("purity", self.purity, 0.0, 1.0)?;
        in_range("linear_entropy", self.linear_entropy, 0.0, 1.0)?;
        in_range("tripartite_negativity", self.tripartite_negativity, 0.0, f64::MAX)?;
        in_range("witness_expectation", self.witness_expectation, -0.5, 0.5)?;
        Ok(())
    }
}
