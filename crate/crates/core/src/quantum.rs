//! Exact linear-algebra kernel for up to three time-bin qubits.
//!
//! Conventions, fixed once for the whole crate:
//! * computational basis: |t₁⟩ ↦ index 0, |t₂⟩ ↦ index 1;
//! * tensor (Kronecker) order: leftmost operand is the most significant
//!   qubit, so a three-qubit index reads its bits as (A, B, C);
//! * Y = [[0, −i], [i, 0]], making |R⟩ = (|t₁⟩ + i|t₂⟩)/√2 its +1
//!   eigenstate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

/// Elementwise Hermiticity tolerance.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Unit-trace tolerance.
pub const TRACE_TOL: f64 = 1e-10;
/// Allowed negative slack on the smallest eigenvalue of a density matrix.
pub const PSD_SLACK: f64 = 1e-9;
/// Tolerance on the imaginary residue of a real-valued expectation.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn check_qubit_count(dim: usize) -> Result<usize> {
    match dim {
        2 => Ok(1),
        4 => Ok(2),
        8 => Ok(3),
        _ => Err(Error::DimensionMismatch(format!(
            "dimension {dim} is not 2^n for n in 1..=3"
        ))),
    }
}

/// Max elementwise |m − m†|.
pub fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

fn ensure_hermitian(m: &DMatrix<Complex64>) -> Result<()> {
    let defect = hermiticity_defect(m);
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// A pure state of 1–3 time-bin qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
    n_qubits: usize,
}

impl StateVector {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_qubits = check_qubit_count(amplitudes.len())?;
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::ZeroState);
        }
        Ok(Self {
            amplitudes: v / Complex64::new(norm, 0.0),
            n_qubits,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// |t₁⟩, the early time bin (computational |0⟩).
    pub fn t1() -> Self {
        Self::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap()
    }

    /// |t₂⟩, the late time bin (computational |1⟩).
    pub fn t2() -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap()
    }

    /// (|t₁⟩ + e^{iφ}|t₂⟩)/√2, the equatorial state a phase-set
    /// interferometer projects onto.
    pub fn phase_ket(phi: f64) -> Self {
        Self::new(vec![
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::from_polar(FRAC_1_SQRT_2, phi),
        ])
        .unwrap()
    }

    /// |+⟩ = (|t₁⟩ + |t₂⟩)/√2.
    pub fn plus() -> Self {
        Self::phase_ket(0.0)
    }

    /// |−⟩ = (|t₁⟩ − |t₂⟩)/√2.
    pub fn minus() -> Self {
        Self::phase_ket(std::f64::consts::PI)
    }

    /// |R⟩ = (|t₁⟩ + i|t₂⟩)/√2, the +1 eigenstate of Y.
    pub fn right() -> Self {
        Self::phase_ket(std::f64::consts::FRAC_PI_2)
    }

    /// |L⟩ = (|t₁⟩ − i|t₂⟩)/√2.
    pub fn left() -> Self {
        Self::phase_ket(-std::f64::consts::FRAC_PI_2)
    }

    /// |Φ⁺⟩ = (|t₁t₁⟩ + |t₂t₂⟩)/√2.
    pub fn bell_phi_plus() -> Self {
        let z = Complex64::new(0.0, 0.0);
        let a = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::new(vec![a, z, z, a]).unwrap()
    }

    /// The target state (|t₁t₁t₁⟩ − |t₂t₂t₂⟩)/√2, minus sign included.
    pub fn ghz_minus() -> Self {
        let z = Complex64::new(0.0, 0.0);
        let a = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::new(vec![a, z, z, z, z, z, z, -a]).unwrap()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// |ψ⟩⟨ψ| as a density matrix.
    pub fn to_density(&self) -> DensityMatrix {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix::new(m).expect("outer product of a unit vector is a valid density matrix")
    }
}

/// A mixed state of 1–3 time-bin qubits: Hermitian, unit trace, PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
    n_qubits: usize,
}

impl DensityMatrix {
    /// Validates the type invariants; out-of-tolerance inputs are errors,
    /// never silently repaired.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix is not square",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let n_qubits = check_qubit_count(entries.nrows())?;
        ensure_hermitian(&entries)?;
        let trace = entries.trace();
        let trace_err = (trace - Complex64::new(1.0, 0.0)).norm();
        if trace_err > TRACE_TOL {
            return Err(Error::TraceNotOne(trace_err));
        }
        let (eigs, _) = eig_hermitian(&entries)?;
        let min_eig = *eigs.last().expect("nonempty spectrum");
        if min_eig < -PSD_SLACK {
            return Err(Error::NotPositiveSemidefinite(min_eig));
        }
        Ok(Self { entries, n_qubits })
    }

    /// I/2ⁿ on `n_qubits` qubits.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        if !(1..=3).contains(&n_qubits) {
            return Err(Error::UnsupportedQubitCount(n_qubits));
        }
        let d = 1usize << n_qubits;
        let m = DMatrix::from_diagonal_element(d, d, Complex64::new(1.0 / d as f64, 0.0));
        Self::new(m)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// tr ρ².
    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }
}

/// Single-qubit Pauli operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> DMatrix<Complex64> {
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
            Pauli::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
            Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
            Pauli::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        }
    }

    /// Kronecker product of per-qubit Paulis, qubit A first.
    pub fn product(labels: &[Pauli]) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for &p in labels {
            m = m.kronecker(&p.matrix());
        }
        m
    }
}

/// Kronecker product of two states, left operand most significant.
pub fn tensor_states(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    let n = a.n_qubits() + b.n_qubits();
    if n > 3 {
        return Err(Error::UnsupportedQubitCount(n));
    }
    let mut amps = Vec::with_capacity(a.dim() * b.dim());
    for i in 0..a.dim() {
        for j in 0..b.dim() {
            amps.push(a.amplitudes[i] * b.amplitudes[j]);
        }
    }
    StateVector::new(amps)
}

/// Kronecker product of two density matrices, left operand most significant.
pub fn tensor_densities(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let n = a.n_qubits() + b.n_qubits();
    if n > 3 {
        return Err(Error::UnsupportedQubitCount(n));
    }
    DensityMatrix::new(a.matrix().kronecker(b.matrix()))
}

/// tr(ρ·O) for Hermitian O; the imaginary residue is checked against
/// [`IMAG_RESIDUE_TOL`] and discarded.
pub fn expectation(rho: &DensityMatrix, observable: &DMatrix<Complex64>) -> Result<f64> {
    if observable.nrows() != rho.dim() || observable.ncols() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "observable is {}x{}, state dimension is {}",
            observable.nrows(),
            observable.ncols(),
            rho.dim()
        )));
    }
    ensure_hermitian(observable)?;
    let val = (rho.matrix() * observable).trace();
    if val.im.abs() >= IMAG_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue(val.im));
    }
    Ok(val.re)
}

/// Partial transpose of an n-qubit matrix over one qubit. The result is
/// Hermitian and trace-preserving but in general not PSD.
pub fn partial_transpose_matrix(
    m: &DMatrix<Complex64>,
    n_qubits: usize,
    subsystem: usize,
) -> Result<DMatrix<Complex64>> {
    if subsystem >= n_qubits {
        return Err(Error::SubsystemOutOfRange {
            index: subsystem,
            n_qubits,
        });
    }
    let d = 1usize << n_qubits;
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, expected {d}x{d}",
            m.nrows(),
            m.ncols()
        )));
    }
    // Qubit 0 is the most significant bit of the index.
    let bit = n_qubits - 1 - subsystem;
    let mask = 1usize << bit;
    let mut out = DMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            let rt = (r & !mask) | (c & mask);
            let ct = (c & !mask) | (r & mask);
            out[(rt, ct)] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Partial transpose of a density matrix over one qubit.
pub fn partial_transpose(rho: &DensityMatrix, subsystem: usize) -> Result<DMatrix<Complex64>> {
    partial_transpose_matrix(rho.matrix(), rho.n_qubits(), subsystem)
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues are real and
/// sorted descending, ties broken by the backend's original ordering;
/// eigenvectors are the matching columns of the returned matrix.
pub fn eig_hermitian(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    ensure_hermitian(m)?;
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(m.nrows(), m.ncols());
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    Ok((values, vectors))
}

/// Traces out every qubit not in `keep`, preserving the original qubit order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidData("empty keep-set in partial trace".into()));
    }
    let n = rho.n_qubits();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(Error::InvalidData("duplicate qubits in keep-set".into()));
    }
    if let Some(&bad) = kept.iter().find(|&&q| q >= n) {
        return Err(Error::SubsystemOutOfRange {
            index: bad,
            n_qubits: n,
        });
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let dk = 1usize << kept.len();
    let dt = 1usize << traced.len();

    // Assemble a full-space index from kept-space and traced-space indices.
    let full_index = |k_idx: usize, t_idx: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &q) in kept.iter().enumerate() {
            let b = (k_idx >> (kept.len() - 1 - pos)) & 1;
            idx |= b << (n - 1 - q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            let b = (t_idx >> (traced.len() - 1 - pos)) & 1;
            idx |= b << (n - 1 - q);
        }
        idx
    };

    let mut out = DMatrix::zeros(dk, dk);
    for r in 0..dk {
        for c in 0..dk {
            let mut sum = Complex64::new(0.0, 0.0);
            for e in 0..dt {
                sum += rho.matrix()[(full_index(r, e), full_index(c, e))];
            }
            out[(r, c)] = sum;
        }
    }
    DensityMatrix::new(out)
}
