//! The 64-setting projective measurement campaign and density-matrix
//! reconstruction: counting-noise simulation under the Born rule, linear
//! inversion, maximum-likelihood estimation and parametric bootstrap error
//! bars.
//!
//! Frequencies are normalized per setting by the integration pulse count;
//! detector gating is pulse-synchronous. Detector-efficiency imbalance can
//! be corrected by per-detector normalization factors before inversion, or
//! left uncorrected for sensitivity studies.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::photonic::ExperimentConfig;
use crate::quantum::{eig_hermitian, partial_trace, DensityMatrix, Pauli, StateVector};
use crate::{Error, Result};

/// Single-qubit measurement bases. Tomography uses {T1, T2, Plus, Right};
/// the complements {Minus, Left} appear in joint-expectation settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    T1,
    T2,
    Plus,
    Minus,
    Right,
    Left,
}

impl Basis {
    pub const TOMOGRAPHY: [Basis; 4] = [Basis::T1, Basis::T2, Basis::Plus, Basis::Right];

    pub fn ket(self) -> StateVector {
        match self {
            Basis::T1 => StateVector::t1(),
            Basis::T2 => StateVector::t2(),
            Basis::Plus => StateVector::plus(),
            Basis::Minus => StateVector::minus(),
            Basis::Right => StateVector::right(),
            Basis::Left => StateVector::left(),
        }
    }

    /// Rank-1 projector |b⟩⟨b|.
    pub fn projector(self) -> DMatrix<Complex64> {
        self.ket().to_density().matrix().clone()
    }

    pub fn label(self) -> &'static str {
        match self {
            Basis::T1 => "T1",
            Basis::T2 => "T2",
            Basis::Plus => "PLUS",
            Basis::Minus => "MINUS",
            Basis::Right => "RIGHT",
            Basis::Left => "LEFT",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        match s {
            "T1" => Ok(Basis::T1),
            "T2" => Ok(Basis::T2),
            "PLUS" => Ok(Basis::Plus),
            "MINUS" => Ok(Basis::Minus),
            "RIGHT" => Ok(Basis::Right),
            "LEFT" => Ok(Basis::Left),
            other => Err(Error::InvalidData(format!("unknown basis label '{other}'"))),
        }
    }

    /// Charlie's interferometer feeds two detectors with a π phase offset;
    /// the primary output projects onto {T1, Plus, Right}, the secondary
    /// onto the complements.
    pub fn uses_primary_detector(self) -> bool {
        matches!(self, Basis::T1 | Basis::Plus | Basis::Right)
    }
}

/// A triple of single-qubit projectors for qubits A, B, C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub setting_id: usize,
    pub bases: [Basis; 3],
}

impl MeasurementSetting {
    /// 8x8 projector Π_A ⊗ Π_B ⊗ Π_C.
    pub fn projector(&self) -> DMatrix<Complex64> {
        self.bases[0]
            .projector()
            .kronecker(&self.bases[1].projector())
            .kronecker(&self.bases[2].projector())
    }

    /// Detector-efficiency product for this setting; Charlie's detector is
    /// chosen by his basis.
    pub fn efficiency_product(&self, config: &ExperimentConfig) -> f64 {
        let eta_c = if self.bases[2].uses_primary_detector() {
            config.eta_c1
        } else {
            config.eta_c2
        };
        config.eta_a * config.eta_b * eta_c
    }
}

/// The full campaign: the Cartesian product {T1, T2, PLUS, RIGHT}³ in
/// lexicographic order by (A, B, C); `setting_id` is the lexicographic rank.
pub fn settings_64() -> Vec<MeasurementSetting> {
    let mut out = Vec::with_capacity(64);
    for (ia, &a) in Basis::TOMOGRAPHY.iter().enumerate() {
        for (ib, &b) in Basis::TOMOGRAPHY.iter().enumerate() {
            for (ic, &c) in Basis::TOMOGRAPHY.iter().enumerate() {
                out.push(MeasurementSetting {
                    setting_id: ia * 16 + ib * 4 + ic,
                    bases: [a, b, c],
                });
            }
        }
    }
    out
}

/// tr(ρ · Π_A⊗Π_B⊗Π_C), clipped to [0, 1] within a 1e-9 slack.
pub fn born_probability(rho: &DensityMatrix, setting: &MeasurementSetting) -> Result<f64> {
    if rho.n_qubits() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "tomography settings address 3 qubits, state has {}",
            rho.n_qubits()
        )));
    }
    let p = (rho.matrix() * setting.projector()).trace().re;
    if !(-1e-9..=1.0 + 1e-9).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Observed (or simulated) coincidence counts for one setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting_id: usize,
    pub counts: u64,
    pub integration_pulses: u64,
}

impl CountRecord {
    pub fn new(setting_id: usize, counts: u64, integration_pulses: u64) -> Result<Self> {
        if integration_pulses == 0 {
            return Err(Error::InvalidData(format!(
                "setting {setting_id}: integration_pulses must be positive"
            )));
        }
        if counts > integration_pulses {
            return Err(Error::InvalidData(format!(
                "setting {setting_id}: counts {counts} exceed integration pulses {integration_pulses}"
            )));
        }
        Ok(Self {
            setting_id,
            counts,
            integration_pulses,
        })
    }
}

/// Effective per-pulse coincidence probability for one setting: the Born
/// probability scaled by the detector-efficiency product, plus dark-count
/// accidentals in an independent-arm approximation (every accidental term
/// carries at least one dark-count factor). Accidentals are added, never
/// subtracted.
pub fn effective_probability(
    rho: &DensityMatrix,
    setting: &MeasurementSetting,
    config: &ExperimentConfig,
) -> Result<f64> {
    let p_born = born_probability(rho, setting)?;
    let eta_c = if setting.bases[2].uses_primary_detector() {
        config.eta_c1
    } else {
        config.eta_c2
    };
    let etas = [config.eta_a, config.eta_b, eta_c];
    let p_sig = p_born * etas[0] * etas[1] * etas[2];

    let dark = config.dark_prob_per_gate();
    if dark == 0.0 {
        return Ok(p_sig.clamp(0.0, 1.0));
    }
    // Single-arm marginals for the accidental model.
    let mut sig_product = 1.0;
    let mut click_product = 1.0;
    for (q, eta) in etas.iter().enumerate() {
        let reduced = partial_trace(rho, &[q])?;
        let marg = (reduced.matrix() * setting.bases[q].projector()).trace().re;
        let s = (marg * eta).clamp(0.0, 1.0);
        sig_product *= s;
        click_product *= (s + (1.0 - s) * dark).min(1.0);
    }
    let accidental = (click_product - sig_product).max(0.0);
    Ok((p_sig + accidental).clamp(0.0, 1.0))
}

/// Draws Binomial(pulses, p_eff) counts for every setting. Deterministic
/// given the seed; settings are consumed in the given order.
pub fn simulate_counts(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    pulses_per_setting: u64,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    if pulses_per_setting < 1 {
        return Err(Error::InvalidConfig("pulses_per_setting must be >= 1".into()));
    }
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(settings.len());
    for setting in settings {
        let p = effective_probability(rho, setting, config)?;
        let dist = Binomial::new(pulses_per_setting, p)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let counts = dist.sample(&mut rng);
        out.push(CountRecord::new(setting.setting_id, counts, pulses_per_setting)?);
    }
    Ok(out)
}

/// Per-detector efficiencies used to renormalize frequencies before
/// inversion.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DetectorEfficiencies {
    pub eta_a: f64,
    pub eta_b: f64,
    pub eta_c1: f64,
    pub eta_c2: f64,
}

impl DetectorEfficiencies {
    pub fn from_config(config: &ExperimentConfig) -> Self {
        Self {
            eta_a: config.eta_a,
            eta_b: config.eta_b,
            eta_c1: config.eta_c1,
            eta_c2: config.eta_c2,
        }
    }

    fn product(&self, setting: &MeasurementSetting) -> f64 {
        let eta_c = if setting.bases[2].uses_primary_detector() {
            self.eta_c1
        } else {
            self.eta_c2
        };
        self.eta_a * self.eta_b * eta_c
    }
}

/// Reconstruction options shared by linear inversion and MLE.
#[derive(Debug, Clone)]
pub struct ReconstructionOptions {
    /// Relative log-likelihood change below which the ascent stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// When set, frequencies are divided by the per-setting efficiency
    /// product before inversion; when `None` they are used as-is.
    pub efficiency_correction: Option<DetectorEfficiencies>,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 5000,
            efficiency_correction: None,
        }
    }
}

/// Validates coverage of all 64 settings and returns (sorted settings,
/// per-setting frequency, per-setting pulses), efficiency-corrected when
/// requested.
fn prepare_frequencies(
    records: &[CountRecord],
    settings: &[MeasurementSetting],
    correction: Option<&DetectorEfficiencies>,
) -> Result<(Vec<MeasurementSetting>, Vec<f64>, Vec<f64>)> {
    if records.len() != 64 || settings.len() != 64 {
        return Err(Error::InvalidData(format!(
            "expected 64 records and 64 settings, got {} and {}",
            records.len(),
            settings.len()
        )));
    }
    let mut setting_by_id: Vec<Option<MeasurementSetting>> = vec![None; 64];
    for s in settings {
        if s.setting_id >= 64 {
            return Err(Error::InvalidData(format!(
                "setting_id {} out of range 0..64",
                s.setting_id
            )));
        }
        if setting_by_id[s.setting_id].replace(*s).is_some() {
            return Err(Error::InvalidData(format!(
                "duplicate setting_id {}",
                s.setting_id
            )));
        }
    }
    let mut freq = vec![f64::NAN; 64];
    let mut pulses = vec![0.0f64; 64];
    let mut total_counts = 0u64;
    for r in records {
        if r.setting_id >= 64 || setting_by_id[r.setting_id].is_none() {
            return Err(Error::InvalidData(format!(
                "record references unknown setting_id {}",
                r.setting_id
            )));
        }
        if !freq[r.setting_id].is_nan() {
            return Err(Error::InvalidData(format!(
                "duplicate record for setting_id {}",
                r.setting_id
            )));
        }
        if r.integration_pulses == 0 {
            return Err(Error::InvalidData(format!(
                "setting {}: integration_pulses must be positive",
                r.setting_id
            )));
        }
        total_counts += r.counts;
        let mut f = r.counts as f64 / r.integration_pulses as f64;
        if let Some(corr) = correction {
            let eta = corr.product(&setting_by_id[r.setting_id].unwrap());
            if eta <= 0.0 {
                return Err(Error::InvalidConfig(
                    "efficiency correction requires strictly positive efficiencies".into(),
                ));
            }
            f = (f / eta).min(1.0);
        }
        freq[r.setting_id] = f;
        pulses[r.setting_id] = r.integration_pulses as f64;
    }
    if freq.iter().any(|f| f.is_nan()) {
        return Err(Error::InvalidData("missing settings in count records".into()));
    }
    if total_counts == 0 {
        return Err(Error::InvalidData("zero total counts".into()));
    }
    let ordered: Vec<MeasurementSetting> =
        (0..64).map(|i| setting_by_id[i].unwrap()).collect();
    Ok((ordered, freq, pulses))
}

/// All 64 tensor-product Pauli operators in lexicographic (I, X, Y, Z)³
/// order, qubit A most significant.
fn pauli_basis() -> Vec<DMatrix<Complex64>> {
    let singles = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let mut out = Vec::with_capacity(64);
    for &a in &singles {
        for &b in &singles {
            for &c in &singles {
                out.push(Pauli::product(&[a, b, c]));
            }
        }
    }
    out
}

/// Result of linear inversion: a Hermitian unit-trace matrix that may carry
/// negative eigenvalues (flagged, not errored).
#[derive(Debug, Clone)]
pub struct LinearInversion {
    pub matrix: DMatrix<Complex64>,
    /// Euclidean residual of the refitted frequencies.
    pub residual: f64,
    pub min_eigenvalue: f64,
}

/// Solves the 64x64 linear system mapping outcome frequencies to the Pauli
/// coefficients of a Hermitian unit-trace matrix.
pub fn linear_inversion(
    records: &[CountRecord],
    settings: &[MeasurementSetting],
    correction: Option<&DetectorEfficiencies>,
) -> Result<LinearInversion> {
    let (ordered, freq, _) = prepare_frequencies(records, settings, correction)?;
    let paulis = pauli_basis();
    // p_m = Σ_s c_s tr(P_s Π_m)/8 with c_s = tr(ρ P_s).
    let mut design = DMatrix::<f64>::zeros(64, 64);
    for (m, setting) in ordered.iter().enumerate() {
        let proj = setting.projector();
        for (s, p) in paulis.iter().enumerate() {
            design[(m, s)] = (p * &proj).trace().re / 8.0;
        }
    }
    let rhs = DVector::from_vec(freq.clone());
    let lu = design.clone().lu();
    let coeffs = lu
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidData("singular tomography design matrix".into()))?;

    let mut rho = DMatrix::<Complex64>::zeros(8, 8);
    for (s, p) in paulis.iter().enumerate() {
        rho += p * Complex64::new(coeffs[s] / 8.0, 0.0);
    }
    // Exact frequencies give tr ρ = 1 already; noisy ones can drift.
    let trace = rho.trace().re;
    if trace.abs() < 1e-12 {
        return Err(Error::InvalidData("inverted matrix has zero trace".into()));
    }
    rho /= Complex64::new(trace, 0.0);
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);

    let residual = (&design * &coeffs - &rhs).norm();
    let (eigs, _) = eig_hermitian(&rho)?;
    Ok(LinearInversion {
        matrix: rho,
        residual,
        min_eigenvalue: *eigs.last().unwrap(),
    })
}

/// Spectral projection onto the density-matrix cone: clip negative
/// eigenvalues to zero and renormalize the trace.
pub fn psd_project(m: &DMatrix<Complex64>) -> Result<DensityMatrix> {
    let (eigs, vecs) = eig_hermitian(m)?;
    let clipped: Vec<f64> = eigs.iter().map(|&e| e.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return DensityMatrix::maximally_mixed(3);
    }
    let lambda = DMatrix::from_diagonal(&DVector::from_iterator(
        clipped.len(),
        clipped.iter().map(|&e| Complex64::new(e / total, 0.0)),
    ));
    let rebuilt = &vecs * lambda * vecs.adjoint();
    let sym = (&rebuilt + rebuilt.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::new(sym)
}

/// Converged (or best-effort) maximum-likelihood reconstruction.
#[derive(Debug, Clone)]
pub struct MleOutcome {
    pub rho: DensityMatrix,
    pub log_likelihood: f64,
    pub iterations: usize,
    /// Accepted log-likelihood value per iteration; nondecreasing.
    pub log_likelihood_trace: Vec<f64>,
}

struct MleProblem {
    projectors: Vec<DMatrix<Complex64>>,
    /// Effective counts (possibly efficiency-corrected, hence real-valued).
    counts: Vec<f64>,
    pulses: Vec<f64>,
}

impl MleProblem {
    const P_FLOOR: f64 = 1e-12;

    /// Binomial log-likelihood of the normalized state T·T†/tr(T·T†).
    fn log_likelihood(&self, t: &DMatrix<Complex64>) -> f64 {
        let rho_un = t * t.adjoint();
        let norm = rho_un.trace().re;
        let mut ll = 0.0;
        for ((proj, &n), &pulses) in self.projectors.iter().zip(&self.counts).zip(&self.pulses) {
            let p = ((&rho_un * proj).trace().re / norm)
                .clamp(Self::P_FLOOR, 1.0 - Self::P_FLOOR);
            ll += n * p.ln() + (pulses - n) * (1.0 - p).ln();
        }
        ll
    }

    /// Gradient of the log-likelihood with respect to the conjugated
    /// lower-triangular entries of T.
    fn gradient(&self, t: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let rho_un = t * t.adjoint();
        let norm = rho_un.trace().re;
        let mut grad = DMatrix::<Complex64>::zeros(8, 8);
        for ((proj, &n), &pulses) in self.projectors.iter().zip(&self.counts).zip(&self.pulses) {
            let p = ((&rho_un * proj).trace().re / norm)
                .clamp(Self::P_FLOOR, 1.0 - Self::P_FLOOR);
            let w = n / p - (pulses - n) / (1.0 - p);
            grad += (proj * t - t * Complex64::new(p, 0.0)) * Complex64::new(w / norm, 0.0);
        }
        // T is constrained lower-triangular.
        for r in 0..8 {
            for c in (r + 1)..8 {
                grad[(r, c)] = Complex64::new(0.0, 0.0);
            }
        }
        grad
    }
}

fn density_from_factor(t: &DMatrix<Complex64>) -> Result<DensityMatrix> {
    let rho_un = t * t.adjoint();
    let norm = rho_un.trace().re;
    let rho = rho_un / Complex64::new(norm, 0.0);
    let sym = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::new(sym)
}

/// Maximum-likelihood reconstruction over states parameterized as
/// T·T†/tr(T·T†) with T lower-triangular, initialized from the
/// PSD-projected linear inversion and optimized by monotone gradient
/// ascent with backtracking. Deterministic.
pub fn mle_reconstruct(
    records: &[CountRecord],
    settings: &[MeasurementSetting],
    options: &ReconstructionOptions,
) -> Result<MleOutcome> {
    let correction = options.efficiency_correction.as_ref();
    let (ordered, freq, pulses) = prepare_frequencies(records, settings, correction)?;
    let inversion = linear_inversion(records, settings, correction)?;
    let init = psd_project(&inversion.matrix)?;

    // A tiny admixture of the maximally mixed state keeps the Cholesky
    // factorization well defined for rank-deficient starts.
    let mut epsilon = 1e-8;
    let factor = loop {
        let blended = init.matrix() * Complex64::new(1.0 - epsilon, 0.0)
            + DMatrix::from_diagonal_element(8, 8, Complex64::new(epsilon / 8.0, 0.0));
        if let Some(chol) = Cholesky::new(blended) {
            break chol.l();
        }
        epsilon *= 10.0;
        if epsilon > 1e-2 {
            return Err(Error::InvalidData(
                "could not factorize the initial state estimate".into(),
            ));
        }
    };

    let problem = MleProblem {
        projectors: ordered.iter().map(|s| s.projector()).collect(),
        counts: freq.iter().zip(&pulses).map(|(f, n)| f * n).collect(),
        pulses,
    };

    let mut t = factor;
    let mut ll = problem.log_likelihood(&t);
    let mut trace = vec![ll];
    let mut step = 1e-3;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < options.max_iterations {
        iterations += 1;
        let grad = problem.gradient(&t);
        let grad_norm = grad.norm();
        if grad_norm == 0.0 {
            converged = true;
            break;
        }
        // Backtracking line search along the (scaled) ascent direction.
        let direction = &grad / Complex64::new(grad_norm, 0.0);
        let mut accepted = false;
        while step > 1e-18 {
            let candidate = &t + &direction * Complex64::new(step, 0.0);
            let cand_ll = problem.log_likelihood(&candidate);
            if cand_ll >= ll {
                let delta = cand_ll - ll;
                t = candidate;
                ll = cand_ll;
                trace.push(ll);
                accepted = true;
                if delta / (1.0 + ll.abs()) < options.tolerance {
                    converged = true;
                }
                step = (step * 1.5).min(1.0);
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No uphill move representable at f64 resolution.
            converged = true;
        }
        if converged {
            break;
        }
    }

    let outcome = MleOutcome {
        rho: density_from_factor(&t)?,
        log_likelihood: ll,
        iterations,
        log_likelihood_trace: trace,
    };
    if !converged {
        let relative_change = match outcome.log_likelihood_trace.as_slice() {
            [.., prev, last] => (last - prev) / (1.0 + last.abs()),
            _ => f64::NAN,
        };
        return Err(Error::MleNonConvergence {
            iterations,
            relative_change,
            best: Box::new(outcome),
        });
    }
    Ok(outcome)
}

/// Bootstrap estimate of a scalar metric over MLE reconstructions.
#[derive(Debug, Clone)]
pub struct BootstrapEstimate {
    pub mean: f64,
    /// Sample standard deviation over resamples.
    pub std_dev: f64,
    pub values: Vec<f64>,
}

/// Parametric bootstrap: refit the records, resample counts from the fitted
/// per-setting probabilities and re-run MLE on every resample. Resample i
/// uses seed + i, so results are independent of any execution order.
pub fn bootstrap_reconstructions(
    records: &[CountRecord],
    settings: &[MeasurementSetting],
    n_resamples: usize,
    seed: u64,
    options: &ReconstructionOptions,
) -> Result<Vec<DensityMatrix>> {
    if n_resamples < 2 {
        return Err(Error::InvalidConfig("n_resamples must be >= 2".into()));
    }
    let fit = mle_reconstruct(records, settings, options)?;
    let (ordered, _, pulses) =
        prepare_frequencies(records, settings, options.efficiency_correction.as_ref())?;

    // Fitted probabilities mapped back to the raw-count domain.
    let mut p_fit = Vec::with_capacity(64);
    for setting in &ordered {
        let mut p = born_probability(&fit.rho, setting)?;
        if let Some(corr) = options.efficiency_correction.as_ref() {
            p *= corr.product(setting);
        }
        p_fit.push(p.clamp(0.0, 1.0));
    }

    let mut reconstructions = Vec::with_capacity(n_resamples);
    for i in 0..n_resamples {
        let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let mut resampled = Vec::with_capacity(64);
        for (m, setting) in ordered.iter().enumerate() {
            let n = pulses[m] as u64;
            let dist = Binomial::new(n, p_fit[m])
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            let counts = dist.sample(&mut rng).min(n);
            resampled.push(CountRecord::new(setting.setting_id, counts, n)?);
        }
        let outcome =
            mle_reconstruct(&resampled, &ordered, options).map_err(|e| Error::BootstrapResample {
                resample: i,
                source: Box::new(e),
            })?;
        reconstructions.push(outcome.rho);
    }
    Ok(reconstructions)
}

/// Bootstrap mean and standard deviation of one scalar metric.
pub fn bootstrap_errors<F>(
    records: &[CountRecord],
    settings: &[MeasurementSetting],
    n_resamples: usize,
    seed: u64,
    options: &ReconstructionOptions,
    metric: F,
) -> Result<BootstrapEstimate>
where
    F: Fn(&DensityMatrix) -> Result<f64>,
{
    let reconstructions =
        bootstrap_reconstructions(records, settings, n_resamples, seed, options)?;
    let mut values = Vec::with_capacity(reconstructions.len());
    for (i, rho) in reconstructions.iter().enumerate() {
        values.push(metric(rho).map_err(|e| Error::BootstrapResample {
            resample: i,
            source: Box::new(e),
        })?);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    Ok(BootstrapEstimate {
        mean,
        std_dev: var.sqrt(),
        values,
    })
}

// ── Count-file I/O ──────────────────────────────────────────────────────

/// Writes records to CSV with header
/// `setting_id,basis_a,basis_b,basis_c,counts,integration_pulses`.
pub fn write_counts_csv<W: std::io::Write>(
    writer: W,
    records: &[CountRecord],
    settings: &[MeasurementSetting],
) -> Result<()> {
    let mut by_id = std::collections::HashMap::new();
    for s in settings {
        by_id.insert(s.setting_id, s);
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "setting_id",
        "basis_a",
        "basis_b",
        "basis_c",
        "counts",
        "integration_pulses",
    ])?;
    for r in records {
        let s = by_id.get(&r.setting_id).ok_or_else(|| {
            Error::InvalidData(format!("no setting for record {}", r.setting_id))
        })?;
        w.write_record([
            r.setting_id.to_string(),
            s.bases[0].label().to_string(),
            s.bases[1].label().to_string(),
            s.bases[2].label().to_string(),
            r.counts.to_string(),
            r.integration_pulses.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a counts CSV, rejecting unknown basis labels and duplicate
/// setting ids.
pub fn read_counts_csv<R: std::io::Read>(
    reader: R,
) -> Result<(Vec<CountRecord>, Vec<MeasurementSetting>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let expected = [
        "setting_id",
        "basis_a",
        "basis_b",
        "basis_c",
        "counts",
        "integration_pulses",
    ];
    {
        let headers = rdr.headers()?;
        if headers.iter().ne(expected) {
            return Err(Error::InvalidData(format!(
                "unexpected CSV header: {headers:?}"
            )));
        }
    }
    let mut seen = std::collections::HashSet::new();
    let mut records = Vec::new();
    let mut settings = Vec::new();
    for row in rdr.records() {
        let row = row?;
        if row.len() != 6 {
            return Err(Error::InvalidData(format!(
                "expected 6 columns, got {}",
                row.len()
            )));
        }
        let parse_int = |field: &str, name: &str| -> Result<u64> {
            field
                .trim()
                .parse()
                .map_err(|_| Error::InvalidData(format!("bad {name} value '{field}'")))
        };
        let setting_id = parse_int(&row[0], "setting_id")? as usize;
        if !seen.insert(setting_id) {
            return Err(Error::InvalidData(format!(
                "duplicate setting_id {setting_id}"
            )));
        }
        let bases = [
            Basis::from_label(row[1].trim())?,
            Basis::from_label(row[2].trim())?,
            Basis::from_label(row[3].trim())?,
        ];
        let counts = parse_int(&row[4], "counts")?;
        let pulses = parse_int(&row[5], "integration_pulses")?;
        records.push(CountRecord::new(setting_id, counts, pulses)?);
        settings.push(MeasurementSetting { setting_id, bases });
    }
    Ok((records, settings))
}

/// 0.5·‖ρ − σ‖₁, the trace distance between two states.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    let diff = a.matrix() - b.matrix();
    let (eigs, _) = eig_hermitian(&diff)?;
    Ok(0.5 * eigs.iter().map(|e| e.abs()).sum::<f64>())
}
