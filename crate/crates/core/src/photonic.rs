//! Model of the optical train: sources, the time-dependent beam splitter
//! (TDBS) with post-selection, losses, detectors, fringe prediction and
//! coincidence-rate estimation.
//!
//! The TDBS is a 2x2 optical switch driven so that the early bin |t₁⟩ takes
//! the bar path (port A′→A, B′→B) while the late bin |t₂⟩ takes the cross
//! path (A′→B, B′→A). Each crossing contributes the directional-coupler
//! phase i, so the doubly-crossed |t₂t₂⟩ component picks up i² = −1, which
//! is where the minus sign of the post-selected GHZ state comes from.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::quantum::{tensor_states, DensityMatrix, StateVector};
use crate::{Error, Result};

/// Source, loss, detector and phase parameters of one experimental run.
///
/// Serialized as JSON with exactly these field names; unknown fields are
/// rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Mean photon-pair number per pulse of the down-conversion source.
    pub mu_pair: f64,
    /// Mean photon number per pulse of the weak coherent pulse.
    pub mu_wcp: f64,
    /// Pulse repetition rate in pulses/second.
    pub rep_rate: f64,
    #[serde(rename = "eta_A")]
    pub eta_a: f64,
    #[serde(rename = "eta_B")]
    pub eta_b: f64,
    #[serde(rename = "eta_C1")]
    pub eta_c1: f64,
    #[serde(rename = "eta_C2")]
    pub eta_c2: f64,
    /// Dark counts per second per detector.
    pub dark_rate: f64,
    /// Insertion loss of each interferometer, dB.
    pub loss_umzi_db: f64,
    /// Insertion loss of the optical switch, dB.
    pub loss_switch_db: f64,
    /// Scalar two-photon interference visibility in [0, 1].
    pub interference_visibility: f64,
    #[serde(rename = "phase_A")]
    pub phase_a: f64,
    #[serde(rename = "phase_B")]
    pub phase_b: f64,
    #[serde(rename = "phase_C")]
    pub phase_c: f64,
}

impl ExperimentConfig {
    /// Parameters reported for the lab setup: 250 MHz repetition rate,
    /// pair rate 0.0082, detector efficiencies 57/52/62/46 %, dark rate
    /// 40 cps, 2.0 dB interferometer and 3.5 dB switch losses, 94.7 %
    /// visibility. The WCP mean photon number is not published and is a
    /// free parameter here.
    pub fn lab() -> Self {
        Self {
            mu_pair: 0.0082,
            mu_wcp: 0.01,
            rep_rate: 250e6,
            eta_a: 0.57,
            eta_b: 0.52,
            eta_c1: 0.62,
            eta_c2: 0.46,
            dark_rate: 40.0,
            loss_umzi_db: 2.0,
            loss_switch_db: 3.5,
            interference_visibility: 0.947,
            phase_a: 0.0,
            phase_b: 0.0,
            phase_c: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_unit = |name: &str, v: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("{name} = {v} outside [0, 1]")));
            }
            Ok(())
        };
        let check_nonneg = |name: &str, v: f64| -> Result<()> {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!("{name} = {v} must be >= 0")));
            }
            Ok(())
        };
        check_nonneg("mu_pair", self.mu_pair)?;
        check_nonneg("mu_wcp", self.mu_wcp)?;
        check_nonneg("rep_rate", self.rep_rate)?;
        check_unit("eta_A", self.eta_a)?;
        check_unit("eta_B", self.eta_b)?;
        check_unit("eta_C1", self.eta_c1)?;
        check_unit("eta_C2", self.eta_c2)?;
        check_nonneg("dark_rate", self.dark_rate)?;
        check_nonneg("loss_umzi_db", self.loss_umzi_db)?;
        check_nonneg("loss_switch_db", self.loss_switch_db)?;
        check_unit("interference_visibility", self.interference_visibility)?;
        Ok(())
    }

    /// Parses and validates a config from JSON, rejecting unknown fields.
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Power transmittance of one interferometer pass.
    pub fn umzi_transmittance(&self) -> f64 {
        db_to_transmittance(self.loss_umzi_db)
    }

    /// Power transmittance of one switch pass.
    pub fn switch_transmittance(&self) -> f64 {
        db_to_transmittance(self.loss_switch_db)
    }

    /// Dark-count probability per detector per pulse gate.
    pub fn dark_prob_per_gate(&self) -> f64 {
        if self.rep_rate > 0.0 {
            (self.dark_rate / self.rep_rate).min(1.0)
        } else {
            0.0
        }
    }
}

pub fn db_to_transmittance(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

/// Linear phase–temperature response of a planar-lightwave-circuit
/// interferometer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseTemperatureMap {
    /// Radians per degree Celsius; must be positive.
    pub slope: f64,
    /// Base-plate temperature at which the relative phase is zero.
    pub reference_temp: f64,
}

impl PhaseTemperatureMap {
    pub fn new(slope: f64, reference_temp: f64) -> Result<Self> {
        if slope.is_nan() || slope <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "phase-temperature slope {slope} must be > 0"
            )));
        }
        Ok(Self {
            slope,
            reference_temp,
        })
    }

    /// The measured response: a π phase shift per 0.3 °C.
    pub fn lab() -> Self {
        Self::new(std::f64::consts::PI / 0.3, 0.0).unwrap()
    }

    pub fn phase_at(&self, temp: f64) -> f64 {
        self.slope * (temp - self.reference_temp)
    }
}

/// The pre-switch state (|t₁⟩ + e^{iφ}|t₂⟩)/√2 ⊗ |Φ⁺⟩ in port order
/// A′, B′, C.
pub fn build_initial_state(phase_wcp: f64) -> StateVector {
    tensor_states(&StateVector::phase_ket(phase_wcp), &StateVector::bell_phi_plus())
        .expect("3-qubit product state")
}

/// Applies the TDBS mode map to a state in port order A′, B′, C and splits
/// it into the coincidence component (one photon per output port,
/// unnormalized, in port order A, B, C) and the rejected weight.
///
/// Basis components with both photons in the same time bin stay within the
/// qubit space: bar-bar keeps coefficient 1, cross-cross gives i² = −1.
/// Mixed-bin components send both photons to one port and leave the
/// post-selected subspace.
pub fn tdbs_map(state: &StateVector) -> Result<(Vec<Complex64>, f64)> {
    if state.n_qubits() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "TDBS input must be a 3-qubit state, got {} qubits",
            state.n_qubits()
        )));
    }
    let mut kept = vec![Complex64::new(0.0, 0.0); 8];
    let mut rejected = 0.0f64;
    for (idx, &amp) in state.amplitudes().iter().enumerate() {
        let a_in = (idx >> 2) & 1;
        let b_in = (idx >> 1) & 1;
        if a_in == b_in {
            // Both bar (t1,t1) or both cross (t2,t2); the double crossing
            // contributes i·i = −1.
            let sign = if a_in == 0 { 1.0 } else { -1.0 };
            kept[idx] += amp * Complex64::new(sign, 0.0);
        } else {
            // One bar, one cross: two photons in one output port.
            rejected += amp.norm_sqr();
        }
    }
    Ok((kept, rejected))
}

/// TDBS map followed by post-selection on one photon per output port.
pub fn tdbs_postselect(state: &StateVector) -> Result<StateVector> {
    let (kept, _) = tdbs_map(state)?;
    let norm_sqr: f64 = kept.iter().map(|a| a.norm_sqr()).sum();
    if norm_sqr < 1e-24 {
        return Err(Error::NoCoincidenceSupport);
    }
    StateVector::new(kept)
}

/// Normalized two-photon fringe (1 + V·cos(φ_B + φ_C))/2 for the Bell state
/// routed entirely to Bob's port.
pub fn fringe_probability(phi_b: f64, phi_c: f64, visibility: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::InvalidConfig(format!(
            "visibility {visibility} outside [0, 1]"
        )));
    }
    Ok((1.0 + visibility * (phi_b + phi_c).cos()) / 2.0)
}

/// White-noise model p·|GHZ⟩⟨GHZ| + (1−p)·I/8, a calibrated stand-in for
/// the lab state.
pub fn noisy_ghz_model(p_white: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p_white) {
        return Err(Error::InvalidConfig(format!(
            "p_white {p_white} outside [0, 1]"
        )));
    }
    let ghz = StateVector::ghz_minus().to_density();
    let mixed = DensityMatrix::maximally_mixed(3)?;
    let m = ghz.matrix() * Complex64::new(p_white, 0.0)
        + mixed.matrix() * Complex64::new(1.0 - p_white, 0.0);
    DensityMatrix::new(m)
}

/// Lowest-order analytic three-fold coincidence rate in counts/minute:
///
/// rate = f · μ_pair · μ_wcp · ½ · t_switch² · t_umzi³ · η_A · η_B · η̄_C
///
/// where t = 10^(−dB/10), the ½ is the post-selection success probability,
/// the switch is traversed by the two entangling photons, every photon
/// passes one interferometer, and η̄_C averages Charlie's two detectors.
pub fn estimate_threefold_rate(config: &ExperimentConfig) -> Result<f64> {
    config.validate()?;
    let t_switch = config.switch_transmittance();
    let t_umzi = config.umzi_transmittance();
    let eta_c = 0.5 * (config.eta_c1 + config.eta_c2);
    let per_second = config.rep_rate
        * config.mu_pair
        * config.mu_wcp
        * 0.5
        * t_switch.powi(2)
        * t_umzi.powi(3)
        * config.eta_a
        * config.eta_b
        * eta_c;
    Ok(per_second * 60.0)
}

/// WCP mean photon number that makes [`estimate_threefold_rate`] hit
/// `target_per_minute`. The rate is linear in μ_wcp at lowest order.
pub fn fit_mu_wcp(config: &ExperimentConfig, target_per_minute: f64) -> Result<f64> {
    let mut unit = config.clone();
    unit.mu_wcp = 1.0;
    let slope = estimate_threefold_rate(&unit)?;
    if slope <= 0.0 {
        return Err(Error::InvalidConfig(
            "rate is identically zero; cannot fit mu_wcp".into(),
        ));
    }
    Ok(target_per_minute / slope)
}

/// Monte Carlo estimate of the fraction of post-selected three-fold events
/// that originate from the ideal one-pair + one-WCP-photon pattern.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HigherOrderFidelity {
    /// Fraction of coincidences with the ideal photon-number pattern; an
    /// upper-bound proxy for the state fidelity.
    pub ideal_fraction: f64,
    /// Binomial standard error of the fraction.
    pub std_error: f64,
    pub coincidences: u64,
    pub samples: u64,
}

/// Samples photon-number patterns (truncated at two photons per source per
/// pulse), propagates them through loss and the TDBS port map, and tallies
/// post-selected three-fold events.
///
/// Pulses with zero photons from either source can never produce a
/// three-fold, so sampling conditions exactly on at least one photon per
/// source; the absolute rate is covered by [`estimate_threefold_rate`].
/// Pair numbers are treated as Poissonian, which matches the thermal
/// per-mode statistics to first order at μ ≪ 1.
pub fn simulate_higher_order_fidelity(
    config: &ExperimentConfig,
    n_samples: u64,
    seed: u64,
) -> Result<HigherOrderFidelity> {
    config.validate()?;
    if n_samples < 1 {
        return Err(Error::InvalidConfig("n_samples must be >= 1".into()));
    }
    if config.mu_pair <= 0.0 || config.mu_wcp <= 0.0 {
        return Err(Error::NoCoincidences(n_samples));
    }
    // P(n = 2 | 1 <= n <= 2) for Poisson(mu).
    let p2_given_ge1 = |mu: f64| (mu / 2.0) / (1.0 + mu / 2.0);
    let p2_pair = p2_given_ge1(config.mu_pair);
    let p2_wcp = p2_given_ge1(config.mu_wcp);

    let t_switch = config.switch_transmittance();
    let t_umzi = config.umzi_transmittance();
    let dark = config.dark_prob_per_gate();

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut coincidences = 0u64;
    let mut ideal = 0u64;

    for _ in 0..n_samples {
        let n_pair = if rng.gen::<f64>() < p2_pair { 2 } else { 1 };
        let n_wcp = if rng.gen::<f64>() < p2_wcp { 2 } else { 1 };

        // Photon counts surviving at each output port detector.
        let mut at_a = 0u32;
        let mut at_b = 0u32;
        let mut at_c = 0u32;

        // WCP photons enter port A'; bin t1 -> A, bin t2 -> B.
        for _ in 0..n_wcp {
            let bin_t2 = rng.gen::<bool>();
            if rng.gen::<f64>() >= t_switch || rng.gen::<f64>() >= t_umzi {
                continue;
            }
            if bin_t2 {
                if rng.gen::<f64>() < config.eta_b {
                    at_b += 1;
                }
            } else if rng.gen::<f64>() < config.eta_a {
                at_a += 1;
            }
        }
        // Each pair shares one bin: signal to port B' (t1 -> B, t2 -> A),
        // idler straight to Charlie.
        for _ in 0..n_pair {
            let bin_t2 = rng.gen::<bool>();
            // Signal arm through switch and interferometer.
            if rng.gen::<f64>() < t_switch && rng.gen::<f64>() < t_umzi {
                if bin_t2 {
                    if rng.gen::<f64>() < config.eta_a {
                        at_a += 1;
                    }
                } else if rng.gen::<f64>() < config.eta_b {
                    at_b += 1;
                }
            }
            // Idler arm through Charlie's interferometer, split over his
            // two detectors.
            if rng.gen::<f64>() < t_umzi {
                let eta = if rng.gen::<bool>() {
                    config.eta_c1
                } else {
                    config.eta_c2
                };
                if rng.gen::<f64>() < eta {
                    at_c += 1;
                }
            }
        }

        let click_a = at_a > 0 || rng.gen::<f64>() < dark;
        let click_b = at_b > 0 || rng.gen::<f64>() < dark;
        let click_c = at_c > 0 || rng.gen::<f64>() < 1.0 - (1.0 - dark) * (1.0 - dark);

        if click_a && click_b && click_c {
            coincidences += 1;
            if n_pair == 1 && n_wcp == 1 {
                ideal += 1;
            }
        }
    }

    if coincidences == 0 {
        return Err(Error::NoCoincidences(n_samples));
    }
    let f = ideal as f64 / coincidences as f64;
    let se = (f * (1.0 - f) / coincidences as f64).sqrt();
    Ok(HigherOrderFidelity {
        ideal_fraction: f,
        std_error: se,
        coincidences,
        samples: n_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::expectation;
    use std::f64::consts::PI;

    fn assert_amps(state: &StateVector, expect: &[(f64, f64)], tol: f64) {
        for (a, &(re, im)) in state.amplitudes().iter().zip(expect) {
            assert!(
                (a - Complex64::new(re, im)).norm() < tol,
                "got {a}, expected {re}+{im}i"
            );
        }
    }

    #[test]
    fn initial_state_phase_zero() {
        let s = build_initial_state(0.0);
        let h = 0.5;
        assert_amps(
            &s,
            &[
                (h, 0.0),
                (0.0, 0.0),
                (0.0, 0.0),
                (h, 0.0),
                (h, 0.0),
                (0.0, 0.0),
                (0.0, 0.0),
                (h, 0.0),
            ],
            1e-12,
        );
    }

    #[test]
    fn initial_state_phase_pi() {
        let s = build_initial_state(PI);
        let h = 0.5;
        assert_amps(
            &s,
            &[
                (h, 0.0),
                (0.0, 0.0),
                (0.0, 0.0),
                (h, 0.0),
                (-h, 0.0),
                (0.0, 0.0),
                (0.0, 0.0),
                (-h, 0.0),
            ],
            1e-12,
        );
        assert!((s.amplitudes().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tdbs_produces_minus_sign_ghz() {
        let out = tdbs_postselect(&build_initial_state(0.0)).unwrap();
        let ghz = StateVector::ghz_minus();
        for (a, b) in out.amplitudes().iter().zip(ghz.amplitudes().iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn tdbs_bar_state_passthrough() {
        let t111 = StateVector::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        let out = tdbs_postselect(&t111).unwrap();
        assert!((out.amplitudes()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn tdbs_mixed_bins_have_no_coincidence_support() {
        // |t2>_A' |t1>_B' |t1>_C : the A' photon crosses to port B, port A
        // stays empty.
        let mut amps = vec![Complex64::new(0.0, 0.0); 8];
        amps[0b100] = Complex64::new(1.0, 0.0);
        let s = StateVector::new(amps).unwrap();
        assert!(matches!(
            tdbs_postselect(&s),
            Err(Error::NoCoincidenceSupport)
        ));
    }

    // Mode-tracking oracle: count photons per output port for each basis ket
    // and keep it iff both switch outputs hold exactly one photon.
    #[test]
    fn tdbs_support_matches_port_occupation_oracle() {
        for idx in 0..8usize {
            let a_in = (idx >> 2) & 1;
            let b_in = (idx >> 1) & 1;
            // Port A receives: A' photon if bin t1, B' photon if bin t2.
            let occ_a = usize::from(a_in == 0) + usize::from(b_in == 1);
            let occ_b = usize::from(a_in == 1) + usize::from(b_in == 0);
            let oracle_kept = occ_a == 1 && occ_b == 1;

            let mut amps = vec![Complex64::new(0.0, 0.0); 8];
            amps[idx] = Complex64::new(1.0, 0.0);
            let s = StateVector::new(amps).unwrap();
            let (kept, rejected) = tdbs_map(&s).unwrap();
            let kept_norm: f64 = kept.iter().map(|a| a.norm_sqr()).sum();
            if oracle_kept {
                assert!((kept_norm - 1.0).abs() < 1e-12 && rejected < 1e-12);
            } else {
                assert!(kept_norm < 1e-12 && (rejected - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tdbs_map_is_norm_preserving_before_projection() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for _ in 0..50 {
            let amps: Vec<Complex64> = (0..8)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let s = StateVector::new(amps).unwrap();
            let (kept, rejected) = tdbs_map(&s).unwrap();
            let total: f64 = kept.iter().map(|a| a.norm_sqr()).sum::<f64>() + rejected;
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fringe_extremes() {
        assert!((fringe_probability(0.0, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(fringe_probability(PI / 3.0, 2.0 * PI / 3.0, 1.0).unwrap() < 1e-12);
    }

    #[test]
    fn fringe_mean_is_half() {
        // Trapezoid quadrature over a full period is spectrally accurate.
        let n = 4096;
        for &(phi_b, v) in &[(0.0, 1.0), (0.7, 0.947), (2.1, 0.3)] {
            let mut acc = 0.0;
            for k in 0..n {
                let phi_c = 2.0 * PI * k as f64 / n as f64;
                acc += fringe_probability(phi_b, phi_c, v).unwrap();
            }
            assert!((acc / n as f64 - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn phase_temperature_pi_per_point_three() {
        let map = PhaseTemperatureMap::lab();
        assert!((map.phase_at(0.3) - map.phase_at(0.0) - PI).abs() < 1e-12);
        assert!(PhaseTemperatureMap::new(0.0, 0.0).is_err());
    }

    #[test]
    fn noisy_model_fidelity() {
        let ghz = StateVector::ghz_minus();
        let proj = ghz.to_density();
        let f = |p: f64| {
            let rho = noisy_ghz_model(p).unwrap();
            expectation(&rho, proj.matrix()).unwrap()
        };
        assert!((f(1.0) - 1.0).abs() < 1e-12);
        assert!((f(0.0) - 0.125).abs() < 1e-12);
        // p solved from F = p + (1-p)/8 at the reported fidelity.
        assert!((f(0.672) - 0.713).abs() < 1e-3);
    }

    #[test]
    fn rate_zero_without_pairs() {
        let mut cfg = ExperimentConfig::lab();
        cfg.mu_pair = 0.0;
        assert_eq!(estimate_threefold_rate(&cfg).unwrap(), 0.0);
    }

    #[test]
    fn rate_is_linear_in_wcp_flux() {
        let mut cfg = ExperimentConfig::lab();
        let r1 = estimate_threefold_rate(&cfg).unwrap();
        cfg.mu_wcp *= 2.0;
        let r2 = estimate_threefold_rate(&cfg).unwrap();
        assert!((r2 / r1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rate_monotone_in_efficiencies_and_rep_rate() {
        let base = ExperimentConfig::lab();
        let r0 = estimate_threefold_rate(&base).unwrap();
        for bump in 0..5 {
            let mut cfg = base.clone();
            match bump {
                0 => cfg.eta_a = (cfg.eta_a + 0.1).min(1.0),
                1 => cfg.eta_b = (cfg.eta_b + 0.1).min(1.0),
                2 => cfg.eta_c1 = (cfg.eta_c1 + 0.1).min(1.0),
                3 => cfg.eta_c2 = (cfg.eta_c2 + 0.1).min(1.0),
                _ => cfg.rep_rate *= 1.5,
            }
            assert!(estimate_threefold_rate(&cfg).unwrap() >= r0);
        }
    }

    #[test]
    fn fitted_mu_wcp_reproduces_target_rate() {
        let mut cfg = ExperimentConfig::lab();
        cfg.mu_wcp = fit_mu_wcp(&cfg, 0.8).unwrap();
        assert!((estimate_threefold_rate(&cfg).unwrap() - 0.8).abs() < 1e-9);
    }

    #[test]
    fn config_json_rejects_unknown_fields() {
        let mut v = serde_json::to_value(ExperimentConfig::lab()).unwrap();
        v.as_object_mut()
            .unwrap()
            .insert("bogus".into(), serde_json::json!(1));
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = ExperimentConfig::lab();
        let s = serde_json::to_string(&cfg).unwrap();
        assert!(s.contains("\"eta_A\"") && s.contains("\"phase_C\""));
        let back = ExperimentConfig::from_json(&s).unwrap();
        assert_eq!(back.eta_c2, cfg.eta_c2);
    }

    #[test]
    fn monte_carlo_signals_without_wcp() {
        let mut cfg = ExperimentConfig::lab();
        cfg.mu_wcp = 0.0;
        assert!(matches!(
            simulate_higher_order_fidelity(&cfg, 1000, 1),
            Err(Error::NoCoincidences(1000))
        ));
    }

    #[test]
    fn monte_carlo_ideal_fraction_approaches_one() {
        let mut cfg = ExperimentConfig::lab();
        cfg.mu_pair = 1e-4;
        cfg.mu_wcp = 1e-4;
        let r = simulate_higher_order_fidelity(&cfg, 1_000_000, 77).unwrap();
        assert!(r.coincidences > 1000);
        assert!(1.0 - r.ideal_fraction <= 3.0 * r.std_error.max(1e-6) + 3e-4);
    }

    #[test]
    fn monte_carlo_contamination_grows_with_wcp_flux() {
        let mut lo = ExperimentConfig::lab();
        lo.mu_wcp = 0.005;
        let mut hi = lo.clone();
        hi.mu_wcp = 0.1;
        let a = simulate_higher_order_fidelity(&lo, 400_000, 9).unwrap();
        let b = simulate_higher_order_fidelity(&hi, 400_000, 9).unwrap();
        let combined = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!(a.ideal_fraction - b.ideal_fraction > -3.0 * combined);
        assert!(b.ideal_fraction < a.ideal_fraction);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let cfg = ExperimentConfig::lab();
        let a = simulate_higher_order_fidelity(&cfg, 50_000, 123).unwrap();
        let b = simulate_higher_order_fidelity(&cfg, 50_000, 123).unwrap();
        assert_eq!(a.ideal_fraction, b.ideal_fraction);
        assert_eq!(a.coincidences, b.coincidences);
    }
}
