//! Property suite: randomized checks of the module invariants that the
//! unit tests only probe at hand-picked points.

use ghzsim_core::metrics::{
    fidelity, fit_visibility, mermin_expectation, purity_and_entropies, tripartite_negativity,
    witness_expectation,
};
use ghzsim_core::photonic::fringe_probability;
use ghzsim_core::quantum::{
    expectation, hermiticity_defect, partial_transpose_matrix, DensityMatrix, StateVector,
};
use ghzsim_core::tomography::{
    mle_reconstruct, settings_64, CountRecord, ReconstructionOptions,
};
use ghzsim_core::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

/// Strategy for a normalizable 3-qubit pure state: 8 complex amplitudes
/// with at least one comfortably away from zero.
fn arb_pure_state() -> impl Strategy<Value = StateVector> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8)
        .prop_filter("needs non-negligible norm", |amps| {
            amps.iter().map(|(re, im)| re * re + im * im).sum::<f64>() > 1e-3
        })
        .prop_map(|amps| {
            StateVector::new(
                amps.into_iter()
                    .map(|(re, im)| Complex64::new(re, im))
                    .collect(),
            )
            .expect("filtered to nonzero norm")
        })
}

/// Strategy for a 3-qubit mixed state: a convex mixture of up to four
/// random pure states. Weights are renormalized, so the result is a valid
/// density matrix by construction — the properties below check that the
/// *implementation* agrees.
fn arb_density() -> impl Strategy<Value = DensityMatrix> {
    (
        proptest::collection::vec(arb_pure_state(), 1..=4),
        proptest::collection::vec(0.05f64..1.0, 4),
    )
        .prop_map(|(states, raw_weights)| {
            let total: f64 = raw_weights.iter().take(states.len()).sum();
            let mut m = DMatrix::<Complex64>::zeros(8, 8);
            for (state, w) in states.iter().zip(&raw_weights) {
                m += state.to_density().matrix() * Complex64::new(w / total, 0.0);
            }
            DensityMatrix::new(m).expect("convex mixture of pure states")
        })
}

/// General single-qubit unitary from three angles.
fn unitary_2x2(theta: f64, phi: f64, lambda: f64) -> DMatrix<Complex64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(c, 0.0),
            -Complex64::from_polar(s, lambda),
            Complex64::from_polar(s, phi),
            Complex64::from_polar(c, phi + lambda),
        ],
    )
}

proptest! {
    // Criterion-level fuzz: 1000 random mixed states must satisfy the
    // DensityMatrix type invariants as measured from the outside.
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn random_states_are_hermitian_unit_trace_psd(rho in arb_density()) {
        prop_assert!(hermiticity_defect(rho.matrix()) < 1e-10);
        let trace: Complex64 = rho.matrix().diagonal().iter().sum();
        prop_assert!((trace.re - 1.0).abs() < 1e-10 && trace.im.abs() < 1e-10);
        // PSD: re-validating through the constructor runs the spectral check.
        prop_assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
        // expectation(ρ, I) = 1.
        let identity = DMatrix::<Complex64>::identity(8, 8);
        prop_assert!((expectation(&rho, &identity).unwrap() - 1.0).abs() < 1e-10);
        let purity = rho.purity();
        prop_assert!((0.125 - 1e-10..=1.0 + 1e-10).contains(&purity));
    }
}

proptest! {
    #[test]
    fn partial_transpose_is_trace_preserving_involution(
        rho in arb_density(),
        subsystem in 0usize..3,
    ) {
        let once = partial_transpose_matrix(rho.matrix(), 3, subsystem).unwrap();
        let twice = partial_transpose_matrix(&once, 3, subsystem).unwrap();
        // Involution is a pure permutation of entries: exact equality.
        prop_assert_eq!(&twice, rho.matrix());
        let t_once: Complex64 = once.diagonal().iter().sum();
        prop_assert!((t_once.re - 1.0).abs() < 1e-12 && t_once.im.abs() < 1e-12);
    }

    #[test]
    fn witness_fidelity_identity(rho in arb_density()) {
        let w = witness_expectation(&rho).unwrap();
        let f = fidelity(&rho, &StateVector::ghz_minus()).unwrap();
        prop_assert!((w + f - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mermin_is_bounded_by_quantum_maximum(rho in arb_density()) {
        let m = mermin_expectation(&rho).unwrap();
        prop_assert!(m.value.abs() <= 4.0 + 1e-9);
        for term in m.terms {
            prop_assert!(term.abs() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn linear_entropy_tracks_purity_exactly(rho in arb_density()) {
        let (purity, linear, von_neumann) = purity_and_entropies(&rho);
        prop_assert!((linear - (8.0 / 7.0) * (1.0 - purity)).abs() < 1e-12);
        prop_assert!((-1e-9..=3.0 + 1e-9).contains(&von_neumann));
    }

    #[test]
    fn negativity_is_invariant_under_local_unitaries(
        state in arb_pure_state(),
        angles in proptest::collection::vec((0.0f64..3.1, 0.0f64..6.2, 0.0f64..6.2), 3),
    ) {
        let rho = state.to_density();
        let mut u = unitary_2x2(angles[0].0, angles[0].1, angles[0].2);
        for a in &angles[1..] {
            u = u.kronecker(&unitary_2x2(a.0, a.1, a.2));
        }
        let rotated = DensityMatrix::new(&u * rho.matrix() * u.adjoint()).unwrap();
        let n0 = tripartite_negativity(&rho).unwrap();
        let n1 = tripartite_negativity(&rotated).unwrap();
        prop_assert!((n0 - n1).abs() < 1e-9);
    }

    #[test]
    fn fringe_probability_stays_in_unit_interval(
        phi_b in -10.0f64..10.0,
        phi_c in -10.0f64..10.0,
        visibility in 0.0f64..=1.0,
    ) {
        let p = fringe_probability(phi_b, phi_c, visibility).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn visibility_fit_recovers_noiseless_fringes(
        visibility in 0.0f64..=1.0,
        phase_offset in -3.0f64..3.0,
    ) {
        let phases: Vec<f64> = (0..16)
            .map(|k| 2.0 * std::f64::consts::PI * k as f64 / 16.0)
            .collect();
        let counts: Vec<f64> = phases
            .iter()
            .map(|&p| 0.5 * (1.0 + visibility * (p + phase_offset).cos()))
            .collect();
        let fit = fit_visibility(&phases, &counts).unwrap();
        prop_assert!((fit.visibility - visibility).abs() < 1e-9);
        prop_assert!(fit.rms_residual < 1e-9);
    }
}

proptest! {
    // MLE runs are expensive; a handful of random count tables suffices to
    // exercise the monotone-ascent contract on rough data.
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn mle_is_monotone_and_physical_on_arbitrary_counts(
        counts in proptest::collection::vec(0u64..=1000, 64),
    ) {
        let settings = settings_64();
        let records: Vec<CountRecord> = counts
            .iter()
            .enumerate()
            .map(|(id, &c)| CountRecord::new(id, c, 1000).unwrap())
            .collect();
        let total: u64 = counts.iter().sum();
        prop_assume!(total > 0);
        let outcome = match mle_reconstruct(&records, &settings, &ReconstructionOptions::default()) {
            Ok(outcome) => outcome,
            // Rough random counts may legitimately exhaust the iteration
            // budget; the best iterate must still honor the contract.
            Err(Error::MleNonConvergence { best, .. }) => *best,
            Err(other) => return Err(TestCaseError::fail(other.to_string())),
        };
        for pair in outcome.log_likelihood_trace.windows(2) {
            prop_assert!(pair[1] >= pair[0] - 1e-9 * pair[0].abs().max(1.0));
        }
        prop_assert!(DensityMatrix::new(outcome.rho.matrix().clone()).is_ok());
    }
}
