use std::f64::consts::{FRAC_1_SQRT_2, PI};

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use zenodrive::geometry::{Parameterization, PathKind, TimedTrajectory, Trajectory};
use zenodrive::models::TwoLevelModel;
use zenodrive::protocol::final_infidelity;
use zenodrive::spectator::{
    evolve_gadget, gadget_unitary, interaction_action, interaction_hamiltonian, reduced_coherence,
    ActionMeasure,
};
use zenodrive::{Complex64, ParameterPoint};

fn amplitudes() -> (Complex64, Complex64) {
    (Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8))
}

#[test]
fn coherence_follows_cosine_law() {
    let (a0, a1) = amplitudes();
    let tau = 1.7;
    for i in 0..=400 {
        let t = 4.0 * tau * i as f64 / 400.0;
        let r = reduced_coherence(&evolve_gadget(a0, a1, tau, t).unwrap());
        let expected = (a0 * a1).norm() * (PI * t / (2.0 * tau)).cos().abs();
        assert_abs_diff_eq!(r.coherence_abs(), expected, epsilon = 1e-10);
        assert_abs_diff_eq!(r.p0(), 0.36, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p1(), 0.64, epsilon = 1e-12);
    }
}

#[test]
fn decoheres_at_odd_multiples_of_tau() {
    let (a0, a1) = amplitudes();
    for n in [1.0, 3.0, 5.0] {
        let r = reduced_coherence(&evolve_gadget(a0, a1, 0.8, n * 0.8).unwrap());
        assert!(r.coherence_abs() <= 1e-12);
    }
    let revived = reduced_coherence(&evolve_gadget(a0, a1, 0.8, 1.6).unwrap());
    assert_abs_diff_eq!(revived.coherence_abs(), 0.48, epsilon = 1e-12);
}

#[test]
fn decohered_state_is_diagonal_mixture() {
    let (a0, a1) = amplitudes();
    let r = reduced_coherence(&evolve_gadget(a0, a1, 2.0, 2.0).unwrap());
    assert_abs_diff_eq!(r.rho[(0, 0)].re, a0.norm_sqr(), epsilon = 1e-12);
    assert_abs_diff_eq!(r.rho[(1, 1)].re, a1.norm_sqr(), epsilon = 1e-12);
    for (i, j) in [(0, 1), (1, 0)] {
        assert!(r.rho[(i, j)].norm() <= 1e-12);
    }
    assert!(r.rho[(0, 0)].im.abs() <= 1e-12);
}

#[test]
fn coherence_has_period_two_tau() {
    let (a0, a1) = amplitudes();
    let tau = 0.9;
    for i in 0..40 {
        let t = 2.0 * tau * i as f64 / 40.0;
        let c = |t| reduced_coherence(&evolve_gadget(a0, a1, tau, t).unwrap()).coherence_abs();
        assert_abs_diff_eq!(c(t), c(t + 2.0 * tau), epsilon = 1e-12);
    }
}

#[test]
fn reduced_state_is_a_density_matrix() {
    let (a0, a1) = amplitudes();
    for t in [0.0, 0.3, 1.1, 2.5] {
        let r = reduced_coherence(&evolve_gadget(a0, a1, 1.0, t).unwrap());
        assert_abs_diff_eq!(r.trace(), 1.0, epsilon = 1e-12);
        assert!((r.rho - r.rho.adjoint()).norm() <= 1e-12);
        let [lo, hi] = r.eigenvalues();
        assert!(lo >= -1e-12 && hi <= 1.0 + 1e-12);
    }
}

#[test]
fn gadget_unitary_is_unitary() {
    let tau = 1.3;
    for i in 0..=20 {
        let u = gadget_unitary(tau, 4.0 * tau * i as f64 / 20.0).unwrap();
        let defect = u.adjoint() * &u - DMatrix::identity(4, 4);
        assert!(defect.iter().all(|z| z.norm() <= 1e-12));
    }
}

#[test]
fn ground_branch_stays_a_product() {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    for t in [0.0, 0.5, 1.0, 3.3] {
        let s = evolve_gadget(one, zero, 1.0, t).unwrap();
        let r = reduced_coherence(&s);
        assert_abs_diff_eq!(r.p0(), 1.0, epsilon = 1e-12);
        assert!(r.coherence_abs() <= 1e-12);
        // ⟨↑|e^{iθσx} σx e^{-iθσx}|↑⟩ = ⟨↑|σx|↑⟩ = 0
        assert!(s.expectation(&interaction_hamiltonian(1.0).unwrap()).abs() <= 1e-10);
    }
}

#[test]
fn expectation_action_vanishes() {
    let (a0, a1) = amplitudes();
    let s = interaction_action(a0, a1, 1.0, 10.0, 10, ActionMeasure::Expectation).unwrap();
    assert!(s.abs() <= 1e-10);
    let s2 = interaction_action(a0, a1, 0.5, 10.0, 20, ActionMeasure::Expectation).unwrap();
    assert_abs_diff_eq!(s, s2, epsilon = 1e-10);
}

#[test]
fn rms_action_tracks_coupling_strength() {
    let (a0, a1) = amplitudes();
    // H_int² = (π/4τ)², so the RMS action is πT/4τ
    let s = interaction_action(a0, a1, 0.5, 10.0, 20, ActionMeasure::RootMeanSquare).unwrap();
    assert_abs_diff_eq!(s, PI * 10.0 / 2.0, epsilon = 1e-10);
    let halved = interaction_action(a0, a1, 0.25, 10.0, 40, ActionMeasure::RootMeanSquare).unwrap();
    assert_abs_diff_eq!(halved / s, 2.0, epsilon = 1e-12);
}

#[test]
fn infidelity_times_action_is_constant_in_k() {
    let traj = TimedTrajectory::build(
        &TwoLevelModel,
        &Trajectory::line(ParameterPoint::scalar(0.0), ParameterPoint::scalar(PI)),
        PathKind::Linear,
        Parameterization::ConstantManifoldSpeed,
        2000,
    )
    .unwrap();
    let ell = traj.manifold_length();
    let total = 10.0;
    let (a0, a1) = (
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        Complex64::new(FRAC_1_SQRT_2, 0.0),
    );
    let ratios: Vec<f64> = [100, 200, 400]
        .iter()
        .map(|&k| {
            let i = final_infidelity(&TwoLevelModel, &traj.discretize(k)).unwrap();
            let tau = total / k as f64;
            let s =
                interaction_action(a0, a1, tau, total, k, ActionMeasure::RootMeanSquare).unwrap();
            i * s / (ell * ell)
        })
        .collect();
    for r in &ratios {
        assert!((r - ratios[0]).abs() / ratios[0] < 0.1, "{ratios:?}");
    }
}
