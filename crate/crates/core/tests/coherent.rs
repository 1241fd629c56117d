use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use zenodrive::coherent::{
    integrate_schrodinger, minimal_k, minimal_k_against, propagate, IntegratorOptions,
};
use zenodrive::geometry::{Parameterization, PathKind, TimedTrajectory, Trajectory};
use zenodrive::models::{LipkinModel, TwoLevelModel};
use zenodrive::protocol::final_infidelity;
use zenodrive::{Error, HamiltonianFamily, ParameterPoint};

fn timed(model: &dyn HamiltonianFamily, a: ParameterPoint, b: ParameterPoint) -> TimedTrajectory {
    TimedTrajectory::build(
        model,
        &Trajectory::line(a, b),
        PathKind::Linear,
        Parameterization::ConstantManifoldSpeed,
        2000,
    )
    .unwrap()
}

fn half_turn() -> TimedTrajectory {
    timed(
        &TwoLevelModel,
        ParameterPoint::scalar(0.0),
        ParameterPoint::scalar(PI),
    )
}

#[test]
fn static_path_keeps_fidelity() {
    let m = LipkinModel::new(6).unwrap();
    let p = ParameterPoint::lambda_chi(1.2, 0.4);
    let t = timed(&m, p.clone(), p);
    let r = propagate(&m, &t, 7.0, 200, 0).unwrap();
    assert_abs_diff_eq!(r.fidelity, 1.0, epsilon = 1e-12);
}

#[test]
fn sudden_limit_matches_single_quench() {
    let m = LipkinModel::new(10).unwrap();
    let t = timed(
        &m,
        ParameterPoint::lambda_chi(0.0, 0.0),
        ParameterPoint::lambda_chi(2.0, 0.5),
    );
    let coherent = propagate(&m, &t, 0.0, 1, 0).unwrap().infidelity();
    let strobe = final_infidelity(&m, &t.discretize(1)).unwrap();
    assert_abs_diff_eq!(coherent, strobe, epsilon = 1e-10);
}

#[test]
fn evolution_is_unitary() {
    let m = LipkinModel::new(10).unwrap();
    let t = timed(
        &m,
        ParameterPoint::lambda_chi(0.0, 0.0),
        ParameterPoint::lambda_chi(2.0, 0.5),
    );
    let r = propagate(&m, &t, 25.0, 4000, 50).unwrap();
    assert!(r.norm_drift() <= 1e-10);
    assert!(r.trace.iter().all(|s| (s.norm - 1.0).abs() <= 1e-10));
    assert_eq!(r.trace.first().unwrap().time, 0.0);
    assert_abs_diff_eq!(r.trace.last().unwrap().time, 25.0, epsilon = 1e-12);
    assert_abs_diff_eq!(
        r.trace.last().unwrap().fidelity,
        r.fidelity,
        epsilon = 1e-12
    );
}

#[test]
fn slow_two_level_sweep_is_adiabatic() {
    let t = half_turn();
    let opts = IntegratorOptions::default();
    let mut last = 1.0;
    for total in [2.0, 20.0, 200.0] {
        let i = integrate_schrodinger(&TwoLevelModel, &t, total, &opts)
            .unwrap()
            .infidelity();
        assert!(i < last);
        last = i;
    }
    assert!(last < 1e-4);
}

#[test]
fn midpoint_rule_is_second_order() {
    let t = half_turn();
    let total = 5.0;
    let exact = propagate(&TwoLevelModel, &t, total, 12_800, 0)
        .unwrap()
        .fidelity;
    let err = |n| (propagate(&TwoLevelModel, &t, total, n, 0).unwrap().fidelity - exact).abs();
    let (e1, e2, e3) = (err(50), err(100), err(200));
    for ratio in [e1 / e2, e2 / e3] {
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn doubling_budget_is_enforced() {
    let opts = IntegratorOptions {
        max_doublings: 0,
        ..IntegratorOptions::default()
    };
    let e = integrate_schrodinger(&TwoLevelModel, &half_turn(), 3.0, &opts).unwrap_err();
    assert!(matches!(e, Error::IntegratorNotConverged { .. }));
}

#[test]
fn short_path_needs_one_quench() {
    let m = LipkinModel::new(4).unwrap();
    let t = timed(
        &m,
        ParameterPoint::lambda_chi(0.0, 0.0),
        ParameterPoint::lambda_chi(1e-3, 0.0),
    );
    // a 1e-3 displacement loses far less than 1e-6 in one quench
    assert_eq!(minimal_k_against(&m, &t, 1e-6, 1000).unwrap(), Some(1));
}

#[test]
fn two_level_minimal_k_inverts_closed_form() {
    let t = half_turn();
    let r = minimal_k(
        &TwoLevelModel,
        &t,
        6.0,
        &IntegratorOptions::default(),
        100_000,
    )
    .unwrap();
    let closed = |k: usize| 0.5 * (1.0 - (PI / k as f64).cos().powi(k as i32));
    let expected = (1..).find(|&k| closed(k) < r.i_coherent).unwrap();
    assert_eq!(r.steps, Some(expected));
    assert_abs_diff_eq!(r.tau().unwrap(), 6.0 / expected as f64, epsilon = 1e-15);
}

#[test]
fn unreachable_target_reports_none() {
    assert_eq!(
        minimal_k_against(&TwoLevelModel, &half_turn(), 1e-3, 100).unwrap(),
        None
    );
}

#[test]
fn non_positive_time_is_rejected() {
    let e = minimal_k(
        &TwoLevelModel,
        &half_turn(),
        0.0,
        &IntegratorOptions::default(),
        10,
    )
    .unwrap_err();
    assert!(matches!(e, Error::InvalidArgument(_)));
}
