use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zenodrive::geometry::{
    family_trajectory, DiscretizedPath, PathFamily, TimedTrajectory, TrajectoryOptions,
};
use zenodrive::models::{LipkinModel, TwoLevelModel};
use zenodrive::protocol::{
    fidelity_product_approx, final_infidelity, fit_r, infidelity_expansion, run_stroboscopic,
    sum_squared_steps, zeno_sweep,
};
use zenodrive::ParameterPoint;

fn closed_form(theta: f64, k: usize) -> f64 {
    0.5 * (1.0 + (theta / k as f64).cos().powi(k as i32))
}

fn turn(theta: f64, k: usize) -> DiscretizedPath {
    DiscretizedPath::linear(
        &ParameterPoint::scalar(0.0),
        &ParameterPoint::scalar(theta),
        k,
    )
}

#[test]
fn two_level_chain_matches_closed_form() {
    for theta in [PI / 2.0, PI] {
        for k in [1, 2, 3, 10, 1000] {
            let f = run_stroboscopic(&TwoLevelModel, &turn(theta, k))
                .unwrap()
                .final_fidelity();
            assert_abs_diff_eq!(f, closed_form(theta, k), epsilon = 1e-12);
        }
    }
}

#[test]
fn two_level_chain_matches_matrix_power() {
    // B = [[c, s], [s, c]] raised to the K-th power, applied to (1, 0)
    let (theta, k) = (2.0, 7);
    let c = (theta / (2.0 * k as f64)).cos().powi(2);
    let s = 1.0 - c;
    let mut p = [1.0, 0.0];
    for _ in 0..k {
        p = [c * p[0] + s * p[1], s * p[0] + c * p[1]];
    }
    let r = run_stroboscopic(&TwoLevelModel, &turn(theta, k)).unwrap();
    assert_abs_diff_eq!(r.final_fidelity(), p[0], epsilon = 1e-14);
}

#[test]
fn zeno_limit_for_two_levels() {
    let f = run_stroboscopic(&TwoLevelModel, &turn(PI, 1000))
        .unwrap()
        .final_fidelity();
    assert!(f >= 0.9975);
    let mut last = 0.0;
    for k in [10, 100, 1000, 10000] {
        let f = 1.0 - final_infidelity(&TwoLevelModel, &turn(PI, k)).unwrap();
        assert!(f > last);
        last = f;
    }
}

#[test]
fn two_level_fitted_r_matches_series() {
    // ½(1 - cos^K(π/K)) = π²/4K - π⁴/16K² + …, so R = π⁴/16 - ℓ⁴/2 = π⁴/32 for ℓ = π/2
    let samples: Vec<_> = [1000, 2000, 4000, 8000]
        .iter()
        .map(|&k| (k, 1.0 - closed_form(PI, k)))
        .collect();
    let r = fit_r(&samples, PI / 2.0).unwrap();
    assert!((r - PI.powi(4) / 32.0).abs() / r < 0.01, "R = {r}");
}

#[test]
fn streaming_and_traced_runs_agree() {
    let m = LipkinModel::new(6).unwrap();
    let path = DiscretizedPath::linear(
        &ParameterPoint::lambda_chi(0.0, 0.0),
        &ParameterPoint::lambda_chi(2.0, 0.5),
        40,
    );
    let r = run_stroboscopic(&m, &path).unwrap();
    assert_eq!(r.final_infidelity(), final_infidelity(&m, &path).unwrap());
}

fn lipkin_geodesic() -> (LipkinModel, TimedTrajectory) {
    let m = LipkinModel::new(10).unwrap();
    let t = family_trajectory(
        &m,
        PathFamily::Geodesic,
        &ParameterPoint::lambda_chi(0.0, 0.0),
        &ParameterPoint::lambda_chi(2.0, 0.5),
        &TrajectoryOptions::default(),
    )
    .unwrap();
    (m, t)
}

#[test]
fn product_approximation_at_large_k() {
    let (m, t) = lipkin_geodesic();
    let path = t.discretize(1000);
    let exact = run_stroboscopic(&m, &path).unwrap();
    let prod = fidelity_product_approx(&m, &path).unwrap();
    assert!(prod <= exact.final_fidelity());
    assert!((prod - exact.final_fidelity()).abs() / exact.final_fidelity() < 0.01);
}

#[test]
fn lipkin_fit_is_stable() {
    let (m, t) = lipkin_geodesic();
    let ks = [100, 141, 200, 283, 400, 566, 800, 1131, 1600, 2000];
    let rows = zeno_sweep(&m, &t, &ks).unwrap();
    let ell = t.manifold_length();
    let window = |lo: usize, hi: usize| {
        let s: Vec<_> = rows
            .iter()
            .filter(|r| r.steps >= lo && r.steps <= hi)
            .map(|r| (r.steps, r.i_exact))
            .collect();
        fit_r(&s, ell).unwrap()
    };
    let (r1, r2) = (window(100, 1000), window(200, 2000));
    assert!(r1 > 0.0 && r2 > 0.0);
    assert!((r1 - r2).abs() / r1 < 0.1, "{r1} vs {r2}");
}

#[test]
fn two_term_tracks_exact_better_than_one_term() {
    let (m, t) = lipkin_geodesic();
    let rows = zeno_sweep(&m, &t, &[20, 50, 100]).unwrap();
    for r in rows {
        assert!((r.i_two_term - r.i_exact).abs() < (r.i_one_term - r.i_exact).abs());
    }
}

#[test]
fn equidistant_partition_minimizes_squared_steps() {
    let (m, t) = lipkin_geodesic();
    let k = 100;
    let best = sum_squared_steps(&m, &t.discretize(k)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let mut sigma: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
        for s in sigma.iter_mut().take(k).skip(1) {
            *s += rng.random_range(-0.3..0.3) / k as f64;
        }
        let points = sigma.iter().map(|s| t.point_at(*s)).collect();
        let trial = sum_squared_steps(&m, &DiscretizedPath::custom(points).unwrap()).unwrap();
        assert!(trial > best);
    }
}

#[test]
fn fit_needs_large_k_data() {
    let e = infidelity_expansion(2.0, 4);
    assert_abs_diff_eq!(e.0, 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(e.1, 0.5, epsilon = 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn probabilities_are_conserved(
        pts in prop::collection::vec((-1.0..3.0f64, 0.0..1.5f64), 2..12),
        n in 2usize..7,
    ) {
        let m = LipkinModel::new(n).unwrap();
        let path = DiscretizedPath::custom(pts.iter().map(|&(l, c)| ParameterPoint::lambda_chi(l, c)).collect()).unwrap();
        let r = run_stroboscopic(&m, &path).unwrap();
        for row in &r.probabilities {
            let s: f64 = row.iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-10);
            prop_assert!(row.iter().all(|p| (-1e-14..=1.0 + 1e-14).contains(p)));
        }
        // returning excitations only add to the never-excited product
        let prod = fidelity_product_approx(&m, &path).unwrap();
        prop_assert!(r.final_fidelity() >= prod - 1e-14);
    }
}
