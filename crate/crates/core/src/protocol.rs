//! The decoherence-assisted stroboscopic protocol.
//!
//! After every quench `Λ_{k-1} → Λ_k` the state is fully decohered in the
//! eigenbasis of `H(Λ_k)`, so only the populations `p_i` survive and evolve
//! as `p_i(t_k) = Σ_{i'} B_{ii'} p_{i'}(t_{k-1})`.

use log::warn;

use crate::geometry::{chordal_distance_sqr, DiscretizedPath, TimedTrajectory};
use crate::models::HamiltonianFamily;
use crate::spectral::{branching, eigh, SpectralDecomposition};
use crate::{Error, Result};

/// Adjacent eigenvalues closer than this trigger a degeneracy warning.
pub const DEGENERATE_SPACING: f64 = 1e-12;

/// Step count, per-step decoherence time `τ`, and total time `T = Kτ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimingModel {
    pub steps: usize,
    pub tau: f64,
}

impl TimingModel {
    pub fn new(steps: usize, tau: f64) -> Self {
        Self { steps, tau }
    }

    /// `τ = T / K`.
    pub fn from_total_time(steps: usize, total: f64) -> Self {
        Self {
            steps,
            tau: total / steps as f64,
        }
    }

    pub fn total_time(&self) -> f64 {
        self.steps as f64 * self.tau
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolResult {
    /// `probabilities[k][i] = p_i(t_k)`, `k = 0..K`.
    pub probabilities: Vec<Vec<f64>>,
    /// `δℓ_k` of each quench.
    pub step_lengths: Vec<f64>,
}

impl ProtocolResult {
    pub fn steps(&self) -> usize {
        self.probabilities.len() - 1
    }

    /// `F(t_k) = p_0(t_k)`.
    pub fn fidelity_trace(&self) -> Vec<f64> {
        self.probabilities.iter().map(|p| p[0]).collect()
    }

    pub fn final_fidelity(&self) -> f64 {
        self.probabilities[self.probabilities.len() - 1][0]
    }

    pub fn final_infidelity(&self) -> f64 {
        1.0 - self.final_fidelity()
    }

    pub fn length(&self) -> f64 {
        self.step_lengths.iter().sum()
    }
}

fn decompositions<'a>(
    model: &'a dyn HamiltonianFamily,
    path: &'a DiscretizedPath,
) -> impl Iterator<Item = Result<SpectralDecomposition>> + 'a {
    path.points().iter().map(move |p| {
        let d = eigh(&model.hamiltonian(p)?);
        if d.min_spacing() < DEGENERATE_SPACING {
            warn!(
                "near-degenerate spectrum at {p}: spacing {:e}",
                d.min_spacing()
            );
        }
        Ok(d)
    })
}

/// Runs the Markov recursion from `p_i(t_0) = δ_{i0}` and keeps the full trace.
pub fn run_stroboscopic(
    model: &dyn HamiltonianFamily,
    path: &DiscretizedPath,
) -> Result<ProtocolResult> {
    let mut decs = decompositions(model, path);
    let mut prev = decs.next().expect("paths are never empty")?;
    let mut p = vec![0.0; prev.dim()];
    p[0] = 1.0;
    let mut probabilities = Vec::with_capacity(path.points().len());
    let mut step_lengths = Vec::with_capacity(path.steps());
    probabilities.push(p.clone());
    for next in decs {
        let next = next?;
        let b = branching(&prev, &next)?;
        p = b.apply(&p);
        step_lengths.push(chordal_distance_sqr(&prev.ground_state(), &next.ground_state()).sqrt());
        probabilities.push(p.clone());
        prev = next;
    }
    Ok(ProtocolResult {
        probabilities,
        step_lengths,
    })
}

/// `I(T) = 1 - p_0(t_K)` without storing the trace.
pub fn final_infidelity(model: &dyn HamiltonianFamily, path: &DiscretizedPath) -> Result<f64> {
    let mut decs = decompositions(model, path);
    let mut prev = decs.next().expect("paths are never empty")?;
    let mut p = vec![0.0; prev.dim()];
    p[0] = 1.0;
    for next in decs {
        let next = next?;
        p = branching(&prev, &next)?.apply(&p);
        prev = next;
    }
    Ok(1.0 - p[0])
}

/// `∏_k B_00(t_k)`: the probability of never leaving the ground state.
pub fn fidelity_product_approx(
    model: &dyn HamiltonianFamily,
    path: &DiscretizedPath,
) -> Result<f64> {
    let mut prev: Option<SpectralDecomposition> = None;
    let mut f = 1.0;
    for d in decompositions(model, path) {
        let d = d?;
        if let Some(prev) = &prev {
            f *= 1.0 - chordal_distance_sqr(&prev.ground_state(), &d.ground_state());
        }
        prev = Some(d);
    }
    Ok(f)
}

/// `Σ_k δℓ_k²` along a discretized path.
pub fn sum_squared_steps(model: &dyn HamiltonianFamily, path: &DiscretizedPath) -> Result<f64> {
    Ok(crate::geometry::step_lengths(model, path)?
        .iter()
        .map(|s| s * s)
        .sum())
}

/// `(ℓ²/K, ℓ²/K - ℓ⁴/2K²)`.
pub fn infidelity_expansion(ell: f64, k: usize) -> (f64, f64) {
    let k = k as f64;
    let l2 = ell * ell;
    let one = l2 / k;
    (one, one - l2 * l2 / (2.0 * k * k))
}

/// Least-squares `R` in `I = ℓ²/K - ℓ⁴/2K² - R/K²` over `(K, I)` samples.
pub fn fit_r(samples: &[(usize, f64)], ell: f64) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "fitting R needs at least 3 points, got {}",
            samples.len()
        )));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &(k, i) in samples {
        let x = 1.0 / (k as f64 * k as f64);
        let residual = i - infidelity_expansion(ell, k).1;
        num -= residual * x;
        den += x * x;
    }
    let r = num / den;
    if r <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "fitted R = {r:e} is not positive"
        )));
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZenoRow {
    pub steps: usize,
    pub i_exact: f64,
    pub i_one_term: f64,
    pub i_two_term: f64,
    /// Length `ℓ` of the underlying trajectory.
    pub ell: f64,
}

/// One row of the infidelity-vs-K table.
pub fn zeno_row(
    model: &dyn HamiltonianFamily,
    trajectory: &TimedTrajectory,
    k: usize,
) -> Result<ZenoRow> {
    let ell = trajectory.manifold_length();
    let (one, two) = infidelity_expansion(ell, k);
    Ok(ZenoRow {
        steps: k,
        i_exact: final_infidelity(model, &trajectory.discretize(k))?,
        i_one_term: one,
        i_two_term: two,
        ell,
    })
}

/// Infidelity for each `K`, every row discretizing the same trajectory.
pub fn zeno_sweep(
    model: &dyn HamiltonianFamily,
    trajectory: &TimedTrajectory,
    ks: &[usize],
) -> Result<Vec<ZenoRow>> {
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "K values must be strictly ascending".into(),
        ));
    }
    ks.iter().map(|&k| zeno_row(model, trajectory, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ParameterPoint, TwoLevelModel};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn half_turn(k: usize, theta: f64) -> DiscretizedPath {
        DiscretizedPath::linear(
            &ParameterPoint::scalar(0.0),
            &ParameterPoint::scalar(theta),
            k,
        )
    }

    #[test]
    fn timing_bookkeeping() {
        let t = TimingModel::new(40, 0.25);
        assert_eq!(t.total_time(), 10.0);
        let u = TimingModel::from_total_time(8, 2.0);
        assert_eq!(u.tau, 0.25);
        assert_eq!(u.total_time(), 2.0);
    }

    #[test]
    fn static_path_keeps_ground_state() {
        let p = DiscretizedPath::custom(vec![ParameterPoint::scalar(0.7); 6]).unwrap();
        let r = run_stroboscopic(&TwoLevelModel, &p).unwrap();
        assert_abs_diff_eq!(r.final_fidelity(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            fidelity_product_approx(&TwoLevelModel, &p).unwrap(),
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn small_k_closed_forms() {
        let f1 = run_stroboscopic(&TwoLevelModel, &half_turn(1, PI))
            .unwrap()
            .final_fidelity();
        let f2 = run_stroboscopic(&TwoLevelModel, &half_turn(2, PI))
            .unwrap()
            .final_fidelity();
        assert_abs_diff_eq!(f1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f2, 0.5, epsilon = 1e-15);
        let prod = fidelity_product_approx(&TwoLevelModel, &half_turn(2, PI)).unwrap();
        assert_abs_diff_eq!(prod, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn initial_row_is_ground_state() {
        let r = run_stroboscopic(&TwoLevelModel, &half_turn(5, 1.0)).unwrap();
        assert_eq!(r.probabilities[0], vec![1.0, 0.0]);
        assert_eq!(r.steps(), 5);
        assert_eq!(r.fidelity_trace().len(), 6);
    }

    #[test]
    fn expansion_arithmetic() {
        assert_eq!(infidelity_expansion(0.0, 10), (0.0, 0.0));
        let (a, b) = infidelity_expansion(1.0, 100);
        assert_abs_diff_eq!(a, 0.01, epsilon = 1e-16);
        assert_abs_diff_eq!(b, 0.00995, epsilon = 1e-16);
    }

    #[test]
    fn fit_recovers_synthetic_r() {
        let ell = 1.3;
        let samples: Vec<_> = [50, 100, 200, 400]
            .iter()
            .map(|&k| {
                (
                    k,
                    infidelity_expansion(ell, k).1 - 0.7 / (k as f64 * k as f64),
                )
            })
            .collect();
        assert_abs_diff_eq!(fit_r(&samples, ell).unwrap(), 0.7, epsilon = 1e-6);
        assert!(fit_r(&samples[..2], ell).is_err());
    }

    #[test]
    fn fit_rejects_non_positive_r() {
        let samples: Vec<_> = [50, 100, 200]
            .iter()
            .map(|&k| (k, infidelity_expansion(1.0, k).1 + 1.0 / (k * k) as f64))
            .collect();
        assert!(fit_r(&samples, 1.0).is_err());
    }

    #[test]
    fn sweep_requires_ascending_k() {
        let traj = crate::geometry::TimedTrajectory::build(
            &TwoLevelModel,
            &crate::geometry::Trajectory::line(
                ParameterPoint::scalar(0.0),
                ParameterPoint::scalar(1.0),
            ),
            crate::geometry::PathKind::Linear,
            crate::geometry::Parameterization::ConstantManifoldSpeed,
            100,
        )
        .unwrap();
        assert!(zeno_sweep(&TwoLevelModel, &traj, &[10, 5]).is_err());
        assert_eq!(
            zeno_sweep(&TwoLevelModel, &traj, &[5, 10]).unwrap().len(),
            2
        );
    }
}
