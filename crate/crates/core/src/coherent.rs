//! Coherent (Schrödinger) driving along the same trajectories, used as the
//! baseline the decoherence-assisted protocol is compared against.

use num_complex::Complex64;

use crate::geometry::TimedTrajectory;
use crate::models::HamiltonianFamily;
use crate::protocol::final_infidelity;
use crate::spectral::{eigh, CVector};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct IntegratorOptions {
    /// Initial substeps per unit of driving time.
    pub substeps_per_time: f64,
    pub min_substeps: usize,
    /// Accept once doubling the substeps moves `F` by less than
    /// `min(abs_tol, rel_tol · I)`.
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_doublings: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            substeps_per_time: 8.0,
            min_substeps: 64,
            abs_tol: 1e-8,
            rel_tol: 1e-2,
            max_doublings: 12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentSample {
    pub time: f64,
    /// `|⟨E₀(Λ(t))|ψ(t)⟩|²`.
    pub fidelity: f64,
    pub norm: f64,
}

#[derive(Clone, Debug)]
pub struct CoherentResult {
    pub final_state: CVector,
    /// `F_coh(T) = |⟨E₀(Λ_F)|ψ(T)⟩|²`.
    pub fidelity: f64,
    pub substeps: usize,
    pub trace: Vec<CoherentSample>,
}

impl CoherentResult {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }

    pub fn norm_drift(&self) -> f64 {
        (self.final_state.norm() - 1.0).abs()
    }
}

/// Evolves `|E₀(Λ_I)⟩` over time `T` with `substeps` midpoint-frozen exact
/// exponentials `exp(-i H(Λ(t_mid)) δt)`. `trace_points > 0` records that many
/// evenly spaced samples of the instantaneous fidelity (plus both ends).
pub fn propagate(
    model: &dyn HamiltonianFamily,
    trajectory: &TimedTrajectory,
    total_time: f64,
    substeps: usize,
    trace_points: usize,
) -> Result<CoherentResult> {
    if !(total_time >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "driving time must be >= 0, got {total_time}"
        )));
    }
    let n = substeps.max(1);
    let dt = total_time / n as f64;
    let mut psi = eigh(&model.hamiltonian(trajectory.start())?).ground_state();
    let mut trace = Vec::new();
    let sample_every = n.checked_div(trace_points).map_or(usize::MAX, |s| s.max(1));
    let sample = |psi: &CVector, i: usize| -> Result<CoherentSample> {
        let g = eigh(&model.hamiltonian(&trajectory.point_at(i as f64 / n as f64))?).ground_state();
        Ok(CoherentSample {
            time: dt * i as f64,
            fidelity: g.dotc(psi).norm_sqr(),
            norm: psi.norm(),
        })
    };
    if trace_points > 0 {
        trace.push(sample(&psi, 0)?);
    }
    for i in 0..n {
        let mid = trajectory.point_at((i as f64 + 0.5) / n as f64);
        let dec = eigh(&model.hamiltonian(&mid)?);
        let v = &dec.eigenvectors;
        let mut coeffs = v.ad_mul(&psi);
        for (c, e) in coeffs.iter_mut().zip(&dec.eigenvalues) {
            *c *= Complex64::from_polar(1.0, -e * dt);
        }
        psi = v * coeffs;
        if trace_points > 0 && ((i + 1) % sample_every == 0 || i + 1 == n) {
            trace.push(sample(&psi, i + 1)?);
        }
    }
    let g = eigh(&model.hamiltonian(trajectory.end())?).ground_state();
    Ok(CoherentResult {
        fidelity: g.dotc(&psi).norm_sqr(),
        final_state: psi,
        substeps: n,
        trace,
    })
}

/// [`propagate`] with substep doubling until the fidelity is converged.
pub fn integrate_schrodinger(
    model: &dyn HamiltonianFamily,
    trajectory: &TimedTrajectory,
    total_time: f64,
    opts: &IntegratorOptions,
) -> Result<CoherentResult> {
    let mut n = ((opts.substeps_per_time * total_time).ceil() as usize)
        .max(opts.min_substeps)
        .max(1);
    let mut coarse = propagate(model, trajectory, total_time, n, 0)?;
    for _ in 0..opts.max_doublings {
        n *= 2;
        let fine = propagate(model, trajectory, total_time, n, 0)?;
        let tol = opts.abs_tol.min(opts.rel_tol * fine.infidelity().abs());
        if (fine.fidelity - coarse.fidelity).abs() < tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    let fine = propagate(model, trajectory, total_time, n * 2, 0)?;
    Err(Error::IntegratorNotConverged {
        previous: coarse.fidelity,
        last: fine.fidelity,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentRow {
    pub total_time: f64,
    pub infidelity: f64,
    pub substeps: usize,
}

pub fn coherent_row(
    model: &dyn HamiltonianFamily,
    trajectory: &TimedTrajectory,
    total_time: f64,
    opts: &IntegratorOptions,
) -> Result<CoherentRow> {
    let r = integrate_schrodinger(model, trajectory, total_time, opts)?;
    Ok(CoherentRow {
        total_time,
        infidelity: r.infidelity(),
        substeps: r.substeps,
    })
}

/// `I_coh(T)` for every `T`.
pub fn coherent_sweep(
    model: &dyn HamiltonianFamily,
    trajectory: &TimedTrajectory,
    times: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<CoherentRow>> {
    times
        .iter()
        .map(|&t| coherent_row(model, trajectory, t, opts))
        .collect()
}

/// Time-averaged gap `E₁ - E₀` along the trajectory; `2π` over it is the
/// oscillation period of `I_coh` in `T`.
pub fn mean_gap(
    model: &dyn HamiltonianFamily,
    trajectory: &TimedTrajectory,
    samples: usize,
) -> Result<f64> {
    let samples = samples.max(1);
    let mut acc = 0.0;
    for i in 0..samples {
        let p = trajectory.point_at((i as f64 + 0.5) / samples as f64);
        acc += eigh(&model.hamiltonian(&p)?).gap();
    }
    Ok(acc / samples as f64)
}

/// Interior samples strictly above their right and not below their left neighbour.
pub fn local_maxima(samples: &[(f64, f64)]) -> Vec<(f64, f64)> {
    samples
        .windows(3)
        .filter(|w| w[1].1 >= w[0].1 && w[1].1 > w[2].1)
        .map(|w| w[1])
        .collect()
}

/// Sample times covering `periods` oscillation periods from each window start.
pub fn window_times(starts: &[f64], period: f64, periods: f64, per_window: usize) -> Vec<f64> {
    let per_window = per_window.max(2);
    starts
        .iter()
        .flat_map(|&s| {
            (0..per_window).map(move |j| s + period * periods * j as f64 / (per_window - 1) as f64)
        })
        .collect()
}

/// Largest sample in each consecutive block of `per_window` samples, the
/// envelope estimate for window-sampled curves.
pub fn window_maxima(samples: &[(f64, f64)], per_window: usize) -> Vec<(f64, f64)> {
    samples
        .chunks(per_window.max(1))
        .filter_map(|c| c.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1)))
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

pub fn is_non_monotone(samples: &[(f64, f64)]) -> bool {
    let up = samples.windows(2).any(|w| w[1].1 > w[0].1);
    let down = samples.windows(2).any(|w| w[1].1 < w[0].1);
    up && down
}

/// Outcome of the coherent-vs-decoherent crossover search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimalK {
    pub total_time: f64,
    pub i_coherent: f64,
    /// `None` when no `K` up to the cap beats the coherent infidelity.
    pub steps: Option<usize>,
}

impl MinimalK {
    /// `τ = T / K_min`.
    pub fn tau(&self) -> Option<f64> {
        self.steps.map(|k| self.total_time / k as f64)
    }
}

pub const DEFAULT_K_CAP: usize = 1_000_000;

/// Candidates below the bisection result re-checked, at most this many.
pub const LOCAL_SCAN_LIMIT: usize = 256;

/// Smallest `K` whose stroboscopic infidelity on `trajectory` is below
/// `target`: doubling, then bisection, then a scan of up to 10% below the
/// bisection result because `I_dec(K)` need not be monotone.
pub fn minimal_k_against(
    model: &dyn HamiltonianFamily,
    trajectory: &TimedTrajectory,
    target: f64,
    cap: usize,
) -> Result<Option<usize>> {
    let beats = |k: usize| -> Result<bool> {
        Ok(final_infidelity(model, &trajectory.discretize(k))? < target)
    };
    if beats(1)? {
        return Ok(Some(1));
    }
    let mut lo = 1;
    let mut hi = 2;
    loop {
        if hi > cap {
            if lo < cap && beats(cap)? {
                hi = cap;
                break;
            }
            return Ok(None);
        }
        if beats(hi)? {
            break;
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if beats(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let floor = (hi - hi / 10)
        .max(1)
        .max(hi.saturating_sub(LOCAL_SCAN_LIMIT));
    for k in floor..hi {
        if beats(k)? {
            return Ok(Some(k));
        }
    }
    Ok(Some(hi))
}

/// Computes `I_coh(T)` and the minimal `K` beating it on the same trajectory.
pub fn minimal_k(
    model: &dyn HamiltonianFamily,
    trajectory: &TimedTrajectory,
    total_time: f64,
    opts: &IntegratorOptions,
    cap: usize,
) -> Result<MinimalK> {
    if !(total_time > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "driving time must be > 0, got {total_time}"
        )));
    }
    let i_coherent = integrate_schrodinger(model, trajectory, total_time, opts)?.infidelity();
    Ok(MinimalK {
        total_time,
        i_coherent,
        steps: minimal_k_against(model, trajectory, i_coherent, cap)?,
    })
}
