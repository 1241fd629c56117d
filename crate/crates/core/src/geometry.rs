//! Ground-state geometry: the Provost–Vallée metric, step and path lengths,
//! geodesics, and constant-speed discretizations of driving trajectories.

use std::fmt;
use std::str::FromStr;

use log::warn;
use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::models::{HamiltonianFamily, ParameterPoint};
use crate::spectral::{eigh, CVector, SpectralDecomposition};
use crate::{Error, Result};

/// Gaps at or below this value make the perturbative metric undefined.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Below this gap metric entries are capped at [`METRIC_CAP`].
pub const NEAR_DEGENERACY_GAP: f64 = 1e-10;

pub const METRIC_CAP: f64 = 1e12;

/// `g_μν` at a parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricTensor {
    pub at: ParameterPoint,
    g: DMatrix<f64>,
}

impl MetricTensor {
    pub fn new(at: ParameterPoint, g: DMatrix<f64>) -> Self {
        Self { at, g }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        self.g[(mu, nu)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// `g_μν dΛ^μ dΛ^ν`.
    pub fn quadratic_form(&self, d: &[f64]) -> f64 {
        let v = DVector::from_column_slice(d);
        v.dot(&(&self.g * &v))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(self.g.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }
}

fn decompose(model: &dyn HamiltonianFamily, at: &ParameterPoint) -> Result<SpectralDecomposition> {
    Ok(eigh(&model.hamiltonian(at)?))
}

pub fn ground_state(model: &dyn HamiltonianFamily, at: &ParameterPoint) -> Result<CVector> {
    Ok(decompose(model, at)?.ground_state())
}

/// Perturbative metric
/// `g_μν = Re Σ_{i>0} ⟨0|∂_μH|i⟩⟨i|∂_νH|0⟩ / (E_i - E_0)²`.
pub fn metric(model: &dyn HamiltonianFamily, at: &ParameterPoint) -> Result<MetricTensor> {
    let dec = decompose(model, at)?;
    let d = model.param_dim();
    let n = dec.dim();
    if n < 2 {
        return Ok(MetricTensor::new(at.clone(), DMatrix::zeros(d, d)));
    }
    let gap = dec.gap();
    if gap <= DEGENERACY_TOL {
        return Err(Error::DegenerateGroundState { gap });
    }
    let v0 = dec.ground_state();
    // a[μ][i] = ⟨i|∂_μH|0⟩ / (E_i - E_0)
    let mut a = Vec::with_capacity(d);
    for mu in 0..d {
        let w = model.derivative(at, mu)?.matrix() * &v0;
        let col: Vec<_> = (1..n)
            .map(|i| {
                dec.eigenvectors.column(i).dotc(&w) / (dec.eigenvalues[i] - dec.eigenvalues[0])
            })
            .collect();
        a.push(col);
    }
    let mut g = DMatrix::zeros(d, d);
    for mu in 0..d {
        for nu in mu..d {
            let s: f64 = a[mu]
                .iter()
                .zip(&a[nu])
                .map(|(x, y)| (x.conj() * y).re)
                .sum();
            g[(mu, nu)] = s;
            g[(nu, mu)] = s;
        }
    }
    if gap < NEAR_DEGENERACY_GAP {
        warn!("gap {gap:e} at {at}: capping metric entries at {METRIC_CAP:e}");
        g.apply(|x| *x = x.clamp(-METRIC_CAP, METRIC_CAP));
    }
    Ok(MetricTensor::new(at.clone(), g))
}

/// `δℓ² = 1 - |⟨a|b⟩|²` for normalized states, evaluated as the squared
/// norm of the part of `b` orthogonal to `a` so that short steps do not
/// lose their digits to cancellation.
pub fn chordal_distance_sqr(a: &CVector, b: &CVector) -> f64 {
    let o = a.dotc(b) / a.norm_squared();
    let perp = b - a * o;
    (perp.norm_squared() / b.norm_squared()).min(1.0)
}

/// Exact step length `δℓ = (1 - |⟨E₀(Λ_b)|E₀(Λ_a)⟩|²)^{1/2}`.
pub fn step_length(
    model: &dyn HamiltonianFamily,
    a: &ParameterPoint,
    b: &ParameterPoint,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    Ok(chordal_distance_sqr(&ground_state(model, a)?, &ground_state(model, b)?).sqrt())
}

pub fn ground_states(
    model: &dyn HamiltonianFamily,
    points: &[ParameterPoint],
) -> Result<Vec<CVector>> {
    points.iter().map(|p| ground_state(model, p)).collect()
}

/// `δℓ_k` for every quench of the path.
pub fn step_lengths(model: &dyn HamiltonianFamily, path: &DiscretizedPath) -> Result<Vec<f64>> {
    let states = ground_states(model, path.points())?;
    Ok(states
        .windows(2)
        .map(|w| chordal_distance_sqr(&w[0], &w[1]).sqrt())
        .collect())
}

/// `Σ_k δℓ_k`.
pub fn path_length(model: &dyn HamiltonianFamily, path: &DiscretizedPath) -> Result<f64> {
    Ok(step_lengths(model, path)?.iter().sum())
}

/// How the points of a path are spaced in time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parameterization {
    /// Equal `δℓ` per step (constant speed `v` on the ground-state manifold).
    ConstantManifoldSpeed,
    /// Equal Euclidean steps (constant speed `u` in the parameter plane).
    ConstantEuclideanSpeed,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathKind {
    Geodesic,
    Linear,
    Custom,
}

/// The quench sequence `{Λ_k}`, `k = 0..K`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedPath {
    points: Vec<ParameterPoint>,
    pub parameterization: Parameterization,
    pub kind: PathKind,
}

impl DiscretizedPath {
    pub fn new(
        points: Vec<ParameterPoint>,
        parameterization: Parameterization,
        kind: PathKind,
    ) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidArgument("a path needs at least one point".into()))?;
        if let Some(p) = points.iter().find(|p| p.dim() != first.dim()) {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                found: p.dim(),
            });
        }
        Ok(Self {
            points,
            parameterization,
            kind,
        })
    }

    pub fn custom(points: Vec<ParameterPoint>) -> Result<Self> {
        Self::new(points, Parameterization::Custom, PathKind::Custom)
    }

    /// Straight chord with `K` equal Euclidean steps; endpoints are copied exactly.
    pub fn linear(start: &ParameterPoint, end: &ParameterPoint, k: usize) -> Self {
        let k = k.max(1);
        let mut points: Vec<_> = (0..k)
            .map(|i| start.lerp(end, i as f64 / k as f64))
            .collect();
        points[0] = start.clone();
        points.push(end.clone());
        Self {
            points,
            parameterization: Parameterization::ConstantEuclideanSpeed,
            kind: PathKind::Linear,
        }
    }

    /// Number of quenches `K`.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[ParameterPoint] {
        &self.points
    }

    pub fn into_points(self) -> Vec<ParameterPoint> {
        self.points
    }

    pub fn start(&self) -> &ParameterPoint {
        &self.points[0]
    }

    pub fn end(&self) -> &ParameterPoint {
        &self.points[self.points.len() - 1]
    }

    pub fn euclidean_steps(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| w[0].euclidean_distance(&w[1]))
            .collect()
    }

    pub fn euclidean_length(&self) -> f64 {
        self.euclidean_steps().iter().sum()
    }
}

/// Natural cubic spline through equally spaced nodes, parameter `s ∈ [0, 1]`.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    nodes: Vec<ParameterPoint>,
    second: Vec<Vec<f64>>,
}

impl CubicSpline {
    pub fn new(nodes: Vec<ParameterPoint>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidArgument(
                "a spline needs at least two nodes".into(),
            ));
        }
        let n = nodes.len();
        let d = nodes[0].dim();
        let mut second = vec![vec![0.0; d]; n];
        if n > 2 {
            for axis in 0..d {
                // M_{i-1} + 4 M_i + M_{i+1} = 6 (y_{i-1} - 2 y_i + y_{i+1}), M_0 = M_{n-1} = 0
                let m = n - 2;
                let rhs: Vec<f64> = (1..n - 1)
                    .map(|i| {
                        6.0 * (nodes[i - 1].get(axis) - 2.0 * nodes[i].get(axis)
                            + nodes[i + 1].get(axis))
                    })
                    .collect();
                let mut c = vec![0.0; m];
                let mut r = vec![0.0; m];
                for i in 0..m {
                    let denom = 4.0 - if i > 0 { c[i - 1] } else { 0.0 };
                    c[i] = 1.0 / denom;
                    r[i] = (rhs[i] - if i > 0 { r[i - 1] } else { 0.0 }) / denom;
                }
                for i in (0..m).rev() {
                    let next = if i + 1 < m { second[i + 2][axis] } else { 0.0 };
                    second[i + 1][axis] = r[i] - c[i] * next;
                }
            }
        }
        Ok(Self { nodes, second })
    }

    pub fn nodes(&self) -> &[ParameterPoint] {
        &self.nodes
    }

    pub fn point(&self, s: f64) -> ParameterPoint {
        let last = self.nodes.len() - 1;
        let x = s.clamp(0.0, 1.0) * last as f64;
        let i = (x.floor() as usize).min(last - 1);
        let t = x - i as f64;
        let u = 1.0 - t;
        let coords = (0..self.nodes[0].dim())
            .map(|axis| {
                u * self.nodes[i].get(axis)
                    + t * self.nodes[i + 1].get(axis)
                    + ((u * u * u - u) * self.second[i][axis]
                        + (t * t * t - t) * self.second[i + 1][axis])
                        / 6.0
            })
            .collect();
        ParameterPoint::new(coords)
    }
}

/// A continuous driving trajectory `Λ(s)`, `s ∈ [0, 1]`, without timing.
#[derive(Clone, Debug)]
pub enum Trajectory {
    Line {
        start: ParameterPoint,
        end: ParameterPoint,
    },
    Spline(CubicSpline),
}

impl Trajectory {
    pub fn line(start: ParameterPoint, end: ParameterPoint) -> Self {
        Self::Line { start, end }
    }

    pub fn through(nodes: Vec<ParameterPoint>) -> Result<Self> {
        Ok(Self::Spline(CubicSpline::new(nodes)?))
    }

    pub fn start(&self) -> ParameterPoint {
        self.point(0.0)
    }

    pub fn end(&self) -> ParameterPoint {
        self.point(1.0)
    }

    pub fn point(&self, s: f64) -> ParameterPoint {
        match self {
            Self::Line { start, end } => {
                if s <= 0.0 {
                    start.clone()
                } else if s >= 1.0 {
                    end.clone()
                } else {
                    start.lerp(end, s)
                }
            }
            Self::Spline(sp) => {
                if s <= 0.0 {
                    sp.nodes[0].clone()
                } else if s >= 1.0 {
                    sp.nodes[sp.nodes.len() - 1].clone()
                } else {
                    sp.point(s)
                }
            }
        }
    }

    /// `m + 1` samples at equal parameter increments.
    pub fn sample(&self, m: usize) -> Vec<ParameterPoint> {
        (0..=m).map(|i| self.point(i as f64 / m as f64)).collect()
    }
}

/// A densely sampled trajectory with a cumulative-length table, so it can be
/// evaluated at any fraction of its total (manifold or Euclidean) length.
#[derive(Clone, Debug)]
pub struct TimedTrajectory {
    dense: Vec<ParameterPoint>,
    cumulative: Vec<f64>,
    manifold_length: f64,
    pub parameterization: Parameterization,
    pub kind: PathKind,
}

impl TimedTrajectory {
    /// Samples `traj` at `resolution` segments and times it by `mode`.
    pub fn build(
        model: &dyn HamiltonianFamily,
        traj: &Trajectory,
        kind: PathKind,
        mode: Parameterization,
        resolution: usize,
    ) -> Result<Self> {
        Self::from_polyline(model, traj.sample(resolution.max(1)), kind, mode)
    }

    pub fn from_polyline(
        model: &dyn HamiltonianFamily,
        dense: Vec<ParameterPoint>,
        kind: PathKind,
        mode: Parameterization,
    ) -> Result<Self> {
        if dense.len() < 2 {
            return Err(Error::PathTooCoarse { have: 0, need: 1 });
        }
        for p in &dense {
            model.check_domain(p)?;
        }
        let states = ground_states(model, &dense)?;
        let manifold: Vec<f64> = states
            .windows(2)
            .map(|w| chordal_distance_sqr(&w[0], &w[1]).sqrt())
            .collect();
        let manifold_length = manifold.iter().sum();
        let seg = match mode {
            Parameterization::ConstantManifoldSpeed => manifold,
            Parameterization::ConstantEuclideanSpeed => dense
                .windows(2)
                .map(|w| w[0].euclidean_distance(&w[1]))
                .collect(),
            Parameterization::Custom => {
                return Err(Error::InvalidArgument(
                    "timing needs a constant-manifold-speed or constant-euclidean-speed mode"
                        .into(),
                ))
            }
        };
        let mut cumulative = Vec::with_capacity(dense.len());
        cumulative.push(0.0);
        let mut acc = 0.0;
        for s in seg {
            acc += s;
            cumulative.push(acc);
        }
        Ok(Self {
            dense,
            cumulative,
            manifold_length,
            parameterization: mode,
            kind,
        })
    }

    /// Metric length `ℓ` of the underlying curve.
    pub fn manifold_length(&self) -> f64 {
        self.manifold_length
    }

    /// Length measured in the timing mode (metric or Euclidean).
    pub fn timing_length(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    pub fn resolution(&self) -> usize {
        self.dense.len() - 1
    }

    pub fn start(&self) -> &ParameterPoint {
        &self.dense[0]
    }

    pub fn end(&self) -> &ParameterPoint {
        &self.dense[self.dense.len() - 1]
    }

    /// `Λ` after a fraction `sigma` of the driving time.
    pub fn point_at(&self, sigma: f64) -> ParameterPoint {
        if sigma <= 0.0 {
            return self.start().clone();
        }
        if sigma >= 1.0 {
            return self.end().clone();
        }
        let target = sigma * self.timing_length();
        let i = self
            .cumulative
            .partition_point(|&c| c <= target)
            .clamp(1, self.dense.len() - 1)
            - 1;
        let span = self.cumulative[i + 1] - self.cumulative[i];
        if span <= 0.0 {
            return self.dense[i].clone();
        }
        self.dense[i].lerp(&self.dense[i + 1], (target - self.cumulative[i]) / span)
    }

    /// `K` quenches at equal time increments.
    pub fn discretize(&self, k: usize) -> DiscretizedPath {
        let k = k.max(1);
        let points = (0..=k)
            .map(|i| self.point_at(i as f64 / k as f64))
            .collect();
        DiscretizedPath {
            points,
            parameterization: self.parameterization,
            kind: self.kind,
        }
    }
}

/// Resamples a densely sampled path at `K` steps of constant manifold or
/// Euclidean speed. Output points lie on the input polyline.
pub fn reparameterize(
    model: &dyn HamiltonianFamily,
    path: &DiscretizedPath,
    k: usize,
    mode: Parameterization,
) -> Result<DiscretizedPath> {
    let need = 10 * k.max(1);
    if path.steps() < need {
        return Err(Error::PathTooCoarse {
            have: path.steps(),
            need,
        });
    }
    let timed = TimedTrajectory::from_polyline(model, path.points().to_vec(), path.kind, mode)?;
    Ok(timed.discretize(k))
}

/// The three driving paths compared throughout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathFamily {
    /// (a) geodesic, constant manifold speed.
    Geodesic,
    /// (b) straight chord, constant manifold speed.
    LinearV,
    /// (c) straight chord, constant plane speed.
    LinearU,
}

impl PathFamily {
    pub const ALL: [PathFamily; 3] = [Self::Geodesic, Self::LinearV, Self::LinearU];

    pub fn name(self) -> &'static str {
        match self {
            Self::Geodesic => "geodesic",
            Self::LinearV => "linear-v",
            Self::LinearU => "linear-u",
        }
    }

    pub fn parameterization(self) -> Parameterization {
        match self {
            Self::LinearU => Parameterization::ConstantEuclideanSpeed,
            _ => Parameterization::ConstantManifoldSpeed,
        }
    }
}

impl fmt::Display for PathFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PathFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown path family '{s}'")))
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryOptions {
    /// Dense samples used for the timing table.
    pub resolution: usize,
    /// Steps of the discrete geodesic the spline is fitted through.
    pub geodesic_steps: usize,
    pub geodesic: GeodesicOptions,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            resolution: 20_000,
            geodesic_steps: 80,
            geodesic: GeodesicOptions::default(),
        }
    }
}

/// Builds the timed trajectory of a path family between two endpoints.
pub fn family_trajectory(
    model: &dyn HamiltonianFamily,
    family: PathFamily,
    start: &ParameterPoint,
    end: &ParameterPoint,
    opts: &TrajectoryOptions,
) -> Result<TimedTrajectory> {
    let (traj, kind) = match family {
        PathFamily::Geodesic => {
            let sol = geodesic_with(model, start, end, opts.geodesic_steps, &opts.geodesic)?;
            (
                Trajectory::through(sol.path.into_points())?,
                PathKind::Geodesic,
            )
        }
        PathFamily::LinearV | PathFamily::LinearU => (
            Trajectory::line(start.clone(), end.clone()),
            PathKind::Linear,
        ),
    };
    TimedTrajectory::build(
        model,
        &traj,
        kind,
        family.parameterization(),
        opts.resolution,
    )
}

#[derive(Clone, Debug)]
pub struct GeodesicOptions {
    /// Convergence threshold on the largest projected gradient component.
    pub gradient_tol: f64,
    /// Newton iterations allowed per refinement level.
    pub max_iterations: usize,
    /// Steps of the initial chord; the solution is refined by doubling up to `K`.
    pub coarsest: usize,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        Self {
            gradient_tol: 1e-9,
            max_iterations: 100,
            coarsest: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicIteration {
    pub steps: usize,
    pub energy: f64,
    pub length: f64,
    pub max_gradient: f64,
}

#[derive(Clone, Debug)]
pub struct GeodesicSolution {
    pub path: DiscretizedPath,
    pub history: Vec<GeodesicIteration>,
}

/// Discrete energy `Σ_k δℓ_k²` with exact chordal steps.
pub fn chordal_energy(model: &dyn HamiltonianFamily, path: &DiscretizedPath) -> Result<f64> {
    Ok(step_lengths(model, path)?.iter().map(|s| s * s).sum())
}

/// `Σ_k g_μν(midpoint_k) δΛ^μ δΛ^ν`.
pub fn midpoint_energy(model: &dyn HamiltonianFamily, path: &DiscretizedPath) -> Result<f64> {
    let mut e = 0.0;
    for w in path.points().windows(2) {
        let mid = w[0].lerp(&w[1], 0.5);
        let d: Vec<f64> = w[1]
            .coords()
            .iter()
            .zip(w[0].coords())
            .map(|(b, a)| b - a)
            .collect();
        e += metric(model, &mid)?.quadratic_form(&d);
    }
    Ok(e)
}

/// Geodesic between `start` and `end` discretized at `K` equal-length steps.
pub fn geodesic(
    model: &dyn HamiltonianFamily,
    start: &ParameterPoint,
    end: &ParameterPoint,
    k: usize,
) -> Result<DiscretizedPath> {
    Ok(geodesic_with(model, start, end, k, &GeodesicOptions::default())?.path)
}

/// Minimizes `Σ_k δℓ_k²` over the interior points by damped Newton steps,
/// refining from a coarse chord by spline upsampling.
pub fn geodesic_with(
    model: &dyn HamiltonianFamily,
    start: &ParameterPoint,
    end: &ParameterPoint,
    k: usize,
    opts: &GeodesicOptions,
) -> Result<GeodesicSolution> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "geodesic needs K >= 2, got {k}"
        )));
    }
    model.check_domain(start)?;
    model.check_domain(end)?;
    let mut levels = vec![opts.coarsest.clamp(2, k)];
    while levels[levels.len() - 1] * 2 < k {
        levels.push(levels[levels.len() - 1] * 2);
    }
    if levels[levels.len() - 1] != k {
        levels.push(k);
    }

    let mut history = Vec::new();
    let mut points = DiscretizedPath::linear(start, end, levels[0]).into_points();
    for (li, &kl) in levels.iter().enumerate() {
        if li > 0 {
            let spline = CubicSpline::new(points)?;
            points = (0..=kl)
                .map(|i| spline.point(i as f64 / kl as f64))
                .collect();
            points[0] = start.clone();
            points[kl] = end.clone();
            for p in points.iter_mut() {
                model.project(p);
            }
        }
        points = relax(model, points, opts, &mut history)?;
    }
    Ok(GeodesicSolution {
        path: DiscretizedPath {
            points,
            parameterization: Parameterization::ConstantManifoldSpeed,
            kind: PathKind::Geodesic,
        },
        history,
    })
}

/// Ground state plus its first-order response `∂_μ|0⟩ = Σ_{i>0} |i⟩⟨i|∂_μH|0⟩/(E_0 - E_i)`.
fn state_and_response(
    model: &dyn HamiltonianFamily,
    at: &ParameterPoint,
) -> Result<(CVector, Vec<CVector>)> {
    let dec = decompose(model, at)?;
    let v0 = dec.ground_state();
    let gap = dec.gap();
    if gap <= DEGENERACY_TOL {
        return Err(Error::DegenerateGroundState { gap });
    }
    let mut resp = Vec::with_capacity(model.param_dim());
    for mu in 0..model.param_dim() {
        let w = model.derivative(at, mu)?.matrix() * &v0;
        let mut dv = CVector::zeros(dec.dim());
        for i in 1..dec.dim() {
            let col = dec.eigenvectors.column(i);
            dv += col * (col.dotc(&w) / (dec.eigenvalues[0] - dec.eigenvalues[i]));
        }
        resp.push(dv);
    }
    Ok((v0, resp))
}

fn energy_of(model: &dyn HamiltonianFamily, points: &[ParameterPoint]) -> Result<(f64, f64)> {
    let states = ground_states(model, points)?;
    let mut e = 0.0;
    let mut l = 0.0;
    for w in states.windows(2) {
        let s = chordal_distance_sqr(&w[0], &w[1]);
        e += s;
        l += s.sqrt();
    }
    Ok((e, l))
}

/// Gradient of `Σ δℓ²` with respect to the interior coordinates, flattened.
fn gradient_of(model: &dyn HamiltonianFamily, points: &[ParameterPoint]) -> Result<Vec<f64>> {
    let k = points.len() - 1;
    let d = model.param_dim();
    let mut states = Vec::with_capacity(k + 1);
    let mut resp = Vec::with_capacity(k + 1);
    for (i, p) in points.iter().enumerate() {
        if i == 0 || i == k {
            states.push(ground_state(model, p)?);
            resp.push(Vec::new());
        } else {
            let (v, r) = state_and_response(model, p)?;
            states.push(v);
            resp.push(r);
        }
    }
    let mut g = vec![0.0; (k - 1) * d];
    for i in 1..k {
        for nb in [&states[i - 1], &states[i + 1]] {
            let o = nb.dotc(&states[i]);
            for mu in 0..d {
                // ∂|⟨nb|v⟩|² = 2 Re(conj⟨nb|v⟩ ⟨nb|∂v⟩)
                g[(i - 1) * d + mu] -= 2.0 * (o.conj() * nb.dotc(&resp[i][mu])).re;
            }
        }
    }
    Ok(g)
}

/// Largest gradient component after discarding pushes out of the domain.
fn projected_residual(model: &dyn HamiltonianFamily, points: &[ParameterPoint], g: &[f64]) -> f64 {
    let d = model.param_dim();
    let mut r: f64 = 0.0;
    for (idx, gi) in g.iter().enumerate() {
        let (i, mu) = (idx / d + 1, idx % d);
        let at_bound = model
            .lower_bound(mu)
            .is_some_and(|lo| points[i].get(mu) <= lo);
        if at_bound && *gi > 0.0 {
            continue;
        }
        r = r.max(gi.abs());
    }
    r
}

/// Finite-difference Hessian of the energy. Points are perturbed in three
/// interleaved groups; each gradient entry only sees its two neighbours, so
/// one pair of gradient evaluations fills three block diagonals at once.
fn hessian_of(model: &dyn HamiltonianFamily, points: &[ParameterPoint]) -> Result<DMatrix<f64>> {
    const H: f64 = 1e-5;
    let k = points.len() - 1;
    let d = model.param_dim();
    let n = (k - 1) * d;
    let mut hess = DMatrix::zeros(n, n);
    for r in 0..3 {
        for mu in 0..d {
            let group: Vec<usize> = (1..k).filter(|i| i % 3 == r).collect();
            if group.is_empty() {
                continue;
            }
            let mut plus = points.to_vec();
            let mut minus = points.to_vec();
            for &i in &group {
                plus[i] = points[i].offset(mu, H);
                minus[i] = points[i].offset(mu, -H);
            }
            let gp = gradient_of(model, &plus)?;
            let gm = gradient_of(model, &minus)?;
            for &i in &group {
                let col = (i - 1) * d + mu;
                for j in i.saturating_sub(1).max(1)..=(i + 1).min(k - 1) {
                    for nu in 0..d {
                        let row = (j - 1) * d + nu;
                        hess[(row, col)] = (gp[row] - gm[row]) / (2.0 * H);
                    }
                }
            }
        }
    }
    let sym = (&hess + hess.transpose()) * 0.5;
    Ok(sym)
}

fn newton_direction(hess: DMatrix<f64>, g: &[f64]) -> Vec<f64> {
    let n = hess.nrows();
    let rhs = DVector::from_column_slice(g);
    let scale = hess
        .diagonal()
        .iter()
        .fold(0.0_f64, |a, x| a.max(x.abs()))
        .max(1e-300);
    let mut shift = 0.0;
    loop {
        let shifted = &hess + DMatrix::identity(n, n) * shift;
        if let Some(ch) = Cholesky::new(shifted) {
            return ch.solve(&rhs).iter().copied().collect();
        }
        shift = if shift == 0.0 {
            1e-8 * scale
        } else {
            shift * 10.0
        };
        if shift > 1e8 * scale {
            return g.to_vec();
        }
    }
}

fn relax(
    model: &dyn HamiltonianFamily,
    mut points: Vec<ParameterPoint>,
    opts: &GeodesicOptions,
    history: &mut Vec<GeodesicIteration>,
) -> Result<Vec<ParameterPoint>> {
    let k = points.len() - 1;
    let d = model.param_dim();
    let (mut energy, mut length) = energy_of(model, &points)?;
    let mut residual = f64::INFINITY;
    for _ in 0..=opts.max_iterations {
        let g = gradient_of(model, &points)?;
        residual = projected_residual(model, &points, &g);
        history.push(GeodesicIteration {
            steps: k,
            energy,
            length,
            max_gradient: residual,
        });
        if residual < opts.gradient_tol {
            return Ok(points);
        }
        let mut dir = newton_direction(hessian_of(model, &points)?, &g);

        // trust region: no point moves more than half its shorter adjacent segment
        let mut ratio: f64 = 0.0;
        for i in 1..k {
            let step = dir[(i - 1) * d..i * d]
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt();
            let radius = 0.5
                * points[i - 1]
                    .euclidean_distance(&points[i])
                    .min(points[i].euclidean_distance(&points[i + 1]));
            if radius > 0.0 {
                ratio = ratio.max(step / radius);
            }
        }
        if ratio > 1.0 {
            dir.iter_mut().for_each(|x| *x /= ratio);
        }

        let mut s = 1.0;
        let accepted = loop {
            let mut trial = points.clone();
            for i in 1..k {
                let delta: Vec<f64> = dir[(i - 1) * d..i * d].iter().map(|x| -s * x).collect();
                trial[i] = points[i].displaced(&delta);
                model.project(&mut trial[i]);
            }
            let (e, l) = energy_of(model, &trial)?;
            // energies this close are indistinguishable in double precision
            if e < energy || e - energy <= 1e-15 * energy.abs() {
                break Some((trial, e, l));
            }
            s *= 0.5;
            if s < 1e-14 {
                break None;
            }
        };
        match accepted {
            Some((trial, e, l)) => {
                points = trial;
                energy = e;
                length = l;
            }
            None => break,
        }
    }
    Err(Error::GeodesicNotConverged {
        iterations: history.len(),
        residual,
    })
}
