//! Parameter-dependent Hamiltonian families.
//!
//! Units: ħ = 1, energies and times dimensionless.
//!
//! Single-qubit conventions: Pauli matrices act on the ordered basis
//! `(|1⟩, |0⟩)`, so `σz|1⟩ = +|1⟩`, `σz|0⟩ = -|0⟩`, and the occupation
//! operator `κ = (σz + 1)/2` projects on `|1⟩`.

use std::fmt;

use nalgebra::DMatrix;

use crate::spectral::HermitianMatrix;
use crate::{Error, Result};

/// A point in the control-parameter space.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterPoint(Vec<f64>);

impl ParameterPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    /// Lipkin coordinates `(λ, χ)`.
    pub fn lambda_chi(lambda: f64, chi: f64) -> Self {
        Self(vec![lambda, chi])
    }

    pub fn scalar(x: f64) -> Self {
        Self(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn get(&self, axis: usize) -> f64 {
        self.0[axis]
    }

    pub fn euclidean_distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `self + t (other - self)`.
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + t * (b - a))
                .collect(),
        )
    }

    /// `self + h·ê_axis`.
    pub fn offset(&self, axis: usize, h: f64) -> Self {
        let mut c = self.0.clone();
        c[axis] += h;
        Self(c)
    }

    pub fn displaced(&self, delta: &[f64]) -> Self {
        Self(self.0.iter().zip(delta).map(|(a, d)| a + d).collect())
    }
}

impl fmt::Display for ParameterPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// A Hamiltonian `H(Λ)` together with its parameter derivatives `∂_μ H(Λ)`.
pub trait HamiltonianFamily: Send + Sync {
    /// Hilbert-space dimension.
    fn dim(&self) -> usize;

    /// Number of control parameters `D`.
    fn param_dim(&self) -> usize;

    fn hamiltonian(&self, at: &ParameterPoint) -> Result<HermitianMatrix>;

    fn derivative(&self, at: &ParameterPoint, axis: usize) -> Result<HermitianMatrix>;

    /// Inclusive lower bound of the domain along `axis`, if any.
    fn lower_bound(&self, _axis: usize) -> Option<f64> {
        None
    }

    fn check_domain(&self, at: &ParameterPoint) -> Result<()> {
        if at.dim() != self.param_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.param_dim(),
                found: at.dim(),
            });
        }
        for axis in 0..self.param_dim() {
            let x = at.get(axis);
            if !x.is_finite() {
                return Err(Error::OutsideDomain(format!(
                    "non-finite coordinate in {at}"
                )));
            }
            if let Some(lo) = self.lower_bound(axis) {
                if x < lo {
                    return Err(Error::OutsideDomain(format!(
                        "coordinate {axis} of {at} is below {lo}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Clamps `p` onto the domain.
    fn project(&self, p: &mut ParameterPoint) {
        for axis in 0..p.dim() {
            if let Some(lo) = self.lower_bound(axis) {
                if p.0[axis] < lo {
                    p.0[axis] = lo;
                }
            }
        }
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.param_dim() {
            return Err(Error::InvalidAxis {
                axis,
                dim: self.param_dim(),
            });
        }
        Ok(())
    }
}

/// The `(N+1)`-dimensional fully symmetric sector `j = N/2`, basis `|j, m⟩`
/// ordered `m = -j, …, +j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuasispinBasis {
    pub n_qubits: usize,
}

impl QuasispinBasis {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits }
    }

    pub fn dim(&self) -> usize {
        self.n_qubits + 1
    }

    pub fn j(&self) -> f64 {
        self.n_qubits as f64 / 2.0
    }

    /// Magnetic quantum number of basis index `k`.
    pub fn m(&self, k: usize) -> f64 {
        k as f64 - self.j()
    }

    pub fn jz(&self) -> DMatrix<f64> {
        DMatrix::from_fn(
            self.dim(),
            self.dim(),
            |r, c| if r == c { self.m(r) } else { 0.0 },
        )
    }

    /// `J_+|j,m⟩ = √(j(j+1) - m(m+1)) |j,m+1⟩`.
    pub fn jplus(&self) -> DMatrix<f64> {
        let j = self.j();
        DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            if r == c + 1 {
                let m = self.m(c);
                (j * (j + 1.0) - m * (m + 1.0)).sqrt()
            } else {
                0.0
            }
        })
    }

    pub fn jx(&self) -> DMatrix<f64> {
        let jp = self.jplus();
        (&jp + jp.transpose()) * 0.5
    }
}

/// The fully connected `N`-qubit model in its symmetric quasispin sector,
/// parameters `Λ = (λ, χ)` with `χ ≥ 0`.
///
/// The collective sums reduce as
/// `Σ_{i≠j} σx σx = 4Jx² - N`, `Σ κ = n = Jz + N/2`,
/// `Σ_{i≠j} κκ = n² - n`, `Σ_{i≠j} (σx κ + κ σx) = 2{Jx, n} - 2Jx`.
#[derive(Clone, Debug)]
pub struct LipkinModel {
    basis: QuasispinBasis,
    jz: DMatrix<f64>,
    jx: DMatrix<f64>,
    xx_pairs: DMatrix<f64>,
    xk_pairs: DMatrix<f64>,
    kk_pairs: DMatrix<f64>,
}

impl LipkinModel {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("Lipkin model needs N >= 1".into()));
        }
        let basis = QuasispinBasis::new(n_qubits);
        let d = basis.dim();
        let nf = n_qubits as f64;
        let id = DMatrix::<f64>::identity(d, d);
        let jz = basis.jz();
        let jx = basis.jx();
        let occ = &jz + &id * (nf / 2.0);
        let xx_pairs = &jx * &jx * 4.0 - &id * nf;
        let xk_pairs = (&jx * &occ + &occ * &jx) * 2.0 - &jx * 2.0;
        let kk_pairs = &occ * &occ - &occ;
        Ok(Self {
            basis,
            jz,
            jx,
            xx_pairs,
            xk_pairs,
            kk_pairs,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.basis.n_qubits
    }

    pub fn basis(&self) -> QuasispinBasis {
        self.basis
    }

    fn coords(&self, at: &ParameterPoint) -> Result<(f64, f64)> {
        self.check_domain(at)?;
        Ok((at.get(0), at.get(1)))
    }

    /// Real symmetric matrix of `H(λ, χ)` in the `|j, m⟩` basis.
    pub fn matrix(&self, lambda: f64, chi: f64) -> DMatrix<f64> {
        let d = self.basis.dim();
        let nf = self.n_qubits() as f64;
        let id = DMatrix::<f64>::identity(d, d);
        let pair = 1.0 / (4.0 * nf);
        &id * (-(lambda + 2.0 * chi * chi) / 4.0) + &self.jz * (1.0 - chi * chi / nf)
            - &self.jx * (chi / nf)
            - (&self.xx_pairs * lambda + &self.xk_pairs * chi + &self.kk_pairs * (chi * chi)) * pair
    }

    pub fn derivative_matrix(&self, lambda: f64, chi: f64, axis: usize) -> DMatrix<f64> {
        let _ = lambda;
        let d = self.basis.dim();
        let nf = self.n_qubits() as f64;
        let id = DMatrix::<f64>::identity(d, d);
        let pair = 1.0 / (4.0 * nf);
        if axis == 0 {
            &id * -0.25 - &self.xx_pairs * pair
        } else {
            &id * -chi
                - &self.jz * (2.0 * chi / nf)
                - &self.jx * (1.0 / nf)
                - (&self.xk_pairs + &self.kk_pairs * (2.0 * chi)) * pair
        }
    }
}

impl HamiltonianFamily for LipkinModel {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn param_dim(&self) -> usize {
        2
    }

    fn hamiltonian(&self, at: &ParameterPoint) -> Result<HermitianMatrix> {
        let (lambda, chi) = self.coords(at)?;
        HermitianMatrix::from_real_matrix(&self.matrix(lambda, chi))
    }

    fn derivative(&self, at: &ParameterPoint, axis: usize) -> Result<HermitianMatrix> {
        self.check_axis(axis)?;
        let (lambda, chi) = self.coords(at)?;
        HermitianMatrix::from_real_matrix(&self.derivative_matrix(lambda, chi, axis))
    }

    fn lower_bound(&self, axis: usize) -> Option<f64> {
        (axis == 1).then_some(0.0)
    }
}

/// Quasispin-reduced Lipkin Hamiltonian for `N` qubits at `Λ = (λ, χ)`.
pub fn lipkin_hamiltonian(n_qubits: usize, at: &ParameterPoint) -> Result<HermitianMatrix> {
    LipkinModel::new(n_qubits)?.hamiltonian(at)
}

/// `∂_μ H` of the reduced Lipkin Hamiltonian; axis 0 is `λ`, axis 1 is `χ`.
pub fn lipkin_derivative(
    n_qubits: usize,
    at: &ParameterPoint,
    axis: usize,
) -> Result<HermitianMatrix> {
    LipkinModel::new(n_qubits)?.derivative(at, axis)
}

/// Largest qubit count accepted by [`brute_force_lipkin`].
pub const BRUTE_FORCE_MAX_QUBITS: usize = 8;

/// The Lipkin Hamiltonian assembled term by term on the full `2^N` space.
///
/// Only meant as an oracle for the quasispin reduction. Qubit `0` is the
/// most significant tensor factor; local index 0 is `|1⟩`.
pub fn brute_force_lipkin(n_qubits: usize, at: &ParameterPoint) -> Result<HermitianMatrix> {
    if n_qubits == 0 {
        return Err(Error::InvalidArgument("Lipkin model needs N >= 1".into()));
    }
    if n_qubits > BRUTE_FORCE_MAX_QUBITS {
        return Err(Error::OracleTooLarge(n_qubits));
    }
    if at.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: at.dim(),
        });
    }
    let (lambda, chi) = (at.get(0), at.get(1));
    if chi < 0.0 {
        return Err(Error::OutsideDomain(format!("χ = {chi} < 0")));
    }
    let n = n_qubits;
    let nf = n as f64;
    let dim = 1usize << n;
    let sx = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let sz = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let kappa = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let embed = |op: &DMatrix<f64>, site: usize| -> DMatrix<f64> {
        let mut acc = DMatrix::<f64>::identity(1, 1);
        for q in 0..n {
            acc = if q == site {
                acc.kronecker(op)
            } else {
                acc.kronecker(&DMatrix::<f64>::identity(2, 2))
            };
        }
        acc
    };
    let x: Vec<_> = (0..n).map(|i| embed(&sx, i)).collect();
    let z: Vec<_> = (0..n).map(|i| embed(&sz, i)).collect();
    let k: Vec<_> = (0..n).map(|i| embed(&kappa, i)).collect();

    let mut h = DMatrix::<f64>::identity(dim, dim) * (-(lambda + 2.0 * chi * chi) / 4.0);
    for i in 0..n {
        h += &z[i] * (0.5 - chi * chi / (2.0 * nf)) - &x[i] * (chi / (2.0 * nf));
    }
    let pair = 1.0 / (4.0 * nf);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let term = &x[i] * &x[j] * lambda
                + (&x[i] * &k[j] + &k[i] * &x[j]) * chi
                + &k[i] * &k[j] * (chi * chi);
            h -= term * pair;
        }
    }
    HermitianMatrix::from_real_matrix(&h)
}

/// `H(θ) = -(cos θ σz + sin θ σx)/2`; the ground state is the Bloch vector
/// at polar angle `θ`, the gap is 1 and the metric is `g_θθ = 1/4`.
#[derive(Clone, Copy, Debug, Default)]
pub struct TwoLevelModel;

impl TwoLevelModel {
    pub fn matrix(theta: f64) -> DMatrix<f64> {
        let (s, c) = theta.sin_cos();
        DMatrix::from_row_slice(2, 2, &[-0.5 * c, -0.5 * s, -0.5 * s, 0.5 * c])
    }

    pub fn derivative_matrix(theta: f64) -> DMatrix<f64> {
        let (s, c) = theta.sin_cos();
        DMatrix::from_row_slice(2, 2, &[0.5 * s, -0.5 * c, -0.5 * c, -0.5 * s])
    }
}

impl HamiltonianFamily for TwoLevelModel {
    fn dim(&self) -> usize {
        2
    }

    fn param_dim(&self) -> usize {
        1
    }

    fn hamiltonian(&self, at: &ParameterPoint) -> Result<HermitianMatrix> {
        self.check_domain(at)?;
        HermitianMatrix::from_real_matrix(&Self::matrix(at.get(0)))
    }

    fn derivative(&self, at: &ParameterPoint, axis: usize) -> Result<HermitianMatrix> {
        self.check_axis(axis)?;
        self.check_domain(at)?;
        HermitianMatrix::from_real_matrix(&Self::derivative_matrix(at.get(0)))
    }
}

pub fn two_level_model() -> TwoLevelModel {
    TwoLevelModel
}

/// Two independent qubits, `H = H(θ1) ⊗ 1 + 1 ⊗ H(θ2)`.
///
/// The ground state is a product of Bloch vectors, so the metric is the
/// constant `diag(1/4, 1/4)`: a flat parameter space for geodesic tests.
#[derive(Clone, Copy, Debug, Default)]
pub struct QubitPairModel;

impl QubitPairModel {
    fn assemble(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        let id = DMatrix::<f64>::identity(2, 2);
        a.kronecker(&id) + id.kronecker(b)
    }
}

impl HamiltonianFamily for QubitPairModel {
    fn dim(&self) -> usize {
        4
    }

    fn param_dim(&self) -> usize {
        2
    }

    fn hamiltonian(&self, at: &ParameterPoint) -> Result<HermitianMatrix> {
        self.check_domain(at)?;
        let m = Self::assemble(
            &TwoLevelModel::matrix(at.get(0)),
            &TwoLevelModel::matrix(at.get(1)),
        );
        HermitianMatrix::from_real_matrix(&m)
    }

    fn derivative(&self, at: &ParameterPoint, axis: usize) -> Result<HermitianMatrix> {
        self.check_axis(axis)?;
        self.check_domain(at)?;
        let zero = DMatrix::<f64>::zeros(2, 2);
        let m = if axis == 0 {
            Self::assemble(&TwoLevelModel::derivative_matrix(at.get(0)), &zero)
        } else {
            Self::assemble(&zero, &TwoLevelModel::derivative_matrix(at.get(1)))
        };
        HermitianMatrix::from_real_matrix(&m)
    }
}
