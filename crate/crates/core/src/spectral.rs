//! Dense Hermitian eigendecomposition and eigenbasis overlaps.
//!
//! Decomposition uses Householder tridiagonalization with implicit QR
//! (`nalgebra::SymmetricEigen`). Real symmetric input, which is what every
//! physical model here produces, takes a real-arithmetic path; the output
//! is sorted ascending and phase-fixed so results are reproducible.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Absolute tolerance on `|H[i][j] - conj(H[j][i])|`.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// A square complex matrix validated to be Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Validates and wraps `m`.
    ///
    /// The stored matrix is the exact Hermitian part `(m + m†)/2`, so
    /// downstream code never sees the sub-tolerance asymmetry.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        let n = m.nrows();
        for i in 0..n {
            for j in i..n {
                let deviation = (m[(i, j)] - m[(j, i)].conj()).norm();
                if !(deviation <= HERMITICITY_TOL) {
                    return Err(Error::NotHermitian {
                        row: i,
                        col: j,
                        deviation,
                    });
                }
            }
        }
        let sym = (&m + m.adjoint()).scale(0.5);
        Ok(Self(sym))
    }

    /// Builds a real symmetric matrix from row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(CMatrix::from_fn(dim, dim, |i, j| {
            Complex64::new(entries[i * dim + j], 0.0)
        }))
    }

    pub fn from_real_matrix(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }

    /// `H + c·1`.
    pub fn shifted(&self, c: f64) -> Self {
        let n = self.dim();
        Self(&self.0 + CMatrix::identity(n, n).scale(c))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.scale(factor))
    }

    /// `⟨a|H|b⟩`.
    pub fn sandwich(&self, a: &CVector, b: &CVector) -> Complex64 {
        a.dotc(&(&self.0 * b))
    }
}

/// Ascending eigenvalues and orthonormal eigenvectors (column `i` is `|E_i⟩`).
///
/// Each eigenvector is normalized so that its largest-modulus component is
/// real and positive.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> CVector {
        self.eigenvectors.column(i).into_owned()
    }

    pub fn ground_state(&self) -> CVector {
        self.eigenvector(0)
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `E_1 - E_0`, or infinity for a one-dimensional space.
    pub fn gap(&self) -> f64 {
        if self.dim() < 2 {
            f64::INFINITY
        } else {
            self.eigenvalues[1] - self.eigenvalues[0]
        }
    }

    /// Smallest spacing between adjacent eigenvalues.
    pub fn min_spacing(&self) -> f64 {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// `V diag(E) V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for j in 0..n {
            let e = self.eigenvalues[j];
            scaled.column_mut(j).scale_mut(e);
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// Applies `f(E_i)` spectrally: `V diag(f(E)) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for j in 0..n {
            let w = f(self.eigenvalues[j]);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }
}

/// Transition probabilities `B[i][i'] = |⟨E_i(to)|E_i'(from)⟩|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchingMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl BranchingMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, to: usize, from: usize) -> f64 {
        self.entries[to * self.dim + from]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries
            .chunks(self.dim)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        Self { dim: n, entries }
    }

    /// One Markov step: `p'_i = Σ_i' B[i][i'] p_i'`.
    pub fn apply(&self, populations: &[f64]) -> Vec<f64> {
        self.entries
            .chunks(self.dim)
            .map(|row| row.iter().zip(populations).map(|(b, p)| b * p).sum())
            .collect()
    }
}

/// Branching ratios between two eigenbases of equal dimension.
pub fn branching(
    from: &SpectralDecomposition,
    to: &SpectralDecomposition,
) -> Result<BranchingMatrix> {
    if from.dim() != to.dim() {
        return Err(Error::DimensionMismatch {
            expected: from.dim(),
            found: to.dim(),
        });
    }
    let overlaps = to.eigenvectors.adjoint() * &from.eigenvectors;
    let n = from.dim();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push(overlaps[(i, j)].norm_sqr());
        }
    }
    Ok(BranchingMatrix { dim: n, entries })
}

/// Eigendecomposition of a validated Hermitian matrix.
pub fn eigh(h: &HermitianMatrix) -> SpectralDecomposition {
    let (values, vectors) = if h.is_real() {
        let se = SymmetricEigen::new(h.0.map(|z| z.re));
        (
            se.eigenvalues.iter().copied().collect(),
            se.eigenvectors.map(|x| Complex64::new(x, 0.0)),
        )
    } else {
        let se = SymmetricEigen::new(h.0.clone());
        (se.eigenvalues.iter().copied().collect(), se.eigenvectors)
    };
    sorted_and_phased(values, vectors)
}

/// Validates an arbitrary complex matrix and decomposes it.
pub fn eigh_matrix(m: CMatrix) -> Result<SpectralDecomposition> {
    Ok(eigh(&HermitianMatrix::new(m)?))
}

fn sorted_and_phased(values: Vec<f64>, vectors: CMatrix) -> SpectralDecomposition {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = vectors.column(src);
        let largest = col.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        // First component within rounding of the largest modulus; the
        // tolerance keeps the choice stable between equal-modulus entries.
        let pivot = col
            .iter()
            .position(|z| z.norm() >= largest * (1.0 - 1e-12))
            .unwrap_or(0);
        let phase = col[pivot].conj() / col[pivot].norm();
        for i in 0..n {
            eigenvectors[(i, dst)] = col[i] * phase;
        }
        eigenvectors[(pivot, dst)].im = 0.0;
    }
    SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    }
}
