//! A qubit decohered by a spectator spin.
//!
//! The product basis is ordered `|0↑⟩, |0↓⟩, |1↑⟩, |1↓⟩`. The coupling
//! `H_int = -(π/4τ) σz ⊗ σx` rotates the spectator about `x` in opposite
//! senses for the two qubit states; after `t' = τ` the branches are
//! orthogonal and the reduced qubit state has lost its coherence.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::spectral::{eigh, CMatrix, CVector, HermitianMatrix};
use crate::{Error, Result};

/// Allowed deviation of `|a₀|² + |a₁|²` from one.
pub const NORM_TOL: f64 = 1e-12;

/// `H_int = -(π/4τ) σz ⊗ σx` with `σz|0⟩ = -|0⟩`, `σz|1⟩ = +|1⟩`.
pub fn interaction_hamiltonian(tau: f64) -> Result<HermitianMatrix> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "decoherence time must be > 0, got {tau}"
        )));
    }
    let g = std::f64::consts::PI / (4.0 * tau);
    #[rustfmt::skip]
    let m = [
        0.0, g,   0.0, 0.0,
        g,   0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, -g,
        0.0, 0.0, -g,  0.0,
    ];
    HermitianMatrix::from_real(4, &m)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QubitSpectatorState {
    pub amplitudes: CVector,
}

impl QubitSpectatorState {
    /// `(a₀|0⟩ + a₁|1⟩) ⊗ |↑⟩`.
    pub fn separated(a0: Complex64, a1: Complex64) -> Result<Self> {
        let norm_sqr = a0.norm_sqr() + a1.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::Unnormalized { norm_sqr });
        }
        let zero = Complex64::new(0.0, 0.0);
        Ok(Self {
            amplitudes: CVector::from_vec(vec![a0, zero, a1, zero]),
        })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨Ψ|A|Ψ⟩` for a 4×4 Hermitian `A`.
    pub fn expectation(&self, op: &HermitianMatrix) -> f64 {
        op.sandwich(&self.amplitudes, &self.amplitudes).re
    }

    /// Partial trace over the spectator.
    pub fn reduced(&self) -> ReducedDensityMatrix {
        let a = &self.amplitudes;
        // ρ_ij = Σ_s ψ_{i s} ψ*_{j s}
        let rho = Matrix2::from_fn(|i, j| (0..2).map(|s| a[2 * i + s] * a[2 * j + s].conj()).sum());
        ReducedDensityMatrix { rho }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedDensityMatrix {
    pub rho: Matrix2<Complex64>,
}

impl ReducedDensityMatrix {
    pub fn p0(&self) -> f64 {
        self.rho[(0, 0)].re
    }

    pub fn p1(&self) -> f64 {
        self.rho[(1, 1)].re
    }

    pub fn coherence_abs(&self) -> f64 {
        self.rho[(0, 1)].norm()
    }

    pub fn trace(&self) -> f64 {
        self.p0() + self.p1()
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * self.trace();
        let half_diff = 0.5 * (self.p0() - self.p1());
        let r = (half_diff * half_diff + self.rho[(0, 1)].norm_sqr()).sqrt();
        [mean - r, mean + r]
    }
}

/// `U(t') = exp(-i H_int t')` from the spectral decomposition of `H_int`.
pub fn gadget_unitary(tau: f64, t_prime: f64) -> Result<CMatrix> {
    let dec = eigh(&interaction_hamiltonian(tau)?);
    Ok(dec.map_spectrum(|e| Complex64::from_polar(1.0, -e * t_prime)))
}

/// `U(t') (a₀|0⟩ + a₁|1⟩) ⊗ |↑⟩`.
pub fn evolve_gadget(
    a0: Complex64,
    a1: Complex64,
    tau: f64,
    t_prime: f64,
) -> Result<QubitSpectatorState> {
    if !(t_prime >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "elapsed time must be >= 0, got {t_prime}"
        )));
    }
    let psi = QubitSpectatorState::separated(a0, a1)?;
    Ok(QubitSpectatorState {
        amplitudes: gadget_unitary(tau, t_prime)? * psi.amplitudes,
    })
}

pub fn reduced_coherence(state: &QubitSpectatorState) -> ReducedDensityMatrix {
    state.reduced()
}

/// What is integrated over time in [`interaction_action`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionMeasure {
    /// `⟨Ψ|H_int|Ψ⟩`.
    Expectation,
    /// `⟨Ψ|H_int²|Ψ⟩^{1/2}`.
    RootMeanSquare,
}

/// Composite Simpson intervals per gadget cycle.
const SIMPSON_INTERVALS: usize = 64;

/// `S_int = ∫₀ᵀ dt m(t)` over `K` gadget cycles of length `T/K`, each with a
/// freshly reset spectator. `H_int` is block diagonal in the qubit basis, so
/// the integrand depends on the qubit only through `|a₀|²` and `|a₁|²`,
/// which every cycle preserves.
pub fn interaction_action(
    a0: Complex64,
    a1: Complex64,
    tau: f64,
    total_time: f64,
    cycles: usize,
    measure: ActionMeasure,
) -> Result<f64> {
    if cycles == 0 {
        return Err(Error::InvalidArgument(
            "at least one cycle is needed".into(),
        ));
    }
    let h = interaction_hamiltonian(tau)?;
    let h2 = HermitianMatrix::new(h.matrix() * h.matrix())?;
    let dt = total_time / cycles as f64;
    let integrand = |t: f64| -> Result<f64> {
        let psi = evolve_gadget(a0, a1, tau, t)?;
        Ok(match measure {
            ActionMeasure::Expectation => psi.expectation(&h),
            ActionMeasure::RootMeanSquare => psi.expectation(&h2).max(0.0).sqrt(),
        })
    };
    let n = SIMPSON_INTERVALS;
    let step = dt / n as f64;
    let mut per_cycle = integrand(0.0)? + integrand(dt)?;
    for i in 1..n {
        per_cycle += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(i as f64 * step)?;
    }
    per_cycle *= step / 3.0;
    Ok(per_cycle * cycles as f64)
}
