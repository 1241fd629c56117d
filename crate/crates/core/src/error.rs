use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: |H[{row}][{col}] - conj(H[{col}][{row}])| = {deviation:e}")]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parameter point outside the model domain: {0}")]
    OutsideDomain(String),

    #[error("invalid parameter axis {axis} for a {dim}-dimensional parameter space")]
    InvalidAxis { axis: usize, dim: usize },

    #[error("brute-force oracle limited to N <= 8 qubits, got N = {0}")]
    OracleTooLarge(usize),

    #[error("ground state is degenerate: gap E1 - E0 = {gap:e}")]
    DegenerateGroundState { gap: f64 },

    #[error("geodesic relaxation did not converge after {iterations} iterations (residual {residual:e})")]
    GeodesicNotConverged { iterations: usize, residual: f64 },

    #[error("input path too coarse: {have} steps, need at least {need}")]
    PathTooCoarse { have: usize, need: usize },

    #[error("Schrödinger integration did not converge: last two fidelities {previous} and {last}")]
    IntegratorNotConverged { previous: f64, last: f64 },

    #[error("amplitudes are not normalized: |a0|^2 + |a1|^2 = {norm_sqr}")]
    Unnormalized { norm_sqr: f64 },

    #[error("{0}")]
    InvalidArgument(String),
}
