//! Decoherence-assisted quantum driving.
//!
//! A parameter-dependent Hamiltonian is driven from `Λ_I` to `Λ_F` by a
//! sequence of sudden quenches. After every quench the system is fully
//! decohered in the instantaneous energy eigenbasis, so the populations
//! follow a Markov chain whose transition matrix is built from squared
//! eigenvector overlaps. The crate provides
//!
//! * [`spectral`]: dense Hermitian eigensolver and branching matrices,
//! * [`models`]: the Lipkin multiqubit family and small analytic models,
//! * [`geometry`]: the ground-state metric, path lengths, geodesics and
//!   constant-speed discretizations,
//! * [`protocol`]: the stroboscopic Markov protocol and infidelity scaling,
//! * [`coherent`]: the Schrödinger-driving baseline,
//! * [`spectator`]: the qubit + spectator-spin decoherence gadget.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod coherent;
mod error;
pub mod geometry;
pub mod models;
pub mod protocol;
pub mod spectator;
pub mod spectral;

pub use error::{Error, Result};
pub use models::{HamiltonianFamily, ParameterPoint};
pub use num_complex::Complex64;
