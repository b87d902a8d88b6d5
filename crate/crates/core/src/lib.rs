//! Simulation toolkit for studying barren plateaus in quantum neural networks.
//!
//! The crate provides:
//!
//! - a dense statevector simulator ([`statevector`]) with single-qubit
//!   rotations, CNOT, and Pauli-Z expectation values,
//! - a hardware-efficient layered ansatz with angle encoding ([`ansatz`]),
//! - exact parameter-shift gradients plus a finite-difference oracle and
//!   gradient-variance estimation over random initializations ([`gradient`]),
//! - beta / uniform / normal sampling and maximum-likelihood fitting,
//!   including the digamma-based beta MLE ([`distributions`]),
//! - the beta-initialized training loop with decaying parameter-space
//!   perturbation ([`trainer`]),
//! - dataset ingestion: CSV loading, two-class binarization, min-max
//!   normalization into (0, 1), and PCA ([`data`]),
//! - Monte-Carlo verification of Haar first/second moments ([`haar`]).
//!
//! All randomized operations take explicit seeds and are deterministic;
//! parallel evaluation derives one stream per trial so results do not depend
//! on scheduling.

pub mod ansatz;
pub mod data;
pub mod distributions;
pub mod error;
pub mod gradient;
pub mod haar;
pub mod rng;
pub mod statevector;
pub mod trainer;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
