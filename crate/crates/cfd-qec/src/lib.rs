//! Hardware-efficient quantum error correction for common-fluctuator
//! dephasing (CFD).
//!
//! A register of n qubits coupled diagonally to a common fluctuator
//! accumulates a random collective phase generated by H_E = sum_j g_j Z_j.
//! This crate constructs codes tailored to the error span
//! {I, H_E, ..., H_E^q} with q = 2^(n-1) - 1, verifies the Knill-Laflamme
//! conditions, builds the associated recovery channels (including the
//! closed-form two-qubit code with its gate-level recovery circuit), and
//! benchmarks logical error probabilities against repetition-code and
//! unencoded baselines.

pub mod baselines;
pub mod channel;
pub mod code;
pub mod error;
pub mod experiments;
pub mod noise;
pub mod states;
pub mod two_qubit;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<C64>;

/// Largest supported Hilbert-space dimension (n <= 5 register qubits plus
/// one ancilla).
pub const MAX_DIM: usize = 64;
