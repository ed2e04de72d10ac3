//! Gaussian-state representations and circuit dynamics: covariance
//! matrices, brickwork evolution, and the dense Fock-space oracle.

pub mod brickwork;
pub mod covariance;
pub mod dense;

pub use brickwork::{apply_gate_log, run_brickwork, BrickworkRun, GateRecord};
pub use covariance::CovarianceMatrix;
pub use dense::{DenseState, MAX_DENSE_MODES};
