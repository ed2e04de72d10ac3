//! Covariance-matrix simulation of free-fermion circuits.
//!
//! The crate tracks pure fermionic Gaussian states through their
//! Majorana covariance matrices, evolves them with brickwork circuits
//! of nearest-neighbor matchgates, measures Fock-basis occupations
//! exactly, and analyzes the resulting projected ensembles: moments,
//! Wasserstein distances against Gaussian-ensemble predictions,
//! entanglement-entropy statistics, and operator spreading.

pub mod error;
pub mod experiments;
pub mod measurement;
pub mod numerics;
pub mod observables;
pub mod state;
pub mod statistics;

pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, RunManifest};
pub use measurement::{EnsembleMode, MeasurementRecord, ProjectedEnsemble};
pub use observables::{GheSpec, Observable};
pub use state::{BrickworkRun, CovarianceMatrix, DenseState};
pub use statistics::EmpiricalDistribution;
