//! Composable finite-size key-length analysis for Gaussian-modulated
//! coherent-state CV-QKD.
//!
//! The crate is organized around the stages of the classical pipeline:
//!
//! - [`special`]: regularized incomplete beta/gamma functions and their
//!   inverses, stable at the huge, symmetric shape parameters the intervals
//!   need (n up to 1e9 symbols).
//! - [`confidence`]: beta-based (collective-attack-safe) and
//!   Gaussian-assumption confidence intervals for variance and covariance
//!   estimators, plus the worst-case bound constructors.
//! - [`dataset`]: the binary quadrature/calibration file format.
//! - [`estimation`]: empirical moments, shot-noise and trusted-noise
//!   calibration, discretized entropy estimation, and channel-parameter
//!   extraction.
//! - [`security`]: the epsilon budget, AEP and reconciliation-projection
//!   penalties, the Holevo bound for the trusted heterodyne receiver, and
//!   the assembled composable key length.
//! - [`simulator`]: a deterministic, seeded symbol-level Gaussian-channel
//!   simulator that exercises the full pipeline and backs the Monte Carlo
//!   coverage tests.

pub mod confidence;
pub mod dataset;
pub mod estimation;
pub mod security;
pub mod simulator;
pub mod special;

pub use confidence::{IntervalHalfWidths, IntervalMethod};
pub use dataset::{CalibrationDataset, QuadratureDataset};
pub use estimation::{
    ChannelParams, EntropyEstimate, MomentEstimates, ShotNoiseCalibration, TrustedReceiver,
};
pub use security::{IrOutcome, KeyLengthReport, SecurityBudget};
pub use simulator::{ChannelModel, DatasetManifest, DigitizationSpec, SeededStream};
