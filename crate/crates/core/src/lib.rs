//! Estimation and inference for functional averages: the uniform average of
//! a bounded outcome's support, and contrasts of it between treatment arms.
//!
//! The crate is organised bottom-up:
//!
//! * [`distributions`] – seedable generators used by the simulation studies.
//! * [`estimators`] – discrete plug-in, mid-range and mean point estimators.
//! * [`bootstrap`] – Hoeffding-bootstrap confidence sets and the m-out-of-n
//!   percentile baseline.
//! * [`regression`] – least squares, logistic IRLS, standardization and
//!   propensity-score stratification.
//! * [`diagnostics`] – ECDF based checks for sum-symmetry and support symmetry.
//! * [`simharness`] – the Monte Carlo coverage/power studies.

pub mod bootstrap;
pub mod data;
pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod regression;
pub mod rng;
pub mod sample;
pub mod simharness;
pub(crate) mod stats;

pub use bootstrap::{BootstrapConfig, BootstrapDistribution, IntervalEstimate, IntervalMethod, ResampleSize, UFactor};
pub use data::Dataset;
pub use regression::{DesignMatrix, LogisticFit, ModelSpec, RegressionFit, StrataAssignment};

pub use error::{Error, Result};
pub use estimators::{EstimatorKind, PointEstimate};

pub use rng::RngStream;
pub use sample::{Sample, TwoArmSample};
