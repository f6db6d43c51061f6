//! Ridge regression in the `n < p` regime: minimum-norm interpolation,
//! negative penalties, and the implicit ridge regularization provided by
//! random low-variance predictors.
//!
//! The [`linalg`] module holds the exact estimators, [`spiked`] the
//! spiked-covariance generative model with its closed-form risk,
//! [`augmentation`] the random-predictor construction, [`derivative`] the
//! Monte-Carlo risk derivative at `lambda = 0`, [`datasets`] the IDX/CSV
//! loaders and random Fourier features, and [`experiments`] the sweeps that
//! drive the `ridgeless` command-line tool.

pub mod augmentation;
pub mod cli;
pub mod datasets;
pub mod derivative;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod rng;
pub mod spiked;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::{Dataset, Matrix, RidgeFit, SvdFactorization, Vector};
pub use spiked::{RiskValue, SpikedSpec};
