//! Figure-level experiments: replicate-averaged risk curves, penalty search,
//! dimensionality and augmentation sweeps, cross-validation and the random
//! Fourier feature experiment on MNIST.
//!
//! All spiked-model experiments draw replicate `i` from the same training
//! substream, so curves over `lambda`, `p` or `q` use common random numbers.

mod augment;
mod curve;
mod cv;
mod mnist;
mod search;
mod sweeps;

pub use augment::{augmentation_sweep, AugmentMode, AugmentationRow};
pub use curve::{mean_risk_at, risk_curve, ReplicateRisk, RiskCurve, SpikedReplicate};
pub use cv::{fold_assignment, kfold_cv};
pub use mnist::{rff_mnist_experiment, MnistConfig, MnistResult, TestSetMoments};
pub use search::{find_lambda_opt, find_lambda_opt_over, LambdaOptResult, LambdaSearch, SearchMethod};
pub use sweeps::{
    dimensionality_sweep, heatmap_lambda_opt, lambda_sweep, spiked_replicates, DimensionRow, HeatCell, Heatmap,
};
