use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{ReplicateRisk, SpikedReplicate};
use super::search::{find_lambda_opt_over, LambdaOptResult, LambdaSearch};
use crate::error::{Error, Result};
use crate::linalg::{thin_svd, Dataset, Matrix};
use crate::rng::{normal, substream, Purpose};
use crate::spiked::{sample_replicate, SpikedSpec};
use crate::stats::mean_and_se;

/// Variance of the appended random columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum AugmentMode {
    /// `total_lambda / q` per column, so the implied ridge penalty is fixed.
    Adaptive { total_lambda: f64 },
    /// The same variance for every column regardless of `q`.
    FixedVariance { var: f64 },
}

impl AugmentMode {
    fn variance(&self, q: usize) -> f64 {
        match *self {
            AugmentMode::Adaptive { total_lambda } if q > 0 => total_lambda / q as f64,
            AugmentMode::Adaptive { .. } => 0.0,
            AugmentMode::FixedVariance { var } => var,
        }
    }

    fn validate(&self) -> Result<()> {
        let v = match *self {
            AugmentMode::Adaptive { total_lambda } => total_lambda,
            AugmentMode::FixedVariance { var } => var,
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("augmentation variance parameter {v} must be positive")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AugmentationRow {
    pub q: usize,
    /// Risk at `lambda = 0` of the estimator truncated to the original `p`
    /// coefficients.
    pub risk_trunc: f64,
    pub se_trunc: f64,
    /// Risk of the full `p + q` estimator on inputs with fresh random tails.
    pub risk_full: f64,
    pub se_full: f64,
    pub lambda_opt: Option<LambdaOptResult>,
    /// Replicates dropped because `p + q = n` makes the design square and
    /// its minimum-norm fit unstable.
    pub excluded: usize,
}

/// Risk of minimum-norm fits on designs augmented with `q` random columns,
/// for each `q` in `q_grid`. Replicate `i` reuses the same training set and
/// the same random columns (the first `q` of one block) for every `q`.
/// With `search` set, also finds `lambda_opt` of the augmented design.
pub fn augmentation_sweep(
    spec: &SpikedSpec,
    n: usize,
    q_grid: &[usize],
    mode: AugmentMode,
    n_rep: usize,
    seed: u64,
    search: Option<&LambdaSearch>,
) -> Result<Vec<AugmentationRow>> {
    spec.validate()?;
    mode.validate()?;
    if q_grid.is_empty() || n_rep == 0 {
        return Err(Error::InvalidInput("need a non-empty q grid and n_rep >= 1".into()));
    }
    let q_max = q_grid.iter().copied().max().unwrap_or(0);
    let training: Vec<(Dataset, Matrix)> = (0..n_rep)
        .into_par_iter()
        .map(|i| {
            let data = sample_replicate(spec, n, seed, i as u64)?;
            let mut rng = substream(seed, Purpose::Augmentation, i as u64);
            let block: Vec<f64> = (0..n * q_max).map(|_| normal(&mut rng)).collect();
            Ok((data, Matrix::from_column_slice(n, q_max, &block)))
        })
        .collect::<Result<_>>()?;

    let p = spec.p;
    q_grid
        .iter()
        .map(|&q| {
            if p + q == n {
                return Ok(AugmentationRow {
                    q,
                    risk_trunc: f64::NAN,
                    se_trunc: f64::NAN,
                    risk_full: f64::NAN,
                    se_full: f64::NAN,
                    lambda_opt: None,
                    excluded: n_rep,
                });
            }
            let var = mode.variance(q);
            let sd = var.sqrt();
            let reps: Vec<SpikedReplicate> = training
                .par_iter()
                .map(|(data, block)| {
                    let mut x = Matrix::zeros(n, p + q);
                    x.columns_mut(0, p).copy_from(data.x());
                    x.columns_mut(p, q).copy_from(&(block.columns(0, q) * sd));
                    SpikedReplicate::new(&thin_svd(&x)?, data.y(), spec, var)
                })
                .collect::<Result<_>>()?;
            let trunc: Vec<f64> = reps.iter().filter_map(|r| r.risk_at(0.0)).collect();
            let full: Vec<f64> = reps.iter().filter_map(|r| r.full_risk_at(0.0)).collect();
            let (risk_trunc, se_trunc) = mean_and_se(&trunc);
            let (risk_full, se_full) = mean_and_se(&full);
            let lambda_opt = search.map(|s| find_lambda_opt_over(&reps, s)).transpose()?;
            Ok(AugmentationRow {
                q,
                risk_trunc,
                se_trunc,
                risk_full,
                se_full,
                lambda_opt,
                excluded: n_rep - trunc.len(),
            })
        })
        .collect()
}
