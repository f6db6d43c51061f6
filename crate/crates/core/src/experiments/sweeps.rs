use rayon::prelude::*;
use serde::Serialize;

use super::curve::{mean_risk_at, risk_curve, RiskCurve, SpikedReplicate};
use super::search::{find_lambda_opt_over, LambdaOptResult, LambdaSearch};
use crate::error::{Error, Result};
use crate::linalg::thin_svd;
use crate::spiked::{sample_replicate, SpikedSpec};

/// One SVD per training set; every penalty reuses it.
pub fn spiked_replicates(spec: &SpikedSpec, n: usize, n_rep: usize, seed: u64) -> Result<Vec<SpikedReplicate>> {
    spec.validate()?;
    if n_rep == 0 {
        return Err(Error::InvalidInput("n_rep must be at least 1".into()));
    }
    (0..n_rep)
        .into_par_iter()
        .map(|i| {
            let data = sample_replicate(spec, n, seed, i as u64)?;
            let svd = thin_svd(data.x())?;
            SpikedReplicate::new(&svd, data.y(), spec, 0.0)
        })
        .collect()
}

/// Expected normalized risk over `grid`, averaged over `n_rep` training sets.
pub fn lambda_sweep(spec: &SpikedSpec, n: usize, grid: &[f64], n_rep: usize, seed: u64) -> Result<RiskCurve> {
    super::curve::validate_grid(grid)?;
    let reps = spiked_replicates(spec, n, n_rep, seed)?;
    risk_curve(&reps, grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionRow {
    pub p: usize,
    /// Risk at `lambda = 0`: OLS for `p < n`, minimum-norm OLS otherwise.
    pub min_norm_risk: f64,
    pub min_norm_se: f64,
    pub opt: LambdaOptResult,
}

pub fn dimensionality_sweep(
    base: &SpikedSpec,
    p_grid: &[usize],
    n: usize,
    n_rep: usize,
    seed: u64,
    search: &LambdaSearch,
) -> Result<Vec<DimensionRow>> {
    p_grid
        .iter()
        .map(|&p| {
            let spec = base.with_p(p);
            let reps = spiked_replicates(&spec, n, n_rep, seed)?;
            let (min_norm_risk, min_norm_se, _) = mean_risk_at(&reps, 0.0);
            Ok(DimensionRow {
                p,
                min_norm_risk,
                min_norm_se,
                opt: find_lambda_opt_over(&reps, search)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatCell {
    pub n: usize,
    pub p: usize,
    pub opt: LambdaOptResult,
}

/// Cells in row-major order: `n` outer, `p` inner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Heatmap {
    pub n_grid: Vec<usize>,
    pub p_grid: Vec<usize>,
    pub cells: Vec<HeatCell>,
}

impl Heatmap {
    pub fn cell(&self, i_n: usize, i_p: usize) -> &HeatCell {
        &self.cells[i_n * self.p_grid.len() + i_p]
    }
}

/// `lambda_opt` over an `(n, p)` grid; every cell uses the same master seed.
pub fn heatmap_lambda_opt(
    n_grid: &[usize],
    p_grid: &[usize],
    base: &SpikedSpec,
    n_rep: usize,
    seed: u64,
    search: &LambdaSearch,
) -> Result<Heatmap> {
    if n_grid.is_empty() || p_grid.is_empty() {
        return Err(Error::InvalidInput("empty (n, p) grid".into()));
    }
    let pairs: Vec<(usize, usize)> = n_grid
        .iter()
        .flat_map(|&n| p_grid.iter().map(move |&p| (n, p)))
        .collect();
    let cells = pairs
        .into_par_iter()
        .map(|(n, p)| {
            let reps = spiked_replicates(&base.with_p(p), n, n_rep, seed)?;
            Ok(HeatCell {
                n,
                p,
                opt: find_lambda_opt_over(&reps, search)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Heatmap {
        n_grid: n_grid.to_vec(),
        p_grid: p_grid.to_vec(),
        cells,
    })
}
