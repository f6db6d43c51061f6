//! Derivative of the expected spiked-model risk with respect to the ridge
//! penalty at `lambda = 0+`, for `n < p`.
//!
//! Writing `Sigma = I + c beta beta^T` and
//! `P_k = E[beta^T V S^{-2k} V^T beta]`, the noise-averaged derivative is
//!
//! ```text
//! 2 c |beta|^2 P_1 - 2 c P_0 P_1 - 2 sigma^2 E Tr(S^-4) - 2 c sigma^2 P_2
//! ```
//!
//! A positive value means no positive penalty beats `lambda = 0`, so the
//! optimum is at or below zero.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{thin_svd, Matrix, RidgeSolver, SvdFactorization, Vector};
use crate::spiked::{beta_of, risk, sample_replicate, SpikedSpec};
use crate::stats::{mean_and_se, median};

/// Finite-difference step as a fraction of the median `s_min^2`.
pub const FD_EPS_FRACTION: f64 = 1e-3;

fn require_full_rank(svd: &SvdFactorization) -> Result<()> {
    let k = svd.numerical_rank();
    if k < svd.rank() {
        return Err(Error::RankDeficient(format!(
            "{} of {} singular values are numerically zero",
            svd.rank() - k,
            svd.rank()
        )));
    }
    Ok(())
}

fn moments_from_svd(svd: &SvdFactorization, beta: &Vector, k_max: usize) -> Vec<f64> {
    let proj = svd.v.tr_mul(beta);
    (0..=k_max)
        .map(|k| {
            proj.iter()
                .zip(svd.s.iter())
                .map(|(w, s)| w * w * s.powi(-2 * k as i32))
                .sum()
        })
        .collect()
}

/// `P_k = beta^T V S^{-2k} V^T beta` for a single design, `k = 0..=k_max`.
pub fn projection_moments(x: &Matrix, beta: &Vector, k_max: usize) -> Result<Vec<f64>> {
    if beta.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: format!("beta of length {}", x.ncols()),
            actual: format!("length {}", beta.len()),
        });
    }
    let svd = thin_svd(x)?;
    require_full_rank(&svd)?;
    Ok(moments_from_svd(&svd, beta, k_max))
}

fn trace_from_svd(svd: &SvdFactorization) -> f64 {
    svd.s.iter().map(|s| s.powi(-4)).sum()
}

/// `sum_i s_i^{-4}` over the `min(n, p)` singular values.
pub fn trace_s4(x: &Matrix) -> Result<f64> {
    let svd = thin_svd(x)?;
    require_full_rank(&svd)?;
    Ok(trace_from_svd(&svd))
}

/// The four addends of the derivative, in order of appearance.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DerivativeTerms {
    /// `2 c |beta|^2 P_1`
    pub signal: f64,
    /// `-2 c P_0 P_1`
    pub cross: f64,
    /// `-2 sigma^2 Tr(S^-4)`
    pub trace: f64,
    /// `-2 c sigma^2 P_2`
    pub spike_noise: f64,
}

impl DerivativeTerms {
    pub fn total(&self) -> f64 {
        self.signal + self.cross + self.trace + self.spike_noise
    }
}

/// Per-design quantities entering the derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignMoments {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub trace_s4: f64,
}

impl DesignMoments {
    pub fn from_svd(svd: &SvdFactorization, beta: &Vector) -> Result<Self> {
        require_full_rank(svd)?;
        let m = moments_from_svd(svd, beta, 2);
        Ok(DesignMoments {
            p0: m[0],
            p1: m[1],
            p2: m[2],
            trace_s4: trace_from_svd(svd),
        })
    }

    /// Noise-averaged derivative conditional on this design.
    pub fn terms(&self, spec: &SpikedSpec) -> DerivativeTerms {
        let c = spec.spike_c();
        let nb = spec.beta_norm_sq();
        DerivativeTerms {
            signal: 2.0 * c * nb * self.p1,
            cross: -2.0 * c * self.p0 * self.p1,
            trace: -2.0 * spec.sigma2 * self.trace_s4,
            spike_noise: -2.0 * c * spec.sigma2 * self.p2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeEstimate {
    /// Sum of `terms`.
    pub value: f64,
    /// Standard error of the replicate-level derivatives.
    pub std_err: f64,
    /// Replicate means of each addend.
    pub terms: DerivativeTerms,
    /// Same estimate with the cross term built from `E[P_0] E[P_1]` instead
    /// of `E[P_0 P_1]`.
    pub decoupled_value: f64,
    pub n_rep: usize,
}

fn check_dims(spec: &SpikedSpec, n: usize, n_rep: usize) -> Result<()> {
    spec.validate()?;
    if n == 0 || n >= spec.p {
        return Err(Error::InvalidInput(format!(
            "derivative at zero needs 1 <= n < p, got n = {n}, p = {}",
            spec.p
        )));
    }
    if n_rep == 0 {
        return Err(Error::InvalidInput("n_rep must be at least 1".into()));
    }
    Ok(())
}

/// Monte-Carlo estimate over `n_rep` designs drawn from the spiked model.
pub fn derivative_at_zero(spec: &SpikedSpec, n: usize, n_rep: usize, seed: u64) -> Result<DerivativeEstimate> {
    check_dims(spec, n, n_rep)?;
    let beta = beta_of(spec);
    let moments: Vec<DesignMoments> = (0..n_rep)
        .into_par_iter()
        .map(|i| {
            let data = sample_replicate(spec, n, seed, i as u64)?;
            DesignMoments::from_svd(&thin_svd(data.x())?, &beta)
        })
        .collect::<Result<_>>()?;
    Ok(assemble(spec, &moments))
}

pub fn assemble(spec: &SpikedSpec, moments: &[DesignMoments]) -> DerivativeEstimate {
    let count = moments.len() as f64;
    let per_rep: Vec<DerivativeTerms> = moments.iter().map(|m| m.terms(spec)).collect();
    let avg = |f: fn(&DerivativeTerms) -> f64| per_rep.iter().map(f).sum::<f64>() / count;
    let terms = DerivativeTerms {
        signal: avg(|t| t.signal),
        cross: avg(|t| t.cross),
        trace: avg(|t| t.trace),
        spike_noise: avg(|t| t.spike_noise),
    };
    let totals: Vec<f64> = per_rep.iter().map(DerivativeTerms::total).collect();
    let (_, std_err) = mean_and_se(&totals);

    let c = spec.spike_c();
    let mean_p0 = moments.iter().map(|m| m.p0).sum::<f64>() / count;
    let mean_p1 = moments.iter().map(|m| m.p1).sum::<f64>() / count;
    let decoupled = DerivativeTerms {
        cross: -2.0 * c * mean_p0 * mean_p1,
        ..terms
    };
    DerivativeEstimate {
        value: terms.total(),
        std_err,
        terms,
        decoupled_value: decoupled.total(),
        n_rep: moments.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteDifference {
    pub value: f64,
    pub std_err: f64,
    pub eps: f64,
    pub n_rep: usize,
}

/// Central difference `(R(eps) - R(-eps)) / (2 eps)` of the exact risk for
/// one realized training set.
pub fn fd_derivative_given(svd: &SvdFactorization, y: &Vector, spec: &SpikedSpec, eps: f64) -> Result<f64> {
    let solver = RidgeSolver::new(svd, y)?;
    let plus = risk(&solver.coefficients(eps)?, spec)?.raw_mse;
    let minus = risk(&solver.coefficients(-eps)?, spec)?.raw_mse;
    Ok((plus - minus) / (2.0 * eps))
}

/// Finite-difference check of [`derivative_at_zero`] using the same designs
/// and common noise draws at `+eps` and `-eps`. `eps` defaults to
/// `FD_EPS_FRACTION` times the median `s_min^2`.
pub fn derivative_fd_oracle(
    spec: &SpikedSpec,
    n: usize,
    n_rep: usize,
    eps: Option<f64>,
    seed: u64,
) -> Result<FiniteDifference> {
    check_dims(spec, n, n_rep)?;
    let reps: Vec<(SvdFactorization, Vector)> = (0..n_rep)
        .into_par_iter()
        .map(|i| {
            let data = sample_replicate(spec, n, seed, i as u64)?;
            let svd = thin_svd(data.x())?;
            let (_, y) = data.into_parts();
            Ok((svd, y))
        })
        .collect::<Result<_>>()?;
    let eps = match eps {
        Some(e) if e > 0.0 => e,
        Some(e) => return Err(Error::InvalidInput(format!("eps = {e} must be positive"))),
        None => {
            let smins: Vec<f64> = reps.iter().map(|(s, _)| s.smin_sq().unwrap_or(0.0)).collect();
            FD_EPS_FRACTION * median(&smins)
        }
    };
    let values: Vec<f64> = reps
        .par_iter()
        .map(|(svd, y)| fd_derivative_given(svd, y, spec, eps))
        .collect::<Result<_>>()?;
    let (value, std_err) = mean_and_se(&values);
    Ok(FiniteDifference {
        value,
        std_err,
        eps,
        n_rep,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub p: usize,
    pub estimate: DerivativeEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignChangeScan {
    pub rows: Vec<ScanRow>,
    /// Smallest `p` whose derivative exceeds two standard errors.
    pub crossing: Option<usize>,
}

/// Derivative estimates over an ascending grid of dimensionalities.
pub fn sign_change_scan(
    base: &SpikedSpec,
    p_grid: &[usize],
    n: usize,
    n_rep: usize,
    seed: u64,
) -> Result<SignChangeScan> {
    if p_grid.is_empty() || p_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("p grid must be non-empty and strictly ascending".into()));
    }
    let rows = p_grid
        .iter()
        .map(|&p| {
            Ok(ScanRow {
                p,
                estimate: derivative_at_zero(&base.with_p(p), n, n_rep, seed)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let crossing = rows
        .iter()
        .find(|r| r.estimate.value > 2.0 * r.estimate.std_err)
        .map(|r| r.p);
    Ok(SignChangeScan { rows, crossing })
}
