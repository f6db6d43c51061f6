use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SvdFactorization, Vector, PENALTY_GUARD};
use crate::spiked::SpikedSpec;
use crate::stats::mean_and_se;

/// Risk of one training set as a function of the penalty.
pub trait ReplicateRisk: Sync {
    /// `None` when `lambda` is at or inside the guard gap of `-s_min^2`.
    fn risk_at(&self, lambda: f64) -> Option<f64>;

    fn smin_sq(&self) -> f64;

    fn admits(&self, lambda: f64) -> bool {
        lambda > -self.smin_sq() * (1.0 - PENALTY_GUARD)
    }
}

/// Replicate-averaged risk over a penalty grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskCurve {
    pub lambdas: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
    pub n_rep: usize,
    /// Replicates left out at each grid point because the penalty was not
    /// above their `-s_min^2`.
    pub excluded: Vec<usize>,
}

impl RiskCurve {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Index of the smallest finite mean; ties go to the smaller `|lambda|`.
    pub fn argmin(&self) -> Option<usize> {
        self.argmin_where(|_| true)
    }

    pub fn argmin_where(&self, keep: impl Fn(f64) -> bool) -> Option<usize> {
        let mut best: Option<usize> = None;
        for i in 0..self.len() {
            if !keep(self.lambdas[i]) || !self.mean[i].is_finite() {
                continue;
            }
            best = match best {
                Some(b) if !prefer(self.lambdas[i], self.mean[i], self.lambdas[b], self.mean[b]) => Some(b),
                _ => Some(i),
            };
        }
        best
    }
}

/// Tie tolerance for comparing two averaged risks.
const TIE_RTOL: f64 = 1e-12;

/// Whether `(lambda, risk)` beats the incumbent. Only numerically equal risks
/// count as ties, resolved toward the smaller `|lambda|`.
pub(crate) fn prefer(lambda: f64, risk: f64, inc_lambda: f64, inc_risk: f64) -> bool {
    let scale = risk.abs().max(inc_risk.abs());
    if (risk - inc_risk).abs() <= TIE_RTOL * scale {
        lambda.abs() < inc_lambda.abs()
    } else {
        risk < inc_risk
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("lambda grid is empty".into()));
    }
    if grid.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidInput("lambda grid has non-finite values".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("lambda grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Mean and standard error over replicates admitting `lambda`, plus the
/// number excluded. Replicates are reduced in index order.
pub fn mean_risk_at<R: ReplicateRisk>(reps: &[R], lambda: f64) -> (f64, f64, usize) {
    let values: Vec<f64> = reps.iter().filter_map(|r| r.risk_at(lambda)).collect();
    let excluded = reps.len() - values.len();
    if values.is_empty() {
        return (f64::NAN, f64::NAN, excluded);
    }
    let (m, se) = mean_and_se(&values);
    (m, se, excluded)
}

pub fn risk_curve<R: ReplicateRisk>(reps: &[R], grid: &[f64]) -> Result<RiskCurve> {
    validate_grid(grid)?;
    let mut curve = RiskCurve {
        lambdas: grid.to_vec(),
        mean: Vec::with_capacity(grid.len()),
        std_err: Vec::with_capacity(grid.len()),
        n_rep: reps.len(),
        excluded: Vec::with_capacity(grid.len()),
    };
    for &lambda in grid {
        let (m, se, ex) = mean_risk_at(reps, lambda);
        curve.mean.push(m);
        curve.std_err.push(se);
        curve.excluded.push(ex);
    }
    Ok(curve)
}

/// Normalized spiked-model risk of the ridge path of one training set,
/// possibly truncated to the first `p` of `p + q` columns.
///
/// With spectral coefficients `c = w(lambda) * U^T y`, the estimator is
/// `B c` for `B` the first `p` rows of `V`. The exact risk
/// `|d|^2 + rho (1^T d)^2 + sigma^2` with `d = B c - b 1` then only needs
/// `g = B^T 1` and `M = B^T B` (the identity when nothing is truncated), so
/// each penalty costs `O(r)` or `O(r^2)`.
#[derive(Debug, Clone)]
pub struct SpikedReplicate {
    s: Vec<f64>,
    uty: Vec<f64>,
    g: Vector,
    m: Option<Matrix>,
    tol: f64,
    smin_sq: f64,
    p: f64,
    b: f64,
    rho: f64,
    sigma2: f64,
    var_y: f64,
    tail_var: f64,
}

impl SpikedReplicate {
    /// `svd` factors an `n x (p + q)` design whose first `spec.p` columns are
    /// the original predictors; `tail_var` is the variance of the extra
    /// columns (used only by [`Self::full_risk_at`]).
    pub fn new(svd: &SvdFactorization, y: &Vector, spec: &SpikedSpec, tail_var: f64) -> Result<Self> {
        let p = spec.p;
        if svd.n_cols() < p || y.len() != svd.n_rows() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} rows and at least {p} columns", y.len()),
                actual: format!("{}x{}", svd.n_rows(), svd.n_cols()),
            });
        }
        let b_rows = svd.v.rows(0, p);
        let g = b_rows.row_sum().transpose();
        let m = (svd.n_cols() > p).then(|| b_rows.tr_mul(&b_rows));
        Ok(SpikedReplicate {
            s: svd.s.iter().copied().collect(),
            uty: svd.u.tr_mul(y).iter().copied().collect(),
            g,
            m,
            tol: svd.tolerance(),
            smin_sq: svd.smin_sq().unwrap_or(0.0),
            p: p as f64,
            b: spec.b(),
            rho: spec.rho,
            sigma2: spec.sigma2,
            var_y: spec.response_variance(),
            tail_var,
        })
    }

    fn coefficients(&self, lambda: f64) -> Option<Vector> {
        if !self.admits(lambda) {
            return None;
        }
        let tol = self.tol;
        Some(Vector::from_iterator(
            self.s.len(),
            self.s
                .iter()
                .zip(&self.uty)
                .map(|(&s, &u)| if s > tol { s / (s * s + lambda) * u } else { 0.0 }),
        ))
    }

    /// `(raw risk of the truncated estimator, c^T M c, |c|^2)`.
    fn parts(&self, lambda: f64) -> Option<(f64, f64, f64)> {
        let c = self.coefficients(lambda)?;
        let cc = c.norm_squared();
        let cmc = match &self.m {
            Some(m) => c.dot(&(m * &c)),
            None => cc,
        };
        let cg = c.dot(&self.g);
        let sq = cmc - 2.0 * self.b * cg + self.p * self.b * self.b;
        let sum = cg - self.p * self.b;
        Some((sq + self.rho * sum * sum + self.sigma2, cmc, cc))
    }

    /// Normalized risk of the full estimator on inputs with fresh tails,
    /// `raw + tail_var |tail|^2`, with `|tail|^2 = |c|^2 - c^T M c`.
    pub fn full_risk_at(&self, lambda: f64) -> Option<f64> {
        let (raw, cmc, cc) = self.parts(lambda)?;
        Some((raw + self.tail_var * (cc - cmc).max(0.0)) / self.var_y)
    }
}

impl ReplicateRisk for SpikedReplicate {
    fn risk_at(&self, lambda: f64) -> Option<f64> {
        self.parts(lambda).map(|(raw, _, _)| raw / self.var_y)
    }

    fn smin_sq(&self) -> f64 {
        self.smin_sq
    }
}
