//! Exact estimators built on a thin SVD.
//!
//! With `X = U diag(s) V^T` the ridge estimator is
//! `beta_lambda = V diag(s / (s^2 + lambda)) U^T y`, which stays well defined
//! for negative penalties down to (but excluding) `-s_min^2`. At `lambda = 0`
//! it is the minimum-norm least-squares solution `X^+ y`.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative gap kept between a penalty and the divergence boundary `-s_min^2`.
pub const PENALTY_GUARD: f64 = 1e-6;

/// Relative cutoff (times `s_max * max(n, p)`) under which a singular value
/// counts as zero.
pub const RANK_RTOL: f64 = 1e-12;

/// Gradient descent stops once the gradient norm drops below this fraction of
/// `|X^T y|`.
pub const GD_TOLERANCE: f64 = 1e-10;
pub const GD_MAX_ITERS: usize = 1_000_000;
const GD_DIVERGENCE_NORM: f64 = 1e12;

pub(crate) fn ensure_finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} contains non-finite entries")))
    }
}

fn shape(rows: usize, cols: usize) -> String {
    format!("{rows}x{cols}")
}

/// A design matrix with its response.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Matrix,
    y: Vector,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vector) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::InvalidInput(format!(
                "design must be non-empty, got {}",
                shape(x.nrows(), x.ncols())
            )));
        }
        if y.len() != x.nrows() {
            return Err(Error::DimensionMismatch {
                expected: format!("response of length {}", x.nrows()),
                actual: format!("length {}", y.len()),
            });
        }
        ensure_finite("design", x.as_slice())?;
        ensure_finite("response", y.as_slice())?;
        Ok(Dataset { x, y })
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &Vector {
        &self.y
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn into_parts(self) -> (Matrix, Vector) {
        (self.x, self.y)
    }
}

/// Thin SVD `X = U diag(s) V^T` with `r = min(n, p)` components, `s`
/// descending. Numerically zero singular values are kept.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    pub u: Matrix,
    pub s: Vector,
    pub v: Matrix,
}

impl SvdFactorization {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn n_rows(&self) -> usize {
        self.u.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.v.nrows()
    }

    /// Singular values at or below this are treated as exact zeros.
    pub fn tolerance(&self) -> f64 {
        let s_max = self.s.iter().copied().fold(0.0, f64::max);
        s_max * self.n_rows().max(self.n_cols()) as f64 * RANK_RTOL
    }

    /// Number of singular values above [`Self::tolerance`].
    pub fn numerical_rank(&self) -> usize {
        let tol = self.tolerance();
        self.s.iter().filter(|&&s| s > tol).count()
    }

    /// Smallest non-zero squared singular value; `None` for a zero matrix.
    pub fn smin_sq(&self) -> Option<f64> {
        let k = self.numerical_rank();
        (k > 0).then(|| self.s[k - 1] * self.s[k - 1])
    }

    pub fn smax_sq(&self) -> f64 {
        self.s.get(0).map_or(0.0, |s| s * s)
    }

    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for (j, s) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }

    /// Rejects penalties at or below `-s_min^2 (1 - PENALTY_GUARD)`.
    pub fn check_penalty(&self, lambda: f64) -> Result<()> {
        if !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("lambda = {lambda}")));
        }
        if let Some(smin_sq) = self.smin_sq() {
            if lambda <= -smin_sq * (1.0 - PENALTY_GUARD) {
                return Err(Error::SingularPenalty {
                    lambda,
                    boundary: -smin_sq,
                });
            }
        }
        Ok(())
    }

    /// Diagonal weights `s / (s^2 + lambda)`; zero for numerically zero `s`.
    pub fn ridge_weights(&self, lambda: f64) -> Result<Vector> {
        self.check_penalty(lambda)?;
        let tol = self.tolerance();
        Ok(self
            .s
            .map(|s| if s > tol { s / (s * s + lambda) } else { 0.0 }))
    }
}

fn svd_square(m: Matrix) -> Result<(Matrix, Vector, Matrix)> {
    let svd = SVD::try_new(m, true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::InvalidInput("SVD did not converge".into()))?;
    let u = svd.u.expect("u requested");
    let v = svd.v_t.expect("v_t requested").transpose();
    Ok((u, svd.singular_values, v))
}

/// Thin SVD of `x`. Rectangular inputs are first reduced by a Householder QR
/// so that only an `r x r` matrix goes through the iterative SVD.
pub fn thin_svd(x: &Matrix) -> Result<SvdFactorization> {
    let (n, p) = x.shape();
    if n == 0 || p == 0 {
        return Err(Error::InvalidInput("cannot factor an empty matrix".into()));
    }
    ensure_finite("matrix", x.as_slice())?;

    let (u, s, v) = if n < p {
        // X^T = Q R  =>  X = R^T Q^T
        let qr = x.transpose().qr();
        let (q, r) = (qr.q(), qr.r());
        let (u, s, w) = svd_square(r.transpose())?;
        (u, s, q * w)
    } else if n > p {
        let qr = x.clone().qr();
        let (q, r) = (qr.q(), qr.r());
        let (w, s, v) = svd_square(r)?;
        (q * w, s, v)
    } else {
        svd_square(x.clone())?
    };

    // nalgebra sorts already; make the ordering a local guarantee.
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    if order.iter().enumerate().all(|(i, &j)| i == j) {
        return Ok(SvdFactorization { u, s, v });
    }
    Ok(SvdFactorization {
        u: u.select_columns(order.iter()),
        s: Vector::from_iterator(order.len(), order.iter().map(|&i| s[i])),
        v: v.select_columns(order.iter()),
    })
}

/// Ridge estimator `V diag(s / (s^2 + lambda)) U^T y`, valid for
/// `lambda > -s_min^2`.
pub fn ridge_path(svd: &SvdFactorization, y: &Vector, lambda: f64) -> Result<Vector> {
    RidgeSolver::new(svd, y)?.coefficients(lambda)
}

/// Precomputes `U^T y` so a whole penalty grid costs one projection.
#[derive(Debug, Clone)]
pub struct RidgeSolver<'a> {
    svd: &'a SvdFactorization,
    uty: Vector,
}

impl<'a> RidgeSolver<'a> {
    pub fn new(svd: &'a SvdFactorization, y: &Vector) -> Result<Self> {
        if y.len() != svd.n_rows() {
            return Err(Error::DimensionMismatch {
                expected: format!("response of length {}", svd.n_rows()),
                actual: format!("length {}", y.len()),
            });
        }
        ensure_finite("response", y.as_slice())?;
        Ok(RidgeSolver {
            svd,
            uty: svd.u.tr_mul(y),
        })
    }

    pub fn svd(&self) -> &SvdFactorization {
        self.svd
    }

    /// Coordinates of the estimator in the basis of `V`'s columns.
    pub fn spectral_coefficients(&self, lambda: f64) -> Result<Vector> {
        Ok(self.svd.ridge_weights(lambda)?.component_mul(&self.uty))
    }

    pub fn coefficients(&self, lambda: f64) -> Result<Vector> {
        Ok(&self.svd.v * self.spectral_coefficients(lambda)?)
    }
}

/// `X^+ y`, the least-squares solution of minimum Euclidean norm.
pub fn min_norm_ols(x: &Matrix, y: &Vector) -> Result<Vector> {
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: format!("response of length {}", x.nrows()),
            actual: format!("length {}", y.len()),
        });
    }
    let svd = thin_svd(x)?;
    ridge_path(&svd, y, 0.0)
}

/// `(X^T X + lambda I)^{-1} X^T y` by a dense LU solve. Independent of the
/// SVD route and used to cross-check it.
pub fn ridge_direct(x: &Matrix, y: &Vector, lambda: f64) -> Result<Vector> {
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: format!("response of length {}", x.nrows()),
            actual: format!("length {}", y.len()),
        });
    }
    ensure_finite("design", x.as_slice())?;
    ensure_finite("response", y.as_slice())?;
    let p = x.ncols();
    let mut gram = x.tr_mul(x);
    for i in 0..p {
        gram[(i, i)] += lambda;
    }
    let rhs = x.tr_mul(y);
    let lu = gram.lu();
    let pivots = lu.u().diagonal().map(f64::abs);
    let (lo, hi) = (pivots.min(), pivots.max());
    if lo.is_nan() || lo <= hi * 1e-13 {
        return Err(Error::SingularPenalty {
            lambda,
            boundary: f64::NAN,
        });
    }
    let beta = lu
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("X^T X + lambda I".into()))?;
    ensure_finite("solution", beta.as_slice())?;
    Ok(beta)
}

/// A ridge fit with an unpenalized intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFit {
    pub coefficients: Vector,
    pub intercept: f64,
    pub lambda: f64,
    /// Smallest non-zero squared singular value of the centered design.
    pub smin_sq: f64,
}

/// Column-centered design with its SVD, reusable across penalties.
#[derive(Debug, Clone)]
pub struct CenteredRidge {
    x_mean: Vector,
    y_mean: f64,
    y_centered: Vector,
    svd: SvdFactorization,
}

impl CenteredRidge {
    pub fn new(data: &Dataset) -> Result<Self> {
        let x = data.x();
        let x_mean = x.row_mean().transpose();
        let y_mean = data.y().mean();
        let mut xc = x.clone();
        for (j, mut col) in xc.column_iter_mut().enumerate() {
            col.add_scalar_mut(-x_mean[j]);
        }
        let y_centered = data.y().add_scalar(-y_mean);
        let svd = thin_svd(&xc)?;
        Ok(CenteredRidge {
            x_mean,
            y_mean,
            y_centered,
            svd,
        })
    }

    pub fn svd(&self) -> &SvdFactorization {
        &self.svd
    }

    pub fn x_mean(&self) -> &Vector {
        &self.x_mean
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    pub fn y_centered(&self) -> &Vector {
        &self.y_centered
    }

    pub fn smin_sq(&self) -> f64 {
        self.svd.smin_sq().unwrap_or(0.0)
    }

    pub fn fit(&self, lambda: f64) -> Result<RidgeFit> {
        let coefficients = ridge_path(&self.svd, &self.y_centered, lambda)?;
        let intercept = self.y_mean - self.x_mean.dot(&coefficients);
        Ok(RidgeFit {
            coefficients,
            intercept,
            lambda,
            smin_sq: self.smin_sq(),
        })
    }
}

/// Ridge with an unpenalized intercept, via centering.
pub fn fit_with_intercept(data: &Dataset, lambda: f64) -> Result<RidgeFit> {
    CenteredRidge::new(data)?.fit(lambda)
}

pub fn predict(fit: &RidgeFit, x_new: &Matrix) -> Result<Vector> {
    if x_new.ncols() != fit.coefficients.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} columns", fit.coefficients.len()),
            actual: format!("{} columns", x_new.ncols()),
        });
    }
    Ok((x_new * &fit.coefficients).add_scalar(fit.intercept))
}

/// Kernelized minimum-norm prediction `k^T K^{-1} y`.
pub fn kernel_min_norm_predict(k_train: &Matrix, k_test: &Vector, y: &Vector) -> Result<f64> {
    let n = k_train.nrows();
    if k_train.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: "square kernel matrix".into(),
            actual: shape(n, k_train.ncols()),
        });
    }
    if k_test.len() != n || y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("vectors of length {n}"),
            actual: format!("k: {}, y: {}", k_test.len(), y.len()),
        });
    }
    ensure_finite("kernel", k_train.as_slice())?;
    let scale = k_train.amax();
    let asym = (k_train - k_train.transpose()).amax();
    if asym > 1e-10 * scale.max(1.0) {
        return Err(Error::SingularKernel(format!(
            "not symmetric (max asymmetry {asym:e})"
        )));
    }
    let chol = k_train
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularKernel("Cholesky factorization failed".into()))?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = (diag.min(), diag.max());
    if lo * lo <= hi * hi * n as f64 * f64::EPSILON {
        return Err(Error::SingularKernel(format!(
            "condition number above {:e}",
            1.0 / (n as f64 * f64::EPSILON)
        )));
    }
    Ok(k_test.dot(&chol.solve(y)))
}

/// Full-batch gradient descent on `|y - X beta|^2` from `beta = 0`. Each
/// update `step * X^T (y - X beta)` lies in the row space of `X`.
#[derive(Debug, Clone)]
pub struct GradientDescent<'a> {
    x: &'a Matrix,
    y: &'a Vector,
    step: f64,
    beta: Vector,
    gradient: Vector,
    iters: usize,
}

impl<'a> GradientDescent<'a> {
    pub fn new(x: &'a Matrix, y: &'a Vector, step: f64) -> Result<Self> {
        if y.len() != x.nrows() {
            return Err(Error::DimensionMismatch {
                expected: format!("response of length {}", x.nrows()),
                actual: format!("length {}", y.len()),
            });
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidInput(format!("step = {step}")));
        }
        let gradient = x.tr_mul(y);
        Ok(GradientDescent {
            x,
            y,
            step,
            beta: Vector::zeros(x.ncols()),
            gradient,
            iters: 0,
        })
    }

    /// `1 / s_max^2`.
    pub fn default_step(x: &Matrix) -> Result<f64> {
        let smax_sq = thin_svd(x)?.smax_sq();
        if smax_sq == 0.0 {
            return Err(Error::InvalidInput("zero design matrix".into()));
        }
        Ok(1.0 / smax_sq)
    }

    pub fn beta(&self) -> &Vector {
        &self.beta
    }

    pub fn iterations(&self) -> usize {
        self.iters
    }

    /// Norm of the current (negative half) gradient `X^T (y - X beta)`.
    pub fn gradient_norm(&self) -> f64 {
        self.gradient.norm()
    }

    pub fn step(&mut self) -> Result<()> {
        self.beta.axpy(self.step, &self.gradient, 1.0);
        self.iters += 1;
        let norm = self.beta.norm();
        if norm.is_nan() || norm > GD_DIVERGENCE_NORM {
            return Err(Error::StepTooLarge {
                iters: self.iters,
                norm,
            });
        }
        let residual = self.y - self.x * &self.beta;
        self.gradient = self.x.tr_mul(&residual);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GradientDescentOutcome {
    pub beta: Vector,
    pub iterations: usize,
    pub converged: bool,
}

/// Runs [`GradientDescent`] until the gradient is below
/// `GD_TOLERANCE * max(1, |X^T y|)` or `max_iters` is reached. `step`
/// defaults to `1 / s_max^2`.
pub fn gradient_descent_ols(
    x: &Matrix,
    y: &Vector,
    step: Option<f64>,
    max_iters: usize,
) -> Result<GradientDescentOutcome> {
    let step = match step {
        Some(s) => s,
        None => GradientDescent::default_step(x)?,
    };
    let mut gd = GradientDescent::new(x, y, step)?;
    let threshold = GD_TOLERANCE * gd.gradient_norm().max(1.0);
    let mut converged = gd.gradient_norm() < threshold;
    while !converged && gd.iterations() < max_iters {
        gd.step()?;
        converged = gd.gradient_norm() < threshold;
    }
    Ok(GradientDescentOutcome {
        iterations: gd.iterations(),
        beta: gd.beta,
        converged,
    })
}
