//! Augmenting a design with random predictors (columns) or random samples
//! (rows).
//!
//! Appending `q` i.i.d. columns of variance `lambda / q` and taking the first
//! `p` coordinates of the minimum-norm fit converges to the ridge estimator
//! with penalty `lambda` as `q` grows, because `X_q X_q^T -> lambda I_n`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, thin_svd, Dataset, Matrix, RidgeSolver, Vector};
use crate::rng::{normal, substream, Purpose};

/// Distribution of the random entries; both have mean zero and the requested
/// variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseLaw {
    #[default]
    Gaussian,
    Rademacher,
}

impl NoiseLaw {
    fn draw<R: Rng + ?Sized>(self, rng: &mut R, sd: f64) -> f64 {
        match self {
            NoiseLaw::Gaussian => sd * normal(rng),
            NoiseLaw::Rademacher => {
                if rng.random::<bool>() {
                    sd
                } else {
                    -sd
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct AugmentedDesign {
    pub x_orig: Matrix,
    pub x_rand: Matrix,
    pub var_per_col: f64,
    pub law: NoiseLaw,
}

impl AugmentedDesign {
    /// Wraps an explicitly supplied random block.
    pub fn from_parts(x_orig: Matrix, x_rand: Matrix, var_per_col: f64) -> Result<Self> {
        if x_rand.nrows() != x_orig.nrows() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} rows in the random block", x_orig.nrows()),
                actual: format!("{} rows", x_rand.nrows()),
            });
        }
        ensure_finite("design", x_orig.as_slice())?;
        ensure_finite("random block", x_rand.as_slice())?;
        Ok(AugmentedDesign {
            x_orig,
            x_rand,
            var_per_col,
            law: NoiseLaw::Gaussian,
        })
    }

    pub fn n(&self) -> usize {
        self.x_orig.nrows()
    }

    pub fn p(&self) -> usize {
        self.x_orig.ncols()
    }

    pub fn q(&self) -> usize {
        self.x_rand.ncols()
    }

    /// `[X | X_q]`.
    pub fn combined(&self) -> Matrix {
        let (n, p, q) = (self.n(), self.p(), self.q());
        let mut out = Matrix::zeros(n, p + q);
        out.columns_mut(0, p).copy_from(&self.x_orig);
        out.columns_mut(p, q).copy_from(&self.x_rand);
        out
    }

    /// `X X^T + X_q X_q^T`.
    pub fn gram(&self) -> Matrix {
        let mut g = &self.x_orig * self.x_orig.transpose();
        if self.q() > 0 {
            g.gemm(1.0, &self.x_rand, &self.x_rand.transpose(), 1.0);
        }
        g
    }
}

/// Appends `q` columns with entries drawn from `law` at variance `var`.
pub fn augment_columns_with<R: Rng + ?Sized>(
    x: &Matrix,
    q: usize,
    var: f64,
    law: NoiseLaw,
    rng: &mut R,
) -> Result<AugmentedDesign> {
    if !(var >= 0.0 && var.is_finite()) {
        return Err(Error::InvalidInput(format!("variance = {var}")));
    }
    ensure_finite("design", x.as_slice())?;
    let sd = var.sqrt();
    let n = x.nrows();
    // column-major fill: column j depends only on the first j draws
    let x_rand = Matrix::from_iterator(n, q, (0..n * q).map(|_| law.draw(rng, sd)));
    Ok(AugmentedDesign {
        x_orig: x.clone(),
        x_rand,
        var_per_col: var,
        law,
    })
}

/// `q` Gaussian columns with variance `total_lambda / q`.
pub fn augment_columns(x: &Matrix, q: usize, total_lambda: f64, seed: u64) -> Result<AugmentedDesign> {
    if q == 0 {
        return Err(Error::InvalidInput("q must be at least 1".into()));
    }
    if total_lambda.is_nan() || total_lambda <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "total lambda = {total_lambda} must be positive"
        )));
    }
    augment_columns_with(
        x,
        q,
        total_lambda / q as f64,
        NoiseLaw::Gaussian,
        &mut substream(seed, Purpose::Augmentation, 0),
    )
}

/// `q` Gaussian columns with a fixed variance, independent of `q`.
pub fn augment_columns_fixed_variance(x: &Matrix, q: usize, var: f64, seed: u64) -> Result<AugmentedDesign> {
    augment_columns_with(
        x,
        q,
        var,
        NoiseLaw::Gaussian,
        &mut substream(seed, Purpose::Augmentation, 0),
    )
}

/// Minimum-norm fit on `[X | X_q]`.
#[derive(Debug, Clone)]
pub struct AugmentedFit {
    /// First `p` coordinates.
    pub beta_q: Vector,
    /// All `p + q` coordinates.
    pub beta_augm: Vector,
}

impl AugmentedFit {
    pub fn tail(&self) -> Vector {
        let p = self.beta_q.len();
        self.beta_augm.rows(p, self.beta_augm.len() - p).into_owned()
    }
}

/// `X_augm^+ y`. When `p + q > n` this is `X_augm^T (X_augm X_augm^T)^{-1} y`
/// through a Cholesky solve of the `n x n` Gram matrix; otherwise the design
/// has at least as many rows as columns and the SVD pseudoinverse is used.
pub fn min_norm_truncated(aug: &AugmentedDesign, y: &Vector) -> Result<AugmentedFit> {
    let (n, p, q) = (aug.n(), aug.p(), aug.q());
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("response of length {n}"),
            actual: format!("length {}", y.len()),
        });
    }
    let beta_augm = if p + q > n {
        let gram = aug.gram();
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::RankDeficient("X_augm X_augm^T is not positive definite".into()))?;
        let d = chol.l_dirty().diagonal();
        if d.min().powi(2) <= d.max().powi(2) * n as f64 * f64::EPSILON {
            return Err(Error::RankDeficient(
                "X_augm X_augm^T is numerically singular".into(),
            ));
        }
        let a = chol.solve(y);
        let mut beta = Vector::zeros(p + q);
        beta.rows_mut(0, p).copy_from(&aug.x_orig.tr_mul(&a));
        if q > 0 {
            beta.rows_mut(p, q).copy_from(&aug.x_rand.tr_mul(&a));
        }
        beta
    } else {
        let svd = thin_svd(&aug.combined())?;
        RidgeSolver::new(&svd, y)?.coefficients(0.0)?
    };
    Ok(AugmentedFit {
        beta_q: beta_augm.rows(0, p).into_owned(),
        beta_augm,
    })
}

/// Prediction of the full augmented model at `x_new` extended with `q` fresh
/// random entries of the same law as the training columns.
pub fn predict_augmented_with<R: Rng + ?Sized>(
    aug: &AugmentedDesign,
    beta_augm: &Vector,
    x_new: &Vector,
    rng: &mut R,
) -> Result<f64> {
    let (p, q) = (aug.p(), aug.q());
    if x_new.len() != p || beta_augm.len() != p + q {
        return Err(Error::DimensionMismatch {
            expected: format!("point of length {p} and coefficients of length {}", p + q),
            actual: format!("{} and {}", x_new.len(), beta_augm.len()),
        });
    }
    let sd = aug.var_per_col.sqrt();
    let mut y = x_new.dot(&beta_augm.rows(0, p));
    for j in 0..q {
        y += aug.law.draw(rng, sd) * beta_augm[p + j];
    }
    Ok(y)
}

pub fn predict_augmented(aug: &AugmentedDesign, beta_augm: &Vector, x_new: &Vector, seed: u64) -> Result<f64> {
    predict_augmented_with(aug, beta_augm, x_new, &mut substream(seed, Purpose::TestTail, 0))
}

/// `([X; R], [y; 0_q])` with `R` a `q x p` block of `N(0, total_lambda / q)`
/// entries. Ordinary (minimum-norm) least squares on the result tends to the
/// ridge estimator.
pub fn augment_rows(x: &Matrix, y: &Vector, q: usize, total_lambda: f64, seed: u64) -> Result<Dataset> {
    if q == 0 {
        return Err(Error::InvalidInput("q must be at least 1".into()));
    }
    if !(total_lambda >= 0.0 && total_lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("total lambda = {total_lambda}")));
    }
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: format!("response of length {}", x.nrows()),
            actual: format!("length {}", y.len()),
        });
    }
    let mut rng = substream(seed, Purpose::Augmentation, 0);
    let sd = (total_lambda / q as f64).sqrt();
    let block = Matrix::from_fn(q, x.ncols(), |_, _| sd * normal(&mut rng));
    stack_rows(x, y, &block)
}

/// `([X; block], [y; 0])`.
pub fn stack_rows(x: &Matrix, y: &Vector, block: &Matrix) -> Result<Dataset> {
    let (n, p) = x.shape();
    if block.ncols() != p {
        return Err(Error::DimensionMismatch {
            expected: format!("{p} columns in the appended block"),
            actual: format!("{} columns", block.ncols()),
        });
    }
    let q = block.nrows();
    let mut xa = Matrix::zeros(n + q, p);
    xa.rows_mut(0, n).copy_from(x);
    xa.rows_mut(n, q).copy_from(block);
    let mut ya = Vector::zeros(n + q);
    ya.rows_mut(0, n).copy_from(y);
    Dataset::new(xa, ya)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{min_norm_ols, ridge_path};
    use crate::rng::seeded;
    use approx::assert_relative_eq;

    fn gaussian(n: usize, p: usize, seed: u64) -> Matrix {
        let mut rng = seeded(seed);
        Matrix::from_fn(n, p, |_, _| normal(&mut rng))
    }

    fn gaussian_vec(n: usize, seed: u64) -> Vector {
        let mut rng = seeded(seed);
        Vector::from_fn(n, |_, _| normal(&mut rng))
    }

    #[test]
    fn single_unit_column() {
        let x = gaussian(5, 3, 1);
        let aug = augment_columns(&x, 1, 1.0, 2).unwrap();
        assert_eq!(aug.q(), 1);
        assert_eq!(aug.var_per_col, 1.0);
        assert_eq!(aug.combined().shape(), (5, 4));
        assert_eq!(aug.combined().columns(0, 3), x.columns(0, 3));
    }

    #[test]
    fn random_block_concentrates() {
        let (n, q, lambda) = (64, 10_000, 31.0);
        let x = gaussian(n, 2, 3);
        let aug = augment_columns(&x, q, lambda, 4).unwrap();
        let xq = &aug.x_rand;
        let dev = (xq * xq.transpose() - Matrix::identity(n, n) * lambda).norm();
        let ratio = dev / (lambda * (n as f64).sqrt());
        // E|X_q X_q^T - lambda I|_F^2 = (n^2 + n) lambda^2 / q
        let expected = ((n + 1) as f64 / q as f64).sqrt();
        assert!((ratio / expected - 1.0).abs() < 0.1, "ratio {ratio} expected {expected}");

        let entries = xq.as_slice();
        let count = entries.len() as f64;
        let var = lambda / q as f64;
        let mean = entries.iter().sum::<f64>() / count;
        assert!(mean.abs() < 4.0 * (var / count).sqrt());
        let second = entries.iter().map(|v| v * v).sum::<f64>() / count;
        assert!((second - var).abs() < 5.0 * var * (2.0 / count).sqrt());
    }

    #[test]
    fn zero_columns_is_min_norm() {
        for &(n, p) in &[(4, 9), (9, 4)] {
            let x = gaussian(n, p, 5);
            let y = gaussian_vec(n, 6);
            let aug = augment_columns_fixed_variance(&x, 0, 1.0, 7).unwrap();
            let fit = min_norm_truncated(&aug, &y).unwrap();
            assert_relative_eq!(fit.beta_q, min_norm_ols(&x, &y).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_variance_block_is_min_norm() {
        let x = gaussian(4, 9, 8);
        let y = gaussian_vec(4, 9);
        let aug = augment_columns_fixed_variance(&x, 5, 0.0, 10).unwrap();
        let fit = min_norm_truncated(&aug, &y).unwrap();
        assert_relative_eq!(fit.beta_q, min_norm_ols(&x, &y).unwrap(), epsilon = 1e-10);
        assert!(fit.tail().amax() == 0.0);
    }

    #[test]
    fn gram_route_matches_pseudoinverse() {
        let x = gaussian(6, 4, 11);
        let y = gaussian_vec(6, 12);
        let aug = augment_columns_fixed_variance(&x, 7, 0.5, 13).unwrap();
        let fit = min_norm_truncated(&aug, &y).unwrap();
        let oracle = aug.combined().pseudo_inverse(1e-12).unwrap() * &y;
        assert_relative_eq!(fit.beta_augm, oracle, epsilon = 1e-9);
    }

    #[test]
    fn rank_deficient_gram() {
        let x = Matrix::from_row_slice(3, 4, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0]);
        let aug = AugmentedDesign::from_parts(x, Matrix::zeros(3, 1), 0.0).unwrap();
        assert!(matches!(
            min_norm_truncated(&aug, &Vector::from_element(3, 1.0)),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn prediction_without_columns_is_primal() {
        let x = gaussian(4, 9, 14);
        let y = gaussian_vec(4, 15);
        let aug = augment_columns_fixed_variance(&x, 0, 1.0, 16).unwrap();
        let fit = min_norm_truncated(&aug, &y).unwrap();
        let x_new = gaussian_vec(9, 17);
        let pred = predict_augmented(&aug, &fit.beta_augm, &x_new, 18).unwrap();
        assert_relative_eq!(pred, x_new.dot(&min_norm_ols(&x, &y).unwrap()), epsilon = 1e-10);
    }

    #[test]
    fn prediction_at_origin_is_tail_only_and_vanishes() {
        let x = gaussian(20, 5, 19);
        let y = gaussian_vec(20, 20);
        let mut prev = f64::INFINITY;
        for &q in &[100usize, 10_000] {
            let aug = augment_columns(&x, q, 3.0, 21).unwrap();
            let fit = min_norm_truncated(&aug, &y).unwrap();
            // average over fresh tails of |prediction| at x_new = 0
            let mean_sq: f64 = (0..50)
                .map(|s| predict_augmented(&aug, &fit.beta_augm, &Vector::zeros(5), s).unwrap().powi(2))
                .sum::<f64>()
                / 50.0;
            let expected = aug.var_per_col * fit.tail().norm_squared();
            assert!((mean_sq / expected - 1.0).abs() < 0.6);
            assert!(mean_sq < prev);
            prev = mean_sq;
        }
    }

    #[test]
    fn deterministic_rows_give_exact_ridge() {
        let (n, p, lambda) = (6, 4, 2.5_f64);
        let x = gaussian(n, p, 22);
        let y = gaussian_vec(n, 23);
        let block = Matrix::identity(p, p) * lambda.sqrt();
        let stacked = stack_rows(&x, &y, &block).unwrap();
        let ols = min_norm_ols(stacked.x(), stacked.y()).unwrap();
        let ridge = ridge_path(&thin_svd(&x).unwrap(), &y, lambda).unwrap();
        assert_relative_eq!(ols, ridge, epsilon = 1e-10);
    }

    #[test]
    fn vanishing_rows_give_ols() {
        let x = gaussian(12, 5, 24);
        let y = gaussian_vec(12, 25);
        let data = augment_rows(&x, &y, 10, 1e-12, 26).unwrap();
        let fit = min_norm_ols(data.x(), data.y()).unwrap();
        let base = min_norm_ols(&x, &y).unwrap();
        assert!((fit - &base).norm() / base.norm() < 1e-4);
    }
}
