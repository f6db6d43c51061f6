use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use super::curve::{risk_curve, validate_grid, ReplicateRisk, RiskCurve};
use crate::datasets::{rff_transform, sample_rff_matrix, LabeledImages, RffConfig};
use crate::error::{Error, Result};
use crate::linalg::{CenteredRidge, Dataset, Matrix, Vector};
use crate::rng::{substream, Purpose};

/// Rows of the test set pushed through the feature map at a time.
const TEST_CHUNK: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MnistConfig {
    pub train_n: usize,
    pub rff: RffConfig,
    pub lambdas: Vec<f64>,
    pub n_rep: usize,
    pub smin_sq_threshold: f64,
    pub seed: u64,
}

impl MnistConfig {
    pub fn defaults(lambdas: Vec<f64>, seed: u64) -> Self {
        MnistConfig {
            train_n: 64,
            rff: RffConfig::mnist(seed),
            lambdas,
            n_rep: 100,
            smin_sq_threshold: 100.0,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MnistResult {
    /// Mean over all replicates admitting each penalty.
    pub all: RiskCurve,
    /// Replicates with `s_min^2` above the threshold.
    pub above: RiskCurve,
    pub below: RiskCurve,
    /// Smallest non-zero squared singular value of each centered training
    /// feature matrix, in replicate order.
    pub smin_sq: Vec<f64>,
}

/// Second moments of a test set in feature space, so that the mean squared
/// error of any linear predictor `x^T beta + b` is a quadratic form:
/// `E y^2 - 2 b E y + b^2 - 2 beta^T h + 2 b beta^T f + beta^T G beta`.
#[derive(Debug, Clone)]
pub struct TestSetMoments {
    pub count: usize,
    /// `F^T F / m`.
    pub gram: Matrix,
    /// `F^T y / m`.
    pub cross: Vector,
    /// Column means of `F`.
    pub mean: Vector,
    pub y_mean: f64,
    pub y_sq_mean: f64,
}

impl TestSetMoments {
    /// Accumulates over row chunks of `inputs`, mapping each chunk through
    /// `features`.
    pub fn accumulate(
        inputs: &Matrix,
        y: &Vector,
        dim: usize,
        features: impl Fn(&Matrix) -> Result<Matrix>,
    ) -> Result<Self> {
        let m = inputs.nrows();
        if m == 0 || y.len() != m {
            return Err(Error::InvalidInput(format!("test set with {m} rows and {} responses", y.len())));
        }
        let mut gram = Matrix::zeros(dim, dim);
        let mut cross = Vector::zeros(dim);
        let mut mean = Vector::zeros(dim);
        for start in (0..m).step_by(TEST_CHUNK) {
            let len = TEST_CHUNK.min(m - start);
            let f = features(&inputs.rows(start, len).into_owned())?;
            if f.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: format!("{dim} features"),
                    actual: format!("{}", f.ncols()),
                });
            }
            let yc = y.rows(start, len);
            gram.gemm_tr(1.0, &f, &f, 1.0);
            cross.gemv_tr(1.0, &f, &yc, 1.0);
            mean += f.row_sum().transpose();
        }
        let w = 1.0 / m as f64;
        Ok(TestSetMoments {
            count: m,
            gram: gram * w,
            cross: cross * w,
            mean: mean * w,
            y_mean: y.sum() * w,
            y_sq_mean: y.norm_squared() * w,
        })
    }

    pub fn mse(&self, beta: &Vector, intercept: f64) -> f64 {
        let b = intercept;
        self.y_sq_mean - 2.0 * b * self.y_mean + b * b - 2.0 * beta.dot(&self.cross)
            + 2.0 * b * beta.dot(&self.mean)
            + beta.dot(&(&self.gram * beta))
    }
}

/// Test-set risk of a centered ridge fit, reduced to the `r`-dimensional
/// span of its right singular vectors.
struct FeatureReplicate {
    s: Vec<f64>,
    uty: Vec<f64>,
    tol: f64,
    smin_sq: f64,
    a: Matrix,
    vh: Vector,
    vf: Vector,
    vx: Vector,
    y_mean: f64,
    test_y_mean: f64,
    test_y_sq: f64,
}

impl FeatureReplicate {
    fn new(fit: &CenteredRidge, test: &TestSetMoments) -> Self {
        let svd = fit.svd();
        let v = &svd.v;
        FeatureReplicate {
            s: svd.s.iter().copied().collect(),
            uty: svd.u.tr_mul(fit.y_centered()).iter().copied().collect(),
            tol: svd.tolerance(),
            smin_sq: fit.smin_sq(),
            a: v.tr_mul(&(&test.gram * v)),
            vh: v.tr_mul(&test.cross),
            vf: v.tr_mul(&test.mean),
            vx: v.tr_mul(fit.x_mean()),
            y_mean: fit.y_mean(),
            test_y_mean: test.y_mean,
            test_y_sq: test.y_sq_mean,
        }
    }
}

impl ReplicateRisk for FeatureReplicate {
    fn risk_at(&self, lambda: f64) -> Option<f64> {
        if !self.admits(lambda) {
            return None;
        }
        let tol = self.tol;
        let c = Vector::from_iterator(
            self.s.len(),
            self.s
                .iter()
                .zip(&self.uty)
                .map(|(&s, &u)| if s > tol { s / (s * s + lambda) * u } else { 0.0 }),
        );
        let b = self.y_mean - c.dot(&self.vx);
        Some(
            self.test_y_sq - 2.0 * b * self.test_y_mean + b * b - 2.0 * c.dot(&self.vh)
                + 2.0 * b * c.dot(&self.vf)
                + c.dot(&(&self.a * &c)),
        )
    }

    fn smin_sq(&self) -> f64 {
        self.smin_sq
    }
}

/// Pool rows used as the training set of replicate `index`.
pub fn training_indices(pool_len: usize, train_n: usize, seed: u64, index: u64) -> Vec<usize> {
    index::sample(&mut substream(seed, Purpose::Subsample, index), pool_len, train_n).into_vec()
}

fn digits(labels: &[u8]) -> Vector {
    Vector::from_iterator(labels.len(), labels.iter().map(|&l| l as f64))
}

/// Ridge regression of the digit value on random Fourier features. `W` is
/// drawn once; each replicate draws `train_n` images from `pool` and is
/// scored on all of `test`.
pub fn rff_mnist_experiment(cfg: &MnistConfig, pool: &LabeledImages, test: &LabeledImages) -> Result<MnistResult> {
    validate_grid(&cfg.lambdas)?;
    if cfg.n_rep == 0 || cfg.train_n < 2 || cfg.train_n > pool.len() {
        return Err(Error::InvalidInput(format!(
            "need n_rep >= 1 and 2 <= train_n <= {} pool images",
            pool.len()
        )));
    }
    let w = sample_rff_matrix(&cfg.rff)?;
    let dim = 2 * cfg.rff.n_features;
    let features = |x: &Matrix| rff_transform(x, &w);
    let moments = TestSetMoments::accumulate(&test.pixels, &digits(&test.labels), dim, features)?;

    let reps: Vec<FeatureReplicate> = (0..cfg.n_rep)
        .into_par_iter()
        .map(|i| {
            let rows = training_indices(pool.len(), cfg.train_n, cfg.seed, i as u64);
            let x = features(&pool.pixels.select_rows(rows.iter()))?;
            let y = Vector::from_iterator(rows.len(), rows.iter().map(|&r| pool.labels[r] as f64));
            let fit = CenteredRidge::new(&Dataset::new(x, y)?)?;
            Ok(FeatureReplicate::new(&fit, &moments))
        })
        .collect::<Result<_>>()?;

    let smin_sq: Vec<f64> = reps.iter().map(ReplicateRisk::smin_sq).collect();
    let all = risk_curve(&reps, &cfg.lambdas)?;
    let (above, below): (Vec<FeatureReplicate>, Vec<FeatureReplicate>) =
        reps.into_iter().partition(|r| r.smin_sq > cfg.smin_sq_threshold);
    Ok(MnistResult {
        all,
        above: risk_curve(&above, &cfg.lambdas)?,
        below: risk_curve(&below, &cfg.lambdas)?,
        smin_sq,
    })
}
