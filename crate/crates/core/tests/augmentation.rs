mod common;

use common::gaussian;
use rand::Rng;
use ridgeless::augmentation::{augment_columns, augment_rows, min_norm_truncated, AugmentedDesign};
use ridgeless::linalg::{min_norm_ols, ridge_path, thin_svd, Matrix, Vector};
use ridgeless::rng::seeded;
use ridgeless::spiked::{sample_training, SpikedSpec};

const LAMBDA: f64 = 31.0;
const Q: usize = 10_000;

fn rel(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm() / b.norm()
}

fn training() -> (Matrix, Vector, Vector) {
    let data = sample_training(&SpikedSpec::defaults(50), 64, 11).unwrap();
    let ridge = ridge_path(&thin_svd(data.x()).unwrap(), data.y(), LAMBDA).unwrap();
    let (x, y) = data.into_parts();
    (x, y, ridge)
}

#[test]
fn rows_and_columns_agree() {
    let (x, y, ridge) = training();
    let rows = augment_rows(&x, &y, Q, LAMBDA, 12).unwrap();
    let by_rows = min_norm_ols(rows.x(), rows.y()).unwrap();
    let by_cols = min_norm_truncated(&augment_columns(&x, Q, LAMBDA, 12).unwrap(), &y)
        .unwrap()
        .beta_q;
    assert!(rel(&by_rows, &ridge) < 0.10, "{}", rel(&by_rows, &ridge));
    assert!(rel(&by_cols, &ridge) < 0.10, "{}", rel(&by_cols, &ridge));
    assert!(rel(&by_rows, &by_cols) < 0.10, "{}", rel(&by_rows, &by_cols));
}

/// Rademacher columns rotated by the reflection sending `e_1` to `y / |y|`:
/// i.i.d. given `y`, second moment `var * I`, but not independent of `y`.
#[test]
fn columns_built_from_the_response_still_converge() {
    let (x, y, ridge) = training();
    let n = y.len();
    let mut v = -y.normalize();
    v[0] += 1.0;
    let reflect = Matrix::identity(n, n) - &v * v.transpose() * (2.0 / v.norm_squared());
    let var = LAMBDA / Q as f64;
    let mut rng = seeded(13);
    let signs = Matrix::from_fn(n, Q, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 });
    let block = reflect * signs * var.sqrt();
    let aug = AugmentedDesign::from_parts(x, block, var).unwrap();
    let fit = min_norm_truncated(&aug, &y).unwrap();
    assert!(rel(&fit.beta_q, &ridge) < 0.10, "{}", rel(&fit.beta_q, &ridge));
}

/// Columns `sqrt(var) (g + 0.1 y)` add `0.01 lambda y y^T` to the limiting
/// Gram matrix, which only rescales the ridge solution.
#[test]
fn response_shifted_columns_converge_to_rescaled_ridge() {
    let (x, y, ridge) = training();
    let n = y.len();
    let var = LAMBDA / Q as f64;
    let noise = gaussian(n, Q, 14);
    let block = Matrix::from_fn(n, Q, |i, j| var.sqrt() * (noise[(i, j)] + 0.1 * y[i]));
    let gram = &x * x.transpose() + Matrix::identity(n, n) * LAMBDA;
    let a_inv_y = gram.cholesky().unwrap().solve(&y);
    let shrunk = &ridge / (1.0 + 0.01 * LAMBDA * y.dot(&a_inv_y));
    let aug = AugmentedDesign::from_parts(x, block, var).unwrap();
    let fit = min_norm_truncated(&aug, &y).unwrap();
    assert!(rel(&fit.beta_q, &shrunk) < 0.10, "{}", rel(&fit.beta_q, &shrunk));
    let cosine = fit.beta_q.dot(&ridge) / (fit.beta_q.norm() * ridge.norm());
    assert!(cosine > 0.99, "{cosine}");
}
