//! Python bindings for the `ridgeless` crate.

use numpy::{PyArray1, PyReadonlyArray1, PyReadonlyArray2};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ridgeless::augmentation::{augment_columns, min_norm_truncated};
use ridgeless::derivative::derivative_at_zero as derivative_impl;
use ridgeless::experiments::{self, LambdaSearch};
use ridgeless::linalg::{self, Matrix, Vector};
use ridgeless::spiked::{self, SpikedSpec};

fn py_err(e: ridgeless::error::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(a: &PyReadonlyArray2<'_, f64>) -> Matrix {
    let a = a.as_array();
    Matrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

fn vector(a: &PyReadonlyArray1<'_, f64>) -> Vector {
    let a = a.as_array();
    Vector::from_iterator(a.len(), a.iter().copied())
}

fn array<'py>(py: Python<'py>, v: &Vector) -> Bound<'py, PyArray1<f64>> {
    PyArray1::from_slice(py, v.as_slice())
}

fn spec(p: usize, rho: f64, alpha: f64, sigma2: f64) -> PyResult<SpikedSpec> {
    SpikedSpec::new(p, rho, alpha, sigma2).map_err(py_err)
}

/// Ridge coefficients at `lam` through the thin SVD; `lam` may be negative
/// down to just above `-s_min^2`.
#[pyfunction]
fn ridge_path<'py>(
    py: Python<'py>,
    x: PyReadonlyArray2<'py, f64>,
    y: PyReadonlyArray1<'py, f64>,
    lam: f64,
) -> PyResult<Bound<'py, PyArray1<f64>>> {
    let svd = linalg::thin_svd(&matrix(&x)).map_err(py_err)?;
    let beta = linalg::ridge_path(&svd, &vector(&y), lam).map_err(py_err)?;
    Ok(array(py, &beta))
}

#[pyfunction]
fn min_norm_ols<'py>(
    py: Python<'py>,
    x: PyReadonlyArray2<'py, f64>,
    y: PyReadonlyArray1<'py, f64>,
) -> PyResult<Bound<'py, PyArray1<f64>>> {
    let beta = linalg::min_norm_ols(&matrix(&x), &vector(&y)).map_err(py_err)?;
    Ok(array(py, &beta))
}

/// Normalized risk of `beta` under the spiked model.
#[pyfunction]
#[pyo3(signature = (beta, rho=0.1, alpha=10.0, sigma2=1.0))]
fn spiked_risk(beta: PyReadonlyArray1<'_, f64>, rho: f64, alpha: f64, sigma2: f64) -> PyResult<f64> {
    let beta = vector(&beta);
    let s = spec(beta.len(), rho, alpha, sigma2)?;
    Ok(spiked::risk(&beta, &s).map_err(py_err)?.normalized_mse)
}

/// Replicate-averaged normalized risk on a penalty grid.
#[pyfunction]
#[pyo3(signature = (p, lambdas, n=64, n_rep=100, seed=1, rho=0.1, alpha=10.0, sigma2=1.0))]
#[allow(clippy::too_many_arguments)]
fn lambda_sweep<'py>(
    py: Python<'py>,
    p: usize,
    lambdas: Vec<f64>,
    n: usize,
    n_rep: usize,
    seed: u64,
    rho: f64,
    alpha: f64,
    sigma2: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let curve = experiments::lambda_sweep(&spec(p, rho, alpha, sigma2)?, n, &lambdas, n_rep, seed).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("lambda", curve.lambdas)?;
    out.set_item("mean", curve.mean)?;
    out.set_item("std_err", curve.std_err)?;
    out.set_item("excluded", curve.excluded)?;
    Ok(out)
}

/// Optimal penalty for the spiked model, searched over negative and positive
/// values unless `allow_negative` is false.
#[pyfunction]
#[pyo3(signature = (p, n=64, n_rep=100, seed=1, rho=0.1, alpha=10.0, sigma2=1.0, allow_negative=true))]
#[allow(clippy::too_many_arguments)]
fn find_lambda_opt<'py>(
    py: Python<'py>,
    p: usize,
    n: usize,
    n_rep: usize,
    seed: u64,
    rho: f64,
    alpha: f64,
    sigma2: f64,
    allow_negative: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let search = if allow_negative {
        LambdaSearch::default()
    } else {
        LambdaSearch::positive_only()
    };
    let r = experiments::find_lambda_opt(&spec(p, rho, alpha, sigma2)?, n, n_rep, seed, &search).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("lambda_opt", r.lambda_opt)?;
    out.set_item("min_risk", r.min_risk)?;
    out.set_item("std_err", r.std_err)?;
    out.set_item("bracket", r.bracket)?;
    out.set_item("boundary_hit", r.boundary_hit)?;
    Ok(out)
}

/// Monte-Carlo derivative of the expected risk at `lambda = 0+`.
#[pyfunction]
#[pyo3(signature = (p, n=64, n_rep=100, seed=1, rho=0.1, alpha=10.0, sigma2=1.0))]
#[allow(clippy::too_many_arguments)]
fn derivative_at_zero(
    p: usize,
    n: usize,
    n_rep: usize,
    seed: u64,
    rho: f64,
    alpha: f64,
    sigma2: f64,
) -> PyResult<(f64, f64)> {
    let d = derivative_impl(&spec(p, rho, alpha, sigma2)?, n, n_rep, seed).map_err(py_err)?;
    Ok((d.value, d.std_err))
}

/// First `p` coefficients of the minimum-norm fit after appending `q` random
/// columns of variance `total_lambda / q`.
#[pyfunction]
#[pyo3(signature = (x, y, q, total_lambda, seed=1))]
fn augmented_min_norm<'py>(
    py: Python<'py>,
    x: PyReadonlyArray2<'py, f64>,
    y: PyReadonlyArray1<'py, f64>,
    q: usize,
    total_lambda: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyArray1<f64>>> {
    let aug = augment_columns(&matrix(&x), q, total_lambda, seed).map_err(py_err)?;
    let fit = min_norm_truncated(&aug, &vector(&y)).map_err(py_err)?;
    Ok(array(py, &fit.beta_q))
}

#[pymodule]
fn pyridgeless(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(ridge_path, m)?)?;
    m.add_function(wrap_pyfunction!(min_norm_ols, m)?)?;
    m.add_function(wrap_pyfunction!(spiked_risk, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(find_lambda_opt, m)?)?;
    m.add_function(wrap_pyfunction!(derivative_at_zero, m)?)?;
    m.add_function(wrap_pyfunction!(augmented_min_norm, m)?)?;
    Ok(())
}
