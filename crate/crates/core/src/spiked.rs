//! Spiked covariance model `x ~ N(0, I + rho 11^T)`, `y = x^T beta + eps`,
//! with `beta = (b, ..., b)` scaled to a target signal-to-noise ratio.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Dataset, Matrix, Vector};
use crate::rng::{normal, seeded, substream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikedSpec {
    pub p: usize,
    /// Off-diagonal covariance.
    pub rho: f64,
    /// Signal-to-noise ratio `Var[x^T beta] / sigma^2`.
    pub alpha: f64,
    /// Noise variance.
    pub sigma2: f64,
}

impl SpikedSpec {
    pub fn new(p: usize, rho: f64, alpha: f64, sigma2: f64) -> Result<Self> {
        let spec = SpikedSpec {
            p,
            rho,
            alpha,
            sigma2,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `sigma^2 = 1`, `rho = 0.1`, `alpha = 10`.
    pub fn defaults(p: usize) -> Self {
        SpikedSpec {
            p,
            rho: 0.1,
            alpha: 10.0,
            sigma2: 1.0,
        }
    }

    pub fn with_p(self, p: usize) -> Self {
        SpikedSpec { p, ..self }
    }

    pub fn with_rho(self, rho: f64) -> Self {
        SpikedSpec { rho, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidInput("p must be at least 1".into()));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidInput(format!("rho = {} must be >= 0", self.rho)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("alpha = {} must be > 0", self.alpha)));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "sigma2 = {} must be >= 0",
                self.sigma2
            )));
        }
        Ok(())
    }

    /// Common coefficient `b = sigma sqrt(alpha / (p + p^2 rho))`.
    pub fn b(&self) -> f64 {
        let p = self.p as f64;
        (self.sigma2 * self.alpha / (p + p * p * self.rho)).sqrt()
    }

    /// `|beta|^2 = p b^2`.
    pub fn beta_norm_sq(&self) -> f64 {
        self.p as f64 * self.b().powi(2)
    }

    /// `c` in `Sigma = I + c beta beta^T`, i.e. `rho p / |beta|^2`.
    pub fn spike_c(&self) -> f64 {
        let nb = self.beta_norm_sq();
        if nb == 0.0 {
            0.0
        } else {
            self.rho * self.p as f64 / nb
        }
    }

    /// `Var[y] = (alpha + 1) sigma^2`.
    pub fn response_variance(&self) -> f64 {
        (self.alpha + 1.0) * self.sigma2
    }

    /// Dense `I + rho 11^T`. Only meant for checks on small `p`.
    pub fn covariance(&self) -> Matrix {
        Matrix::from_fn(self.p, self.p, |i, j| {
            if i == j {
                1.0 + self.rho
            } else {
                self.rho
            }
        })
    }
}

pub fn beta_of(spec: &SpikedSpec) -> Vector {
    Vector::from_element(spec.p, spec.b())
}

/// `n` rows `z + sqrt(rho) g 1` with `z ~ N(0, I_p)`, `g ~ N(0, 1)`, and
/// `y = X beta + sigma eps`.
pub fn sample_training_with<R: Rng + ?Sized>(spec: &SpikedSpec, n: usize, rng: &mut R) -> Result<Dataset> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let p = spec.p;
    let b = spec.b();
    let sqrt_rho = spec.rho.sqrt();
    let sigma = spec.sigma2.sqrt();
    let mut x = Matrix::zeros(n, p);
    let mut y = Vector::zeros(n);
    let mut row = vec![0.0; p];
    for i in 0..n {
        for v in row.iter_mut() {
            *v = normal(rng);
        }
        let shift = sqrt_rho * normal(rng);
        let mut signal = 0.0;
        for (j, v) in row.iter().enumerate() {
            let xij = v + shift;
            x[(i, j)] = xij;
            signal += xij;
        }
        y[i] = b * signal + sigma * normal(rng);
    }
    Dataset::new(x, y)
}

pub fn sample_training(spec: &SpikedSpec, n: usize, seed: u64) -> Result<Dataset> {
    sample_training_with(spec, n, &mut seeded(seed))
}

/// Training set for replicate `index` of an experiment keyed by `seed`.
pub fn sample_replicate(spec: &SpikedSpec, n: usize, seed: u64, index: u64) -> Result<Dataset> {
    sample_training_with(spec, n, &mut substream(seed, Purpose::Training, index))
}

/// Expected squared prediction error of an estimator, raw and divided by
/// `Var[y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskValue {
    pub raw_mse: f64,
    pub normalized_mse: f64,
}

impl RiskValue {
    pub fn from_raw(raw_mse: f64, spec: &SpikedSpec) -> Self {
        RiskValue {
            raw_mse,
            normalized_mse: raw_mse / spec.response_variance(),
        }
    }
}

/// `(beta_hat - beta)^T Sigma (beta_hat - beta) + sigma^2` in closed form:
/// `|d|^2 + rho (1^T d)^2 + sigma^2`.
pub fn risk(beta_hat: &Vector, spec: &SpikedSpec) -> Result<RiskValue> {
    if beta_hat.len() != spec.p {
        return Err(Error::DimensionMismatch {
            expected: format!("estimator of length {}", spec.p),
            actual: format!("length {}", beta_hat.len()),
        });
    }
    let b = spec.b();
    let (mut sq, mut sum) = (0.0, 0.0);
    for &v in beta_hat.iter() {
        let d = v - b;
        sq += d * d;
        sum += d;
    }
    Ok(RiskValue::from_raw(
        sq + spec.rho * sum * sum + spec.sigma2,
        spec,
    ))
}

/// Optimal ridge penalty for isotropic predictors, `p sigma^2 / |beta|^2`,
/// which equals `p / alpha`.
pub fn spherical_lambda_opt(spec: &SpikedSpec) -> Result<f64> {
    if spec.rho != 0.0 {
        return Err(Error::NotApplicable(format!(
            "closed-form optimum needs rho = 0, got {}",
            spec.rho
        )));
    }
    Ok(spec.p as f64 * spec.sigma2 / spec.beta_norm_sq())
}
