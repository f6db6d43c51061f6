//! Random Fourier features: `exp(-i X W)` split into real and imaginary
//! parts, approximating a Gaussian kernel whose width is the standard
//! deviation of the entries of `W`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{normal, substream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RffConfig {
    pub input_dim: usize,
    /// Number of frequencies; the transform outputs twice as many columns.
    pub n_features: usize,
    /// Standard deviation of the entries of `W`.
    pub kernel_sigma: f64,
    pub seed: u64,
}

impl RffConfig {
    /// 784 inputs, 1000 frequencies (2000 features), `sigma = 0.1`.
    pub fn mnist(seed: u64) -> Self {
        RffConfig {
            input_dim: 784,
            n_features: 1000,
            kernel_sigma: 0.1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.n_features == 0 {
            return Err(Error::InvalidInput(format!(
                "input_dim = {} and n_features = {} must be positive",
                self.input_dim, self.n_features
            )));
        }
        if !(self.kernel_sigma > 0.0 && self.kernel_sigma.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "kernel_sigma = {} must be positive",
                self.kernel_sigma
            )));
        }
        Ok(())
    }
}

/// `input_dim x n_features` matrix of i.i.d. `N(0, kernel_sigma^2)` entries.
pub fn sample_rff_matrix(cfg: &RffConfig) -> Result<Matrix> {
    cfg.validate()?;
    let mut rng = substream(cfg.seed, Purpose::RffWeights, 0);
    let sd = cfg.kernel_sigma;
    Ok(Matrix::from_fn(cfg.input_dim, cfg.n_features, |_, _| sd * normal(&mut rng)))
}

/// `[cos(XW) | -sin(XW)]`, the real and imaginary parts of `exp(-i XW)`.
pub fn rff_transform(x: &Matrix, w: &Matrix) -> Result<Matrix> {
    if x.ncols() != w.nrows() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} input columns", w.nrows()),
            actual: format!("{} columns", x.ncols()),
        });
    }
    let k = w.ncols();
    let phase = x * w;
    let mut out = Matrix::zeros(x.nrows(), 2 * k);
    for j in 0..k {
        for i in 0..x.nrows() {
            let (s, c) = phase[(i, j)].sin_cos();
            out[(i, j)] = c;
            out[(i, k + j)] = -s;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::stats::mean_and_se;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn special_phases() {
        let w = Matrix::from_row_slice(1, 2, &[0.0, FRAC_PI_2]);
        let f = rff_transform(&Matrix::from_element(1, 1, 1.0), &w).unwrap();
        assert_eq!(f.shape(), (1, 4));
        assert_eq!((f[(0, 0)], f[(0, 2)]), (1.0, 0.0));
        assert!(f[(0, 1)].abs() < 1e-15);
        assert_eq!(f[(0, 3)], -1.0);
    }

    #[test]
    fn unit_modulus_per_frequency() {
        let cfg = RffConfig {
            input_dim: 5,
            n_features: 7,
            kernel_sigma: 2.0,
            seed: 1,
        };
        let w = sample_rff_matrix(&cfg).unwrap();
        let mut rng = seeded(2);
        let x = Matrix::from_fn(4, 5, |_, _| normal(&mut rng));
        let f = rff_transform(&x, &w).unwrap();
        for i in 0..4 {
            for j in 0..7 {
                assert!((f[(i, j)].powi(2) + f[(i, 7 + j)].powi(2) - 1.0).abs() < 1e-12);
            }
        }
        assert!(f.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert!(rff_transform(&Matrix::zeros(2, 4), &w).is_err());
    }

    #[test]
    fn weights_are_seeded_with_requested_scale() {
        let cfg = RffConfig::mnist(3);
        let a = sample_rff_matrix(&cfg).unwrap();
        assert_eq!(a, sample_rff_matrix(&cfg).unwrap());
        assert_eq!(a.shape(), (784, 1000));
        let (mean, _) = mean_and_se(a.as_slice());
        let sd = (a.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (a.len() - 1) as f64).sqrt();
        assert!((sd / 0.1 - 1.0).abs() < 0.01, "sd {sd}");
        assert!(sample_rff_matrix(&RffConfig { kernel_sigma: 0.0, ..cfg }).is_err());
    }
}
