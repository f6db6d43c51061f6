#![allow(dead_code)]

use proptest::test_runner::{Config, RngAlgorithm, RngSeed};
use ridgeless::linalg::{Matrix, Vector};
use ridgeless::rng::{normal, seeded};

/// Fixed-seed proptest configuration, so failures reproduce exactly.
pub fn fixed_config(cases: u32) -> Config {
    Config {
        cases,
        rng_algorithm: RngAlgorithm::ChaCha,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn gaussian(n: usize, p: usize, seed: u64) -> Matrix {
    let mut rng = seeded(seed);
    Matrix::from_fn(n, p, |_, _| normal(&mut rng))
}

pub fn gaussian_vec(n: usize, seed: u64) -> Vector {
    let mut rng = seeded(seed);
    Vector::from_fn(n, |_, _| normal(&mut rng))
}

/// Orthonormal basis of the null space of `x` (`p - rank` columns).
pub fn null_basis(x: &Matrix) -> Matrix {
    let (n, p) = x.shape();
    let full = x.transpose().qr();
    let q = full.q();
    // Complete Q to a square orthogonal matrix by projecting out its span.
    let mut basis: Vec<Vector> = Vec::new();
    for j in 0..p {
        let mut e = Vector::zeros(p);
        e[j] = 1.0;
        e -= &q * q.tr_mul(&e);
        for b in &basis {
            e -= b * b.dot(&e);
        }
        let norm = e.norm();
        if norm > 1e-8 && basis.len() < p - n.min(p) {
            basis.push(e / norm);
        }
    }
    Matrix::from_columns(&basis)
}
