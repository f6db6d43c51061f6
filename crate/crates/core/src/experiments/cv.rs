use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::curve::{validate_grid, RiskCurve};
use crate::error::{Error, Result};
use crate::linalg::{predict, CenteredRidge, Dataset, Matrix, Vector};
use crate::rng::{substream, Purpose};
use crate::stats::mean_and_se;

/// Fold index of every sample: a seeded shuffle cut into `k` near-equal
/// folds, the first `n mod k` folds one larger.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 || n < k {
        return Err(Error::InvalidInput(format!("k-fold needs 2 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut substream(seed, Purpose::Folds, 0));
    let (base, extra) = (n / k, n % k);
    let mut folds = vec![0; n];
    let mut at = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        for &i in &order[at..at + size] {
            folds[i] = f;
        }
        at += size;
    }
    Ok(folds)
}

fn subset(data: &Dataset, rows: &[usize]) -> Result<Dataset> {
    let x = data.x().select_rows(rows.iter());
    let y = Vector::from_iterator(rows.len(), rows.iter().map(|&i| data.y()[i]));
    Dataset::new(x, y)
}

/// Cross-validated mean squared error of ridge with an unpenalized
/// intercept. The curve's standard errors are across folds; a fold whose
/// training design does not admit a penalty is excluded there.
pub fn kfold_cv(data: &Dataset, grid: &[f64], k: usize, seed: u64) -> Result<RiskCurve> {
    validate_grid(grid)?;
    let folds = fold_assignment(data.n_samples(), k, seed)?;
    let per_fold: Vec<Vec<Option<f64>>> = (0..k)
        .into_par_iter()
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..folds.len()).partition(|&i| folds[i] == f);
            let fit = CenteredRidge::new(&subset(data, &train)?)?;
            let held = subset(data, &test)?;
            let x_test: &Matrix = held.x();
            grid.iter()
                .map(|&lambda| {
                    if fit.svd().check_penalty(lambda).is_err() {
                        return Ok(None);
                    }
                    let pred = predict(&fit.fit(lambda)?, x_test)?;
                    Ok(Some((pred - held.y()).norm_squared() / test.len() as f64))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut curve = RiskCurve {
        lambdas: grid.to_vec(),
        mean: Vec::new(),
        std_err: Vec::new(),
        n_rep: k,
        excluded: Vec::new(),
    };
    for j in 0..grid.len() {
        let vals: Vec<f64> = per_fold.iter().filter_map(|f| f[j]).collect();
        let (m, se) = mean_and_se(&vals);
        curve.mean.push(m);
        curve.std_err.push(se);
        curve.excluded.push(k - vals.len());
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::fit_with_intercept;

    fn toy() -> Dataset {
        let x = Matrix::from_row_slice(5, 2, &[1.0, 0.5, 2.0, -1.0, 0.0, 3.0, -1.5, 1.0, 4.0, 0.0]);
        let y = Vector::from_vec(vec![1.0, 2.5, -0.5, 0.3, 4.1]);
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn folds_are_balanced_and_seeded() {
        let f = fold_assignment(23, 5, 1).unwrap();
        let mut sizes = vec![0; 5];
        f.iter().for_each(|&i| sizes[i] += 1);
        assert_eq!(sizes, vec![5, 5, 5, 4, 4]);
        assert_eq!(f, fold_assignment(23, 5, 1).unwrap());
        assert_ne!(f, fold_assignment(23, 5, 2).unwrap());
        assert!(fold_assignment(3, 4, 0).is_err());
        assert!(fold_assignment(3, 1, 0).is_err());
    }

    #[test]
    fn leave_one_out_matches_explicit_loop() {
        let data = toy();
        let grid = [0.0, 0.5, 3.0];
        let cv = kfold_cv(&data, &grid, 5, 9).unwrap();
        for (j, &lambda) in grid.iter().enumerate() {
            let mut errs = Vec::new();
            for i in 0..5 {
                let keep: Vec<usize> = (0..5).filter(|&r| r != i).collect();
                let fit = fit_with_intercept(&subset(&data, &keep).unwrap(), lambda).unwrap();
                let pred = predict(&fit, &data.x().rows(i, 1).into_owned()).unwrap()[0];
                errs.push((pred - data.y()[i]).powi(2));
            }
            let (m, se) = mean_and_se(&errs);
            assert!((cv.mean[j] - m).abs() < 1e-10, "{} vs {m}", cv.mean[j]);
            assert!((cv.std_err[j] - se).abs() < 1e-10);
        }
    }
}
