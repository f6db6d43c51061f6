use serde::{Deserialize, Serialize};

use super::curve::{mean_risk_at, prefer, ReplicateRisk};
use super::sweeps::spiked_replicates;
use crate::error::{Error, Result};
use crate::spiked::SpikedSpec;
use crate::stats::{linspace, logspace, quantile};

/// Fraction of the smallest `s_min^2` used as the automatic lower end of the
/// negative search range.
const AUTO_LOWER_FRACTION: f64 = 0.9;
const GOLDEN_MAX_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaSearch {
    /// Lower end of the negative range; `None` picks `-0.9 min_i s_min^2`.
    pub lower: Option<f64>,
    pub upper: f64,
    /// Smallest positive grid point.
    pub pos_min: f64,
    pub neg_steps: usize,
    pub pos_steps: usize,
    pub allow_negative: bool,
    pub refine: bool,
    /// Golden-section stops when the bracket is narrower than
    /// `tol * max(1, |lambda|)`.
    pub tol: f64,
}

impl Default for LambdaSearch {
    fn default() -> Self {
        LambdaSearch {
            lower: None,
            upper: 1e5,
            pos_min: 1e-2,
            neg_steps: 60,
            pos_steps: 71,
            allow_negative: true,
            refine: true,
            tol: 1e-6,
        }
    }
}

impl LambdaSearch {
    pub fn positive_only() -> Self {
        LambdaSearch {
            allow_negative: false,
            ..Self::default()
        }
    }

    /// Coarse grid given the smallest `s_min^2` over replicates.
    pub fn grid(&self, min_smin_sq: f64) -> Result<Vec<f64>> {
        if !(self.upper > self.pos_min && self.pos_min > 0.0) || self.pos_steps < 2 {
            return Err(Error::InvalidInput(format!(
                "positive search range [{}, {}] with {} steps",
                self.pos_min, self.upper, self.pos_steps
            )));
        }
        let mut grid = Vec::new();
        let lower = match (self.allow_negative, self.lower) {
            (false, _) => 0.0,
            (true, Some(l)) => l,
            (true, None) => -AUTO_LOWER_FRACTION * min_smin_sq,
        };
        if lower < 0.0 && self.neg_steps > 0 {
            grid.extend(linspace(lower, 0.0, self.neg_steps + 1));
            grid.pop();
        }
        if lower <= 0.0 {
            grid.push(0.0);
            grid.extend(logspace(self.pos_min, self.upper, self.pos_steps));
        } else {
            grid.extend(logspace(lower, self.upper, self.pos_steps));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    Grid,
    GridGolden,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaOptResult {
    pub lambda_opt: f64,
    pub min_risk: f64,
    pub std_err: f64,
    pub bracket: (f64, f64),
    pub method: SearchMethod,
    /// The coarse minimum sat on the first or last grid point.
    pub boundary_hit: bool,
}

/// Replicate-averaged objective; any exclusion makes a penalty ineligible so
/// the search never silently conditions on well-behaved replicates.
fn objective<R: ReplicateRisk>(reps: &[R], lambda: f64) -> (f64, f64) {
    let (m, se, excluded) = mean_risk_at(reps, lambda);
    if excluded > 0 || !m.is_finite() {
        (f64::INFINITY, f64::NAN)
    } else {
        (m, se)
    }
}

/// Coarse grid search followed by golden-section refinement of the
/// replicate-averaged risk between the grid neighbours of the minimum.
pub fn find_lambda_opt_over<R: ReplicateRisk>(reps: &[R], search: &LambdaSearch) -> Result<LambdaOptResult> {
    if reps.is_empty() {
        return Err(Error::InvalidInput("no replicates".into()));
    }
    let smins: Vec<f64> = reps.iter().map(ReplicateRisk::smin_sq).collect();
    if let (true, Some(lower)) = (search.allow_negative, search.lower) {
        let guard = -quantile(&smins, 0.05);
        if lower <= guard {
            return Err(Error::InvalidInput(format!(
                "search lower bound {lower} is not above -q05(s_min^2) = {guard}"
            )));
        }
    }
    let min_smin = smins.iter().copied().fold(f64::INFINITY, f64::min);
    let grid = search.grid(min_smin)?;

    let values: Vec<(f64, f64)> = grid.iter().map(|&l| objective(reps, l)).collect();
    let mut best = None::<usize>;
    for (i, &(v, _)) in values.iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        best = match best {
            Some(b) if !prefer(grid[i], v, grid[b], values[b].0) => Some(b),
            _ => Some(i),
        };
    }
    let k = best.ok_or_else(|| Error::InvalidInput("risk is infinite on the whole search grid".into()))?;
    let last = grid.len() - 1;
    let boundary_hit = k == 0 || k == last;
    if boundary_hit {
        let edge = if k == 0 { (grid[0], grid[1.min(last)]) } else { (grid[last - 1], grid[last]) };
        return Ok(LambdaOptResult {
            lambda_opt: grid[k],
            min_risk: values[k].0,
            std_err: values[k].1,
            bracket: edge,
            method: SearchMethod::Grid,
            boundary_hit,
        });
    }
    let bracket = (grid[k - 1], grid[k + 1]);
    if !search.refine {
        return Ok(LambdaOptResult {
            lambda_opt: grid[k],
            min_risk: values[k].0,
            std_err: values[k].1,
            bracket,
            method: SearchMethod::Grid,
            boundary_hit,
        });
    }

    let f = |l: f64| objective(reps, l).0;
    let mut best = (grid[k], values[k].0);
    let consider = |best: &mut (f64, f64), l: f64, v: f64| {
        if v.is_finite() && prefer(l, v, best.0, best.1) {
            *best = (l, v);
        }
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut c) = bracket;
    let mut x1 = c - inv_phi * (c - a);
    let mut x2 = a + inv_phi * (c - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    consider(&mut best, x1, f1);
    consider(&mut best, x2, f2);
    for _ in 0..GOLDEN_MAX_ITERS {
        if c - a <= search.tol * best.0.abs().max(1.0) {
            break;
        }
        if f1 <= f2 {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - inv_phi * (c - a);
            f1 = f(x1);
            consider(&mut best, x1, f1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (c - a);
            f2 = f(x2);
            consider(&mut best, x2, f2);
        }
    }
    let (_, std_err) = objective(reps, best.0);
    Ok(LambdaOptResult {
        lambda_opt: best.0,
        min_risk: best.1,
        std_err,
        bracket,
        method: SearchMethod::GridGolden,
        boundary_hit,
    })
}

/// Penalty minimizing the replicate-averaged spiked-model risk.
pub fn find_lambda_opt(
    spec: &SpikedSpec,
    n: usize,
    n_rep: usize,
    seed: u64,
    search: &LambdaSearch,
) -> Result<LambdaOptResult> {
    let reps = spiked_replicates(spec, n, n_rep, seed)?;
    find_lambda_opt_over(&reps, search)
}
