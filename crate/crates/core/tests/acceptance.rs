//! End-to-end acceptance suite. Runs as a plain binary (`harness = false`)
//! and prints one PASS/FAIL/SKIP line per criterion; exits non-zero if any
//! criterion fails.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use common::{gaussian, gaussian_vec, null_basis};
use rand::Rng;
use ridgeless::augmentation::{augment_columns, min_norm_truncated, predict_augmented_with};
use ridgeless::derivative::{derivative_at_zero, derivative_fd_oracle};
use ridgeless::experiments::{
    augmentation_sweep, dimensionality_sweep, find_lambda_opt_over, heatmap_lambda_opt, risk_curve,
    spiked_replicates, AugmentMode, LambdaSearch, ReplicateRisk,
};
use ridgeless::linalg::{min_norm_ols, ridge_direct, ridge_path, thin_svd, Vector};
use ridgeless::rng::{seeded, substream, Purpose};
use ridgeless::spiked::{sample_replicate, sample_training, SpikedSpec};
use ridgeless::stats::{logspace, mean_and_se};

const N: usize = 64;
const N_REP: usize = 100;
const SEED: u64 = 1;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

type BoxError = Box<dyn std::error::Error>;
type Outcome = Result<Verdict, BoxError>;
type CurveRow = (f64, f64, usize);
type Criterion = (&'static str, fn() -> Outcome);

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = seeded(0xacce);
    let mut worst = 0.0_f64;
    let mut negative = 0;
    for case in 0..200u64 {
        let (n, p) = loop {
            let n = rng.random_range(3..60usize);
            let p = rng.random_range(3..60usize);
            if n.abs_diff(p) >= 4 {
                break (n, p);
            }
        };
        let x = gaussian(n, p, case);
        let y = gaussian_vec(n, case ^ 0xff);
        let svd = thin_svd(&x)?;
        let smin_sq = svd.smin_sq().ok_or("rank-zero design")?;
        // every fourth case sits at the most negative admissible penalty
        let frac: f64 = if case % 4 == 0 { -0.9 } else { rng.random_range(-0.9..5.0) };
        let frac = if p > n && frac.abs() < 0.05 { 0.05 } else { frac };
        negative += usize::from(frac < 0.0);
        let a = ridge_path(&svd, &y, frac * smin_sq)?;
        let b = ridge_direct(&x, &y, frac * smin_sq)?;
        worst = worst.max((&a - &b).norm() / b.norm());
    }
    Ok(verdict(
        worst <= 1e-8,
        format!("200 configurations ({negative} with negative lambda), worst relative gap {worst:.2e}"),
    ))
}

fn interpolation_suite() -> Outcome {
    let mut rng = seeded(0x1e75);
    let (mut worst_resid, mut worst_pyth, mut dominated) = (0.0_f64, 0.0_f64, 0);
    for case in 0..100u64 {
        let n = rng.random_range(2..30usize);
        let p = n + rng.random_range(1..40usize);
        let x = gaussian(n, p, case);
        let y = gaussian_vec(n, case ^ 0xaa);
        let beta = min_norm_ols(&x, &y)?;
        worst_resid = worst_resid.max((&y - &x * &beta).norm() / y.norm());
        let null = null_basis(&x);
        let z = &null * gaussian_vec(null.ncols(), case ^ 0xbb) * rng.random_range(0.01..3.0);
        let other = &beta + &z;
        worst_resid = worst_resid.max((&y - &x * &other).norm() / y.norm());
        dominated += usize::from(other.norm_squared() >= beta.norm_squared());
        let gap = other.norm_squared() - beta.norm_squared() - z.norm_squared();
        worst_pyth = worst_pyth.max(gap.abs() / other.norm_squared());
    }
    Ok(verdict(
        worst_resid <= 1e-8 && dominated == 100 && worst_pyth <= 1e-8,
        format!(
            "100 designs: worst relative residual {worst_resid:.2e}, norm dominance {dominated}/100, \
             orthogonality gap {worst_pyth:.2e}"
        ),
    ))
}

fn curve_shapes() -> Outcome {
    let start = Instant::now();
    let grid = logspace(1e-2, 1e5, 71);
    let p50 = spiked_replicates(&SpikedSpec::defaults(50), N, N_REP, SEED)?;
    let opt50 = find_lambda_opt_over(&p50, &LambdaSearch::positive_only())?;
    let curve50 = risk_curve(&p50, &grid)?;
    let i50 = curve50.argmin().ok_or("empty curve")?;
    let interior = i50 > 0 && i50 + 1 < grid.len() && !opt50.boundary_hit;

    let p1000 = spiked_replicates(&SpikedSpec::defaults(1000), N, N_REP, SEED)?;
    let curve1000 = risk_curve(&p1000, &grid)?;
    let i1000 = curve1000.argmin().ok_or("empty curve")?;
    let secs = start.elapsed().as_secs_f64();
    Ok(verdict(
        interior && (15.0..=60.0).contains(&opt50.lambda_opt) && i1000 == 0 && secs < 300.0,
        format!(
            "p=50 lambda_opt {:.2} (grid argmin {:.3}, interior {interior}); p=1000 lambda>=0 argmin {} ; {secs:.1}s",
            opt50.lambda_opt, grid[i50], grid[i1000]
        ),
    ))
}

fn negative_optimum() -> Outcome {
    let reps = spiked_replicates(&SpikedSpec::defaults(1000), N, N_REP, SEED)?;
    let opt = find_lambda_opt_over(&reps, &LambdaSearch::default())?;
    let at = |l: f64| -> Result<Vec<f64>, String> {
        reps.iter()
            .map(|r| r.risk_at(l).ok_or_else(|| format!("lambda {l} not admitted")))
            .collect()
    };
    let (r_opt, r_zero) = (at(opt.lambda_opt)?, at(0.0)?);
    let (m_opt, se_opt) = mean_and_se(&r_opt);
    let (m_zero, se_zero) = mean_and_se(&r_zero);
    let diffs: Vec<f64> = r_zero.iter().zip(&r_opt).map(|(z, o)| z - o).collect();
    let (gain, se_paired) = mean_and_se(&diffs);
    let se_unpaired = (se_opt.powi(2) + se_zero.powi(2)).sqrt();
    let ok = (-250.0..=-75.0).contains(&opt.lambda_opt) && gain > 2.0 * se_paired;
    Ok(verdict(
        ok,
        format!(
            "lambda_opt {:.1}; risk {m_opt:.5} vs {m_zero:.5} at 0; gain {gain:.5} = {:.1} paired SE \
             ({:.2} unpaired SE)",
            opt.lambda_opt,
            gain / se_paired,
            gain / se_unpaired
        ),
    ))
}

fn double_descent() -> Outcome {
    let p_grid: Vec<usize> = [10].into_iter().chain(59..=69).chain([1000]).collect();
    let rows = dimensionality_sweep(&SpikedSpec::defaults(10), &p_grid, N, N_REP, SEED, &LambdaSearch::positive_only())?;
    let risk: BTreeMap<usize, f64> = rows.iter().map(|r| (r.p, r.min_norm_risk)).collect();
    let (r10, r1000) = (risk[&10], risk[&1000]);
    let peak_low = (59..=69).map(|p| risk[&p]).fold(f64::INFINITY, f64::min);
    Ok(verdict(
        peak_low >= 5.0 * r10 && peak_low >= 5.0 * r1000,
        format!("smallest risk over p=59..69 {peak_low:.3}; p=10 {r10:.4}; p=1000 {r1000:.4}"),
    ))
}

fn heatmaps() -> Outcome {
    let n_grid: Vec<usize> = (10..=100).step_by(10).collect();
    let p_grid = [20, 50, 100, 150, 200, 300, 400, 500, 600, 700, 800, 900, 1000];
    let search = LambdaSearch::default();

    let spherical = heatmap_lambda_opt(&n_grid, &p_grid, &SpikedSpec::defaults(20).with_rho(0.0), N_REP, SEED, &search)?;
    let worst = spherical
        .cells
        .iter()
        .map(|c| (c.opt.lambda_opt / (c.p as f64 / 10.0) - 1.0).abs())
        .fold(0.0, f64::max);

    let spiked = heatmap_lambda_opt(&n_grid, &p_grid, &SpikedSpec::defaults(20), N_REP, SEED, &search)?;
    let negatives = spiked.cells.iter().filter(|c| c.opt.lambda_opt < 0.0).count();
    // smallest grid p from which every larger p has a negative optimum
    let boundary: Vec<usize> = (0..n_grid.len())
        .map(|i_n| {
            let mut b = usize::MAX;
            for i_p in (0..p_grid.len()).rev() {
                if spiked.cell(i_n, i_p).opt.lambda_opt < 0.0 {
                    b = p_grid[i_p];
                } else {
                    break;
                }
            }
            b
        })
        .collect();
    let monotone = boundary.windows(2).all(|w| w[0] <= w[1]);
    let shown: Vec<String> = boundary
        .iter()
        .map(|&b| if b == usize::MAX { ">1000".into() } else { b.to_string() })
        .collect();
    Ok(verdict(
        worst <= 0.30 && negatives > 0 && monotone,
        format!(
            "rho=0 worst |lambda_opt/(p/10) - 1| {worst:.3}; rho=0.1 {negatives} negative cells, \
             boundary p by n [{}]",
            shown.join(", ")
        ),
    ))
}

fn augmentation_convergence() -> Outcome {
    const LAMBDA: f64 = 31.0;
    const SEEDS: u64 = 50;
    let qs = [50usize, 200, 1000, 2000, 10_000];
    let spec = SpikedSpec::defaults(50);
    let test = sample_training(&spec, 100, 0x7e57)?;
    let mut coef_err = vec![0.0; qs.len()];
    let mut pred_err = vec![0.0; qs.len()];
    for s in 0..SEEDS {
        let data = sample_training(&spec, N, 1000 + s)?;
        let ridge = ridge_path(&thin_svd(data.x())?, data.y(), LAMBDA)?;
        let ridge_pred = test.x() * &ridge;
        for (k, &q) in qs.iter().enumerate() {
            let aug = augment_columns(data.x(), q, LAMBDA, 1000 + s)?;
            let fit = min_norm_truncated(&aug, data.y())?;
            coef_err[k] += (&fit.beta_q - &ridge).norm() / ridge.norm() / SEEDS as f64;
            let mut tails = substream(1000 + s, Purpose::TestTail, q as u64);
            let pred = (0..test.n_samples())
                .map(|i| {
                    let point: Vector = test.x().row(i).transpose();
                    predict_augmented_with(&aug, &fit.beta_augm, &point, &mut tails)
                })
                .collect::<Result<Vec<f64>, _>>()?;
            pred_err[k] += (Vector::from_vec(pred) - &ridge_pred).norm() / ridge_pred.norm() / SEEDS as f64;
        }
    }
    let decreasing = |e: &[f64]| e.windows(2).all(|w| w[1] < w[0]);
    let meets = |e: &[f64]| decreasing(e) && e[1] < 0.25 && e[3] < 0.10;
    let fmt = |e: &[f64]| e.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ");
    Ok(verdict(
        meets(&coef_err) && meets(&pred_err),
        format!(
            "q = {qs:?}: coefficient error [{}], prediction error [{}]",
            fmt(&coef_err),
            fmt(&pred_err)
        ),
    ))
}

fn fixed_variance_optimum() -> Outcome {
    const STEP: usize = 10;
    let q_grid: Vec<usize> = (0..=400).step_by(STEP).collect();
    let rows = augmentation_sweep(
        &SpikedSpec::defaults(50),
        N,
        &q_grid,
        AugmentMode::FixedVariance { var: 1.0 },
        N_REP,
        SEED,
        Some(&LambdaSearch::default()),
    )?;
    let best = rows
        .iter()
        .filter(|r| r.excluded == 0)
        .min_by(|a, b| a.risk_trunc.total_cmp(&b.risk_trunc))
        .ok_or("no usable rows")?;
    let lambdas: Vec<(usize, f64)> = rows
        .iter()
        .filter_map(|r| r.lambda_opt.map(|o| (r.q, o.lambda_opt)))
        .collect();
    let crossing = lambdas
        .windows(2)
        .find(|w| w[0].1 > 0.0 && w[1].1 <= 0.0)
        .map(|w| (w[0].0, w[1].0));
    let Some((before, after)) = crossing else {
        return Ok(Verdict::Fail(format!("lambda_opt(q) never crosses zero; argmin q = {}", best.q)));
    };
    let distance = if best.q < before {
        before - best.q
    } else {
        best.q.saturating_sub(after)
    };
    Ok(verdict(
        distance <= STEP,
        format!("argmin q = {}; lambda_opt changes sign between q = {before} and q = {after}", best.q),
    ))
}

fn derivative_checks() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for p in [100, 300, 1000] {
        let spec = SpikedSpec::defaults(p);
        let analytic = derivative_at_zero(&spec, N, N_REP, SEED)?;
        let fd = derivative_fd_oracle(&spec, N, N_REP, None, SEED)?;
        let z = (analytic.value - fd.value).abs() / (analytic.std_err.powi(2) + fd.std_err.powi(2)).sqrt();
        ok &= z <= 3.0;
        parts.push(format!("p={p} {:.3e} vs {:.3e} ({z:.2} SE)", analytic.value, fd.value));
    }
    let mut previous: Option<(usize, f64)> = None;
    let mut change = None;
    for p in (300..=1000).step_by(50) {
        let value = derivative_at_zero(&SpikedSpec::defaults(p), N, N_REP, SEED)?.value;
        if let Some((q, v)) = previous {
            if v < 0.0 && value > 0.0 && change.is_none() {
                change = Some((q, p));
            }
        }
        previous = Some((p, value));
    }
    let located = matches!(change, Some((lo, hi)) if lo >= 500 && hi <= 700);
    parts.push(match change {
        Some((lo, hi)) => format!("sign change between p={lo} and p={hi}"),
        None => "no sign change on 300..=1000".into(),
    });
    Ok(verdict(ok && located, parts.join("; ")))
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ridgeless")
}

fn run_cli(args: &[&str], out: &Path, threads: usize) -> Result<(), String> {
    let status = Command::new(bin())
        .args(["--seed", "1", "--threads", &threads.to_string(), "--out-dir"])
        .arg(out)
        .args(args)
        .env_remove("RIDGELESS_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if status.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr).trim()))
    }
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).into_iter().flatten().flatten() {
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".csv") {
            files.insert(name, std::fs::read(entry.path()).unwrap_or_default());
        }
    }
    files
}

fn mnist_dir() -> Option<PathBuf> {
    std::env::var_os("RIDGELESS_MNIST_DIR").map(PathBuf::from)
}

fn read_curve(path: &Path) -> Result<Vec<CurveRow>, BoxError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let r = record?;
        rows.push((r[0].parse()?, r[1].parse()?, r[4].parse()?));
    }
    Ok(rows)
}

fn mnist_curves() -> Outcome {
    let Some(dir) = mnist_dir() else {
        return Ok(Verdict::Skip("RIDGELESS_MNIST_DIR not set".into()));
    };
    let out = tempfile::tempdir()?;
    run_cli(&["fig6", "--mnist-dir", &dir.to_string_lossy()], out.path(), 1)?;
    let argmin = |rows: &[CurveRow]| {
        rows.iter()
            .filter(|r| r.2 == 0)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|r| r.0)
    };
    let above = argmin(&read_curve(&out.path().join("fig6b_above.csv"))?).ok_or("no usable penalties")?;
    let nonneg = argmin(&read_curve(&out.path().join("fig6a_all_nonnegative.csv"))?).ok_or("empty curve")?;
    Ok(verdict(
        (-120.0..=-40.0).contains(&above) && nonneg == 0.0,
        format!("above-threshold argmin {above}; lambda>=0 argmin {nonneg}"),
    ))
}

fn cli_determinism() -> Outcome {
    let work = tempfile::tempdir()?;
    let table = work.path().join("toy.csv");
    let data = sample_replicate(&SpikedSpec::defaults(8), 40, 3, 0)?;
    let mut text = String::from("a,b,c,d,e,f,g,h,target\n");
    for i in 0..40 {
        let row: Vec<String> = data.x().row(i).iter().map(|v| format!("{v}")).collect();
        text.push_str(&format!("{},{}\n", row.join(","), data.y()[i]));
    }
    std::fs::write(&table, text)?;
    let table = table.to_string_lossy().into_owned();

    let mut commands: Vec<Vec<String>> = vec![
        "fig2 --n-rep 8 --p 50,1000 --p-grid 20,64,200".into(),
        "fig3 --n-rep 6 --n-grid 20,60 --p-grid 50,300".into(),
        "fig4 --n-rep 6 --q-max 60 --q-step 20".into(),
        "fig5 --n-rep 8 --p-grid 100,600".into(),
        format!("cv --data {table} --response target --k 5"),
        format!("fit --data {table} --response target --lambda 0.5"),
    ]
    .into_iter()
    .map(|s: String| s.split(' ').map(String::from).collect())
    .collect();
    if let Some(dir) = mnist_dir() {
        commands.push(vec![
            "fig6".into(),
            "--mnist-dir".into(),
            dir.to_string_lossy().into_owned(),
            "--n-rep".into(),
            "6".into(),
            "--n-features".into(),
            "100".into(),
        ]);
    }
    let mut checked = Vec::new();
    for cmd in &commands {
        let args: Vec<&str> = cmd.iter().map(String::as_str).collect();
        let mut outputs = Vec::new();
        for (run, threads) in [1, 1, 3].into_iter().enumerate() {
            let dir = work.path().join(format!("{}_{run}", cmd[0]));
            run_cli(&args, &dir, threads)?;
            outputs.push(csv_files(&dir));
        }
        if outputs[0].is_empty() || outputs.iter().any(|o| o != &outputs[0]) {
            return Ok(Verdict::Fail(format!("{} output differs between runs", cmd[0])));
        }
        checked.push(format!("{} ({} files)", cmd[0], outputs[0].len()));
    }
    Ok(Verdict::Pass(format!("byte-identical across repeats and thread counts: {}", checked.join(", "))))
}

fn main() {
    let criteria: &[Criterion] = &[
        ("oracle equivalence", oracle_equivalence),
        ("interpolation and minimum norm", interpolation_suite),
        ("risk curve shapes at p=50 and p=1000", curve_shapes),
        ("negative optimal penalty at p=1000", negative_optimum),
        ("double descent peak", double_descent),
        ("lambda_opt heatmaps", heatmaps),
        ("augmentation converges to ridge", augmentation_convergence),
        ("fixed-variance augmentation optimum", fixed_variance_optimum),
        ("derivative at zero", derivative_checks),
        ("random-feature MNIST curves", mnist_curves),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for &(name, check) in criteria {
        let start = Instant::now();
        let line = match check() {
            Ok(Verdict::Pass(d)) => format!("PASS  {name}: {d}"),
            Ok(Verdict::Skip(d)) => format!("SKIP  {name}: {d}"),
            Ok(Verdict::Fail(d)) => {
                failed += 1;
                format!("FAIL  {name}: {d}")
            }
            Err(e) => {
                failed += 1;
                format!("FAIL  {name}: error: {e}")
            }
        };
        println!("{line} [{:.1}s]", start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
