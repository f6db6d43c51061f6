//! Command-line frontend: one subcommand per figure plus generic `cv` and
//! `fit`. Each run writes CSV tables and a JSON-lines manifest.

mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use output::{
    check_against, manifest_path, num, read_manifest, sha256_hex, write_outputs, CheckLine, ManifestRecord, Schema,
    Table, SCHEMA_VERSION,
};

use crate::datasets::{load_csv, load_idx, normalize_pixels, standardize, LabeledImages, RffConfig, MNIST_FILES};
use crate::derivative::sign_change_scan;
use crate::error::{Error, Result};
use crate::experiments::{
    augmentation_sweep, dimensionality_sweep, find_lambda_opt, heatmap_lambda_opt, kfold_cv, lambda_sweep,
    rff_mnist_experiment, AugmentMode, AugmentationRow, Heatmap, LambdaOptResult, LambdaSearch, MnistConfig,
    RiskCurve,
};
use crate::linalg::fit_with_intercept;
use crate::spiked::SpikedSpec;
use crate::stats::{linspace, logspace};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "ridgeless", version, about = "Ridge regression with zero and negative penalties")]
pub struct Cli {
    /// Master seed; every replicate derives its own stream from it.
    #[arg(long, env = "RIDGELESS_SEED", default_value_t = 1, global = true)]
    pub seed: u64,

    /// Worker threads (default: available parallelism). Outputs do not
    /// depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, default_value = "results", global = true)]
    pub out_dir: PathBuf,

    /// Recompute and compare against the hashes in the existing manifest
    /// instead of writing.
    #[arg(long, global = true)]
    pub check: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// Training samples per replicate.
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    /// Signal-to-noise ratio.
    #[arg(long, default_value_t = 10.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long = "n-rep", default_value_t = 100)]
    pub n_rep: usize,
}

impl ModelArgs {
    fn spec(&self, p: usize) -> Result<SpikedSpec> {
        SpikedSpec::new(p, self.rho, self.alpha, self.sigma2)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LambdaArgs {
    /// Smallest positive penalty of the log grid.
    #[arg(long, default_value_t = 1e-2)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 1e5)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 71)]
    pub lambda_steps: usize,
    /// Lower end of the linear negative grid; defaults to 0.9 times the
    /// smallest `-s_min^2` where one is needed.
    #[arg(long, allow_negative_numbers = true)]
    pub neg_lambda: Option<f64>,
    #[arg(long, default_value_t = 60)]
    pub neg_steps: usize,
}

impl LambdaArgs {
    /// `0` followed by the log-spaced positive grid.
    fn nonnegative_grid(&self) -> Result<Vec<f64>> {
        if !(self.lambda_min > 0.0 && self.lambda_max > self.lambda_min) || self.lambda_steps < 2 {
            return Err(Error::InvalidInput(format!(
                "need 0 < lambda-min < lambda-max and lambda-steps >= 2, got {}, {}, {}",
                self.lambda_min, self.lambda_max, self.lambda_steps
            )));
        }
        let mut g = vec![0.0];
        g.extend(logspace(self.lambda_min, self.lambda_max, self.lambda_steps));
        Ok(g)
    }

    fn full_grid(&self, lower: f64) -> Result<Vec<f64>> {
        if lower.is_nan() || lower >= 0.0 {
            return Err(Error::InvalidInput(format!("negative grid bound {lower} must be below 0")));
        }
        let mut g = linspace(lower, 0.0, self.neg_steps.max(1) + 1);
        g.pop();
        g.extend(self.nonnegative_grid()?);
        Ok(g)
    }

    fn search(&self) -> LambdaSearch {
        LambdaSearch {
            lower: self.neg_lambda,
            upper: self.lambda_max,
            pos_min: self.lambda_min,
            neg_steps: self.neg_steps,
            pos_steps: self.lambda_steps,
            ..LambdaSearch::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceMode {
    Adaptive,
    Fixed,
    Both,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MnistArgs {
    /// Directory holding the four standard MNIST IDX files.
    #[arg(long, env = "RIDGELESS_MNIST_DIR")]
    pub mnist_dir: Option<PathBuf>,
    /// Test images (risk is evaluated here).
    #[arg(long)]
    pub mnist_images: Option<PathBuf>,
    #[arg(long)]
    pub mnist_labels: Option<PathBuf>,
    /// Pool the training sets are drawn from; defaults to the training files
    /// in --mnist-dir, or the test set.
    #[arg(long)]
    pub mnist_train_images: Option<PathBuf>,
    #[arg(long)]
    pub mnist_train_labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TableArgs {
    /// Comma-separated file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub response: String,
    /// Center and scale predictors and response first.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub standardize: bool,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Risk curves, double descent and lambda_opt against p.
    Fig2 {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        lambda: LambdaArgs,
        /// Dimensionalities of the single-curve panels.
        #[arg(long, value_delimiter = ',', default_value = "50,75,150,1000")]
        p: Vec<usize>,
        /// Dimensionality of the panel that includes negative penalties.
        #[arg(long, default_value_t = 1000)]
        p_neg: usize,
        /// Dimensionalities of the double-descent sweep.
        #[arg(long, value_delimiter = ',')]
        p_grid: Option<Vec<usize>>,
    },
    /// lambda_opt over an (n, p) grid, uncorrelated and correlated.
    Fig3 {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        lambda: LambdaArgs,
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50,60,70,80,90,100")]
        n_grid: Vec<usize>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "20,50,100,150,200,300,400,500,600,700,800,900,1000"
        )]
        p_grid: Vec<usize>,
    },
    /// Augmentation with random predictors.
    Fig4 {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        lambda: LambdaArgs,
        #[arg(long, default_value_t = 50)]
        p: usize,
        #[arg(long, default_value_t = 400)]
        q_max: usize,
        #[arg(long, default_value_t = 10)]
        q_step: usize,
        #[arg(long, value_enum, default_value_t = VarianceMode::Both)]
        variance_mode: VarianceMode,
        /// Total variance in adaptive mode; defaults to the computed lambda_opt.
        #[arg(long)]
        total_lambda: Option<f64>,
        /// Per-column variance in fixed mode.
        #[arg(long, default_value_t = 1.0)]
        fixed_var: f64,
    },
    /// Derivative of the expected risk at lambda = 0 against p.
    Fig5 {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',')]
        p_grid: Option<Vec<usize>>,
    },
    /// Random Fourier features on MNIST.
    Fig6 {
        #[command(flatten)]
        mnist: MnistArgs,
        #[command(flatten)]
        lambda: LambdaArgs,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long = "n-rep", default_value_t = 100)]
        n_rep: usize,
        /// Number of random frequencies; features are twice as many.
        #[arg(long, default_value_t = 1000)]
        n_features: usize,
        #[arg(long, default_value_t = 0.1)]
        kernel_sigma: f64,
        #[arg(long, default_value_t = 100.0)]
        smin_threshold: f64,
    },
    /// k-fold cross-validation of ridge with intercept on a CSV table.
    Cv {
        #[command(flatten)]
        table: TableArgs,
        #[command(flatten)]
        lambda: LambdaArgs,
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// Single ridge fit with intercept on a CSV table.
    Fit {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lambda: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fig2 { .. } => "fig2",
            Command::Fig3 { .. } => "fig3",
            Command::Fig4 { .. } => "fig4",
            Command::Fig5 { .. } => "fig5",
            Command::Fig6 { .. } => "fig6",
            Command::Cv { .. } => "cv",
            Command::Fit { .. } => "fit",
        }
    }
}

fn warn_boundary(what: &str, r: &LambdaOptResult) {
    if r.boundary_hit {
        log::warn!(
            "{what}: lambda_opt = {} sits on the search boundary (bracket {:?})",
            r.lambda_opt,
            r.bracket
        );
    }
}

fn default_p_grid_fig2() -> Vec<usize> {
    (10..=100).step_by(2).chain((125..=1000).step_by(25)).collect()
}

fn default_p_grid_fig5() -> Vec<usize> {
    (100..=1500).step_by(50).collect()
}

fn heatmap_table(name: &str, panel: &str, h: &Heatmap) -> Table {
    let mut t = Table::new(name, panel, Schema::Heatmap);
    for c in &h.cells {
        warn_boundary(&format!("n = {}, p = {}", c.n, c.p), &c.opt);
        t.push(vec![
            c.n.to_string(),
            c.p.to_string(),
            num(c.opt.lambda_opt),
            c.opt.boundary_hit.to_string(),
        ]);
    }
    t
}

fn sweep_table(name: &str, panel: &str, rows: &[AugmentationRow]) -> Table {
    let mut t = Table::new(name, panel, Schema::Sweep);
    for r in rows {
        t.push(vec![
            r.q.to_string(),
            num(r.risk_trunc),
            num(r.risk_full),
            r.lambda_opt.map(|o| num(o.lambda_opt)).unwrap_or_default(),
        ]);
    }
    t
}

fn curve_table(name: &str, panel: &str, c: &RiskCurve) -> Table {
    Table::curve(name, panel, c)
}

fn fig2(seed: u64, model: &ModelArgs, lambda: &LambdaArgs, ps: &[usize], p_neg: usize, p_grid: &[usize]) -> Result<Vec<Table>> {
    let mut tables = Vec::new();
    let grid = lambda.nonnegative_grid()?;
    for (i, &p) in ps.iter().enumerate() {
        let panel = char::from(b'a' + (i as u8).min(25)).to_string();
        let curve = lambda_sweep(&model.spec(p)?, model.n, &grid, model.n_rep, seed)?;
        tables.push(curve_table(&format!("fig2_curve_p{p}.csv"), &panel, &curve));
    }

    let rows = dimensionality_sweep(&model.spec(p_grid[0].max(1))?, p_grid, model.n, model.n_rep, seed, &lambda.search())?;
    let mut t = Table::new("fig2ef_dimensionality.csv", "e,f", Schema::Dimensionality);
    for r in &rows {
        warn_boundary(&format!("p = {}", r.p), &r.opt);
        t.push(vec![
            r.p.to_string(),
            num(r.min_norm_risk),
            num(r.min_norm_se),
            num(r.opt.min_risk),
            num(r.opt.std_err),
            num(r.opt.lambda_opt),
            r.opt.boundary_hit.to_string(),
        ]);
    }
    tables.push(t);

    let spec = model.spec(p_neg)?;
    let lower = match lambda.neg_lambda {
        Some(l) => l,
        None => {
            let reps = crate::experiments::spiked_replicates(&spec, model.n, model.n_rep, seed)?;
            let min = reps
                .iter()
                .map(crate::experiments::ReplicateRisk::smin_sq)
                .fold(f64::INFINITY, f64::min);
            -0.9 * min
        }
    };
    let curve = lambda_sweep(&spec, model.n, &lambda.full_grid(lower)?, model.n_rep, seed)?;
    tables.push(curve_table(&format!("fig2g_curve_p{p_neg}_negative.csv"), "g", &curve));
    Ok(tables)
}

fn fig3(seed: u64, model: &ModelArgs, lambda: &LambdaArgs, n_grid: &[usize], p_grid: &[usize]) -> Result<Vec<Table>> {
    let search = lambda.search();
    let spherical = SpikedSpec::new(p_grid[0], 0.0, model.alpha, model.sigma2)?;
    let a = heatmap_lambda_opt(n_grid, p_grid, &spherical, model.n_rep, seed, &search)?;
    let b = heatmap_lambda_opt(n_grid, p_grid, &model.spec(p_grid[0])?, model.n_rep, seed, &search)?;
    Ok(vec![
        heatmap_table("fig3a_rho0.csv", "a", &a),
        heatmap_table("fig3b_rho.csv", "b", &b),
    ])
}

#[allow(clippy::too_many_arguments)]
fn fig4(
    seed: u64,
    model: &ModelArgs,
    lambda: &LambdaArgs,
    p: usize,
    q_max: usize,
    q_step: usize,
    mode: VarianceMode,
    total_lambda: Option<f64>,
    fixed_var: f64,
) -> Result<Vec<Table>> {
    if q_step == 0 {
        return Err(Error::InvalidInput("q-step must be positive".into()));
    }
    let spec = model.spec(p)?;
    let search = lambda.search();
    let curve = lambda_sweep(&spec, model.n, &lambda.nonnegative_grid()?, model.n_rep, seed)?;
    let mut tables = vec![curve_table(&format!("fig4a_curve_p{p}.csv"), "a", &curve)];
    let q_grid: Vec<usize> = (0..=q_max).step_by(q_step).collect();
    if mode != VarianceMode::Fixed {
        let total = match total_lambda {
            Some(t) => t,
            None => {
                let opt = find_lambda_opt(&spec, model.n, model.n_rep, seed, &search)?;
                warn_boundary("adaptive variance", &opt);
                opt.lambda_opt
            }
        };
        if total.is_nan() || total <= 0.0 {
            return Err(Error::NotApplicable(format!(
                "adaptive augmentation needs a positive total variance, lambda_opt = {total}"
            )));
        }
        let rows = augmentation_sweep(&spec, model.n, &q_grid, AugmentMode::Adaptive { total_lambda: total }, model.n_rep, seed, Some(&search))?;
        tables.push(sweep_table("fig4bd_adaptive.csv", "b,d", &rows));
    }
    if mode != VarianceMode::Adaptive {
        let rows = augmentation_sweep(&spec, model.n, &q_grid, AugmentMode::FixedVariance { var: fixed_var }, model.n_rep, seed, Some(&search))?;
        tables.push(sweep_table("fig4ce_fixed.csv", "c,e", &rows));
    }
    Ok(tables)
}

fn fig5(seed: u64, model: &ModelArgs, p_grid: &[usize]) -> Result<Vec<Table>> {
    let scan = sign_change_scan(&model.spec(p_grid[0])?, p_grid, model.n, model.n_rep, seed)?;
    let mut t = Table::new("fig5_derivative.csv", "a,b", Schema::Derivative);
    for r in &scan.rows {
        let e = &r.estimate;
        t.push(vec![
            r.p.to_string(),
            num(e.value),
            num(e.std_err),
            num(e.terms.signal),
            num(e.terms.cross),
            num(e.terms.trace),
            num(e.terms.spike_noise),
            num(e.decoupled_value),
        ]);
    }
    match scan.crossing {
        Some(p) => log::info!("derivative turns positive at p = {p}"),
        None => log::info!("derivative stays non-positive over the grid"),
    }
    Ok(vec![t])
}

fn missing_mnist(path: PathBuf) -> Error {
    Error::MissingFile {
        path,
        hint: format!(
            "pass --mnist-dir (or RIDGELESS_MNIST_DIR) containing {}, or --mnist-images/--mnist-labels",
            MNIST_FILES.join(", ")
        ),
    }
}

/// `(training pool, test set)`.
fn load_mnist(args: &MnistArgs) -> Result<(LabeledImages, LabeledImages)> {
    let from_dir = |i: usize| args.mnist_dir.as_ref().map(|d| d.join(MNIST_FILES[i]));
    let test_images = args.mnist_images.clone().or_else(|| from_dir(2));
    let test_labels = args.mnist_labels.clone().or_else(|| from_dir(3));
    let (ti, tl) = match (test_images, test_labels) {
        (Some(i), Some(l)) => (i, l),
        (i, _) => return Err(missing_mnist(i.unwrap_or_else(|| PathBuf::from(MNIST_FILES[2])))),
    };
    let test = normalize_pixels(&load_idx(&ti, &tl).map_err(|e| match e {
        Error::MissingFile { path, .. } => missing_mnist(path),
        other => other,
    })?);
    let pool_images = args.mnist_train_images.clone().or_else(|| from_dir(0));
    let pool_labels = args.mnist_train_labels.clone().or_else(|| from_dir(1));
    let pool = match (pool_images, pool_labels) {
        (Some(i), Some(l)) if i.exists() && l.exists() => normalize_pixels(&load_idx(&i, &l)?),
        _ => {
            log::warn!("no MNIST training files found; drawing training sets from the test set");
            test.clone()
        }
    };
    Ok((pool, test))
}

#[allow(clippy::too_many_arguments)]
fn fig6(
    seed: u64,
    mnist: &MnistArgs,
    lambda: &LambdaArgs,
    n: usize,
    n_rep: usize,
    n_features: usize,
    kernel_sigma: f64,
    smin_threshold: f64,
) -> Result<Vec<Table>> {
    let (pool, test) = load_mnist(mnist)?;
    let lower = lambda.neg_lambda.unwrap_or(-150.0);
    let cfg = MnistConfig {
        train_n: n,
        rff: RffConfig {
            input_dim: test.pixels.ncols(),
            n_features,
            kernel_sigma,
            seed,
        },
        lambdas: lambda.full_grid(lower)?,
        n_rep,
        smin_sq_threshold: smin_threshold,
        seed,
    };
    let res = rff_mnist_experiment(&cfg, &pool, &test)?;
    let keep: Vec<usize> = (0..res.all.len()).filter(|&i| res.all.lambdas[i] >= 0.0).collect();
    let positive = RiskCurve {
        lambdas: keep.iter().map(|&i| res.all.lambdas[i]).collect(),
        mean: keep.iter().map(|&i| res.all.mean[i]).collect(),
        std_err: keep.iter().map(|&i| res.all.std_err[i]).collect(),
        n_rep: res.all.n_rep,
        excluded: keep.iter().map(|&i| res.all.excluded[i]).collect(),
    };
    let mut smin = Table::new("fig6_smin_sq.csv", "b", Schema::SminSq);
    for (i, s) in res.smin_sq.iter().enumerate() {
        smin.push(vec![i.to_string(), num(*s), (*s > smin_threshold).to_string()]);
    }
    Ok(vec![
        curve_table("fig6a_all_nonnegative.csv", "a", &positive),
        curve_table("fig6b_all.csv", "b", &res.all),
        curve_table("fig6b_above.csv", "b", &res.above),
        curve_table("fig6b_below.csv", "b", &res.below),
        smin,
    ])
}

fn load_table(args: &TableArgs) -> Result<crate::linalg::Dataset> {
    let loaded = load_csv(&args.data, &args.response)?;
    if args.standardize {
        standardize(&loaded.data)
    } else {
        Ok(loaded.data)
    }
}

fn cv(seed: u64, table: &TableArgs, lambda: &LambdaArgs, k: usize) -> Result<Vec<Table>> {
    let data = load_table(table)?;
    let grid = match lambda.neg_lambda {
        Some(l) => lambda.full_grid(l)?,
        None => lambda.nonnegative_grid()?,
    };
    let curve = kfold_cv(&data, &grid, k, seed)?;
    Ok(vec![curve_table("cv_curve.csv", "cv", &curve)])
}

fn fit(table: &TableArgs, lambda: f64) -> Result<Vec<Table>> {
    let names = load_csv(&table.data, &table.response)?.feature_names;
    let f = fit_with_intercept(&load_table(table)?, lambda)?;
    let mut t = Table::new("fit_coefficients.csv", "fit", Schema::Coefficients);
    t.push(vec!["(intercept)".into(), num(f.intercept)]);
    for (name, c) in names.iter().zip(f.coefficients.iter()) {
        t.push(vec![name.clone(), num(*c)]);
    }
    Ok(vec![t])
}

fn nonempty(grid: Vec<usize>, what: &str) -> Result<Vec<usize>> {
    if grid.is_empty() || grid.contains(&0) {
        return Err(Error::InvalidInput(format!("{what} must be a non-empty list of positive integers")));
    }
    Ok(grid)
}

/// Computes every table of `command` without touching the filesystem
/// (apart from reading inputs).
pub fn compute(command: &Command, seed: u64) -> Result<Vec<Table>> {
    match command {
        Command::Fig2 {
            model,
            lambda,
            p,
            p_neg,
            p_grid,
        } => {
            let grid = nonempty(p_grid.clone().unwrap_or_else(default_p_grid_fig2), "p-grid")?;
            fig2(seed, model, lambda, &nonempty(p.clone(), "p")?, *p_neg, &grid)
        }
        Command::Fig3 {
            model,
            lambda,
            n_grid,
            p_grid,
        } => fig3(seed, model, lambda, &nonempty(n_grid.clone(), "n-grid")?, &nonempty(p_grid.clone(), "p-grid")?),
        Command::Fig4 {
            model,
            lambda,
            p,
            q_max,
            q_step,
            variance_mode,
            total_lambda,
            fixed_var,
        } => fig4(seed, model, lambda, *p, *q_max, *q_step, *variance_mode, *total_lambda, *fixed_var),
        Command::Fig5 { model, p_grid } => {
            let grid = nonempty(p_grid.clone().unwrap_or_else(default_p_grid_fig5), "p-grid")?;
            fig5(seed, model, &grid)
        }
        Command::Fig6 {
            mnist,
            lambda,
            n,
            n_rep,
            n_features,
            kernel_sigma,
            smin_threshold,
        } => fig6(seed, mnist, lambda, *n, *n_rep, *n_features, *kernel_sigma, *smin_threshold),
        Command::Cv { table, lambda, k } => cv(seed, table, lambda, *k),
        Command::Fit { table, lambda } => fit(table, *lambda),
    }
}

/// Outcome of a run, for the binary's exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Written { manifest: PathBuf, files: usize },
    Checked(Vec<CheckLine>),
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let start = Instant::now();
    let tables = compute(&cli.command, cli.seed)?;
    let manifest = manifest_path(&cli.out_dir, cli.command.name());
    if cli.check {
        return Ok(Outcome::Checked(check_against(&read_manifest(&manifest)?, &tables)?));
    }
    let params = serde_json::to_value(&cli.command).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let run = ManifestRecord::Run {
        command: cli.command.name().to_string(),
        params,
        master_seed: cli.seed,
        tool_version: TOOL_VERSION.to_string(),
        schema_version: SCHEMA_VERSION,
        threads: rayon::current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let path = write_outputs(&cli.out_dir, run, &tables)?;
    Ok(Outcome::Written {
        manifest: path,
        files: tables.len(),
    })
}

/// Runs a parsed command line inside a worker pool of the requested size.
pub fn run(cli: &Cli) -> Result<Outcome> {
    match cli.threads {
        Some(0) => Err(Error::InvalidInput("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidInput(e.to_string()))?
            .install(|| execute(cli)),
        None => execute(cli),
    }
}

/// Writes the check report to stdout; true if every hash matched.
pub fn report_check(lines: &[CheckLine], out_dir: &Path) -> bool {
    let mut all = true;
    for l in lines {
        let status = if l.ok() { "OK" } else { "MISMATCH" };
        all &= l.ok();
        println!("{status} {}", out_dir.join(&l.path).display());
    }
    all
}
