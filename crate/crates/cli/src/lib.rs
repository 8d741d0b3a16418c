//! Batch front-end for `sketchreg`.
//!
//! Every subcommand writes one JSON report (or a CSV for `experiment`) and
//! maps its outcome onto a fixed exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | input error (flags, files, config) |
//! | 2 | solver failure: non-convergence or separable data at λ = 0 |
//! | 3 | a bound or a cross-check was violated |

pub mod experiment;
pub mod sketch_spec;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sketchreg_core::bounds::{self, CrossEntropyReport, LossGap};
use sketchreg_core::datagen::{self, Covariance, GenerativeConfig, LabelCoding, MISC_STREAM};
use sketchreg_core::glm::DataSet;
use sketchreg_core::json;
use sketchreg_core::linalg::top_k_right_singular_vectors;
use sketchreg_core::mu::{self, MuResult, MuStatus};
use sketchreg_core::sketch::{low_rank_approx, TightnessInstance, SVD_TOL};
use sketchreg_core::solver::{self, SolveConfig};
use sketchreg_core::Error;

pub use sketch_spec::SketchSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

/// Relative tolerance for `mu --cross-check`.
pub const CROSS_CHECK_TOL: f64 = 1e-6;

/// An exit code plus the message printed on stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonConvergence { .. } | Error::Separable(_) | Error::Lp(_) => EXIT_SOLVER,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<i32, Failure>;

#[derive(Debug, Parser)]
#[command(name = "sketchreg", version, about = "Sketched logistic regression: fits, bounds, and the complexity measure mu")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit regularized logistic regression.
    Fit(FitArgs),
    /// Forward-error sandwich for a sketch.
    Bounds(BoundsArgs),
    /// Exact classification complexity measure mu.
    Mu(MuArgs),
    /// Additive loss gap under a rank-k approximation.
    Lowrank(LowrankArgs),
    /// Write a synthetic dataset.
    Gen(GenArgs),
    /// Run a lambda x sketch x seed grid from a TOML config.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Libsvm,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset file.
    #[arg(long)]
    pub data: PathBuf,
    /// File format; defaults to libsvm for .svm/.libsvm files, csv otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// CSV: the first line is a header.
    #[arg(long)]
    pub header: bool,
    /// CSV: 0-based column holding the labels.
    #[arg(long, default_value_t = 0)]
    pub label_column: usize,
    /// Accept 0/1 labels and recode them to -1/+1.
    #[arg(long)]
    pub recode01: bool,
    /// libsvm: number of features (must cover every index).
    #[arg(long)]
    pub d_hint: Option<usize>,
}

impl DataArgs {
    pub fn load(&self) -> Result<DataSet, Failure> {
        let coding = if self.recode01 { LabelCoding::ZeroOne } else { LabelCoding::PlusMinusOne };
        let format = self.format.unwrap_or_else(|| guess_format(&self.data));
        let data = match format {
            Format::Csv => datagen::load_csv(&self.data, self.header, self.label_column, coding)?,
            Format::Libsvm => datagen::load_libsvm(&self.data, self.d_hint, coding)?,
        };
        Ok(data)
    }
}

pub fn guess_format(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("svm" | "libsvm") => Format::Libsvm,
        _ => Format::Csv,
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Gradient-norm tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
}

impl SolverArgs {
    pub fn config(&self) -> Result<SolveConfig, Failure> {
        let cfg = SolveConfig {
            grad_tol: self.tol,
            max_iters: self.max_iters,
            ..SolveConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    /// coord:i,j,... | topcoef:k | pca:k | rand:k[:seed]
    #[arg(long)]
    pub sketch: SketchSpec,
    /// Also report the cross-entropy bound.
    #[arg(long)]
    pub xent: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MuArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// LP budget C.
    #[arg(long, default_value_t = mu::DEFAULT_BUDGET)]
    pub budget: f64,
    /// Relative rank tolerance for the range of D_y X.
    #[arg(long, default_value_t = 1e-10)]
    pub rank_tol: f64,
    /// Re-solve with the direct (beta, t) program and require agreement.
    #[arg(long)]
    pub cross_check: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LowrankArgs {
    #[command(flatten)]
    pub data: Option<LowrankData>,
    /// Use the worst-case instance x*I vs (x+s)*I instead of a dataset.
    #[arg(long, conflicts_with_all = ["data", "k", "beta"])]
    pub tightness: bool,
    /// Tightness: number of rows (= columns).
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Tightness: diagonal value of X.
    #[arg(long, default_value_t = 50.0)]
    pub x: f64,
    /// Tightness: perturbation s.
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Rank of the approximation.
    #[arg(long)]
    pub k: Option<usize>,
    /// `fit` (optimum at --lambda) or `random:SEED` (Gaussian).
    #[arg(long, default_value = "fit")]
    pub beta: String,
    /// Regularization for `--beta fit`.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Dataset flags for `lowrank`, optional because `--tightness` needs none.
#[derive(Debug, Args)]
#[group(requires = "data")]
pub struct LowrankData {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub header: bool,
    #[arg(long, default_value_t = 0)]
    pub label_column: usize,
    #[arg(long)]
    pub recode01: bool,
    #[arg(long)]
    pub d_hint: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Norm of the true coefficient vector (direction drawn from the seed).
    #[arg(long, default_value_t = 1.0)]
    pub beta_norm: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_x: f64,
    /// Diagonal covariance as comma-separated variances (identity if absent).
    #[arg(long, value_delimiter = ',')]
    pub diag: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// CSV: write a header line.
    #[arg(long)]
    pub header: bool,
    /// Write X' = -D_y X with all labels -1.
    #[arg(long)]
    pub standard_form: bool,
    /// Dataset path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// TOML config.
    pub config: PathBuf,
    /// CSV path; overrides `output` in the config (stdout if neither).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fill the runtime_ms column (makes reruns differ).
    #[arg(long)]
    pub timings: bool,
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("sketchreg: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::Fit(a) => cmd_fit(&a),
        Command::Bounds(a) => cmd_bounds(&a),
        Command::Mu(a) => cmd_mu(&a),
        Command::Lowrank(a) => cmd_lowrank(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::Experiment(a) => experiment::cmd_experiment(&a),
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    command: &'a str,
    #[serde(flatten)]
    body: T,
}

fn emit<T: Serialize>(out: Option<&Path>, command: &str, body: T) -> Result<(), Failure> {
    let mut text = json::to_string(&Envelope {
        schema: json::SCHEMA,
        command,
        body,
    });
    text.push('\n');
    write_output(out, text.as_bytes())
}

pub(crate) fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let res = match out {
        Some(p) => File::create(p).and_then(|mut f| f.write_all(bytes)),
        None => io::stdout().lock().write_all(bytes),
    };
    res.map_err(|e| Failure::input(format!("cannot write {}: {e}", out.map_or("stdout".into(), |p| p.display().to_string()))))
}

fn check_lambda(lambda: f64, positive: bool) -> Result<(), Failure> {
    let ok = lambda.is_finite() && if positive { lambda > 0.0 } else { lambda >= 0.0 };
    if ok {
        Ok(())
    } else {
        let need = if positive { "positive" } else { "nonnegative" };
        Err(Failure::input(format!("--lambda must be {need}, got {lambda}")))
    }
}

pub fn cmd_fit(a: &FitArgs) -> CmdResult {
    check_lambda(a.lambda, false)?;
    let cfg = a.solver.config()?;
    let data = a.data.load()?;
    let fit = solver::fit_full(&data, a.lambda, &cfg)?;
    let converged = fit.converged;
    emit(a.out.as_deref(), "fit", &fit)?;
    if converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("sketchreg: fit stopped after {} iterations with gradient norm {:e}", fit.iterations, fit.grad_norm);
        Ok(EXIT_SOLVER)
    }
}

#[derive(Serialize)]
struct BoundsBody<'a> {
    sketch: String,
    #[serde(flatten)]
    report: &'a bounds::BoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_entropy: Option<CrossEntropyReport>,
}

pub fn cmd_bounds(a: &BoundsArgs) -> CmdResult {
    check_lambda(a.lambda, true)?;
    let cfg = a.solver.config()?;
    let data = a.data.load()?;
    let sketch = a.sketch.build(&data, a.lambda, &cfg, 0)?;
    let report = bounds::forward_error_report(&data, &sketch, a.lambda, &cfg)?;
    let cross_entropy = if a.xent {
        Some(bounds::cross_entropy_report(&data, &sketch, &report.beta_d, &report.beta_k, a.lambda)?)
    } else {
        None
    };
    emit(
        a.out.as_deref(),
        "bounds",
        BoundsBody {
            sketch: sketch.label(),
            report: &report,
            cross_entropy,
        },
    )?;
    if report.sandwich_ok {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "sketchreg: sandwich violated: lower {:e}, actual {:e}, upper {:e} (slack {:e})",
            report.lower, report.actual, report.upper, report.slack
        );
        Ok(EXIT_VIOLATION)
    }
}

#[derive(Serialize)]
struct CrossCheck {
    mu_direct: f64,
    status_direct: MuStatus,
    rel_tol: f64,
    agree: bool,
}

#[derive(Serialize)]
struct MuBody<'a> {
    #[serde(flatten)]
    result: &'a MuResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_check: Option<CrossCheck>,
}

pub fn cmd_mu(a: &MuArgs) -> CmdResult {
    let data = a.data.load()?;
    let result = mu::compute_mu(&data, a.budget, a.rank_tol)?;
    let cross_check = if a.cross_check {
        let direct = mu::compute_mu_direct(&data, a.budget)?;
        Some(CrossCheck {
            mu_direct: direct.mu,
            status_direct: direct.status,
            rel_tol: CROSS_CHECK_TOL,
            agree: mu::agree(&result, &direct, CROSS_CHECK_TOL),
        })
    } else {
        None
    };
    let agree = cross_check.as_ref().is_none_or(|c| c.agree);
    emit(a.out.as_deref(), "mu", MuBody { result: &result, cross_check })?;
    if agree {
        Ok(EXIT_OK)
    } else {
        eprintln!("sketchreg: the two LP formulations disagree");
        Ok(EXIT_VIOLATION)
    }
}

#[derive(Serialize)]
struct LowrankBody {
    mode: &'static str,
    n: usize,
    d: usize,
    k: Option<usize>,
    beta_source: String,
    #[serde(flatten)]
    gap: LossGap,
    ratio: f64,
    holds: bool,
    /// σ_{k+1}(X), computed from the spectrum of X.
    sigma_k1: Option<f64>,
    achieved_ratio: Option<f64>,
    closed_form_ratio: Option<f64>,
}

impl LowrankData {
    fn to_data_args(&self) -> Result<DataArgs, Failure> {
        Ok(DataArgs {
            data: self.data.clone().ok_or_else(|| Failure::input("lowrank needs --data or --tightness"))?,
            format: self.format,
            header: self.header,
            label_column: self.label_column,
            recode01: self.recode01,
            d_hint: self.d_hint,
        })
    }
}

/// Parse `fit` or `random:SEED`.
fn lowrank_beta(spec: &str, data: &DataSet, lambda: f64, cfg: &SolveConfig) -> Result<Vec<f64>, Failure> {
    if spec == "fit" {
        check_lambda(lambda, false)?;
        let fit = solver::require_converged(solver::fit_full(data, lambda, cfg)?, "full fit")?;
        return Ok(fit.beta);
    }
    let seed = spec
        .strip_prefix("random:")
        .and_then(|s| s.parse::<u64>().ok())
        .ok_or_else(|| Failure::input(format!("--beta must be `fit` or `random:SEED`, got {spec:?}")))?;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = datagen::rng_for(seed, MISC_STREAM);
    Ok((0..data.d()).map(|_| StandardNormal.sample(&mut rng)).collect())
}

pub fn cmd_lowrank(a: &LowrankArgs) -> CmdResult {
    let body = if a.tightness {
        let t = TightnessInstance::new(a.n, a.x, a.s)?;
        let data = t.data();
        let gap = bounds::lowrank_loss_gap(&data, &t.x_tilde, &t.beta)?;
        LowrankBody {
            mode: "tightness",
            n: t.n(),
            d: t.n(),
            k: None,
            beta_source: "ones".into(),
            ratio: gap.ratio(),
            holds: gap.holds(),
            gap,
            sigma_k1: None,
            achieved_ratio: Some(t.achieved_ratio()?),
            closed_form_ratio: Some(t.closed_form_ratio()),
        }
    } else {
        let data_args = a
            .data
            .as_ref()
            .ok_or_else(|| Failure::input("lowrank needs --data or --tightness"))?
            .to_data_args()?;
        let k = a.k.ok_or_else(|| Failure::input("lowrank needs --k"))?;
        let cfg = a.solver.config()?;
        let data = data_args.load()?;
        let (n, d) = data.x.shape();
        let full_rank = n.min(d);
        let x_tilde = if k >= full_rank { data.x.clone() } else { low_rank_approx(&data.x, k)? };
        let sigma_k1 = if k >= full_rank {
            0.0
        } else {
            top_k_right_singular_vectors(&data.x, k + 1, SVD_TOL)?.singular_values[k]
        };
        let beta = lowrank_beta(&a.beta, &data, a.lambda, &cfg)?;
        let gap = bounds::lowrank_loss_gap(&data, &x_tilde, &beta)?;
        LowrankBody {
            mode: "approx",
            n,
            d,
            k: Some(k),
            beta_source: a.beta.clone(),
            ratio: gap.ratio(),
            holds: gap.holds(),
            gap,
            sigma_k1: Some(sigma_k1),
            achieved_ratio: None,
            closed_form_ratio: None,
        }
    };
    let holds = body.holds;
    emit(a.out.as_deref(), "lowrank", body)?;
    if holds {
        Ok(EXIT_OK)
    } else {
        eprintln!("sketchreg: loss gap exceeds its budget");
        Ok(EXIT_VIOLATION)
    }
}

#[derive(Serialize)]
struct GenBody<'a> {
    path: String,
    format: &'static str,
    standard_form: bool,
    config: &'a GenerativeConfig,
}

pub fn cmd_gen(a: &GenArgs) -> CmdResult {
    let mut cfg = GenerativeConfig::isotropic(a.n, a.d, a.beta_norm, a.seed);
    cfg.sigma_x = a.sigma_x;
    if let Some(v) = &a.diag {
        cfg.covariance = Covariance::Diagonal(v.clone());
    }
    let mut data = datagen::generate_generative(&cfg)?;
    if a.standard_form {
        data = datagen::to_standard_form(&data);
    }
    let file = File::create(&a.out).map_err(|e| Failure::input(format!("cannot write {}: {e}", a.out.display())))?;
    let written = match a.format {
        Format::Csv => datagen::write_csv(&data, file, a.header).map_err(Failure::from),
        Format::Libsvm => datagen::write_libsvm(&data, io::BufWriter::new(file))
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", a.out.display()))),
    };
    written?;
    let body = GenBody {
        path: a.out.display().to_string(),
        format: match a.format {
            Format::Csv => "csv",
            Format::Libsvm => "libsvm",
        },
        standard_form: a.standard_form,
        config: &cfg,
    };
    emit(None, "gen", body)?;
    Ok(EXIT_OK)
}
