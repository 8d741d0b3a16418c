//! `sketchreg experiment`: a λ × sketch × seed grid driven by a TOML file.
//!
//! ```toml
//! lambdas = [0.1, 1.0]
//! sketches = ["pca:2", "rand:3"]
//! seeds = [0, 1, 2]
//! output = "results.csv"     # relative to this file; stdout if absent
//!
//! [data]
//! kind = "generative"        # or "csv" / "libsvm" with a `path`
//! n = 200
//! d = 10
//! ```
//!
//! For generated data the seed picks the instance; for file data it only
//! seeds `rand:k` sketches that carry no seed of their own. Rows come out
//! sorted by (λ, sketch position in the config, seed), so reruns are
//! byte-identical unless `--timings` is set.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use sketchreg_core::bounds::{self, BoundReport};
use sketchreg_core::datagen::{self, GenerativeConfig, LabelCoding};
use sketchreg_core::glm::DataSet;
use sketchreg_core::mu::{self, MuResult};
use sketchreg_core::solver::SolveConfig;

use crate::{write_output, ExperimentArgs, Failure, SketchSpec, EXIT_OK, EXIT_VIOLATION};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub sketches: Vec<String>,
    pub lambdas: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub solver: SolveConfig,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Compute μ once per instance.
    #[serde(default = "yes")]
    pub mu: bool,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Generative {
        n: usize,
        d: usize,
        #[serde(default = "one")]
        beta_norm: f64,
        #[serde(default = "one")]
        sigma_x: f64,
    },
    Csv {
        path: PathBuf,
        #[serde(default)]
        header: bool,
        #[serde(default)]
        label_column: usize,
        #[serde(default)]
        recode01: bool,
    },
    Libsvm {
        path: PathBuf,
        #[serde(default)]
        d_hint: Option<usize>,
        #[serde(default)]
        recode01: bool,
    },
}

fn coding(recode01: bool) -> LabelCoding {
    if recode01 {
        LabelCoding::ZeroOne
    } else {
        LabelCoding::PlusMinusOne
    }
}

impl DataSource {
    fn is_generated(&self) -> bool {
        matches!(self, DataSource::Generative { .. })
    }

    fn instance_id(&self, seed: u64) -> String {
        match self {
            DataSource::Generative { n, d, .. } => format!("gen-n{n}-d{d}-s{seed}"),
            DataSource::Csv { path, .. } | DataSource::Libsvm { path, .. } => {
                let stem = path.file_stem().map_or("data".into(), |s| s.to_string_lossy());
                format!("{stem}-s{seed}")
            }
        }
    }

    fn load(&self, seed: u64) -> sketchreg_core::Result<DataSet> {
        match self {
            DataSource::Generative { n, d, beta_norm, sigma_x } => {
                let mut cfg = GenerativeConfig::isotropic(*n, *d, *beta_norm, seed);
                cfg.sigma_x = *sigma_x;
                datagen::generate_generative(&cfg)
            }
            DataSource::Csv {
                path,
                header,
                label_column,
                recode01,
            } => datagen::load_csv(path, *header, *label_column, coding(*recode01)),
            DataSource::Libsvm { path, d_hint, recode01 } => datagen::load_libsvm(path, *d_hint, coding(*recode01)),
        }
    }

    fn resolve_paths(&mut self, base: &Path) {
        if let DataSource::Csv { path, .. } | DataSource::Libsvm { path, .. } = self {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }
}

/// A parsed and validated config with paths made absolute.
#[derive(Debug, Clone)]
pub struct Plan {
    pub config: ExperimentConfig,
    pub sketches: Vec<SketchSpec>,
}

impl Plan {
    pub fn from_file(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|f| Failure::input(format!("{}: {}", path.display(), f.message)))
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, Failure> {
        let mut config: ExperimentConfig = toml::from_str(text).map_err(|e| Failure::input(e.to_string()))?;
        config.data.resolve_paths(base);
        if let Some(out) = &mut config.output {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        if config.lambdas.is_empty() {
            return Err(Failure::input("lambdas: need at least one value"));
        }
        if let Some(l) = config.lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Failure::input(format!("lambdas: every value must be positive and finite, got {l}")));
        }
        if config.seeds.is_empty() {
            return Err(Failure::input("seeds: need at least one value"));
        }
        if config.sketches.is_empty() {
            return Err(Failure::input("sketches: need at least one entry"));
        }
        config.solver.validate().map_err(|e| Failure::input(format!("solver: {e}")))?;
        let sketches = config
            .sketches
            .iter()
            .map(|s| s.parse::<SketchSpec>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::input(format!("sketches: {e}")))?;
        if let DataSource::Generative { n, d, .. } = config.data {
            if n == 0 || d == 0 {
                return Err(Failure::input("data: n and d must be positive"));
            }
            check_k(&sketches, d)?;
        }
        Ok(Self { config, sketches })
    }
}

fn check_k(sketches: &[SketchSpec], d: usize) -> Result<(), Failure> {
    match sketches.iter().find(|s| s.k() >= d) {
        Some(s) => Err(Failure::input(format!("sketches: {s} needs k < d = {d}"))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone)]
pub struct Row {
    pub instance_id: String,
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub sketch_index: usize,
    pub sketch: String,
    pub report: BoundReport,
    pub mu: Option<MuResult>,
    pub runtime_ms: Option<f64>,
}

pub const HEADER: [&str; 19] = [
    "instance_id",
    "seed",
    "n",
    "d",
    "k",
    "lambda",
    "sketch",
    "phi",
    "lower",
    "lower_smooth",
    "actual",
    "upper",
    "ratio",
    "slack",
    "sandwich_ok",
    "spectral_norm_sq",
    "mu",
    "mu_status",
    "runtime_ms",
];

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

impl Row {
    fn record(&self) -> Vec<String> {
        let r = &self.report;
        let (mu, status) = match &self.mu {
            Some(m) => (num(m.mu), serde_name(&m.status)),
            None => (String::new(), String::new()),
        };
        vec![
            self.instance_id.clone(),
            self.seed.to_string(),
            self.n.to_string(),
            self.d.to_string(),
            r.k.to_string(),
            num(self.lambda),
            self.sketch.clone(),
            num(r.phi),
            num(r.lower),
            num(r.lower_smooth),
            num(r.actual),
            num(r.upper),
            num(r.ratio()),
            num(r.slack),
            r.sandwich_ok.to_string(),
            num(r.spectral_norm_sq),
            mu,
            status,
            self.runtime_ms.map(|t| format!("{t:.3}")).unwrap_or_default(),
        ]
    }
}

fn serde_name(status: &mu::MuStatus) -> String {
    match status {
        mu::MuStatus::Finite => "finite",
        mu::MuStatus::InfiniteSeparable => "infinite_separable",
        mu::MuStatus::DegenerateZeroRange => "degenerate_zero_range",
    }
    .into()
}

struct Instance {
    seed: u64,
    id: String,
    data: DataSet,
    mu: Option<MuResult>,
}

/// Every cell of the grid, sorted.
pub fn run_plan(plan: &Plan, timings: bool) -> Result<Vec<Row>, Failure> {
    let cfg = &plan.config;
    // file data is the same for every seed, so load (and solve μ) once
    let shared = if cfg.data.is_generated() {
        None
    } else {
        let data = cfg.data.load(0)?;
        check_k(&plan.sketches, data.d())?;
        let mu = if cfg.mu { Some(mu::compute_mu(&data, mu::DEFAULT_BUDGET, sketchreg_core::linalg::DEFAULT_RANK_TOL)?) } else { None };
        Some((data, mu))
    };
    let instances = cfg
        .seeds
        .par_iter()
        .map(|&seed| -> Result<Instance, Failure> {
            let (data, mu) = match &shared {
                Some((data, mu)) => (data.clone(), mu.clone()),
                None => {
                    let data = cfg.data.load(seed)?;
                    let mu = if cfg.mu {
                        Some(mu::compute_mu(&data, mu::DEFAULT_BUDGET, sketchreg_core::linalg::DEFAULT_RANK_TOL)?)
                    } else {
                        None
                    };
                    (data, mu)
                }
            };
            Ok(Instance {
                seed,
                id: cfg.data.instance_id(seed),
                data,
                mu,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut cells = Vec::new();
    for inst in &instances {
        for &lambda in &cfg.lambdas {
            for (idx, spec) in plan.sketches.iter().enumerate() {
                cells.push((inst, lambda, idx, spec));
            }
        }
    }
    let mut rows = cells
        .par_iter()
        .map(|&(inst, lambda, sketch_index, spec)| -> Result<Row, Failure> {
            let start = Instant::now();
            let sketch = spec.build(&inst.data, lambda, &cfg.solver, inst.seed)?;
            let report = bounds::forward_error_report(&inst.data, &sketch, lambda, &cfg.solver)?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            Ok(Row {
                instance_id: inst.id.clone(),
                seed: inst.seed,
                n: inst.data.n(),
                d: inst.data.d(),
                lambda,
                sketch_index,
                sketch: spec.to_string(),
                report,
                mu: inst.mu.clone(),
                runtime_ms: timings.then_some(elapsed),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by(|a, b| {
        a.lambda
            .total_cmp(&b.lambda)
            .then(a.sketch_index.cmp(&b.sketch_index))
            .then(a.seed.cmp(&b.seed))
    });
    Ok(rows)
}

pub fn to_csv(rows: &[Row]) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::input(format!("csv: {e}"));
    w.write_record(HEADER).map_err(io)?;
    for row in rows {
        w.write_record(row.record()).map_err(io)?;
    }
    w.into_inner().map_err(|e| Failure::input(format!("csv: {e}")))
}

pub fn cmd_experiment(a: &ExperimentArgs) -> Result<i32, Failure> {
    let plan = Plan::from_file(&a.config)?;
    let rows = run_plan(&plan, a.timings)?;
    let bytes = to_csv(&rows)?;
    let out = a.out.as_deref().or(plan.config.output.as_deref());
    write_output(out, &bytes)?;
    let bad: Vec<&Row> = rows.iter().filter(|r| !r.report.sandwich_ok).collect();
    if bad.is_empty() {
        return Ok(EXIT_OK);
    }
    for r in &bad {
        eprintln!(
            "sketchreg: sandwich violated for {} lambda={} sketch={}: lower {:e} > actual {:e} or actual > upper {:e}",
            r.instance_id, r.lambda, r.sketch, r.report.lower, r.report.actual, r.report.upper
        );
    }
    Ok(EXIT_VIOLATION)
}
