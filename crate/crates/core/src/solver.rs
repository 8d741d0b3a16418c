//! Damped Newton minimization of the full, sketched and GLM objectives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::{self, DataSet, GlmSpec};
use crate::linalg::{axpy, cholesky, dot, norm2, Matrix};
use crate::sketch::SketchMatrix;

/// Backtracking (Armijo) line-search parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearch {
    pub shrink: f64,
    pub sufficient_decrease: f64,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self {
            shrink: 0.5,
            sufficient_decrease: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub grad_tol: f64,
    pub max_iters: usize,
    pub line_search: LineSearch,
    /// Starting point; zero when absent.
    pub init: Option<Vec<f64>>,
    /// At λ = 0, an iterate norm beyond this is taken as divergence along a
    /// separating ray.
    pub separable_norm_cap: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            max_iters: 200,
            line_search: LineSearch::default(),
            init: None,
            separable_norm_cap: 1e6,
        }
    }
}

impl SolveConfig {
    pub fn with_tol(grad_tol: f64) -> Self {
        Self {
            grad_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidInput(format!("grad_tol must be positive, got {}", self.grad_tol)));
        }
        let ls = self.line_search;
        if !(ls.shrink > 0.0 && ls.shrink < 1.0) {
            return Err(Error::InvalidInput(format!("line-search shrink must be in (0, 1), got {}", ls.shrink)));
        }
        if !(ls.sufficient_decrease > 0.0 && ls.sufficient_decrease < 1.0) {
            return Err(Error::InvalidInput(format!(
                "sufficient-decrease constant must be in (0, 1), got {}",
                ls.sufficient_decrease
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub beta: Vec<f64>,
    pub loss: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub lambda: f64,
    /// Loss after each accepted step, starting with the initial point.
    #[serde(skip)]
    pub loss_trace: Vec<f64>,
}

/// A smooth convex objective the Newton driver can minimize.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, beta: &[f64]) -> f64;
    fn gradient(&self, beta: &[f64]) -> Vec<f64>;
    fn hessian(&self, beta: &[f64]) -> Matrix;
    fn lambda(&self) -> f64;

    /// Proof that no finite minimizer exists, if one is visible at `beta`.
    fn divergence_certificate(&self, _beta: &[f64]) -> Option<String> {
        None
    }
}

/// Regularized logistic loss on an arbitrary design (full or sketched).
pub struct LogisticObjective<'a> {
    pub x: &'a Matrix,
    pub y: &'a [f64],
    pub lambda: f64,
}

impl Objective for LogisticObjective<'_> {
    fn dim(&self) -> usize {
        self.x.cols()
    }

    fn value(&self, beta: &[f64]) -> f64 {
        glm::logistic_loss_raw(self.x, self.y, beta, self.lambda)
    }

    fn gradient(&self, beta: &[f64]) -> Vec<f64> {
        glm::logistic_gradient_raw(self.x, self.y, beta, self.lambda)
    }

    fn hessian(&self, beta: &[f64]) -> Matrix {
        glm::logistic_hessian_raw(self.x, self.y, beta, self.lambda)
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn divergence_certificate(&self, beta: &[f64]) -> Option<String> {
        if self.lambda > 0.0 {
            return None;
        }
        let m = glm::margins_raw(self.x, self.y, beta);
        let all_nonneg = m.iter().all(|&v| v >= 0.0);
        let some_pos = m.iter().any(|&v| v > 0.0);
        (all_nonneg && some_pos).then(|| "an iterate classifies every point with nonnegative margin".to_string())
    }
}

/// GLM loss on already-recoded responses.
pub struct GlmObjective<'a> {
    pub x: &'a Matrix,
    pub r: &'a [f64],
    pub spec: GlmSpec,
    pub lambda: f64,
}

impl Objective for GlmObjective<'_> {
    fn dim(&self) -> usize {
        self.x.cols()
    }

    fn value(&self, beta: &[f64]) -> f64 {
        glm::glm_loss_raw(self.x, self.r, &self.spec, beta, self.lambda)
    }

    fn gradient(&self, beta: &[f64]) -> Vec<f64> {
        glm::glm_gradient_raw(self.x, self.r, &self.spec, beta, self.lambda)
    }

    fn hessian(&self, beta: &[f64]) -> Matrix {
        glm::glm_hessian_raw(self.x, &self.spec, beta, self.lambda)
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    Ok(())
}

/// Newton's method with Armijo backtracking. Falls back to a gradient step
/// when the Hessian is not numerically positive definite.
pub fn minimize(obj: &dyn Objective, cfg: &SolveConfig) -> Result<FitResult> {
    cfg.validate()?;
    let d = obj.dim();
    let mut beta = match &cfg.init {
        Some(v) if v.len() != d => {
            return Err(Error::DimensionMismatch(format!("init has length {}, expected {d}", v.len())))
        }
        Some(v) => v.clone(),
        None => vec![0.0; d],
    };
    let mut f = obj.value(&beta);
    let mut g = obj.gradient(&beta);
    let mut gn = norm2(&g);
    let mut trace = vec![f];
    let ls = cfg.line_search;
    let mut iterations = 0;

    while gn > cfg.grad_tol && iterations < cfg.max_iters {
        if obj.lambda() == 0.0 {
            if let Some(why) = obj.divergence_certificate(&beta) {
                return Err(Error::Separable(why));
            }
            if norm2(&beta) > cfg.separable_norm_cap {
                return Err(Error::Separable(format!(
                    "iterate norm exceeded {:e} with gradient norm {gn:e}",
                    cfg.separable_norm_cap
                )));
            }
        }
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        let newton = cholesky(&obj.hessian(&beta)).ok().map(|c| c.solve(&neg_g));
        let dir = match newton {
            Some(p) if p.iter().all(|v| v.is_finite()) && dot(&p, &g) < 0.0 => p,
            _ => neg_g,
        };
        let slope = dot(&g, &dir);

        // Once the predicted decrease is below the rounding noise of the loss,
        // Armijo comparisons are meaningless; a full step that shrinks the
        // gradient is taken instead.
        let noise = 1e-12 * f.abs().max(1.0);
        if -slope <= noise {
            let mut cand = beta.clone();
            axpy(1.0, &dir, &mut cand);
            let gc = obj.gradient(&cand);
            let fc = obj.value(&cand);
            if norm2(&gc) < gn && fc <= f + noise {
                beta = cand;
                f = fc;
                g = gc;
                gn = norm2(&g);
                trace.push(f);
                iterations += 1;
                continue;
            }
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..80 {
            let mut cand = beta.clone();
            axpy(t, &dir, &mut cand);
            let fc = obj.value(&cand);
            if fc <= f + ls.sufficient_decrease * t * slope {
                accepted = Some((cand, fc));
                break;
            }
            t *= ls.shrink;
        }
        let Some((cand, fc)) = accepted else {
            break;
        };
        let gc = obj.gradient(&cand);
        beta = cand;
        f = fc;
        g = gc;
        gn = norm2(&g);
        trace.push(f);
        iterations += 1;
    }

    Ok(FitResult {
        converged: gn <= cfg.grad_tol,
        beta,
        loss: f,
        grad_norm: gn,
        iterations,
        lambda: obj.lambda(),
        loss_trace: trace,
    })
}

/// Minimize the full regularized logistic loss.
pub fn fit_full(data: &DataSet, lambda: f64, cfg: &SolveConfig) -> Result<FitResult> {
    check_lambda(lambda)?;
    minimize(
        &LogisticObjective {
            x: &data.x,
            y: &data.y,
            lambda,
        },
        cfg,
    )
}

/// Minimize the logistic loss over `β ∈ Rᵏ` on the design `X P_k` with
/// regularization `mu_reg`.
pub fn fit_sketched(data: &DataSet, sketch: &SketchMatrix, mu_reg: f64, cfg: &SolveConfig) -> Result<FitResult> {
    check_lambda(mu_reg)?;
    if sketch.d() != data.d() {
        return Err(Error::DimensionMismatch(format!(
            "sketch has {} rows, data has {} features",
            sketch.d(),
            data.d()
        )));
    }
    let xp = data.x.matmul(sketch.matrix());
    minimize(
        &LogisticObjective {
            x: &xp,
            y: &data.y,
            lambda: mu_reg,
        },
        cfg,
    )
}

/// Minimize a GLM loss. `y` is validated and recoded per `spec.label_domain`.
pub fn fit_glm(x: &Matrix, y: &[f64], spec: &GlmSpec, lambda: f64, cfg: &SolveConfig) -> Result<FitResult> {
    check_lambda(lambda)?;
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch(format!("{} responses for {} rows", y.len(), x.rows())));
    }
    let r = spec.response(y)?;
    minimize(
        &GlmObjective {
            x,
            r: &r,
            spec: *spec,
            lambda,
        },
        cfg,
    )
}

/// GLM fit restricted to `range(P_k)`; returns `β_k ∈ Rᵏ`.
pub fn fit_glm_sketched(
    x: &Matrix,
    y: &[f64],
    spec: &GlmSpec,
    sketch: &SketchMatrix,
    mu_reg: f64,
    cfg: &SolveConfig,
) -> Result<FitResult> {
    if sketch.d() != x.cols() {
        return Err(Error::DimensionMismatch(format!(
            "sketch has {} rows, data has {} features",
            sketch.d(),
            x.cols()
        )));
    }
    fit_glm(&x.matmul(sketch.matrix()), y, spec, mu_reg, cfg)
}

/// Turn an unconverged fit into an error.
pub fn require_converged(fit: FitResult, what: &'static str) -> Result<FitResult> {
    if fit.converged {
        Ok(fit)
    } else {
        Err(Error::NonConvergence {
            what,
            iterations: fit.iterations,
        })
    }
}
