//! Computable bounds on the sketching forward error and on low-rank loss
//! perturbations.
//!
//! With `β_d` the full optimum and `β_k` the optimum of the problem sketched
//! by `P_k` (same regularization λ), define
//!
//! ```text
//! Φ = β_dᵀ (I − P_kP_kᵀ) Xᵀ D_y w(P_kβ_k),   w(β)ᵢ = σ(−yᵢxᵢᵀβ).
//! ```
//!
//! Strong convexity gives `‖P_kβ_k − β_d‖² ≤ 2Φ/λ`; smoothness gives a lower
//! bound of the form `Φ/α` with `α = ¼‖X‖₂² + λ`. [`BoundReport`] carries
//! both, plus the `4Φ/(‖X‖₂² + λ)` form whose ratio to the upper bound is
//! exactly `(‖X‖₂² + λ)/(2λ)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::glm::{self, softplus, DataSet, GlmSpec};
use crate::linalg::{dot, norm2, spectral_norm, symmetric_eigen, sub_vec, Matrix};
use crate::sketch::{SketchMatrix, SVD_TOL};
use crate::solver::{self, require_converged, FitResult, SolveConfig};

/// `max(1e−8, 1e−6·(1 + upper))`
pub fn default_slack(upper: f64) -> f64 {
    1e-8f64.max(1e-6 * (1.0 + upper))
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub phi: f64,
    /// `2Φ/λ`
    pub upper: f64,
    /// `4Φ/(‖X‖₂² + λ)`
    pub lower: f64,
    /// `Φ/alpha_smooth`
    pub lower_smooth: f64,
    /// `‖P_kβ_k − β_d‖₂²`
    pub actual: f64,
    pub spectral_norm_sq: f64,
    pub lambda: f64,
    pub alpha_smooth: f64,
    pub sandwich_ok: bool,
    pub slack: f64,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub beta_d: Vec<f64>,
    pub beta_k: Vec<f64>,
}

impl BoundReport {
    /// `upper/lower`, which equals `(‖X‖₂² + λ)/(2λ)` whenever Φ ≠ 0.
    pub fn ratio(&self) -> f64 {
        self.upper / self.lower
    }

    pub fn upper_ok(&self) -> bool {
        self.actual <= self.upper + self.slack
    }

    pub fn lower_ok(&self) -> bool {
        self.lower - self.slack <= self.actual
    }
}

fn check_lambda_positive(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

fn check_sketch(sketch: &SketchMatrix, d: usize, beta_d: &[f64], beta_k: &[f64]) -> Result<()> {
    if sketch.d() != d || beta_d.len() != d || beta_k.len() != sketch.k() {
        return Err(Error::DimensionMismatch(format!(
            "sketch {}x{}, beta_d {}, beta_k {}, data d = {d}",
            sketch.d(),
            sketch.k(),
            beta_d.len(),
            beta_k.len()
        )));
    }
    Ok(())
}

/// `rᵀ Xᵀ v` with `r = (I − PPᵀ)β_d`; `v` holds the per-row signed weights.
fn phi_from_weights(x: &Matrix, sketch: &SketchMatrix, beta_d: &[f64], v: &[f64]) -> f64 {
    let r = sketch.residual(beta_d);
    dot(&r, &x.tr_matvec(v))
}

/// Φ for logistic regression.
pub fn phi(data: &DataSet, sketch: &SketchMatrix, beta_d: &[f64], beta_k: &[f64]) -> Result<f64> {
    check_sketch(sketch, data.d(), beta_d, beta_k)?;
    let w = glm::label_weights_raw(&data.x, &data.y, &sketch.lift(beta_k));
    let v: Vec<f64> = w.iter().zip(&data.y).map(|(w, y)| w * y).collect();
    Ok(phi_from_weights(&data.x, sketch, beta_d, &v))
}

/// GLM analogue of Φ with weights `yᵢ − ψ′(xᵢᵀP_kβ_k)` on recoded responses.
pub fn glm_phi(
    x: &Matrix,
    y: &[f64],
    spec: &GlmSpec,
    sketch: &SketchMatrix,
    beta_d: &[f64],
    beta_k: &[f64],
) -> Result<f64> {
    check_sketch(sketch, x.cols(), beta_d, beta_k)?;
    let r = spec.response(y)?;
    let resid = glm::glm_residuals_raw(x, &r, spec, &sketch.lift(beta_k));
    let v: Vec<f64> = resid.iter().map(|e| -e).collect();
    Ok(phi_from_weights(x, sketch, beta_d, &v))
}

/// `(2(λ − μ)/λ)(‖β_k‖² − β_dᵀP_kβ_k)`, the extra term that appears when the
/// sketched problem is regularized with μ ≠ λ. Informational only.
pub fn regularization_mismatch_term(
    lambda: f64,
    mu: f64,
    sketch: &SketchMatrix,
    beta_d: &[f64],
    beta_k: &[f64],
) -> Result<f64> {
    check_lambda_positive(lambda)?;
    check_sketch(sketch, sketch.d(), beta_d, beta_k)?;
    let lifted = sketch.lift(beta_k);
    Ok(2.0 * (lambda - mu) / lambda * (dot(beta_k, beta_k) - dot(beta_d, &lifted)))
}

/// Everything but the fits: assemble a report from Φ and the two optima.
pub fn assemble_report(
    phi: f64,
    spectral_norm_sq: f64,
    alpha_smooth: f64,
    lambda: f64,
    sketch: &SketchMatrix,
    n: usize,
    full: &FitResult,
    sketched: &FitResult,
) -> BoundReport {
    let lifted = sketch.lift(&sketched.beta);
    let diff = sub_vec(&lifted, &full.beta);
    let actual = dot(&diff, &diff);
    let upper = 2.0 * phi / lambda;
    let lower = 4.0 * phi / (spectral_norm_sq + lambda);
    let slack = default_slack(upper);
    let mut r = BoundReport {
        phi,
        upper,
        lower,
        lower_smooth: phi / alpha_smooth,
        actual,
        spectral_norm_sq,
        lambda,
        alpha_smooth,
        sandwich_ok: false,
        slack,
        n,
        d: sketch.d(),
        k: sketch.k(),
        beta_d: full.beta.clone(),
        beta_k: sketched.beta.clone(),
    };
    r.sandwich_ok = r.lower_ok() && r.upper_ok();
    r
}

/// `‖X‖₂²`
pub fn spectral_norm_sq(x: &Matrix) -> Result<f64> {
    let s = spectral_norm(x, SVD_TOL)?;
    Ok(s * s)
}

/// Logistic report from already-computed optima (both at regularization λ).
pub fn report_from_fits(
    data: &DataSet,
    sketch: &SketchMatrix,
    lambda: f64,
    full: &FitResult,
    sketched: &FitResult,
) -> Result<BoundReport> {
    check_lambda_positive(lambda)?;
    let phi = phi(data, sketch, &full.beta, &sketched.beta)?;
    let s2 = spectral_norm_sq(&data.x)?;
    Ok(assemble_report(phi, s2, 0.25 * s2 + lambda, lambda, sketch, data.n(), full, sketched))
}

/// Fit both problems at λ (the sketched one with μ = λ) and evaluate the
/// sandwich.
pub fn forward_error_report(
    data: &DataSet,
    sketch: &SketchMatrix,
    lambda: f64,
    cfg: &SolveConfig,
) -> Result<BoundReport> {
    check_lambda_positive(lambda)?;
    let full = require_converged(solver::fit_full(data, lambda, cfg)?, "full fit")?;
    let sketched = require_converged(solver::fit_sketched(data, sketch, lambda, cfg)?, "sketched fit")?;
    report_from_fits(data, sketch, lambda, &full, &sketched)
}

/// GLM version: `alpha_smooth = α_u‖X‖₂² + λ`, and both `lower` and
/// `lower_smooth` are `Φ/alpha_smooth`.
pub fn glm_forward_error_report(
    x: &Matrix,
    y: &[f64],
    spec: &GlmSpec,
    sketch: &SketchMatrix,
    lambda: f64,
    cfg: &SolveConfig,
) -> Result<BoundReport> {
    check_lambda_positive(lambda)?;
    if !spec.alpha_u.is_finite() {
        return Err(Error::InvalidInput(format!("{}: alpha_u must be finite", spec.name)));
    }
    let full = require_converged(solver::fit_glm(x, y, spec, lambda, cfg)?, "full GLM fit")?;
    let sketched = require_converged(
        solver::fit_glm_sketched(x, y, spec, sketch, lambda, cfg)?,
        "sketched GLM fit",
    )?;
    let phi = glm_phi(x, y, spec, sketch, &full.beta, &sketched.beta)?;
    let s2 = spectral_norm_sq(x)?;
    let alpha = spec.alpha_u * s2 + lambda;
    let mut r = assemble_report(phi, s2, alpha, lambda, sketch, x.rows(), &full, &sketched);
    r.lower = r.lower_smooth;
    r.sandwich_ok = r.lower_ok() && r.upper_ok();
    Ok(r)
}

/// `|L(β;X) − L(β;X̃)|` at λ = 0 against `√n‖X − X̃‖₂‖β‖₂`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LossGap {
    pub gap: f64,
    pub budget: f64,
    pub spectral_diff: f64,
}

impl LossGap {
    pub fn holds(&self) -> bool {
        self.gap <= self.budget
    }

    /// `gap/budget`; zero when both vanish.
    pub fn ratio(&self) -> f64 {
        if self.budget == 0.0 {
            0.0
        } else {
            self.gap / self.budget
        }
    }
}

pub fn lowrank_loss_gap(data: &DataSet, x_tilde: &Matrix, beta: &[f64]) -> Result<LossGap> {
    if x_tilde.shape() != data.x.shape() {
        return Err(Error::DimensionMismatch(format!(
            "X is {:?}, X_tilde is {:?}",
            data.x.shape(),
            x_tilde.shape()
        )));
    }
    let l = glm::logistic_loss(data, beta, 0.0)?;
    let lt = glm::logistic_loss_raw(x_tilde, &data.y, beta, 0.0);
    let spectral_diff = spectral_norm(&data.x.sub(x_tilde), SVD_TOL)?;
    Ok(LossGap {
        gap: (l - lt).abs(),
        budget: (data.n() as f64).sqrt() * spectral_diff * norm2(beta),
        spectral_diff,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossEntropyReport {
    /// `pᵢ = 1/(1 + e^{yᵢxᵢᵀP_kβ_k})`
    pub p: Vec<f64>,
    /// `qᵢ = 1/(1 + e^{yᵢxᵢᵀ(I − P_kP_kᵀ)β_d})`
    pub q: Vec<f64>,
    /// `Σᵢ H(pᵢ, qᵢ)`, natural log.
    pub h_total: f64,
    /// `(2/λ)·h_total`
    pub bound: f64,
    /// `(2/λ)Φ`, the quantity the cross-entropy bound dominates.
    pub phi_bound: f64,
    pub lambda: f64,
    /// Some pᵢ or qᵢ rounded to 0 or 1 and was clamped in `p`/`q`.
    pub clamped: bool,
}

impl CrossEntropyReport {
    /// `(2/λ)Φ ≤ (2/λ)H + tol`
    pub fn chain_ok(&self, tol: f64) -> bool {
        self.phi_bound <= self.bound + tol
    }
}

/// Cross-entropy bound. Entropies are evaluated through softplus, so they
/// stay exact even where `p` or `q` round to 0 or 1.
pub fn cross_entropy_report(
    data: &DataSet,
    sketch: &SketchMatrix,
    beta_d: &[f64],
    beta_k: &[f64],
    lambda: f64,
) -> Result<CrossEntropyReport> {
    check_lambda_positive(lambda)?;
    check_sketch(sketch, data.d(), beta_d, beta_k)?;
    let r = sketch.residual(beta_d);
    let lifted = sketch.lift(beta_k);
    let u = glm::margins_raw(&data.x, &data.y, &r);
    let m = glm::margins_raw(&data.x, &data.y, &lifted);
    let eps = f64::EPSILON;
    let mut clamped = false;
    let mut clamp = |v: f64| {
        if v < eps || v > 1.0 - eps {
            clamped = true;
            v.clamp(eps, 1.0 - eps)
        } else {
            v
        }
    };
    let mut p = Vec::with_capacity(data.n());
    let mut q = Vec::with_capacity(data.n());
    let mut h_total = 0.0;
    let mut phi = 0.0;
    for i in 0..data.n() {
        let pi = glm::sigma(-m[i]);
        // −ln q = softplus(u), −ln(1 − q) = softplus(−u)
        h_total += pi * softplus(u[i]) + (1.0 - pi) * softplus(-u[i]);
        phi += pi * u[i];
        p.push(clamp(pi));
        q.push(clamp(glm::sigma(-u[i])));
    }
    Ok(CrossEntropyReport {
        p,
        q,
        h_total,
        bound: 2.0 / lambda * h_total,
        phi_bound: 2.0 / lambda * phi,
        lambda,
        clamped,
    })
}

/// Order-of-magnitude coreset size `⌈d·μ²/ε²⌉` (constant taken as 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "rows")]
pub enum CoresetSize {
    Rows(u64),
    Unbounded,
}

pub fn coreset_size_estimate(d: usize, mu: f64, eps: f64) -> Result<CoresetSize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("eps must lie in (0, 1), got {eps}")));
    }
    if mu.is_infinite() {
        return Ok(CoresetSize::Unbounded);
    }
    if !(mu >= 0.0) {
        return Err(Error::InvalidInput(format!("mu must be nonnegative, got {mu}")));
    }
    let raw = d as f64 * mu * mu / (eps * eps);
    // keep exact instantiations like 10·1/0.1² = 1000 from rounding up
    let nearest = raw.round();
    let rows = if (raw - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        raw.ceil()
    };
    Ok(CoresetSize::Rows(rows as u64))
}

/// Worst relative error `|f(β) − L(β)|/L(β)` over the probes, where `f` is
/// the weighted loss on the selected rows and `L` the full loss (λ = 0).
pub fn coreset_relative_error(data: &DataSet, rows: &[usize], weights: &[f64], probes: &[Vec<f64>]) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("coreset has no rows".into()));
    }
    if probes.is_empty() {
        return Err(Error::InvalidInput("need at least one probe".into()));
    }
    if weights.len() != rows.len() {
        return Err(Error::DimensionMismatch(format!("{} weights for {} rows", weights.len(), rows.len())));
    }
    let mut seen = vec![false; data.n()];
    for &r in rows {
        if r >= data.n() {
            return Err(Error::InvalidInput(format!("row {r} out of range")));
        }
        if std::mem::replace(&mut seen[r], true) {
            return Err(Error::InvalidInput(format!("duplicate row {r}")));
        }
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidInput("weights must be nonnegative".into()));
    }
    let mut worst = 0.0f64;
    for beta in probes {
        let full = glm::logistic_loss(data, beta, 0.0)?;
        let f: f64 = rows
            .iter()
            .zip(weights)
            .map(|(&i, &w)| w * softplus(-data.y[i] * dot(data.x.row(i), beta)))
            .sum();
        worst = worst.max((f - full).abs() / full);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentStatus {
    Checked,
    Skipped,
}

/// λ = 0 sandwich with an empirical strong-convexity constant.
#[derive(Debug, Clone, Serialize)]
pub struct SegmentCheck {
    pub status: SegmentStatus,
    /// Why the check was skipped.
    pub reason: Option<String>,
    /// Smallest Hessian eigenvalue along the segment.
    pub alpha_hat: f64,
    /// `¼‖X‖₂²`
    pub smoothness: f64,
    pub phi: f64,
    pub actual: f64,
    /// `(2/α̂)Φ`
    pub upper: f64,
    /// `Φ/(¼‖X‖₂²)`
    pub lower: f64,
    pub tolerance: f64,
    pub upper_ok: bool,
    pub lower_ok: bool,
}

pub const SEGMENT_POINTS: usize = 101;
pub const SEGMENT_TOLERANCE: f64 = 0.05;

fn skipped(reason: String) -> SegmentCheck {
    SegmentCheck {
        status: SegmentStatus::Skipped,
        reason: Some(reason),
        alpha_hat: f64::NAN,
        smoothness: f64::NAN,
        phi: f64::NAN,
        actual: f64::NAN,
        upper: f64::NAN,
        lower: f64::NAN,
        tolerance: SEGMENT_TOLERANCE,
        upper_ok: false,
        lower_ok: false,
    }
}

/// Fits both problems at λ = 0, samples the Hessian at 101 equispaced points
/// of `P_kβ_k + s(β_d − P_kβ_k)`, `s ∈ [0, 2]`, and checks
/// `actual ≤ (2/α̂)Φ·1.05` and `actual ≥ Φ/(¼‖X‖₂²)·0.95`.
pub fn segment_constant_check(data: &DataSet, sketch: &SketchMatrix, cfg: &SolveConfig) -> Result<SegmentCheck> {
    let full = match solver::fit_full(data, 0.0, cfg) {
        Ok(f) if f.converged => f,
        Ok(f) => return Ok(skipped(format!("full fit stopped after {} iterations", f.iterations))),
        Err(e @ (Error::Separable(_) | Error::NonConvergence { .. })) => return Ok(skipped(e.to_string())),
        Err(e) => return Err(e),
    };
    let sketched = match solver::fit_sketched(data, sketch, 0.0, cfg) {
        Ok(f) if f.converged => f,
        Ok(f) => return Ok(skipped(format!("sketched fit stopped after {} iterations", f.iterations))),
        Err(e @ (Error::Separable(_) | Error::NonConvergence { .. })) => return Ok(skipped(e.to_string())),
        Err(e) => return Err(e),
    };
    let phi = phi(data, sketch, &full.beta, &sketched.beta)?;
    let lifted = sketch.lift(&sketched.beta);
    let dir = sub_vec(&full.beta, &lifted);
    let actual = dot(&dir, &dir);
    let mut alpha_hat = f64::INFINITY;
    for i in 0..SEGMENT_POINTS {
        let s = 2.0 * i as f64 / (SEGMENT_POINTS - 1) as f64;
        let point: Vec<f64> = lifted.iter().zip(&dir).map(|(a, b)| a + s * b).collect();
        let h = glm::logistic_hessian_raw(&data.x, &data.y, &point, 0.0);
        let min_eig = *symmetric_eigen(&h).values.last().expect("nonempty spectrum");
        alpha_hat = alpha_hat.min(min_eig);
    }
    let smoothness = 0.25 * spectral_norm_sq(&data.x)?;
    let upper = 2.0 * phi / alpha_hat;
    let lower = phi / smoothness;
    Ok(SegmentCheck {
        status: SegmentStatus::Checked,
        reason: None,
        alpha_hat,
        smoothness,
        phi,
        actual,
        upper,
        lower,
        tolerance: SEGMENT_TOLERANCE,
        upper_ok: actual <= upper * (1.0 + SEGMENT_TOLERANCE),
        lower_ok: actual >= lower * (1.0 - SEGMENT_TOLERANCE),
    })
}
