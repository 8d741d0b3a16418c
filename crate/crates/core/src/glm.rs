//! Losses, gradients and Hessians.
//!
//! Regularized logistic regression `Σ log(1 + e^{−yᵢxᵢᵀβ}) + (λ/2)‖β‖²`, the
//! exponential-family GLM loss `Σ −(yᵢxᵢᵀβ − ψ(xᵢᵀβ)) + (λ/2)‖β‖²`, and the
//! ReLU loss `Σ max(0, xᵢᵀβ)` used by the logistic→ReLU scaling check.
//!
//! The `*_raw` variants take a bare matrix and label slice so the solver can
//! run them on sketched design matrices without rebuilding a [`DataSet`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

/// Feature matrix with ±1 labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSet {
    pub x: Matrix,
    pub y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_names: Option<Vec<String>>,
}

impl DataSet {
    pub fn new(x: Matrix, y: Vec<f64>) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} rows",
                y.len(),
                x.rows()
            )));
        }
        if let Some(i) = y.iter().position(|&v| v != 1.0 && v != -1.0) {
            return Err(Error::InvalidInput(format!(
                "label {} at row {i} is not -1 or +1",
                y[i]
            )));
        }
        if !x.is_finite() {
            return Err(Error::InvalidInput("feature matrix has non-finite entries".into()));
        }
        Ok(Self {
            x,
            y,
            feature_names: None,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.d() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature names for {} columns",
                names.len(),
                self.d()
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    /// `D_y X`
    pub fn signed_features(&self) -> Matrix {
        self.x.scale_rows(&self.y)
    }

    /// Same labels, different features (e.g. a low-rank replacement).
    pub fn with_features(&self, x: Matrix) -> Result<Self> {
        if x.shape() != self.x.shape() {
            return Err(Error::DimensionMismatch(format!(
                "replacement features {:?} vs {:?}",
                x.shape(),
                self.x.shape()
            )));
        }
        Ok(Self {
            x,
            y: self.y.clone(),
            feature_names: self.feature_names.clone(),
        })
    }

    pub fn is_standard_form(&self) -> bool {
        self.y.iter().all(|&v| v == -1.0)
    }
}

/// Logistic function, evaluated without overflow for any finite input.
#[inline]
pub fn sigma(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + eᶻ)` as `max(z, 0) + log1p(e^{−|z|})`.
#[inline]
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn check_beta(x: &Matrix, beta: &[f64]) -> Result<()> {
    if beta.len() != x.cols() {
        return Err(Error::DimensionMismatch(format!(
            "beta has length {}, data has {} features",
            beta.len(),
            x.cols()
        )));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    Ok(())
}

/// Margins `yᵢ xᵢᵀβ`.
pub fn margins_raw(x: &Matrix, y: &[f64], beta: &[f64]) -> Vec<f64> {
    (0..x.rows()).map(|i| y[i] * dot(x.row(i), beta)).collect()
}

/// `w(β)ᵢ = σ(−yᵢxᵢᵀβ)`
pub fn label_weights_raw(x: &Matrix, y: &[f64], beta: &[f64]) -> Vec<f64> {
    margins_raw(x, y, beta).into_iter().map(|m| sigma(-m)).collect()
}

pub fn label_weights(data: &DataSet, beta: &[f64]) -> Result<Vec<f64>> {
    check_beta(&data.x, beta)?;
    Ok(label_weights_raw(&data.x, &data.y, beta))
}

pub fn logistic_loss_raw(x: &Matrix, y: &[f64], beta: &[f64], lambda: f64) -> f64 {
    let data: f64 = margins_raw(x, y, beta).into_iter().map(|m| softplus(-m)).sum();
    data + 0.5 * lambda * dot(beta, beta)
}

pub fn logistic_gradient_raw(x: &Matrix, y: &[f64], beta: &[f64], lambda: f64) -> Vec<f64> {
    // X̄ᵀw̄(β) with X̄ = −D_y X and w̄ᵢ = σ(x̄ᵢᵀβ) = σ(−yᵢxᵢᵀβ).
    let coef: Vec<f64> = margins_raw(x, y, beta)
        .into_iter()
        .zip(y)
        .map(|(m, &yi)| -yi * sigma(-m))
        .collect();
    let mut g = x.tr_matvec(&coef);
    crate::linalg::axpy(lambda, beta, &mut g);
    g
}

/// Curvature weights `σ(m)σ(−m) ∈ (0, ¼]`.
pub fn logistic_curvature_raw(x: &Matrix, y: &[f64], beta: &[f64]) -> Vec<f64> {
    margins_raw(x, y, beta)
        .into_iter()
        .map(|m| sigma(m) * sigma(-m))
        .collect()
}

pub fn logistic_hessian_raw(x: &Matrix, y: &[f64], beta: &[f64], lambda: f64) -> Matrix {
    let w = logistic_curvature_raw(x, y, beta);
    let mut h = x.weighted_gram(|i| w[i]);
    h.add_diagonal(lambda);
    h
}

pub fn logistic_loss(data: &DataSet, beta: &[f64], lambda: f64) -> Result<f64> {
    check_beta(&data.x, beta)?;
    check_lambda(lambda)?;
    Ok(logistic_loss_raw(&data.x, &data.y, beta, lambda))
}

pub fn logistic_gradient(data: &DataSet, beta: &[f64], lambda: f64) -> Result<Vec<f64>> {
    check_beta(&data.x, beta)?;
    check_lambda(lambda)?;
    Ok(logistic_gradient_raw(&data.x, &data.y, beta, lambda))
}

pub fn logistic_hessian(data: &DataSet, beta: &[f64], lambda: f64) -> Result<Matrix> {
    check_beta(&data.x, beta)?;
    check_lambda(lambda)?;
    Ok(logistic_hessian_raw(&data.x, &data.y, beta, lambda))
}

/// What responses a GLM accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelDomain {
    /// ±1 labels, recoded to {0, 1} via `(y + 1)/2` before entering the loss.
    PmOne,
    /// Any finite real response.
    Real,
}

/// Exponential-family GLM described by its cumulant ψ and a curvature bound
/// `ψ″ ≤ alpha_u`.
#[derive(Debug, Clone, Copy)]
pub struct GlmSpec {
    pub name: &'static str,
    pub psi: fn(f64) -> f64,
    pub dpsi: fn(f64) -> f64,
    pub d2psi: fn(f64) -> f64,
    pub alpha_u: f64,
    pub label_domain: LabelDomain,
}

fn half_square(t: f64) -> f64 {
    0.5 * t * t
}

fn identity(t: f64) -> f64 {
    t
}

fn one(_: f64) -> f64 {
    1.0
}

fn logistic_curvature(t: f64) -> f64 {
    sigma(t) * sigma(-t)
}

impl GlmSpec {
    /// Gaussian response: ψ(t) = t²/2, i.e. ridge regression.
    pub fn linear() -> Self {
        Self {
            name: "linear",
            psi: half_square,
            dpsi: identity,
            d2psi: one,
            alpha_u: 1.0,
            label_domain: LabelDomain::Real,
        }
    }

    /// Bernoulli response: ψ(t) = log(1 + eᵗ), ψ″ ≤ ¼.
    pub fn logistic() -> Self {
        Self {
            name: "logistic",
            psi: softplus,
            dpsi: sigma,
            d2psi: logistic_curvature,
            alpha_u: 0.25,
            label_domain: LabelDomain::PmOne,
        }
    }

    /// Spot-check convexity and the curvature bound on a grid over [−50, 50].
    pub fn check_curvature(&self) -> Result<()> {
        for i in 0..=1000 {
            let t = -50.0 + 0.1 * i as f64;
            let c = (self.d2psi)(t);
            if !(c >= 0.0) || c > self.alpha_u * (1.0 + 1e-12) {
                return Err(Error::InvalidInput(format!(
                    "{}: psi''({t}) = {c} violates 0 <= psi'' <= {}",
                    self.name, self.alpha_u
                )));
            }
        }
        Ok(())
    }

    /// Responses as they enter the loss.
    pub fn response(&self, y: &[f64]) -> Result<Vec<f64>> {
        match self.label_domain {
            LabelDomain::PmOne => y
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if v == 1.0 || v == -1.0 {
                        Ok(0.5 * (v + 1.0))
                    } else {
                        Err(Error::InvalidInput(format!(
                            "{}: label {v} at row {i} is not -1 or +1",
                            self.name
                        )))
                    }
                })
                .collect(),
            LabelDomain::Real => match y.iter().position(|v| !v.is_finite()) {
                Some(i) => Err(Error::InvalidInput(format!("non-finite response at row {i}"))),
                None => Ok(y.to_vec()),
            },
        }
    }
}

fn glm_check(x: &Matrix, y: &[f64], beta: &[f64], lambda: f64) -> Result<()> {
    check_beta(x, beta)?;
    check_lambda(lambda)?;
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} responses for {} rows",
            y.len(),
            x.rows()
        )));
    }
    Ok(())
}

/// Loss on already-recoded responses.
pub fn glm_loss_raw(x: &Matrix, r: &[f64], spec: &GlmSpec, beta: &[f64], lambda: f64) -> f64 {
    let data: f64 = (0..x.rows())
        .map(|i| {
            let m = dot(x.row(i), beta);
            (spec.psi)(m) - r[i] * m
        })
        .sum();
    data + 0.5 * lambda * dot(beta, beta)
}

/// `ψ′(xᵢᵀβ) − rᵢ`
pub fn glm_residuals_raw(x: &Matrix, r: &[f64], spec: &GlmSpec, beta: &[f64]) -> Vec<f64> {
    (0..x.rows())
        .map(|i| (spec.dpsi)(dot(x.row(i), beta)) - r[i])
        .collect()
}

pub fn glm_gradient_raw(x: &Matrix, r: &[f64], spec: &GlmSpec, beta: &[f64], lambda: f64) -> Vec<f64> {
    let mut g = x.tr_matvec(&glm_residuals_raw(x, r, spec, beta));
    crate::linalg::axpy(lambda, beta, &mut g);
    g
}

pub fn glm_hessian_raw(x: &Matrix, spec: &GlmSpec, beta: &[f64], lambda: f64) -> Matrix {
    let w: Vec<f64> = (0..x.rows()).map(|i| (spec.d2psi)(dot(x.row(i), beta))).collect();
    let mut h = x.weighted_gram(|i| w[i]);
    h.add_diagonal(lambda);
    h
}

pub fn glm_loss(x: &Matrix, y: &[f64], spec: &GlmSpec, beta: &[f64], lambda: f64) -> Result<f64> {
    glm_check(x, y, beta, lambda)?;
    let r = spec.response(y)?;
    Ok(glm_loss_raw(x, &r, spec, beta, lambda))
}

pub fn glm_gradient(x: &Matrix, y: &[f64], spec: &GlmSpec, beta: &[f64], lambda: f64) -> Result<Vec<f64>> {
    glm_check(x, y, beta, lambda)?;
    let r = spec.response(y)?;
    Ok(glm_gradient_raw(x, &r, spec, beta, lambda))
}

pub fn glm_hessian(x: &Matrix, y: &[f64], spec: &GlmSpec, beta: &[f64], lambda: f64) -> Result<Matrix> {
    glm_check(x, y, beta, lambda)?;
    spec.response(y)?;
    Ok(glm_hessian_raw(x, spec, beta, lambda))
}

/// `Σ max(0, xᵢᵀβ)` over the rows of the (standard-form) feature matrix.
pub fn relu_loss(data: &DataSet, beta: &[f64]) -> Result<f64> {
    check_beta(&data.x, beta)?;
    Ok((0..data.n()).map(|i| dot(data.x.row(i), beta).max(0.0)).sum())
}

/// Gap `|(1/t)·L(tβ) − R(β)|` at λ = 0 and its budget `n/t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingGap {
    pub gap: f64,
    pub budget: f64,
}

impl ScalingGap {
    pub fn holds(&self) -> bool {
        self.gap <= self.budget
    }
}

/// Requires standard form (all labels −1) so that the logistic loss reads
/// `Σ log(1 + e^{xᵢᵀβ})`.
pub fn relu_scaling_gap(data: &DataSet, beta: &[f64], t: f64) -> Result<ScalingGap> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("t must be positive, got {t}")));
    }
    if !data.is_standard_form() {
        return Err(Error::InvalidInput(
            "relu_scaling_gap needs standard-form data (all labels -1)".into(),
        ));
    }
    let scaled: Vec<f64> = beta.iter().map(|b| t * b).collect();
    let logistic = logistic_loss(data, &scaled, 0.0)?;
    let relu = relu_loss(data, beta)?;
    Ok(ScalingGap {
        gap: (logistic / t - relu).abs(),
        budget: data.n() as f64 / t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use rand_distr::{Distribution, StandardNormal};
    use sketchreg_oracle as oracle;

    fn random_data(n: usize, d: usize, seed: u64) -> DataSet {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let x = Matrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
        let y = (0..n)
            .map(|_| {
                let u: f64 = StandardNormal.sample(&mut rng);
                if u > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        DataSet::new(x, y).unwrap()
    }

    fn random_vec(d: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn dataset_validation() {
        let x = Matrix::identity(2);
        assert!(DataSet::new(x.clone(), vec![1.0, 0.0]).is_err());
        assert!(DataSet::new(x.clone(), vec![1.0]).is_err());
        let ds = DataSet::new(x, vec![1.0, -1.0]).unwrap();
        assert!(ds.clone().with_feature_names(vec!["a".into()]).is_err());
        assert!(ds.with_feature_names(vec!["a".into(), "b".into()]).is_ok());
    }

    #[test]
    fn sigma_basic_values() {
        assert_eq!(sigma(0.0), 0.5);
        assert_eq!(sigma(700.0), 1.0);
        assert!(sigma(-700.0) > 0.0 && sigma(-700.0).is_finite());
        assert!(sigma(1e6).is_finite() && sigma(-1e6).is_finite());
        for u in [1.0, -1.0, 50.0, -50.0, 700.0, -700.0] {
            assert!((sigma(u) - (1.0 - sigma(-u))).abs() <= 1e-15, "u = {u}");
        }
    }

    #[test]
    fn loss_at_zero_is_n_ln2() {
        let ds = random_data(7, 3, 1);
        let l = logistic_loss(&ds, &[0.0; 3], 0.0).unwrap();
        assert!((l - 7.0 * std::f64::consts::LN_2).abs() < 1e-14);

        let ds1 = DataSet::new(Matrix::zeros(1, 2), vec![1.0]).unwrap();
        let l1 = logistic_loss(&ds1, &[3.0, -4.0], 0.0).unwrap();
        assert!((l1 - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn loss_matches_compensated_oracle() {
        let ds = random_data(20, 3, 2);
        let beta = random_vec(3, 3);
        let l = logistic_loss(&ds, &beta, 0.7).unwrap();
        let o = oracle::naive_logistic_loss(&ds.x.to_rows(), &ds.y, &beta, 0.7);
        assert!((l - o).abs() <= 1e-12 * o);
    }

    #[test]
    fn dimension_and_lambda_errors() {
        let ds = random_data(4, 2, 4);
        assert!(logistic_loss(&ds, &[0.0], 0.0).is_err());
        assert!(logistic_gradient(&ds, &[0.0; 2], -1.0).is_err());
        assert!(logistic_hessian(&ds, &[0.0; 3], 1.0).is_err());
    }

    #[test]
    fn gradient_at_zero() {
        let ds = random_data(9, 3, 5);
        let g = logistic_gradient(&ds, &[0.0; 3], 0.0).unwrap();
        let expect = ds.x.tr_matvec(&ds.y.iter().map(|y| -0.5 * y).collect::<Vec<_>>());
        for (a, b) in g.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let ds = random_data(30, 4, 6);
        let beta = random_vec(4, 7);
        let lambda = 0.3;
        let g = logistic_gradient(&ds, &beta, lambda).unwrap();
        let fd = oracle::central_gradient(|b| logistic_loss(&ds, b, lambda).unwrap(), &beta, 1e-5);
        let err = crate::linalg::norm2(&crate::linalg::sub_vec(&g, &fd));
        assert!(err <= 1e-5 * crate::linalg::norm2(&fd), "err {err}");
    }

    #[test]
    fn hessian_at_zero_and_fd() {
        let ds = random_data(12, 3, 8);
        let h0 = logistic_hessian(&ds, &[0.0; 3], 2.0).unwrap();
        let mut expect = ds.x.gram().scaled(0.25);
        expect.add_diagonal(2.0);
        assert!(h0.sub(&expect).frobenius_norm() < 1e-12);

        let beta = random_vec(3, 9);
        let h = logistic_hessian(&ds, &beta, 0.5).unwrap();
        let fd = oracle::central_jacobian(|b| logistic_gradient(&ds, b, 0.5).unwrap(), &beta, 1e-5);
        let diff = oracle::frobenius_diff(&h.to_rows(), &fd);
        assert!(diff <= 1e-4 * h.frobenius_norm());
        assert!(logistic_curvature_raw(&ds.x, &ds.y, &beta).iter().all(|&w| w > 0.0 && w <= 0.25));
    }

    #[test]
    fn linear_glm_is_ridge_algebra() {
        let ds = random_data(15, 3, 10);
        let y: Vec<f64> = random_vec(15, 11);
        let beta = random_vec(3, 12);
        let spec = GlmSpec::linear();
        let g = glm_gradient(&ds.x, &y, &spec, &beta, 0.4).unwrap();
        let resid: Vec<f64> = ds.x.matvec(&beta).iter().zip(&y).map(|(a, b)| a - b).collect();
        let mut expect = ds.x.tr_matvec(&resid);
        crate::linalg::axpy(0.4, &beta, &mut expect);
        for (a, b) in g.iter().zip(&expect) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        let h = glm_hessian(&ds.x, &y, &spec, &beta, 0.4).unwrap();
        let mut eh = ds.x.gram();
        eh.add_diagonal(0.4);
        assert!(h.sub(&eh).frobenius_norm() < 1e-12);
    }

    #[test]
    fn logistic_glm_matches_native() {
        let ds = random_data(10, 3, 13);
        let spec = GlmSpec::logistic();
        let l0 = glm_loss(&ds.x, &ds.y, &spec, &[0.0; 3], 0.0).unwrap();
        assert!((l0 - 10.0 * std::f64::consts::LN_2).abs() < 1e-13);
        let beta = random_vec(3, 14);
        let a = glm_loss(&ds.x, &ds.y, &spec, &beta, 0.2).unwrap();
        let b = logistic_loss(&ds, &beta, 0.2).unwrap();
        assert!((a - b).abs() < 1e-12);
        let ga = glm_gradient(&ds.x, &ds.y, &spec, &beta, 0.2).unwrap();
        let gb = logistic_gradient(&ds, &beta, 0.2).unwrap();
        for (p, q) in ga.iter().zip(&gb) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn glm_gradient_fd() {
        let ds = random_data(25, 4, 15);
        let beta = random_vec(4, 16);
        for spec in [GlmSpec::linear(), GlmSpec::logistic()] {
            let y = if spec.label_domain == LabelDomain::Real { random_vec(25, 17) } else { ds.y.clone() };
            let g = glm_gradient(&ds.x, &y, &spec, &beta, 0.1).unwrap();
            let fd = oracle::central_gradient(|b| glm_loss(&ds.x, &y, &spec, b, 0.1).unwrap(), &beta, 1e-5);
            let err = crate::linalg::norm2(&crate::linalg::sub_vec(&g, &fd));
            assert!(err <= 1e-5 * crate::linalg::norm2(&fd), "{}: {err}", spec.name);
        }
    }

    #[test]
    fn glm_label_domain() {
        let spec = GlmSpec::logistic();
        assert!(spec.response(&[1.0, 0.0]).is_err());
        assert_eq!(spec.response(&[1.0, -1.0]).unwrap(), vec![1.0, 0.0]);
        assert!(GlmSpec::linear().response(&[f64::NAN]).is_err());
        GlmSpec::linear().check_curvature().unwrap();
        GlmSpec::logistic().check_curvature().unwrap();
        let mut bad = GlmSpec::logistic();
        bad.alpha_u = 0.1;
        assert!(bad.check_curvature().is_err());
    }

    #[test]
    fn relu_cases() {
        let ds = DataSet::new(Matrix::identity(2), vec![-1.0, -1.0]).unwrap();
        assert_eq!(relu_loss(&ds, &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(relu_loss(&ds, &[1.0, -1.0]).unwrap(), 1.0);

        let ds = random_data(12, 3, 18);
        let beta = random_vec(3, 19);
        let xb = ds.x.matvec(&beta);
        let ident = 0.5 * xb.iter().sum::<f64>() + 0.5 * crate::linalg::norm1(&xb);
        assert!((relu_loss(&ds, &beta).unwrap() - ident).abs() < 1e-12);
    }

    #[test]
    fn relu_scaling_gap_cases() {
        let ds = DataSet::new(Matrix::identity(3), vec![-1.0; 3]).unwrap();
        let g = relu_scaling_gap(&ds, &[0.0; 3], 4.0).unwrap();
        assert!((g.gap - 3.0 * std::f64::consts::LN_2 / 4.0).abs() < 1e-15);
        assert!(g.holds());
        let mixed = random_data(5, 2, 20);
        assert!(relu_scaling_gap(&mixed, &[0.0; 2], 1.0).is_err());
        assert!(relu_scaling_gap(&ds, &[0.0; 3], 0.0).is_err());
    }

    #[test]
    fn per_point_relu_bound() {
        let t = 10.0;
        for r in [-2.0f64, 0.5, 3.0] {
            let lhs = (softplus(t * r) / t - r.max(0.0)).abs();
            assert!(lhs <= 1.0 / (t * (t * r.abs()).exp()));
        }
    }

    proptest! {
        #[test]
        fn sigma_symmetry(u in -1e3f64..1e3) {
            let s = sigma(u) + sigma(-u);
            prop_assert!((s - 1.0).abs() <= 1e-15);
            prop_assert!(sigma(u) >= 0.0 && sigma(u) <= 1.0);
        }

        #[test]
        fn loss_dominates_regularizer(seed in 0u64..500, lambda in 0.0f64..10.0, scale in 0.0f64..20.0) {
            let ds = random_data(8, 3, seed);
            let beta: Vec<f64> = random_vec(3, seed + 1).iter().map(|b| b * scale).collect();
            let l = logistic_loss(&ds, &beta, lambda).unwrap();
            prop_assert!(l >= 0.5 * lambda * dot(&beta, &beta));
            prop_assert!(l >= 0.0);
        }
    }
}
