//! Orthonormal sketching matrices, truncated-SVD approximations and the
//! scaled-identity instance that makes the low-rank loss bound tight.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::glm::{self, softplus, DataSet};
use crate::linalg::{spectral_norm, top_k_right_singular_vectors, Matrix, Qr};

/// Convergence tolerance for the singular-subspace routines used here.
pub const SVD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SketchKind {
    Coordinate,
    TopCoeff,
    Pca,
    RandomOrthonormal,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SketchMeta {
    Indices(Vec<usize>),
    Seed(u64),
    None,
}

/// A d×k matrix with orthonormal columns.
#[derive(Debug, Clone, Serialize)]
pub struct SketchMatrix {
    p: Matrix,
    pub kind: SketchKind,
    pub meta: SketchMeta,
    /// The PCA subspace is not unique (σ_k = σ_{k+1}).
    pub non_unique: bool,
}

impl SketchMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.p
    }

    pub fn d(&self) -> usize {
        self.p.rows()
    }

    pub fn k(&self) -> usize {
        self.p.cols()
    }

    /// `P β_k`
    pub fn lift(&self, beta_k: &[f64]) -> Vec<f64> {
        self.p.matvec(beta_k)
    }

    /// `Pᵀ β`
    pub fn restrict(&self, beta: &[f64]) -> Vec<f64> {
        self.p.tr_matvec(beta)
    }

    /// `(I − PPᵀ) β`
    pub fn residual(&self, beta: &[f64]) -> Vec<f64> {
        let back = self.lift(&self.restrict(beta));
        beta.iter().zip(&back).map(|(a, b)| a - b).collect()
    }

    /// `PPᵀ`
    pub fn projector(&self) -> Matrix {
        self.p.matmul(&self.p.transpose())
    }

    /// `‖PᵀP − I‖_F`
    pub fn orthonormality_error(&self) -> f64 {
        let mut g = self.p.gram();
        g.add_diagonal(-1.0);
        g.frobenius_norm()
    }

    /// `sup_{u ∈ range(P)} ‖u‖₁/‖u‖₂`, known in closed form (√k) only for
    /// coordinate subspaces.
    pub fn subspace_compatibility(&self) -> Option<f64> {
        match self.kind {
            SketchKind::Coordinate | SketchKind::TopCoeff => Some((self.k() as f64).sqrt()),
            _ => None,
        }
    }

    /// Short label used in reports, e.g. `coord:0,2` or `rand:3:7`.
    pub fn label(&self) -> String {
        let join = |idx: &[usize]| idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        match (&self.kind, &self.meta) {
            (SketchKind::Coordinate, SketchMeta::Indices(idx)) => format!("coord:{}", join(idx)),
            (SketchKind::TopCoeff, _) => format!("topcoef:{}", self.k()),
            (SketchKind::Pca, _) => format!("pca:{}", self.k()),
            (SketchKind::RandomOrthonormal, SketchMeta::Seed(s)) => format!("rand:{}:{s}", self.k()),
            _ => format!("custom:{}", self.k()),
        }
    }
}

fn check_k(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::InvalidInput(format!("k = {k} must lie in 1..={d}")));
    }
    Ok(())
}

/// Columns `e_i` for the given indices, in order.
pub fn coordinate_sketch(d: usize, indices: &[usize]) -> Result<SketchMatrix> {
    check_k(indices.len(), d)?;
    let mut seen = vec![false; d];
    for &i in indices {
        if i >= d {
            return Err(Error::InvalidInput(format!("index {i} out of range for d = {d}")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidInput(format!("duplicate index {i}")));
        }
    }
    let p = Matrix::from_fn(d, indices.len(), |r, c| if indices[c] == r { 1.0 } else { 0.0 });
    Ok(SketchMatrix {
        p,
        kind: SketchKind::Coordinate,
        meta: SketchMeta::Indices(indices.to_vec()),
        non_unique: false,
    })
}

/// Coordinates of the k largest `|β_i|`; ties go to the lower index.
pub fn top_coefficient_sketch(beta_d: &[f64], k: usize) -> Result<SketchMatrix> {
    check_k(k, beta_d.len())?;
    let mut order: Vec<usize> = (0..beta_d.len()).collect();
    order.sort_by(|&a, &b| beta_d[b].abs().total_cmp(&beta_d[a].abs()).then(a.cmp(&b)));
    order.truncate(k);
    let mut s = coordinate_sketch(beta_d.len(), &order)?;
    s.kind = SketchKind::TopCoeff;
    Ok(s)
}

/// Top-k right singular vectors of `x`.
pub fn pca_sketch(x: &Matrix, k: usize) -> Result<SketchMatrix> {
    check_k(k, x.cols())?;
    let top = top_k_right_singular_vectors(x, k, SVD_TOL)?;
    Ok(SketchMatrix {
        p: top.v,
        kind: SketchKind::Pca,
        meta: SketchMeta::None,
        non_unique: top.non_unique,
    })
}

/// Orthonormalized Gaussian d×k draw.
pub fn random_orthonormal_sketch(d: usize, k: usize, seed: u64) -> Result<SketchMatrix> {
    check_k(k, d)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let g = Matrix::from_fn(d, k, |_, _| StandardNormal.sample(&mut rng));
    let p = Qr::new(&g).q_columns(0, k);
    Ok(SketchMatrix {
        p,
        kind: SketchKind::RandomOrthonormal,
        meta: SketchMeta::Seed(seed),
        non_unique: false,
    })
}

/// Wrap a caller-supplied matrix after checking `‖PᵀP − I‖_F ≤ 1e−10`.
pub fn custom_sketch(p: Matrix) -> Result<SketchMatrix> {
    check_k(p.cols(), p.rows())?;
    let s = SketchMatrix {
        p,
        kind: SketchKind::Custom,
        meta: SketchMeta::None,
        non_unique: false,
    };
    let err = s.orthonormality_error();
    if err > 1e-10 {
        return Err(Error::InvalidInput(format!("columns are not orthonormal (error {err:e})")));
    }
    Ok(s)
}

/// Best rank-k approximation `X V_k V_kᵀ`. Returns `x` itself once k
/// reaches `min(n, d)`.
pub fn low_rank_approx(x: &Matrix, k: usize) -> Result<Matrix> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if k >= x.rows().min(x.cols()) {
        return Ok(x.clone());
    }
    let v = top_k_right_singular_vectors(x, k, SVD_TOL)?.v;
    Ok(x.matmul(&v).matmul(&v.transpose()))
}

/// `X = x·I`, `X̃ = (x+s)·I`, `β = 1`, all labels −1 (standard form, so the
/// loss is `Σ log(1 + e^{xᵢᵀβ})`).
#[derive(Debug, Clone, Serialize)]
pub struct TightnessInstance {
    pub x: Matrix,
    pub x_tilde: Matrix,
    pub beta: Vec<f64>,
    pub y: Vec<f64>,
    pub x_scale: f64,
    pub s: f64,
}

impl TightnessInstance {
    pub fn new(n: usize, x_scale: f64, s: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        if !(s > 0.0) || !s.is_finite() || !x_scale.is_finite() {
            return Err(Error::InvalidInput(format!("need finite x and s > 0, got x = {x_scale}, s = {s}")));
        }
        Ok(Self {
            x: Matrix::identity(n).scaled(x_scale),
            x_tilde: Matrix::identity(n).scaled(x_scale + s),
            beta: vec![1.0; n],
            y: vec![-1.0; n],
            x_scale,
            s,
        })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    /// Append zero feature columns (and zero coefficients) up to `d ≥ n`.
    pub fn pad_to_d(&self, d: usize) -> Result<Self> {
        let n = self.n();
        if d < self.x.cols() {
            return Err(Error::InvalidInput(format!("cannot pad {} columns down to {d}", self.x.cols())));
        }
        let extra = d - self.x.cols();
        let mut beta = self.beta.clone();
        beta.resize(d, 0.0);
        debug_assert!(n <= d);
        Ok(Self {
            x: self.x.pad_columns(extra),
            x_tilde: self.x_tilde.pad_columns(extra),
            beta,
            y: self.y.clone(),
            x_scale: self.x_scale,
            s: self.s,
        })
    }

    pub fn data(&self) -> DataSet {
        DataSet::new(self.x.clone(), self.y.clone()).expect("tightness instance is valid")
    }

    /// `|L(β;X̃) − L(β;X)| / (√n‖X − X̃‖₂‖β‖₂)` evaluated numerically.
    pub fn achieved_ratio(&self) -> Result<f64> {
        let l = glm::logistic_loss_raw(&self.x, &self.y, &self.beta, 0.0);
        let lt = glm::logistic_loss_raw(&self.x_tilde, &self.y, &self.beta, 0.0);
        let diff = spectral_norm(&self.x.sub(&self.x_tilde), SVD_TOL)?;
        let budget = (self.n() as f64).sqrt() * diff * crate::linalg::norm2(&self.beta);
        Ok((lt - l).abs() / budget)
    }

    /// `(log(1 + e^{x+s}) − log(1 + e^x)) / s`
    pub fn closed_form_ratio(&self) -> f64 {
        (softplus(self.x_scale + self.s) - softplus(self.x_scale)) / self.s
    }
}
