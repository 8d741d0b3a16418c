//! Classification complexity measure
//! `μ_y(X) = sup_{β≠0} ‖(D_yXβ)⁺‖₁ / ‖(D_yXβ)⁻‖₁`.
//!
//! The supremum is a linear program over `z = z₊ − z₋` restricted to the
//! range of `D_yX`: minimize `1ᵀz` subject to `1ᵀ(z₊ + z₋) ≤ C`. The optimum
//! `v` gives `μ = (C − v)/(C + v)`, with the positive and negative parts
//! swapped relative to the definition (the LP pushes mass negative, so
//! `‖z⁻‖₁/‖z⁺‖₁` is the maximized ratio for `−z`).
//!
//! [`compute_mu`] solves this program through its dual, which has one row
//! per dimension of the range instead of one per observation.
//! [`compute_mu_direct`] solves the primal over `(β, t)` with
//! `−t ≤ D_yXβ ≤ t` and exists to cross-check it.

pub mod bounded;
pub mod simplex;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::glm::DataSet;
use crate::linalg::{least_squares_with_tol, norm2, range_basis, top_k_right_singular_vectors, Matrix};
use bounded::bounded_simplex_from;
use simplex::{simplex_solve, LinearProgram, LpStatus};

pub const DEFAULT_BUDGET: f64 = 1.0;

/// Positive mass below this fraction of the budget counts as separable.
const SEPARABLE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MuStatus {
    Finite,
    InfiniteSeparable,
    DegenerateZeroRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    RangeDual,
    Direct,
}

#[derive(Debug, Clone, Serialize)]
pub struct MuResult {
    /// `f64::INFINITY` when separable.
    pub mu: f64,
    pub status: MuStatus,
    pub beta_star: Option<Vec<f64>>,
    pub z_star: Vec<f64>,
    pub lp_objective: f64,
    pub budget: f64,
    pub rank: usize,
    pub pivots: usize,
    pub formulation: Formulation,
}

impl MuResult {
    pub fn is_finite(&self) -> bool {
        self.status == MuStatus::Finite
    }
}

/// `(‖z⁺‖₁, ‖z⁻‖₁)`
pub fn split_masses(z: &[f64]) -> (f64, f64) {
    z.iter().fold((0.0, 0.0), |(p, m), &v| {
        if v > 0.0 {
            (p + v, m)
        } else {
            (p, m - v)
        }
    })
}

/// The maximized ratio `‖(D_yXβ)⁻‖₁ / ‖(D_yXβ)⁺‖₁` for one direction, as
/// reached by the LP (infinite when the positive part vanishes).
pub fn witness_ratio(data: &DataSet, beta: &[f64]) -> f64 {
    let z = data.signed_features().matvec(beta);
    let (pos, neg) = split_masses(&z);
    if pos == 0.0 {
        f64::INFINITY
    } else {
        neg / pos
    }
}

/// Definition ratio `‖(D_yXβ)⁺‖₁ / ‖(D_yXβ)⁻‖₁` for one direction.
pub fn direction_ratio(data: &DataSet, beta: &[f64]) -> f64 {
    let z = data.signed_features().matvec(beta);
    let (pos, neg) = split_masses(&z);
    if neg == 0.0 {
        f64::INFINITY
    } else {
        pos / neg
    }
}

fn check_budget(budget: f64) -> Result<()> {
    if !(budget > 0.0) || !budget.is_finite() {
        return Err(Error::InvalidInput(format!("budget C must be positive, got {budget}")));
    }
    Ok(())
}

fn zero_range(n: usize, budget: f64, formulation: Formulation) -> MuResult {
    MuResult {
        mu: f64::NAN,
        status: MuStatus::DegenerateZeroRange,
        beta_star: None,
        z_star: vec![0.0; n],
        lp_objective: 0.0,
        budget,
        rank: 0,
        pivots: 0,
        formulation,
    }
}

/// Turn an LP optimum into a result. `beta` is the recovered direction.
fn finish(
    a: &Matrix,
    v: f64,
    beta: Vec<f64>,
    budget: f64,
    rank: usize,
    pivots: usize,
    formulation: Formulation,
) -> Result<MuResult> {
    // v ≈ 0: 1 is orthogonal to the range, every direction balances its
    // masses, and μ = 1. The LP may return z = 0, so pick a direction with
    // a nonzero image instead.
    if v >= -SEPARABLE_REL_TOL * budget {
        let top = top_k_right_singular_vectors(a, 1, 1e-12)?;
        let beta = top.v.col(0);
        let z = a.matvec(&beta);
        return Ok(MuResult {
            mu: 1.0,
            status: MuStatus::Finite,
            beta_star: Some(beta),
            z_star: z,
            lp_objective: v,
            budget,
            rank,
            pivots,
            formulation,
        });
    }
    let z = a.matvec(&beta);
    let (pos, neg) = split_masses(&z);
    if pos < SEPARABLE_REL_TOL * budget {
        return Ok(MuResult {
            mu: f64::INFINITY,
            status: MuStatus::InfiniteSeparable,
            beta_star: None,
            z_star: z,
            lp_objective: v,
            budget,
            rank,
            pivots,
            formulation,
        });
    }
    Ok(MuResult {
        mu: neg / pos,
        status: MuStatus::Finite,
        beta_star: Some(beta),
        z_star: z,
        lp_objective: v,
        budget,
        rank,
        pivots,
        formulation,
    })
}

/// μ through the dual of the range-restricted LP.
///
/// With `Q` an orthonormal basis of `Range(D_yX)` and `g = Qᵀ1`, norm
/// duality gives `v = −C·min{‖u‖_∞ : Qᵀu = g}`. Writing `u = s(2θ − 1)` with
/// `θ ∈ [0,1]ⁿ` and `κ = 1 + 1/s` turns this into
///
/// ```text
/// max κ  s.t.  2Qᵀθ − κg = 0,  0 ≤ θ ≤ 1,  κ ≥ 0,
/// ```
///
/// an LP with only `rank` rows, and `v = −C/(κ − 1)`. The optimal row
/// multipliers `y` give the witness `z = Qy`, scaled to `‖z‖₁ = C`.
pub fn compute_mu(data: &DataSet, budget: f64, rank_tol: f64) -> Result<MuResult> {
    check_budget(budget)?;
    let a = data.signed_features();
    let n = a.rows();
    if a.max_abs() == 0.0 {
        return Ok(zero_range(n, budget, Formulation::RangeDual));
    }
    let basis = range_basis(&a, rank_tol)?;
    let q = &basis.range;
    let r = basis.rank;
    let g = q.tr_matvec(&vec![1.0; n]);
    if norm2(&g) <= 1e-12 * (n as f64).sqrt() {
        return finish(&a, 0.0, Vec::new(), budget, r, 0, Formulation::RangeDual);
    }
    let mut cols = q.transpose().scaled(2.0).pad_columns(1);
    for i in 0..r {
        cols[(i, n)] = -g[i];
    }
    let mut cost = vec![0.0; n + 1];
    cost[n] = -1.0;
    let mut upper = vec![1.0; n + 1];
    upper[n] = f64::INFINITY;
    // θ = 1 is the trivial u = 1; starting there keeps phase 1 short
    let mut start = vec![1.0; n + 1];
    start[n] = 0.0;
    let sol = bounded_simplex_from(&cols, &vec![0.0; r], &cost, &vec![0.0; n + 1], &upper, &start)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(sol.status));
    }
    let kappa = sol.x[n];
    let v = -budget / (kappa - 1.0);
    let mut z = q.matvec(&sol.duals);
    let (pos, neg) = split_masses(&z);
    let scale = budget / (pos + neg);
    let orient = if z.iter().sum::<f64>() > 0.0 { -scale } else { scale };
    for zi in &mut z {
        *zi *= orient;
    }
    let ls = least_squares_with_tol(&a, &z, rank_tol)?;
    finish(&a, v, ls.x, budget, r, sol.pivots, Formulation::RangeDual)
}

/// μ through the LP over `(β, t)` with `−t ≤ D_yXβ ≤ t`, `1ᵀt ≤ C`, solved by
/// the tableau simplex. Independent of [`compute_mu`]; meant for moderate n.
pub fn compute_mu_direct(data: &DataSet, budget: f64) -> Result<MuResult> {
    check_budget(budget)?;
    let a = data.signed_features();
    let (n, d) = a.shape();
    if a.max_abs() == 0.0 {
        return Ok(zero_range(n, budget, Formulation::Direct));
    }
    let mut c = a.tr_matvec(&vec![1.0; n]);
    c.extend(std::iter::repeat(0.0).take(n));
    let mut lp = LinearProgram::new(c);
    for j in 0..d {
        lp.nonneg[j] = false;
    }
    for i in 0..n {
        let mut up = vec![0.0; d + n];
        up[..d].copy_from_slice(a.row(i));
        up[d + i] = -1.0;
        let mut down: Vec<f64> = up.iter().map(|v| -v).collect();
        down[d + i] = -1.0;
        lp = lp.le(up, 0.0).le(down, 0.0);
    }
    let mut budget_row = vec![0.0; d + n];
    for v in &mut budget_row[d..] {
        *v = 1.0;
    }
    lp = lp.le(budget_row, budget);
    let sol = simplex_solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(sol.status));
    }
    let beta = sol.x[..d].to_vec();
    let rank = crate::linalg::Qr::pivoted(&a).rank(crate::linalg::DEFAULT_RANK_TOL);
    finish(&a, sol.value, beta, budget, rank, sol.pivots, Formulation::Direct)
}

/// `|μ₁ − μ₂| ≤ rel_tol · max(1, μ)`, with matching statuses.
pub fn agree(a: &MuResult, b: &MuResult, rel_tol: f64) -> bool {
    if a.status != b.status {
        return false;
    }
    match a.status {
        MuStatus::Finite => (a.mu - b.mu).abs() <= rel_tol * a.mu.max(b.mu).max(1.0),
        _ => true,
    }
}

/// `1ᵀz` consistency: `(C − v)/(C + v)`.
pub fn objective_mu(result: &MuResult) -> f64 {
    let v = result.lp_objective;
    (result.budget - v) / (result.budget + v)
}
