//! Dense two-phase tableau simplex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};

/// Pivot cap shared by both phases.
pub const MAX_PIVOTS: usize = 1_000_000;

/// Reduced costs above `-PIVOT_TOL` count as nonnegative; column entries
/// at or below it are never pivoted on.
const PIVOT_TOL: f64 = 1e-9;

/// Consecutive pivots without objective progress before pricing falls back
/// from Dantzig's rule to Bland's (which cannot cycle).
pub(crate) const STALL_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// `min cᵀx  s.t.  A x ≤ b,  E x = f,  xⱼ ≥ 0 where nonneg[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub nonneg: Vec<bool>,
}

impl LinearProgram {
    /// All variables nonnegative, no constraints yet.
    pub fn new(c: Vec<f64>) -> Self {
        let n = c.len();
        Self {
            c,
            a_ub: Vec::new(),
            b_ub: Vec::new(),
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            nonneg: vec![true; n],
        }
    }

    pub fn le(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.a_ub.push(row);
        self.b_ub.push(rhs);
        self
    }

    pub fn eq(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.a_eq.push(row);
        self.b_eq.push(rhs);
        self
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.c.len();
        let rows_ok = |rows: &[Vec<f64>], rhs: &[f64]| {
            rows.len() == rhs.len() && rows.iter().all(|r| r.len() == n)
        };
        if !rows_ok(&self.a_ub, &self.b_ub) || !rows_ok(&self.a_eq, &self.b_eq) || self.nonneg.len() != n {
            return Err(Error::DimensionMismatch("linear program shapes are inconsistent".into()));
        }
        let finite = self.c.iter().chain(&self.b_ub).chain(&self.b_eq).all(|v| v.is_finite())
            && self.a_ub.iter().chain(&self.a_eq).flatten().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("linear program has non-finite entries".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Empty unless `status` is `Optimal`.
    pub x: Vec<f64>,
    pub value: f64,
    pub pivots: usize,
}

/// Pivots between rebuilds of the tableau from the original rows.
const REINVERT_EVERY: usize = 100;

struct Tableau {
    /// m constraint rows followed by the objective row; last column is the rhs.
    t: Vec<Vec<f64>>,
    /// The constraint rows as built, before any pivot.
    orig: Vec<Vec<f64>>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn m(&self) -> usize {
        self.basis.len()
    }

    fn width(&self) -> usize {
        self.t[0].len() - 1
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width();
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let prow = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = line[col];
            if f != 0.0 {
                for j in 0..=w {
                    line[j] -= f * prow[j];
                }
                line[col] = 0.0;
            }
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Recompute every row as `B⁻¹·orig` for the current basis `B`, which
    /// discards the round-off accumulated by elimination. Keeps the old
    /// tableau if `B` is numerically singular.
    fn reinvert(&mut self, cost: &[f64]) {
        let m = self.m();
        let w = self.width();
        let b = Matrix::from_fn(m, m, |i, k| self.orig[i][self.basis[k]]);
        let Ok(lu) = Lu::new(&b) else {
            return;
        };
        let mut col = vec![0.0; m];
        for j in 0..=w {
            for i in 0..m {
                col[i] = self.orig[i][j];
            }
            for (k, v) in lu.solve(&col).into_iter().enumerate() {
                self.t[k][j] = v;
            }
        }
        for k in 0..m {
            let bk = self.basis[k];
            for i in 0..m {
                self.t[i][bk] = if i == k { 1.0 } else { 0.0 };
            }
        }
        self.set_objective(cost);
    }

    /// Pivot on columns `< active` until optimal for `cost`. Dantzig
    /// pricing, with Bland's rule while the objective stalls.
    fn run(&mut self, active: usize, cost: &[f64]) -> LpStatus {
        let m = self.m();
        let w = self.width();
        let mut stall = 0;
        let mut record = self.t[m][w];
        let mut since_reinvert = 0;
        loop {
            if self.pivots >= MAX_PIVOTS {
                return LpStatus::IterationLimit;
            }
            if since_reinvert >= REINVERT_EVERY {
                self.reinvert(cost);
                since_reinvert = 0;
            }
            let obj = &self.t[m];
            let entering = if stall >= STALL_LIMIT {
                (0..active).find(|&j| obj[j] < -PIVOT_TOL)
            } else {
                (0..active)
                    .filter(|&j| obj[j] < -PIVOT_TOL)
                    .min_by(|&a, &b| obj[a].total_cmp(&obj[b]))
            };
            let Some(col) = entering else {
                if since_reinvert == 0 {
                    return LpStatus::Optimal;
                }
                // confirm optimality on a freshly rebuilt tableau
                self.reinvert(cost);
                since_reinvert = 0;
                continue;
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..m {
                let a = self.t[r][col];
                if a > PIVOT_TOL {
                    // round-off can leave a degenerate rhs slightly negative
                    let ratio = self.t[r][w].max(0.0) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bv)) => {
                            if ratio < bv - 1e-12 || (ratio <= bv + 1e-12 && self.basis[r] < self.basis[br]) {
                                Some((r, ratio))
                            } else {
                                Some((br, bv))
                            }
                        }
                    }
                }
            }
            match best {
                None => return LpStatus::Unbounded,
                Some((r, _)) => self.pivot(r, col),
            }
            since_reinvert += 1;
            // the objective row holds −value, which rises as the value falls
            let now = self.t[m][w];
            if now > record + 1e-12 * (1.0 + now.abs()) {
                record = now;
                stall = 0;
            } else {
                stall += 1;
            }
        }
    }

    /// Rewrite the objective row as reduced costs for `cost` under the
    /// current basis.
    fn set_objective(&mut self, cost: &[f64]) {
        let m = self.m();
        let w = self.width();
        let mut obj = vec![0.0; w + 1];
        obj[..cost.len()].copy_from_slice(cost);
        for r in 0..m {
            let cb = obj[self.basis[r]];
            if cb != 0.0 {
                for j in 0..=w {
                    obj[j] -= cb * self.t[r][j];
                }
            }
        }
        self.t[m] = obj;
    }
}

/// Solve with a two-phase dense simplex. Free variables are split into a
/// difference of two nonnegative ones.
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let nv = lp.num_vars();
    // column layout: original (nonneg part), negative parts of free vars,
    // slacks for ≤ rows, artificials
    let free: Vec<usize> = (0..nv).filter(|&j| !lp.nonneg[j]).collect();
    let n_struct = nv + free.len();
    let m_ub = lp.a_ub.len();
    let m = m_ub + lp.a_eq.len();
    let n_slack = m_ub;
    let art0 = n_struct + n_slack;
    let width = art0 + m;

    let mut t = Vec::with_capacity(m + 1);
    let rows = lp.a_ub.iter().zip(&lp.b_ub).chain(lp.a_eq.iter().zip(&lp.b_eq));
    for (r, (row, &rhs)) in rows.enumerate() {
        let mut line = vec![0.0; width + 1];
        line[..nv].copy_from_slice(row);
        for (k, &j) in free.iter().enumerate() {
            line[nv + k] = -row[j];
        }
        if r < m_ub {
            line[n_struct + r] = 1.0;
        }
        line[width] = rhs;
        if rhs < 0.0 {
            for v in line.iter_mut() {
                *v = -*v;
            }
        }
        line[art0 + r] = 1.0;
        t.push(line);
    }
    let orig = t.clone();
    t.push(vec![0.0; width + 1]);
    let mut tab = Tableau {
        t,
        orig,
        basis: (art0..width).collect(),
        pivots: 0,
    };

    // Phase 1: minimize the sum of artificials.
    let mut phase1 = vec![0.0; width];
    for c in phase1.iter_mut().skip(art0) {
        *c = 1.0;
    }
    tab.set_objective(&phase1);
    let status = tab.run(width, &phase1);
    if status == LpStatus::IterationLimit {
        return Ok(failed(status, tab.pivots));
    }
    let infeasibility = -tab.t[m][width];
    let scale = 1.0 + lp.b_ub.iter().chain(&lp.b_eq).fold(0.0f64, |a, b| a.max(b.abs()));
    if infeasibility > 1e-9 * scale {
        return Ok(failed(LpStatus::Infeasible, tab.pivots));
    }

    // Drive artificials out of the basis; drop rows that are redundant.
    let mut r = 0;
    while r < tab.m() {
        if tab.basis[r] >= art0 {
            let best = (0..art0)
                .map(|j| (j, tab.t[r][j].abs()))
                .fold((0, 0.0), |acc, c| if c.1 > acc.1 { c } else { acc });
            match (best.1 > 1e-9).then_some(best.0) {
                Some(col) => tab.pivot(r, col),
                None => {
                    tab.t.remove(r);
                    tab.orig.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    // Freeze artificial columns.
    let m2 = tab.m();
    for line in tab.t.iter_mut().chain(tab.orig.iter_mut()) {
        for v in &mut line[art0..width] {
            *v = 0.0;
        }
    }

    // Phase 2.
    let mut cost = vec![0.0; art0];
    cost[..nv].copy_from_slice(&lp.c);
    for (k, &j) in free.iter().enumerate() {
        cost[nv + k] = -lp.c[j];
    }
    tab.set_objective(&cost);
    let status = tab.run(art0, &cost);
    if status != LpStatus::Optimal {
        return Ok(failed(status, tab.pivots));
    }
    let mut z = vec![0.0; width];
    for r in 0..m2 {
        z[tab.basis[r]] = tab.t[r][width];
    }
    let mut x = z[..nv].to_vec();
    for (k, &j) in free.iter().enumerate() {
        x[j] -= z[nv + k];
    }
    let value = crate::linalg::dot(&lp.c, &x);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        value,
        pivots: tab.pivots,
    })
}

fn failed(status: LpStatus, pivots: usize) -> LpSolution {
    LpSolution {
        status,
        x: Vec::new(),
        value: f64::NAN,
        pivots,
    }
}

/// Largest constraint violation of `x` (inequalities, equalities, signs).
pub fn max_violation(lp: &LinearProgram, x: &[f64]) -> f64 {
    let dot = crate::linalg::dot;
    let ub = lp.a_ub.iter().zip(&lp.b_ub).map(|(r, &b)| (dot(r, x) - b).max(0.0));
    let eq = lp.a_eq.iter().zip(&lp.b_eq).map(|(r, &b)| (dot(r, x) - b).abs());
    let sign = x.iter().zip(&lp.nonneg).map(|(&v, &nn)| if nn { (-v).max(0.0) } else { 0.0 });
    ub.chain(eq).chain(sign).fold(0.0, f64::max)
}
