//! Revised simplex for `min cᵀx  s.t.  Ax = b,  l ≤ x ≤ u` with few rows.
//!
//! The basis is refactored from scratch on every iteration, so the cost per
//! pivot is `O(m³ + mN)` and round-off never accumulates across pivots. Upper
//! bounds are handled implicitly (nonbasic variables sit at either bound).
//! Pricing is Dantzig's rule, switching to Bland's while the objective
//! stalls; ties in the ratio test go to the lowest variable index.

use super::simplex::{LpStatus, MAX_PIVOTS, STALL_LIMIT};
use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};

const TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct BoundedSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// Row multipliers `y = B⁻ᵀc_B`; reduced costs are `c − Aᵀy`.
    pub duals: Vec<f64>,
    pub value: f64,
    pub pivots: usize,
}

struct State {
    /// Structural columns followed by one artificial column per row.
    cols: Vec<Vec<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<usize>,
    /// Value of every variable (basic entries are refreshed each iteration).
    x: Vec<f64>,
    pivots: usize,
}

enum Outcome {
    Optimal(Vec<f64>),
    Stopped(LpStatus),
}

impl State {
    fn m(&self) -> usize {
        self.b.len()
    }

    fn refresh(&mut self) -> Result<Lu> {
        let m = self.m();
        let lu = Lu::new(&Matrix::from_fn(m, m, |i, k| self.cols[self.basis[k]][i]))?;
        let mut rhs = self.b.clone();
        let in_basis = self.basis_mask();
        for (j, col) in self.cols.iter().enumerate() {
            if !in_basis[j] && self.x[j] != 0.0 {
                for i in 0..m {
                    rhs[i] -= col[i] * self.x[j];
                }
            }
        }
        for (k, v) in lu.solve(&rhs).into_iter().enumerate() {
            self.x[self.basis[k]] = v;
        }
        Ok(lu)
    }

    fn basis_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.cols.len()];
        for &j in &self.basis {
            mask[j] = true;
        }
        mask
    }

    fn run(&mut self, cost: &[f64]) -> Result<Outcome> {
        let m = self.m();
        let mut stall = 0;
        let mut best = f64::INFINITY;
        loop {
            let lu = self.refresh()?;
            let cb: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
            let y = lu.solve_transpose(&cb);
            if self.pivots >= MAX_PIVOTS {
                return Ok(Outcome::Stopped(LpStatus::IterationLimit));
            }
            let value: f64 = cost.iter().zip(&self.x).map(|(c, x)| c * x).sum();
            if value < best - 1e-12 * (1.0 + value.abs()) {
                best = value;
                stall = 0;
            } else {
                stall += 1;
            }
            let in_basis = self.basis_mask();
            let mut entering: Option<(usize, f64)> = None;
            let mut best_gain = 0.0;
            for j in 0..self.cols.len() {
                if in_basis[j] || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = cost[j] - self.cols[j].iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
                let at_upper = self.x[j] == self.upper[j];
                if (!at_upper && d < -TOL) || (at_upper && d > TOL) {
                    if d.abs() > best_gain {
                        best_gain = d.abs();
                        entering = Some((j, if at_upper { -1.0 } else { 1.0 }));
                    }
                    if stall >= STALL_LIMIT {
                        break;
                    }
                }
            }
            let Some((j, dir)) = entering else {
                return Ok(Outcome::Optimal(y));
            };
            // basic variables move by −step·dir·w
            let w = lu.solve(&self.cols[j]);
            let mut step = self.upper[j] - self.lower[j];
            let mut leave: Option<(usize, f64)> = None;
            for k in 0..m {
                let rate = dir * w[k];
                let var = self.basis[k];
                let room = if rate > TOL {
                    (self.x[var] - self.lower[var]).max(0.0) / rate
                } else if rate < -TOL {
                    (self.upper[var] - self.x[var]).max(0.0) / -rate
                } else {
                    continue;
                };
                let better = room < step - 1e-12
                    || (room <= step + 1e-12 && matches!(leave, Some((kb, _)) if var < self.basis[kb]));
                if better {
                    step = room;
                    leave = Some((k, if rate > 0.0 { self.lower[var] } else { self.upper[var] }));
                }
            }
            if !step.is_finite() {
                return Ok(Outcome::Stopped(LpStatus::Unbounded));
            }
            self.x[j] += dir * step;
            match leave {
                // bound flip, basis unchanged
                None => self.x[j] = if dir > 0.0 { self.upper[j] } else { self.lower[j] },
                Some((k, bound)) => {
                    let out = self.basis[k];
                    self.x[out] = bound;
                    self.basis[k] = j;
                }
            }
            self.pivots += 1;
        }
    }
}

/// Solve `min cᵀx` subject to `Ax = b`, `lower ≤ x ≤ upper`. Lower bounds
/// must be finite; upper bounds may be `+∞`.
pub fn bounded_simplex(a: &Matrix, b: &[f64], c: &[f64], lower: &[f64], upper: &[f64]) -> Result<BoundedSolution> {
    bounded_simplex_from(a, b, c, lower, upper, lower)
}

/// [`bounded_simplex`] starting with each variable at the bound given in
/// `start` (every entry must equal its lower or upper bound).
pub fn bounded_simplex_from(
    a: &Matrix,
    b: &[f64],
    c: &[f64],
    lower: &[f64],
    upper: &[f64],
    start: &[f64],
) -> Result<BoundedSolution> {
    let (m, n) = a.shape();
    if b.len() != m || c.len() != n || lower.len() != n || upper.len() != n || start.len() != n {
        return Err(Error::DimensionMismatch("bounded LP shapes are inconsistent".into()));
    }
    if lower.iter().zip(upper).any(|(l, u)| !l.is_finite() || !(l <= u)) {
        return Err(Error::InvalidInput("bounds must satisfy finite lower ≤ upper".into()));
    }
    if start.iter().zip(lower.iter().zip(upper)).any(|(s, (l, u))| s != l && s != u) {
        return Err(Error::InvalidInput("start values must sit at a bound".into()));
    }
    if !a.is_finite() || b.iter().chain(c).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("bounded LP has non-finite entries".into()));
    }
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
    let mut x = start.to_vec();
    let mut resid = b.to_vec();
    for (j, col) in cols.iter().enumerate() {
        for i in 0..m {
            resid[i] -= col[i] * x[j];
        }
    }
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = if resid[i] < 0.0 { -1.0 } else { 1.0 };
        cols.push(e);
        x.push(resid[i].abs());
    }
    let mut st = State {
        cols,
        lower: lower.iter().copied().chain(std::iter::repeat(0.0).take(m)).collect(),
        upper: upper.iter().copied().chain(std::iter::repeat(f64::INFINITY).take(m)).collect(),
        b: b.to_vec(),
        basis: (n..n + m).collect(),
        x,
        pivots: 0,
    };

    let phase1: Vec<f64> = (0..n + m).map(|j| if j < n { 0.0 } else { 1.0 }).collect();
    if let Outcome::Stopped(s) = st.run(&phase1)? {
        return Ok(stopped(s, st.pivots, m));
    }
    let infeasibility: f64 = st.x[n..].iter().sum();
    let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if infeasibility > 1e-9 * scale {
        return Ok(stopped(LpStatus::Infeasible, st.pivots, m));
    }
    // artificials are pinned at zero from here on
    for j in n..n + m {
        st.upper[j] = 0.0;
        if !st.basis.contains(&j) {
            st.x[j] = 0.0;
        }
    }
    let cost: Vec<f64> = c.iter().copied().chain(std::iter::repeat(0.0).take(m)).collect();
    let duals = match st.run(&cost)? {
        Outcome::Optimal(y) => y,
        Outcome::Stopped(s) => return Ok(stopped(s, st.pivots, m)),
    };
    let xs = st.x[..n].iter().zip(lower.iter().zip(upper)).map(|(v, (l, u))| v.clamp(*l, *u)).collect::<Vec<_>>();
    let value = crate::linalg::dot(c, &xs);
    Ok(BoundedSolution {
        status: LpStatus::Optimal,
        x: xs,
        duals,
        value,
        pivots: st.pivots,
    })
}

fn stopped(status: LpStatus, pivots: usize, m: usize) -> BoundedSolution {
    BoundedSolution {
        status,
        x: Vec::new(),
        duals: vec![f64::NAN; m],
        value: f64::NAN,
        pivots,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mu::simplex::{simplex_solve, LinearProgram};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn box_and_equality() {
        // min -x0 - 2x1, x0 + x1 = 1.5, 0 ≤ x ≤ 1
        let a = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let s = bounded_simplex(&a, &[1.5], &[-1.0, -2.0], &[0.0; 2], &[1.0; 2]).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 0.5).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
        assert!((s.value + 2.5).abs() < 1e-12);
        // basic x0 prices at y = -1
        assert!((s.duals[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let s = bounded_simplex(&a, &[3.0], &[0.0, 0.0], &[0.0; 2], &[1.0; 2]).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
        let a = Matrix::from_rows(&[vec![1.0, -1.0]]).unwrap();
        let s = bounded_simplex(&a, &[0.0], &[-1.0, 0.0], &[0.0; 2], &[f64::INFINITY; 2]).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn start_at_upper_bounds() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0, 1.0]]).unwrap();
        let s = bounded_simplex_from(&a, &[2.0], &[1.0, 2.0, 3.0], &[0.0; 3], &[1.0; 3], &[1.0; 3]).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - 3.0).abs() < 1e-12);
        assert!(bounded_simplex_from(&a, &[2.0], &[1.0; 3], &[0.0; 3], &[1.0; 3], &[0.5; 3]).is_err());
    }

    #[test]
    fn rejects_bad_bounds() {
        let a = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(bounded_simplex(&a, &[1.0], &[1.0], &[2.0], &[1.0]).is_err());
        assert!(bounded_simplex(&a, &[1.0], &[1.0], &[f64::NEG_INFINITY], &[1.0]).is_err());
    }

    /// Agreement with the tableau solver, which sees the bounds as rows.
    #[test]
    fn matches_tableau_simplex() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..40 {
            let (m, n) = (rng.random_range(1..4), rng.random_range(4..12));
            let a = Matrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
            let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let b = a.matvec(&x0);
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s = bounded_simplex(&a, &b, &c, &vec![0.0; n], &vec![1.0; n]).unwrap();
            let mut lp = LinearProgram::new(c.clone());
            for i in 0..m {
                lp = lp.eq(a.row(i).to_vec(), b[i]);
            }
            for j in 0..n {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                lp = lp.le(e, 1.0);
            }
            let t = simplex_solve(&lp).unwrap();
            assert_eq!(s.status, LpStatus::Optimal);
            assert!((s.value - t.value).abs() < 1e-9, "{} vs {}", s.value, t.value);
            let r = crate::linalg::sub_vec(&a.matvec(&s.x), &b);
            assert!(crate::linalg::norm2(&r) < 1e-10);
            // dual feasibility: reduced costs have the right sign at each bound
            let red = crate::linalg::sub_vec(&c, &a.tr_matvec(&s.duals));
            for j in 0..n {
                if s.x[j] < 1e-12 {
                    assert!(red[j] >= -1e-9);
                } else if s.x[j] > 1.0 - 1e-12 {
                    assert!(red[j] <= 1e-9);
                } else {
                    assert!(red[j].abs() <= 1e-9);
                }
            }
        }
    }
}
