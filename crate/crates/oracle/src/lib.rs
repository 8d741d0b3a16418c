//! Reference computations for tests.
//!
//! Everything here is deliberately slow and shares no code with
//! `sketchreg-core`: matrices are plain `Vec<Vec<f64>>` rows, and each routine
//! uses a different algorithm from the production path it is checked against.

use std::f64::consts::PI;

pub type Rows = Vec<Vec<f64>>;

/// Singular values (descending) and right singular vectors (as columns of `v`).
#[derive(Debug, Clone)]
pub struct Svd {
    pub sigma: Vec<f64>,
    /// d×d, `v[i][j]` is component i of the j-th right singular vector.
    pub v: Rows,
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn jacobi_svd(a: &[Vec<f64>]) -> Svd {
    let n = a.len();
    let d = a[0].len();
    // Work on columns.
    let mut cols: Vec<Vec<f64>> = (0..d).map(|j| (0..n).map(|i| a[i][j]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..d)
        .map(|j| (0..d).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect(); // v[j] is the j-th column
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in (p + 1)..d {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 {
                    continue;
                }
                let scale = (alpha * beta).sqrt();
                if scale == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / scale);
                if gamma.abs() <= 1e-15 * scale {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let xp = cols[p][i];
                    let xq = cols[q][i];
                    cols[p][i] = c * xp - s * xq;
                    cols[q][i] = s * xp + c * xq;
                }
                for i in 0..d {
                    let vp = v[p][i];
                    let vq = v[q][i];
                    v[p][i] = c * vp - s * vq;
                    v[q][i] = s * vp + c * vq;
                }
            }
        }
        if off <= 1e-15 {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| (c.iter().map(|x| x * x).sum::<f64>().sqrt(), j))
        .collect();
    order.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let sigma = order.iter().map(|(s, _)| *s).collect();
    let vmat = (0..d)
        .map(|i| order.iter().map(|&(_, j)| v[j][i]).collect())
        .collect();
    Svd { sigma, v: vmat }
}

/// `V_k V_kᵀ` from the first k columns of `svd.v`.
pub fn top_k_projector(svd: &Svd, k: usize) -> Rows {
    let d = svd.v.len();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| (0..k).map(|c| svd.v[i][c] * svd.v[j][c]).sum())
                .collect()
        })
        .collect()
}

pub fn frobenius_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y) * (x - y)))
        .sum::<f64>()
        .sqrt()
}

pub fn transpose(a: &[Vec<f64>]) -> Rows {
    let n = a.len();
    let d = a[0].len();
    (0..d).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Rows {
    let m = b[0].len();
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| row.iter().enumerate().map(|(l, x)| x * b[l][j]).sum())
                .collect()
        })
        .collect()
}

pub fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

/// Neumaier-compensated summation.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Logistic loss from the textbook formula `ln(1 + exp(-y xᵀβ))`, summed
/// with compensation. Only valid while the exponent stays well inside the
/// f64 range.
pub fn naive_logistic_loss(x: &[Vec<f64>], y: &[f64], beta: &[f64], lambda: f64) -> f64 {
    let terms = x.iter().zip(y).map(|(row, &yi)| {
        let m: f64 = compensated_sum(row.iter().zip(beta).map(|(a, b)| a * b));
        (1.0 + (-yi * m).exp()).ln()
    });
    let reg = 0.5 * lambda * compensated_sum(beta.iter().map(|b| b * b));
    compensated_sum(terms.chain(std::iter::once(reg)))
}

/// Central finite-difference gradient.
pub fn central_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central finite-difference Jacobian of a vector field; row i is ∂g/∂x_i.
pub fn central_jacobian<G: Fn(&[f64]) -> Vec<f64>>(g: G, x: &[f64], h: f64) -> Rows {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = g(&probe);
            probe[i] = x[i] - h;
            let down = g(&probe);
            probe[i] = x[i];
            up.iter().zip(&down).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        })
        .collect()
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisection<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on bracket");
    for _ in 0..500 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo) < tol {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gaussian elimination with partial pivoting. Returns None if singular.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut m: Rows = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[piv][col].abs() < 1e-13 {
            return None;
        }
        m.swap(col, piv);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    Some(x)
}

/// Ridge regression `(XᵀX + λI)⁻¹Xᵀy`.
pub fn ridge_closed_form(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Vec<f64> {
    let xt = transpose(x);
    let mut gram = matmul(&xt, x);
    for (i, row) in gram.iter_mut().enumerate() {
        row[i] += lambda;
    }
    let rhs = matvec(&xt, y);
    solve_dense(&gram, &rhs).expect("ridge system singular")
}

/// `min cᵀx s.t. Ax ≤ b, x ≥ 0` by enumerating every vertex. Returns None
/// when no vertex is feasible.
pub fn lp_vertex_enumeration(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<(f64, Vec<f64>)> {
    let nv = c.len();
    // All constraints as rows g·x ≤ h, including -x_j ≤ 0.
    let mut g: Rows = a.to_vec();
    let mut h: Vec<f64> = b.to_vec();
    for j in 0..nv {
        let mut row = vec![0.0; nv];
        row[j] = -1.0;
        g.push(row);
        h.push(0.0);
    }
    let m = g.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx: Vec<usize> = (0..nv).collect();
    loop {
        let sys: Rows = idx.iter().map(|&i| g[i].clone()).collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| h[i]).collect();
        if let Some(x) = solve_dense(&sys, &rhs) {
            let feasible = g
                .iter()
                .zip(&h)
                .all(|(row, &hi)| row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= hi + 1e-9);
            if feasible {
                let val: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                if best.as_ref().map_or(true, |(bv, _)| val < *bv) {
                    best = Some((val, x));
                }
            }
        }
        // next combination
        let mut i = nv;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < m - nv + i {
                idx[i] += 1;
                for j in (i + 1)..nv {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Ratio ‖(D_y X β)⁺‖₁ / ‖(D_y X β)⁻‖₁ for one direction.
pub fn complexity_ratio(x: &[Vec<f64>], y: &[f64], beta: &[f64]) -> f64 {
    let mut pos = 0.0;
    let mut neg = 0.0;
    for (row, &yi) in x.iter().zip(y) {
        let z = yi * row.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>();
        if z > 0.0 {
            pos += z;
        } else {
            neg -= z;
        }
    }
    if neg == 0.0 {
        f64::INFINITY
    } else {
        pos / neg
    }
}

/// Max of the complexity ratio over `m` equispaced directions on the unit
/// circle (d = 2 only).
pub fn mu_angular_grid(x: &[Vec<f64>], y: &[f64], m: usize) -> f64 {
    assert_eq!(x[0].len(), 2);
    (0..m)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / m as f64;
            complexity_ratio(x, y, &[theta.cos(), theta.sin()])
        })
        .fold(0.0, f64::max)
}
