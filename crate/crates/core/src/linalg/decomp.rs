use super::{dot, Matrix};
use crate::error::{Error, Result};

/// Householder QR, optionally with column pivoting: `A P = Q R`.
#[derive(Debug, Clone)]
pub struct Qr {
    rows: usize,
    cols: usize,
    /// Upper-triangular factor, `min(rows, cols)` × `cols`, in pivoted order.
    r: Matrix,
    /// Householder vectors; reflector j acts on rows `j..`.
    reflectors: Vec<(Vec<f64>, f64)>,
    /// `perm[j]` is the original column sitting at position j.
    perm: Vec<usize>,
}

impl Qr {
    pub fn new(a: &Matrix) -> Self {
        Self::factor(a, false)
    }

    pub fn pivoted(a: &Matrix) -> Self {
        Self::factor(a, true)
    }

    fn factor(a: &Matrix, pivot: bool) -> Self {
        let (n, d) = a.shape();
        let steps = n.min(d);
        let mut w = a.clone();
        let mut perm: Vec<usize> = (0..d).collect();
        let mut reflectors = Vec::with_capacity(steps);
        for j in 0..steps {
            if pivot {
                let norms: Vec<f64> = (j..d)
                    .map(|c| (j..n).map(|i| w[(i, c)] * w[(i, c)]).sum::<f64>())
                    .collect();
                let best = norms
                    .iter()
                    .enumerate()
                    .fold((0, -1.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
                    .0
                    + j;
                if best != j {
                    for i in 0..n {
                        let t = w[(i, j)];
                        w[(i, j)] = w[(i, best)];
                        w[(i, best)] = t;
                    }
                    perm.swap(j, best);
                }
            }
            let x: Vec<f64> = (j..n).map(|i| w[(i, j)]).collect();
            let xnorm = super::norm2(&x);
            if xnorm == 0.0 {
                reflectors.push((Vec::new(), 0.0));
                continue;
            }
            let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
            let mut v = x;
            v[0] -= alpha;
            let vnorm_sq = dot(&v, &v);
            let beta = if vnorm_sq == 0.0 { 0.0 } else { 2.0 / vnorm_sq };
            for c in j..d {
                let s: f64 = (j..n).map(|i| v[i - j] * w[(i, c)]).sum::<f64>() * beta;
                if s != 0.0 {
                    for i in j..n {
                        w[(i, c)] -= s * v[i - j];
                    }
                }
            }
            // exact zeros below the diagonal
            w[(j, j)] = alpha;
            for i in (j + 1)..n {
                w[(i, j)] = 0.0;
            }
            reflectors.push((v, beta));
        }
        let r = Matrix::from_fn(steps, d, |i, c| if c >= i { w[(i, c)] } else { 0.0 });
        Self {
            rows: n,
            cols: d,
            r,
            reflectors,
            perm,
        }
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Numerical rank: leading diagonal entries of R above `rel_tol · |R₀₀|`.
    /// Meaningful for the pivoted factorization only.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let steps = self.rows.min(self.cols);
        let r00 = self.r[(0, 0)].abs();
        if r00 == 0.0 {
            return 0;
        }
        (0..steps)
            .take_while(|&j| self.r[(j, j)].abs() > rel_tol * r00)
            .count()
    }

    /// `b ← Qᵀ b`
    pub fn apply_qt(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.rows);
        for (j, (v, beta)) in self.reflectors.iter().enumerate() {
            if v.is_empty() {
                continue;
            }
            let s = dot(v, &b[j..]) * beta;
            for (bi, vi) in b[j..].iter_mut().zip(v) {
                *bi -= s * vi;
            }
        }
    }

    /// `b ← Q b`
    pub fn apply_q(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.rows);
        for (j, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if v.is_empty() {
                continue;
            }
            let s = dot(v, &b[j..]) * beta;
            for (bi, vi) in b[j..].iter_mut().zip(v) {
                *bi -= s * vi;
            }
        }
    }

    /// Columns `from..to` of the full n×n orthogonal factor.
    pub fn q_columns(&self, from: usize, to: usize) -> Matrix {
        let cols: Vec<Vec<f64>> = (from..to)
            .map(|c| {
                let mut e = vec![0.0; self.rows];
                e[c] = 1.0;
                self.apply_q(&mut e);
                e
            })
            .collect();
        if cols.is_empty() {
            return Matrix::zeros(self.rows, 0);
        }
        Matrix::from_columns(&cols)
    }
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

pub fn cholesky(a: &Matrix) -> Result<Cholesky> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch("cholesky needs a square matrix".into()));
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(Cholesky { l })
}

impl Cholesky {
    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        let l = &self.l;
        let mut y = b.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[(i, k)] * y[k]).sum();
            y[i] = (y[i] - s) / l[(i, i)];
        }
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|k| l[(k, i)] * y[k]).sum();
            y[i] = (y[i] - s) / l[(i, i)];
        }
        y
    }
}

pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    Ok(cholesky(a)?.solve(b))
}

/// LU factorization with partial pivoting, `PA = LU`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    /// Fails when a pivot falls below `1e-13` in magnitude.
    pub fn new(a: &Matrix) -> Result<Self> {
        let m = a.rows();
        if a.cols() != m {
            return Err(Error::DimensionMismatch("LU needs a square matrix".into()));
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let p = (k..m)
                .max_by(|&x, &y| lu[(x, k)].abs().total_cmp(&lu[(y, k)].abs()))
                .expect("nonempty pivot range");
            if !(lu[(p, k)].abs() >= 1e-13) {
                return Err(Error::InvalidInput("matrix is numerically singular".into()));
            }
            if p != k {
                for j in 0..m {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
            }
            for i in (k + 1)..m {
                let f = lu[(i, k)] / lu[(k, k)];
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in (k + 1)..m {
                        lu[(i, j)] -= f * lu[(k, j)];
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    /// `A x = b`
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = self.perm.len();
        let lu = &self.lu;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..m {
            for k in 0..i {
                x[i] -= lu[(i, k)] * x[k];
            }
        }
        for i in (0..m).rev() {
            for k in (i + 1)..m {
                x[i] -= lu[(i, k)] * x[k];
            }
            x[i] /= lu[(i, i)];
        }
        x
    }

    /// `Aᵀ y = c`
    pub fn solve_transpose(&self, c: &[f64]) -> Vec<f64> {
        let m = self.perm.len();
        let lu = &self.lu;
        let mut w = c.to_vec();
        for i in 0..m {
            for k in 0..i {
                w[i] -= lu[(k, i)] * w[k];
            }
            w[i] /= lu[(i, i)];
        }
        for i in (0..m).rev() {
            for k in (i + 1)..m {
                w[i] -= lu[(k, i)] * w[k];
            }
        }
        let mut y = vec![0.0; m];
        for (i, &p) in self.perm.iter().enumerate() {
            y[p] = w[i];
        }
        y
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: Matrix,
}

/// Cyclic Jacobi rotations. Only the upper triangle's symmetric part is used.
pub fn symmetric_eigen(a: &Matrix) -> SymmetricEigen {
    let n = a.rows();
    assert_eq!(n, a.cols(), "symmetric_eigen needs a square matrix");
    let mut m = Matrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v = Matrix::identity(n);
    let frob = m.frobenius_norm();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap_or(std::cmp::Ordering::Equal));
    SymmetricEigen {
        values: order.iter().map(|&i| m[(i, i)]).collect(),
        vectors: Matrix::from_fn(n, n, |r, c| v[(r, order[c])]),
    }
}
