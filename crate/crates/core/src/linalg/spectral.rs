use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{decomp::Qr, dot, norm2, symmetric_eigen, Matrix};
use crate::error::{Error, Result};

/// Singular values below `DEFAULT_RANK_TOL · σ₁` count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

const POWER_MAX_ITERS: usize = 50_000;
const SUBSPACE_MAX_ITERS: usize = 20_000;
const RESTART_SEED: u64 = 0x5EED_0001;

/// Largest singular value of `a`, relative error at most `tol`.
///
/// Power iteration on the smaller Gram matrix, started from the normalized
/// all-ones vector and then once more from a seeded random vector; the larger
/// Rayleigh quotient wins. The second run catches starts that are orthogonal
/// (or nearly so) to the dominant singular vector.
pub fn spectral_norm(a: &Matrix, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tol must be positive, got {tol}")));
    }
    let g = if a.rows() >= a.cols() { a.gram() } else { a.outer_gram() };
    let m = g.rows();
    if m == 1 {
        return Ok(g[(0, 0)].max(0.0).sqrt());
    }
    if g.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let ones = vec![1.0 / (m as f64).sqrt(); m];
    let first = power_iteration(&g, ones, tol)?;
    let mut rng = ChaCha20Rng::seed_from_u64(RESTART_SEED);
    let start: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
    let second = power_iteration(&g, start, tol)?;
    Ok(first.max(second).max(0.0).sqrt())
}

fn power_iteration(g: &Matrix, mut v: Vec<f64>, tol: f64) -> Result<f64> {
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    // Residual bound |θ − λ| ≤ ‖Gv − θv‖ for symmetric G; σ = √θ halves it.
    for _ in 0..POWER_MAX_ITERS {
        let gv = g.matvec(&v);
        let theta = dot(&v, &gv);
        let resid = norm2(&gv.iter().zip(&v).map(|(a, b)| a - theta * b).collect::<Vec<_>>());
        if resid <= tol * theta.abs() || theta == 0.0 && resid == 0.0 {
            return Ok(theta);
        }
        let n = norm2(&gv);
        if n == 0.0 {
            return Ok(0.0);
        }
        v = gv.into_iter().map(|x| x / n).collect();
    }
    Err(Error::NonConvergence {
        what: "spectral norm power iteration",
        iterations: POWER_MAX_ITERS,
    })
}

/// Dominant right singular subspace.
#[derive(Debug, Clone)]
pub struct TopK {
    /// d×k, orthonormal columns ordered by decreasing singular value.
    pub v: Matrix,
    pub singular_values: Vec<f64>,
    /// Set when σ_k and σ_{k+1} coincide within tolerance, so the subspace
    /// is not uniquely determined.
    pub non_unique: bool,
}

/// Top-k right singular vectors via block subspace iteration on `AᵀA` with
/// Rayleigh–Ritz extraction. The block is oversampled to `min(d, 2k + 8)`
/// columns; the start block is a seeded Gaussian draw, so the output is
/// deterministic.
pub fn top_k_right_singular_vectors(a: &Matrix, k: usize, tol: f64) -> Result<TopK> {
    let d = a.cols();
    if k == 0 || k > a.rows().min(d) {
        return Err(Error::InvalidInput(format!(
            "k = {k} must lie in 1..={}",
            a.rows().min(d)
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tol must be positive, got {tol}")));
    }
    let g = a.gram();
    let p = d.min(2 * k + 8);
    let mut rng = ChaCha20Rng::seed_from_u64(RESTART_SEED ^ k as u64);
    let start = Matrix::from_fn(d, p, |_, _| StandardNormal.sample(&mut rng));
    let mut q = orthonormalize(&start);
    let mut iterations = 0;
    loop {
        // Rayleigh–Ritz on the current block.
        let gq = g.matmul(&q);
        let h = q.transpose().matmul(&gq);
        let eig = symmetric_eigen(&h);
        let ritz = q.matmul(&eig.vectors);
        let g_ritz = gq.matmul(&eig.vectors);
        let theta1 = eig.values[0].abs().max(f64::MIN_POSITIVE);
        let converged = (0..k).all(|c| {
            let r: f64 = (0..d)
                .map(|i| {
                    let e = g_ritz[(i, c)] - eig.values[c] * ritz[(i, c)];
                    e * e
                })
                .sum::<f64>()
                .sqrt();
            r <= tol * theta1
        });
        if converged || p == d {
            let cols: Vec<usize> = (0..k).collect();
            let v = ritz.select_columns(&cols);
            let gap_tol = tol.max(1e-12) * theta1;
            let non_unique = k < p && (eig.values[k - 1] - eig.values[k]).abs() <= gap_tol;
            return Ok(TopK {
                v,
                singular_values: eig.values[..k].iter().map(|t| t.max(0.0).sqrt()).collect(),
                non_unique,
            });
        }
        iterations += 1;
        if iterations > SUBSPACE_MAX_ITERS {
            return Err(Error::NonConvergence {
                what: "subspace iteration",
                iterations,
            });
        }
        q = orthonormalize(&g.matmul(&ritz));
    }
}

/// Orthonormal basis for the columns of `m` (thin Householder Q). Columns
/// that collapse to zero are replaced by the corresponding Q column, so the
/// output always has orthonormal columns.
fn orthonormalize(m: &Matrix) -> Matrix {
    let qr = Qr::new(m);
    qr.q_columns(0, m.cols())
}

/// Orthonormal bases for the column space of a matrix and its complement.
#[derive(Debug, Clone)]
pub struct RangeBasis {
    /// n×r
    pub range: Matrix,
    /// n×(n−r); `None` when the range is all of Rⁿ.
    pub complement: Option<Matrix>,
    pub rank: usize,
}

pub fn range_basis(a: &Matrix, rank_tol: f64) -> Result<RangeBasis> {
    if !(rank_tol > 0.0) {
        return Err(Error::InvalidInput(format!("rank_tol must be positive, got {rank_tol}")));
    }
    let n = a.rows();
    let qr = Qr::pivoted(a);
    let rank = qr.rank(rank_tol);
    let range = if rank == 0 {
        Matrix::zeros(n, 1)
    } else {
        qr.q_columns(0, rank)
    };
    let complement = (rank < n).then(|| qr.q_columns(rank, n));
    Ok(RangeBasis {
        range,
        complement,
        rank,
    })
}

/// Orthogonal projector onto the column space of `a`.
#[derive(Debug, Clone)]
pub struct RangeProjector {
    /// n×n, symmetric and idempotent.
    pub projector: Matrix,
    pub rank: usize,
}

pub fn range_projector(a: &Matrix, rank_tol: f64) -> Result<RangeProjector> {
    let basis = range_basis(a, rank_tol)?;
    let n = a.rows();
    if basis.rank == 0 {
        return Ok(RangeProjector {
            projector: Matrix::zeros(n, n),
            rank: 0,
        });
    }
    let q = &basis.range;
    Ok(RangeProjector {
        projector: q.matmul(&q.transpose()),
        rank: basis.rank,
    })
}

/// Solution of `min ‖Ax − b‖₂`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub x: Vec<f64>,
    pub rank: usize,
    /// Set when `A` lacks full column rank; `x` is then the minimum-norm
    /// minimizer.
    pub rank_deficient: bool,
    pub residual_norm: f64,
}

/// Least squares through QR with column pivoting. Rank-deficient systems go
/// through a complete orthogonal decomposition to return the minimum-norm
/// solution.
pub fn least_squares(a: &Matrix, b: &[f64]) -> Result<LeastSquares> {
    least_squares_with_tol(a, b, DEFAULT_RANK_TOL)
}

pub fn least_squares_with_tol(a: &Matrix, b: &[f64], rank_tol: f64) -> Result<LeastSquares> {
    let (n, d) = a.shape();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "rhs has length {}, matrix has {n} rows",
            b.len()
        )));
    }
    let qr = Qr::pivoted(a);
    let rank = qr.rank(rank_tol);
    let mut c = b.to_vec();
    qr.apply_qt(&mut c);
    let mut x_perm = vec![0.0; d];
    if rank > 0 {
        let r = qr.r();
        if rank == d {
            for i in (0..d).rev() {
                let s: f64 = ((i + 1)..d).map(|j| r[(i, j)] * x_perm[j]).sum();
                x_perm[i] = (c[i] - s) / r[(i, i)];
            }
        } else {
            // [R11 R12] = Uᵀ Zᵀ from the QR of its transpose; then
            // x̃ = Z U⁻ᵀ c is the minimum-norm solution.
            let top = Matrix::from_fn(d, rank, |i, j| r[(j, i)]);
            let tqr = Qr::new(&top);
            let u = tqr.r();
            let mut w = vec![0.0; rank];
            for i in 0..rank {
                let s: f64 = (0..i).map(|j| u[(j, i)] * w[j]).sum();
                w[i] = (c[i] - s) / u[(i, i)];
            }
            let mut full = vec![0.0; d];
            full[..rank].copy_from_slice(&w);
            tqr.apply_q(&mut full);
            x_perm = full;
        }
    }
    let mut x = vec![0.0; d];
    for (j, &orig) in qr.permutation().iter().enumerate() {
        x[orig] = x_perm[j];
    }
    let ax = a.matvec(&x);
    let residual_norm = norm2(&ax.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>());
    Ok(LeastSquares {
        x,
        rank,
        rank_deficient: rank < d,
        residual_norm,
    })
}
