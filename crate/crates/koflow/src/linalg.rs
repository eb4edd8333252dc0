//! Dense helpers on top of `nalgebra` shared by every module.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;

pub fn eye(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Spectral norm. Zero for empty matrices.
pub fn op_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Singular values in ascending order, `min(p, q)` of them.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let k = m.nrows().min(m.ncols());
    let eig = sym_eigen(&augmented(m));
    let total = eig.values.len();
    eig.values[total - k..].iter().map(|x| x.max(0.0)).collect()
}

/// `[[0, M], [Mᵀ, 0]]`, whose spectrum is `±σ` padded with zeros.
fn augmented(m: &Mat) -> Mat {
    let (p, q) = (m.nrows(), m.ncols());
    let mut s = Mat::zeros(p + q, p + q);
    s.view_mut((0, p), (p, q)).copy_from(m);
    s.view_mut((p, 0), (q, p)).copy_from(&m.transpose());
    s
}

/// Singular triplets of a square matrix from the symmetric eigenproblem of
/// `[[0, M], [Mᵀ, 0]]`; small singular values keep absolute accuracy `ε‖M‖`.
///
/// Columns of `u`, `v` follow `sigma` (ascending). Columns belonging to a zero
/// singular value are not meaningful; use `kernel_projector` for the kernel.
pub struct SquareSvd {
    pub sigma: Vec<f64>,
    pub u: Mat,
    pub v: Mat,
}

impl SquareSvd {
    pub fn new(m: &Mat) -> Self {
        let n = m.nrows();
        assert_eq!(n, m.ncols(), "square matrix expected");
        let eig = sym_eigen(&augmented(m));
        let r2 = std::f64::consts::SQRT_2;
        let top = eig.vectors.view((0, n), (n, n)) * r2;
        let bot = eig.vectors.view((n, n), (n, n)) * r2;
        SquareSvd {
            sigma: eig.values[n..].iter().map(|x| x.max(0.0)).collect(),
            u: top.into_owned(),
            v: bot.into_owned(),
        }
    }

    /// `Σ_{i ≥ k} u_i v_iᵀ`, the phase on the span of the `n − k` largest singular values.
    pub fn partial_phase(&self, k: usize) -> Mat {
        let n = self.sigma.len();
        let u = self.u.columns(k, n - k);
        let v = self.v.columns(k, n - k);
        u * v.transpose()
    }

    /// Projector onto the span of the right singular vectors of the `k` smallest values.
    pub fn kernel_projector(&self, k: usize) -> Mat {
        let n = self.sigma.len();
        let v = self.v.columns(k, n - k);
        eye(n) - &v * v.transpose()
    }
}

pub fn skew_part(m: &Mat) -> Mat {
    (m - m.transpose()) * 0.5
}

pub fn sym_part(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn block_diag(a: &Mat, b: &Mat) -> Mat {
    let (na, nb) = (a.nrows(), b.nrows());
    let mut out = Mat::zeros(na + nb, na + nb);
    out.view_mut((0, 0), (na, na)).copy_from(a);
    out.view_mut((na, na), (nb, nb)).copy_from(b);
    out
}

/// Ascending eigenpairs of the symmetric part of `m`.
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl Eigen {
    pub fn columns(&self, idx: impl IntoIterator<Item = usize>) -> Mat {
        let idx: Vec<usize> = idx.into_iter().collect();
        let n = self.vectors.nrows();
        let mut out = Mat::zeros(n, idx.len());
        for (k, &i) in idx.iter().enumerate() {
            out.set_column(k, &self.vectors.column(i));
        }
        out
    }
}

pub fn sym_eigen(m: &Mat) -> Eigen {
    let n = m.nrows();
    if n == 0 {
        return Eigen {
            values: Vec::new(),
            vectors: Mat::zeros(0, 0),
        };
    }
    let se = SymmetricEigen::new(sym_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &se.eigenvectors.column(i));
    }
    Eigen { values, vectors }
}

/// Apply `f` to the spectrum of a symmetric matrix.
pub fn sym_function(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let e = sym_eigen(m);
    let n = m.nrows();
    let mut scaled = e.vectors.clone();
    for k in 0..n {
        let fk = f(e.values[k]);
        scaled.column_mut(k).scale_mut(fk);
    }
    scaled * e.vectors.transpose()
}

/// Nearest orthogonal matrix (polar factor) of an invertible square matrix.
pub fn polar_orthogonal(m: &Mat) -> Mat {
    if m.is_empty() {
        return m.clone();
    }
    SquareSvd::new(m).partial_phase(0)
}

/// Phase `M (MᵀM)^{-1/2}` of an invertible matrix, via the polar factor.
pub fn phase(m: &Mat) -> Mat {
    polar_orthogonal(m)
}

/// Split of a nonnegative ascending spectrum into a zero cluster and the rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroSplit {
    pub dim: usize,
    /// Largest singular value counted as zero (0 when the cluster is empty).
    pub largest_zero: f64,
    /// Smallest singular value counted as nonzero (infinity when none).
    pub smallest_nonzero: f64,
}

/// Classify the eigenvalues `lambda` (ascending, of a Gram matrix `MᵀM`) as zero when
/// `λ ≤ rel · max(λ_max, scale)`. Singular values on both sides must be separated by `gap`.
pub fn zero_split(lambda: &[f64], rel: f64, gap: f64, scale: f64) -> Result<ZeroSplit> {
    let lmax = lambda.iter().fold(0.0_f64, |a, &x| a.max(x));
    let thr = rel * lmax.max(scale);
    let dim = lambda.iter().filter(|&&x| x <= thr).count();
    let largest_zero = if dim == 0 {
        0.0
    } else {
        lambda[dim - 1].max(0.0).sqrt()
    };
    let smallest_nonzero = if dim == lambda.len() {
        f64::INFINITY
    } else {
        lambda[dim].max(0.0).sqrt()
    };
    if dim > 0 && dim < lambda.len() && smallest_nonzero < gap * largest_zero {
        return Err(Error::AmbiguousKernel(format!(
            "zero cluster of size {dim} ends at singular value {largest_zero:.3e}, next is {smallest_nonzero:.3e} (ratio below {gap:.0e})"
        )));
    }
    Ok(ZeroSplit {
        dim,
        largest_zero,
        smallest_nonzero,
    })
}

/// Orthonormal basis of the column span, dropping directions below `tol`.
pub fn orthonormalize(m: &Mat, tol: f64) -> Mat {
    let n = m.nrows();
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::new();
    for j in 0..m.ncols() {
        let mut v = m.column(j).into_owned();
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let nv = v.norm();
        if nv > tol {
            basis.push(v / nv);
        }
    }
    let mut out = Mat::zeros(n, basis.len());
    for (k, b) in basis.iter().enumerate() {
        out.set_column(k, b);
    }
    out
}

pub fn trace(m: &Mat) -> f64 {
    m.diagonal().sum()
}

/// Nearest integer, refusing to round when the residual exceeds `guard`.
pub fn integer_of(x: f64, guard: f64, what: &str) -> Result<i64> {
    let r = x.round();
    if (x - r).abs() > guard {
        return Err(Error::Numerical(format!(
            "{what} = {x} is not an integer within {guard:e}"
        )));
    }
    Ok(r as i64)
}

pub fn from_rows(rows: &[&[f64]]) -> Mat {
    let n = rows.len();
    let m = if n == 0 { 0 } else { rows[0].len() };
    Mat::from_fn(n, m, |i, j| rows[i][j])
}
