//! Dense symmetric and rectangular matrix utilities.
//!
//! Everything here is a pure function of its inputs. Rank decisions always
//! take an explicit `rank_tol`: an eigen/singular value `s` is kept iff
//! `|s| > rank_tol * max(1, scale)`, where `scale` is the spectral norm.

mod decomp;
mod json;
pub mod random;
mod types;

pub use decomp::{
    null_space_basis, op_norm, pinv, pinv_rect, psd_sqrt, rank_threshold, rect_null_space, svd,
    sym_eig, EigDecomp, SvdDecomp,
};
pub use json::{mat_from_rows, mat_to_rows, vec_from_json};
pub use types::{Factor, Mat, Multiplier, SymMatrix, Vector};

use crate::error::{Error, Result};

/// Symmetric product `A∘B = (ABᵀ + BAᵀ)/2`.
pub fn sym_product(a: &Mat, b: &Mat) -> Result<SymMatrix> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "symmetric product of {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let p = a * b.transpose();
    let s = (&p + p.transpose()) * 0.5;
    Ok(SymMatrix::symmetrize(s))
}

/// Number of free entries of a `d×d` symmetric matrix.
pub fn sym_dim(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Isometric vectorization: column-major lower triangle with off-diagonal
/// entries scaled by √2, so `svec(A)·svec(B) = ⟨A, B⟩_F`.
pub fn svec(w: &SymMatrix) -> Vector {
    let d = w.dim();
    let mut out = Vector::zeros(sym_dim(d));
    let mut idx = 0;
    for j in 0..d {
        for i in j..d {
            out[idx] = if i == j {
                w[(i, j)]
            } else {
                std::f64::consts::SQRT_2 * w[(i, j)]
            };
            idx += 1;
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat(v: &Vector) -> Result<SymMatrix> {
    let n = v.len();
    // d(d+1)/2 = n
    let d = (((8 * n + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    if sym_dim(d) != n {
        return Err(Error::BadDimension(format!(
            "svec length {n} is not triangular"
        )));
    }
    let mut m = Mat::zeros(d, d);
    let mut idx = 0;
    for j in 0..d {
        for i in j..d {
            if i == j {
                m[(i, i)] = v[idx];
            } else {
                let x = v[idx] / std::f64::consts::SQRT_2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            idx += 1;
        }
    }
    Ok(SymMatrix::from_exact(m))
}

/// Orthonormal (Frobenius) basis of `Sᵈ` in [`svec`] order.
pub fn sym_basis(d: usize) -> Vec<SymMatrix> {
    let mut basis = Vec::with_capacity(sym_dim(d));
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for i in j..d {
            let mut m = Mat::zeros(d, d);
            if i == j {
                m[(i, i)] = 1.0;
            } else {
                m[(i, j)] = r;
                m[(j, i)] = r;
            }
            basis.push(SymMatrix::from_exact(m));
        }
    }
    basis
}

/// `Σᵢⱼ aᵢⱼ bᵢⱼ` for equally shaped matrices.
pub fn frob_inner(a: &Mat, b: &Mat) -> f64 {
    a.dot(b)
}

/// Basis `Eᵢⱼ` of `R^{rows×cols}` in column-major order.
pub fn unit_matrix(rows: usize, cols: usize, flat_index: usize) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    m[(flat_index % rows, flat_index / rows)] = 1.0;
    m
}
