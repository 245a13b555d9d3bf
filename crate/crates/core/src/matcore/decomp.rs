use nalgebra::linalg::{SymmetricEigen, SVD};

use super::types::{Mat, SymMatrix, Vector};
use crate::error::{Error, Result};

/// Cutoff below which a value counts as zero: `rank_tol * max(1, max |v|)`.
pub fn rank_threshold(values: &[f64], rank_tol: f64) -> f64 {
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    rank_tol * scale.max(1.0)
}

/// Symmetric eigendecomposition with eigenvalues sorted nonincreasing by value.
#[derive(Clone, Debug)]
pub struct EigDecomp {
    pub u: Mat,
    pub sigma: Vector,
    pub rank: usize,
    pub rank_tol: f64,
}

impl EigDecomp {
    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn threshold(&self) -> f64 {
        rank_threshold(self.sigma.as_slice(), self.rank_tol)
    }

    pub fn is_zero(&self, i: usize) -> bool {
        self.sigma[i].abs() <= self.threshold()
    }

    /// Indices of eigenvalues counted as nonzero, in sorted order.
    pub fn range_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| !self.is_zero(i)).collect()
    }

    pub fn null_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.is_zero(i)).collect()
    }

    pub fn columns(&self, idx: &[usize]) -> Mat {
        self.u.select_columns(idx)
    }

    pub fn range_basis(&self) -> Mat {
        self.columns(&self.range_indices())
    }

    pub fn null_basis(&self) -> Mat {
        self.columns(&self.null_indices())
    }

    pub fn min(&self) -> f64 {
        self.sigma.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.sigma.amax()
    }

    /// `U f(Σ) Uᵀ` over all eigenpairs.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let scaled = Mat::from_fn(self.dim(), self.dim(), |i, j| {
            self.u[(i, j)] * f(self.sigma[j])
        });
        SymMatrix::symmetrize(scaled * self.u.transpose())
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.map(|s| s)
    }
}

pub fn sym_eig(m: &SymMatrix, rank_tol: f64) -> Result<EigDecomp> {
    if !m.is_finite() {
        return Err(Error::NonFinite("eigendecomposition input"));
    }
    let d = m.dim();
    if d == 0 {
        return Ok(EigDecomp {
            u: Mat::zeros(0, 0),
            sigma: Vector::zeros(0),
            rank: 0,
            rank_tol,
        });
    }
    let eig = SymmetricEigen::new(m.as_mat().clone());
    let mut order: Vec<usize> = (0..d).collect();
    // stable: ties keep the backend's order
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let sigma = Vector::from_iterator(d, order.iter().map(|&i| eig.eigenvalues[i]));
    let u = eig.eigenvectors.select_columns(&order);
    let thr = rank_threshold(sigma.as_slice(), rank_tol);
    let rank = sigma.iter().filter(|s| s.abs() > thr).count();
    Ok(EigDecomp {
        u,
        sigma,
        rank,
        rank_tol,
    })
}

/// Truncated SVD keeping the `rank` singular values above threshold.
#[derive(Clone, Debug)]
pub struct SvdDecomp {
    pub u: Mat,
    pub sigma: Vector,
    pub v: Mat,
    pub rank: usize,
}

impl SvdDecomp {
    pub fn reconstruct(&self) -> Mat {
        let us = Mat::from_fn(self.u.nrows(), self.rank, |i, j| {
            self.u[(i, j)] * self.sigma[j]
        });
        us * self.v.transpose()
    }
}

/// Full thin SVD, singular values sorted nonincreasing.
fn thin_svd(m: &Mat) -> (Mat, Vector, Mat) {
    let (r, c) = m.shape();
    let p = r.min(c);
    if p == 0 {
        return (Mat::zeros(r, 0), Vector::zeros(0), Mat::zeros(c, 0));
    }
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested Vᵀ").transpose();
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    (
        u.select_columns(&order),
        Vector::from_iterator(p, order.iter().map(|&i| s[i])),
        v.select_columns(&order),
    )
}

pub fn svd(m: &Mat, rank_tol: f64) -> Result<SvdDecomp> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("svd input"));
    }
    let (u, s, v) = thin_svd(m);
    let thr = rank_threshold(s.as_slice(), rank_tol);
    let rank = s.iter().filter(|&&x| x > thr).count();
    let keep: Vec<usize> = (0..rank).collect();
    Ok(SvdDecomp {
        u: u.select_columns(&keep),
        sigma: s.rows(0, rank).into_owned(),
        v: v.select_columns(&keep),
        rank,
    })
}

/// Spectral norm (largest singular value).
pub fn op_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    thin_svd(m).1[0]
}

/// Moore–Penrose pseudoinverse of a symmetric matrix.
pub fn pinv(m: &SymMatrix, rank_tol: f64) -> Result<SymMatrix> {
    let eig = sym_eig(m, rank_tol)?;
    let thr = eig.threshold();
    Ok(eig.map(|s| if s.abs() > thr { 1.0 / s } else { 0.0 }))
}

pub fn pinv_rect(m: &Mat, rank_tol: f64) -> Result<Mat> {
    let s = svd(m, rank_tol)?;
    let vs = Mat::from_fn(s.v.nrows(), s.rank, |i, j| s.v[(i, j)] / s.sigma[j]);
    Ok(vs * s.u.transpose())
}

/// Orthonormal basis of the null space of `x`; a `d×0` matrix when `x` is nonsingular.
pub fn null_space_basis(x: &SymMatrix, rank_tol: f64) -> Result<Mat> {
    Ok(sym_eig(x, rank_tol)?.null_basis())
}

/// Orthonormal basis (`cols × nullity`) of the null space of a rectangular map.
pub fn rect_null_space(m: &Mat, rank_tol: f64) -> Result<Mat> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("null-space input"));
    }
    let (r, c) = m.shape();
    if c == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    // pad to at least square so V is complete
    let padded = if r < c {
        let mut p = Mat::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (_, s, v) = thin_svd(&padded);
    let thr = rank_threshold(s.as_slice(), rank_tol);
    let idx: Vec<usize> = (0..c).filter(|&i| s[i] <= thr).collect();
    Ok(v.select_columns(&idx))
}

/// PSD square root; eigenvalues at or below the rank threshold, including
/// slightly negative ones, are clamped to zero.
pub fn psd_sqrt(x: &SymMatrix, rank_tol: f64) -> Result<SymMatrix> {
    let eig = sym_eig(x, rank_tol)?;
    if eig.dim() == 0 {
        return Ok(SymMatrix::zeros(0));
    }
    let min = eig.min();
    if min < -rank_tol * (1.0 + eig.max_abs()) {
        return Err(Error::NotPsd { min_eig: min });
    }
    let thr = eig.threshold();
    Ok(eig.map(|s| if s <= thr { 0.0 } else { s.sqrt() }))
}
