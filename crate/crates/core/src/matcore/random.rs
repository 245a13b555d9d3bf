//! Seeded random matrices for tests, demos and solver perturbations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::types::{Mat, SymMatrix, Vector};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// i.i.d. standard normal entries.
pub fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Symmetric matrix with i.i.d. normal upper triangle.
pub fn symmetric<R: Rng + ?Sized>(d: usize, rng: &mut R) -> SymMatrix {
    SymMatrix::symmetrize(gaussian(d, d, rng))
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian with sign fix).
pub fn orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Mat {
    if d == 0 {
        return Mat::zeros(0, 0);
    }
    let qr = gaussian(d, d, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Random PSD matrix `GGᵀ` of rank `r` (almost surely).
pub fn psd_of_rank<R: Rng + ?Sized>(d: usize, r: usize, rng: &mut R) -> SymMatrix {
    let g = gaussian(d, r, rng);
    SymMatrix::symmetrize(&g * g.transpose())
}

/// Random matrix with unit Frobenius norm.
pub fn unit<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    let m = gaussian(rows, cols, rng);
    let n = m.norm();
    if n == 0.0 {
        m
    } else {
        m / n
    }
}

/// Uniform sample from the closed ball of the given radius in `R^n`.
pub fn in_ball<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Vector {
    let g = gaussian_vec(n, rng);
    let norm = g.norm();
    if norm == 0.0 || n == 0 {
        return Vector::zeros(n);
    }
    let u: f64 = rng.random();
    g * (radius * u.powf(1.0 / n as f64) / norm)
}
