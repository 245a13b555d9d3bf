use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::json::{mat_from_rows, mat_to_rows};
use crate::error::{Error, Result};
use crate::tol::SYM_TOL;

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Dense symmetric matrix. Stored exactly symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(Mat);

impl SymMatrix {
    /// Validates symmetry at [`SYM_TOL`] and stores `(M+Mᵀ)/2`.
    pub fn new(m: Mat) -> Result<Self> {
        Self::with_tol(m, SYM_TOL)
    }

    pub fn with_tol(m: Mat, sym_tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::BadDimension(format!(
                "symmetric matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("symmetric matrix"));
        }
        let max_abs = m.amax();
        let asymmetry = (&m - m.transpose()).amax();
        if asymmetry > sym_tol * (1.0 + max_abs) {
            return Err(Error::NotSymmetric { asymmetry });
        }
        Ok(Self::symmetrize(m))
    }

    /// `(M+Mᵀ)/2` without any check beyond squareness.
    ///
    /// # Panics
    /// If `m` is not square.
    pub fn symmetrize(m: Mat) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "symmetrize needs a square matrix");
        let t = m.transpose();
        Self((m + t) * 0.5)
    }

    /// Wraps a matrix that is symmetric by construction.
    pub(crate) fn from_exact(m: Mat) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self(m)
    }

    pub fn zeros(d: usize) -> Self {
        Self(Mat::zeros(d, d))
    }

    pub fn identity(d: usize) -> Self {
        Self(Mat::identity(d, d))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self(Mat::from_diagonal(&Vector::from_column_slice(diag)))
    }

    /// Row-major literal, validated as in [`SymMatrix::new`].
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(mat_from_rows(rows)?)
    }

    /// `u uᵀ`
    pub fn outer(u: &Vector) -> Self {
        Self::symmetrize(u * u.transpose())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    /// Frobenius inner product.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn fro_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        Self(&self.0 * s)
    }

    /// `Q M Qᵀ`, symmetrized.
    pub fn congruence(&self, q: &Mat) -> SymMatrix {
        Self::symmetrize(q * &self.0 * q.transpose())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Deref for SymMatrix {
    type Target = Mat;
    fn deref(&self) -> &Mat {
        &self.0
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &rhs.0)
    }
}

impl Add for SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: SymMatrix) -> SymMatrix {
        SymMatrix(self.0 + rhs.0)
    }
}

impl Sub for SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: SymMatrix) -> SymMatrix {
        SymMatrix(self.0 - rhs.0)
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        SymMatrix(&self.0 * rhs)
    }
}

impl Neg for SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        SymMatrix(-self.0)
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        mat_to_rows(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        SymMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// General `d×k` factor (the `F` of `X = FFᵀ`, or a direction `Δ`).
#[derive(Clone, Debug, PartialEq)]
pub struct Factor(Mat);

impl Factor {
    pub fn new(m: Mat) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("factor"));
        }
        Ok(Self(m))
    }

    pub fn zeros(d: usize, k: usize) -> Self {
        Self(Mat::zeros(d, k))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn width(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    /// `FFᵀ`
    pub fn gram(&self) -> SymMatrix {
        SymMatrix::symmetrize(&self.0 * self.0.transpose())
    }
}

impl Deref for Factor {
    type Target = Mat;
    fn deref(&self) -> &Mat {
        &self.0
    }
}

impl From<SymMatrix> for Factor {
    fn from(s: SymMatrix) -> Self {
        Factor(s.into_mat())
    }
}

impl Serialize for Factor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        mat_to_rows(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Factor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let m = mat_from_rows(&rows).map_err(serde::de::Error::custom)?;
        Ok(Factor(m))
    }
}

/// Lagrange multiplier `Λ` for the PSD constraint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Multiplier(pub SymMatrix);

impl Multiplier {
    pub fn zeros(d: usize) -> Self {
        Self(SymMatrix::zeros(d))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

impl Deref for Multiplier {
    type Target = SymMatrix;
    fn deref(&self) -> &SymMatrix {
        &self.0
    }
}
