use serde::{Deserialize, Serialize};

use super::NsdpProblem;
use crate::error::{Error, Result};
use crate::matcore::{random, Mat, SymMatrix, Vector};

/// Quadratic objective with a quadratic matrix map:
///
/// `f(x) = ½xᵀQx + qᵀx + c₀`,
/// `C(x) = C₀ + Σᵢ xᵢCᵢ + Σ_{(i,j,M)} xᵢxⱼM`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadraticNsdp {
    #[serde(rename = "Q")]
    pub q_mat: SymMatrix,
    pub q: Vec<f64>,
    #[serde(default)]
    pub c0: f64,
    #[serde(rename = "C0")]
    pub c_const: SymMatrix,
    #[serde(rename = "C_lin")]
    pub c_lin: Vec<SymMatrix>,
    /// Terms `(i, j, M)` contributing `xᵢxⱼM`.
    #[serde(rename = "C_quad", default)]
    pub c_quad: Vec<(usize, usize, SymMatrix)>,
}

impl QuadraticNsdp {
    pub fn new(
        q_mat: SymMatrix,
        q: Vector,
        c0: f64,
        c_const: SymMatrix,
        c_lin: Vec<SymMatrix>,
        c_quad: Vec<(usize, usize, SymMatrix)>,
    ) -> Result<Self> {
        let p = Self {
            q_mat,
            q: q.as_slice().to_vec(),
            c0,
            c_const,
            c_lin,
            c_quad,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.q.len();
        let d = self.c_const.dim();
        if self.q_mat.dim() != n || self.c_lin.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "quadratic_nsdp: Q is {0}x{0}, q has {n} entries, {1} linear terms",
                self.q_mat.dim(),
                self.c_lin.len()
            )));
        }
        if self.c_lin.iter().any(|c| c.dim() != d) {
            return Err(Error::DimensionMismatch(
                "quadratic_nsdp: C_lin sizes".into(),
            ));
        }
        for (i, j, m) in &self.c_quad {
            if *i >= n || *j >= n || m.dim() != d {
                return Err(Error::DimensionMismatch(format!(
                    "quadratic_nsdp: bad quadratic term ({i}, {j})"
                )));
            }
        }
        if d == 0 {
            return Err(Error::BadDimension(
                "quadratic_nsdp: empty constraint".into(),
            ));
        }
        if !self.c0.is_finite() || self.q.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("quadratic_nsdp data"));
        }
        Ok(())
    }

    fn q_vec(&self) -> Vector {
        Vector::from_column_slice(&self.q)
    }
}

/// Convex instance with a known KKT pair and an active constraint.
#[derive(Clone, Debug)]
pub struct PlantedNsdp {
    pub problem: QuadraticNsdp,
    pub x: Vector,
    pub lambda: SymMatrix,
}

/// Affine `C` with `C(x̄)` of rank `rank` and a multiplier `Λ̄` of rank
/// `d − rank` on its null space, so strict complementarity holds. The objective
/// is a strongly convex quadratic with `∇f(x̄) = DC*(Λ̄)`, making `x̄` the
/// unique minimizer.
pub fn make_planted_nsdp(n: usize, d: usize, rank: usize, seed: u64) -> Result<PlantedNsdp> {
    if n == 0 || d == 0 || rank > d {
        return Err(Error::BadDimension(format!(
            "planted instance needs n, d > 0 and rank <= d, got n={n} d={d} rank={rank}"
        )));
    }
    let mut rng = random::rng(seed);
    let q = random::orthogonal(d, &mut rng);
    let x_bar = random::gaussian_vec(n, &mut rng);
    let mut c_at = Mat::zeros(d, d);
    let mut lam = Mat::zeros(d, d);
    for i in 0..d {
        let qi = q.column(i);
        if i < rank {
            c_at += qi * qi.transpose() * (0.5 + i as f64 / d as f64);
        } else {
            lam += qi * qi.transpose() * (0.5 + (i - rank) as f64 / d as f64);
        }
    }
    let c_lin: Vec<SymMatrix> = (0..n).map(|_| random::symmetric(d, &mut rng)).collect();
    let mut c_const = c_at;
    for (i, ci) in c_lin.iter().enumerate() {
        c_const -= ci.as_mat() * x_bar[i];
    }
    let lambda = SymMatrix::symmetrize(lam);
    let grad = Vector::from_iterator(n, c_lin.iter().map(|ci| ci.inner(&lambda)));
    let a = random::gaussian(n, n, &mut rng);
    let q_mat = SymMatrix::symmetrize(&a * a.transpose() + Mat::identity(n, n));
    let qx = q_mat.as_mat() * &x_bar;
    let problem = QuadraticNsdp::new(
        q_mat,
        &grad - &qx,
        0.5 * x_bar.dot(&qx) - grad.dot(&x_bar),
        SymMatrix::symmetrize(c_const),
        c_lin,
        Vec::new(),
    )?;
    Ok(PlantedNsdp {
        problem,
        x: x_bar,
        lambda,
    })
}

/// `f(x) = ½(x+1)²`, `C(x) = [x²+1  x; x  x²+1]`.
pub fn make_example_3_1() -> QuadraticNsdp {
    let off = SymMatrix::from_exact(Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    QuadraticNsdp::new(
        SymMatrix::identity(1),
        Vector::from_element(1, 1.0),
        0.5,
        SymMatrix::identity(2),
        vec![off],
        vec![(0, 0, SymMatrix::identity(2))],
    )
    .expect("static example data")
}

impl NsdpProblem for QuadraticNsdp {
    fn n(&self) -> usize {
        self.q.len()
    }

    fn d(&self) -> usize {
        self.c_const.dim()
    }

    fn f(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(self.q_mat.as_mat() * x)) + self.q_vec().dot(x) + self.c0
    }

    fn f_grad(&self, x: &Vector) -> Vector {
        self.q_mat.as_mat() * x + self.q_vec()
    }

    fn f_hess_form(&self, _x: &Vector, z1: &Vector, z2: &Vector) -> f64 {
        z1.dot(&(self.q_mat.as_mat() * z2))
    }

    fn c(&self, x: &Vector) -> SymMatrix {
        let mut m = self.c_const.as_mat().clone();
        for (ci, xi) in self.c_lin.iter().zip(x.iter()) {
            m += ci.as_mat() * *xi;
        }
        for (i, j, cij) in &self.c_quad {
            m += cij.as_mat() * (x[*i] * x[*j]);
        }
        SymMatrix::symmetrize(m)
    }

    fn dc(&self, x: &Vector, z: &Vector) -> SymMatrix {
        let d = self.d();
        let mut m = Mat::zeros(d, d);
        for (ci, zi) in self.c_lin.iter().zip(z.iter()) {
            m += ci.as_mat() * *zi;
        }
        for (i, j, cij) in &self.c_quad {
            m += cij.as_mat() * (z[*i] * x[*j] + x[*i] * z[*j]);
        }
        SymMatrix::symmetrize(m)
    }

    fn dc_adj(&self, x: &Vector, lambda: &SymMatrix) -> Vector {
        let mut out = Vector::from_iterator(self.n(), self.c_lin.iter().map(|c| c.inner(lambda)));
        for (i, j, cij) in &self.c_quad {
            let s = cij.inner(lambda);
            out[*i] += s * x[*j];
            out[*j] += s * x[*i];
        }
        out
    }

    fn d2c_form(&self, _x: &Vector, z1: &Vector, z2: &Vector) -> SymMatrix {
        let d = self.d();
        let mut m = Mat::zeros(d, d);
        for (i, j, cij) in &self.c_quad {
            m += cij.as_mat() * (z1[*i] * z2[*j] + z2[*i] * z1[*j]);
        }
        SymMatrix::symmetrize(m)
    }
}
