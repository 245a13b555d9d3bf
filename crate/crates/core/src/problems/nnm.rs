use std::sync::Arc;

use super::BcProblem;
use crate::error::{Error, Result};
use crate::matcore::{random, Mat, SymMatrix, Vector};

/// Smooth objective on `d₁×d₂` matrices.
pub trait RectObjective: Send + Sync {
    fn dims(&self) -> (usize, usize);

    fn value(&self, x: &Mat) -> f64;

    fn grad(&self, x: &Mat) -> Mat;

    fn hess_form(&self, x: &Mat, w1: &Mat, w2: &Mat) -> f64;

    fn hess_gram(&self, x: &Mat, dirs: &[Mat]) -> Mat {
        let m = dirs.len();
        let mut g = Mat::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = self.hess_form(x, &dirs[i], &dirs[j]);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// Lipschitz constant of the gradient when known in closed form.
    fn lipschitz(&self) -> Option<f64> {
        None
    }
}

/// `h(X) = ½‖X − M‖_F²`
#[derive(Clone, Debug)]
pub struct FrobeniusDistance {
    pub target: Mat,
}

impl RectObjective for FrobeniusDistance {
    fn dims(&self) -> (usize, usize) {
        self.target.shape()
    }

    fn value(&self, x: &Mat) -> f64 {
        0.5 * (x - &self.target).norm_squared()
    }

    fn grad(&self, x: &Mat) -> Mat {
        x - &self.target
    }

    fn hess_form(&self, _x: &Mat, w1: &Mat, w2: &Mat) -> f64 {
        w1.dot(w2)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `h(X) = ½‖𝒜(X) − y‖²` with a dense Gaussian measurement operator acting on
/// the column-major vectorization of `X`.
#[derive(Clone, Debug)]
pub struct SensingLeastSquares {
    pub d1: usize,
    pub d2: usize,
    /// `m × d₁d₂`
    pub ops: Mat,
    pub y: Vector,
    /// Ground truth used to generate `y`, when known.
    pub planted: Option<Mat>,
}

fn vec_of(x: &Mat) -> Vector {
    Vector::from_column_slice(x.as_slice())
}

impl SensingLeastSquares {
    pub fn new(d1: usize, d2: usize, ops: Mat, y: Vector) -> Result<Self> {
        if ops.ncols() != d1 * d2 || ops.nrows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "sensing operator is {}x{}, expected {}x{}",
                ops.nrows(),
                ops.ncols(),
                y.len(),
                d1 * d2
            )));
        }
        Ok(Self {
            d1,
            d2,
            ops,
            y,
            planted: None,
        })
    }

    /// Noiseless measurements of a random rank-`rank` matrix with entries of
    /// the operator drawn i.i.d. `N(0, 1/m)`.
    pub fn planted(d1: usize, d2: usize, rank: usize, m: usize, seed: u64) -> Result<Self> {
        if d1 == 0 || d2 == 0 || m == 0 || rank > d1.min(d2) {
            return Err(Error::BadDimension(format!(
                "sensing instance d1={d1}, d2={d2}, rank={rank}, m={m}"
            )));
        }
        let mut rng = random::rng(seed);
        let ops = random::gaussian(m, d1 * d2, &mut rng) / (m as f64).sqrt();
        let truth =
            random::gaussian(d1, rank, &mut rng) * random::gaussian(d2, rank, &mut rng).transpose();
        let y = &ops * vec_of(&truth);
        let mut p = Self::new(d1, d2, ops, y)?;
        p.planted = Some(truth);
        Ok(p)
    }

    pub fn apply(&self, x: &Mat) -> Vector {
        &self.ops * vec_of(x)
    }
}

impl RectObjective for SensingLeastSquares {
    fn dims(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    fn value(&self, x: &Mat) -> f64 {
        0.5 * (self.apply(x) - &self.y).norm_squared()
    }

    fn grad(&self, x: &Mat) -> Mat {
        let g = self.ops.tr_mul(&(self.apply(x) - &self.y));
        Mat::from_column_slice(self.d1, self.d2, g.as_slice())
    }

    fn hess_form(&self, _x: &Mat, w1: &Mat, w2: &Mat) -> f64 {
        self.apply(w1).dot(&self.apply(w2))
    }

    fn hess_gram(&self, _x: &Mat, dirs: &[Mat]) -> Mat {
        let mut cols = Mat::zeros(self.ops.nrows(), dirs.len());
        for (j, w) in dirs.iter().enumerate() {
            cols.set_column(j, &self.apply(w));
        }
        cols.transpose() * cols
    }

    fn lipschitz(&self) -> Option<f64> {
        let s = self.ops.singular_values();
        Some(s.max().powi(2))
    }
}

/// Nuclear-norm regularized problem `h(X) + λ‖X‖_*`.
#[derive(Clone)]
pub struct NnmProblem {
    pub inner: Arc<dyn RectObjective>,
    pub lambda: f64,
}

impl std::fmt::Debug for NnmProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NnmProblem")
            .field("dims", &self.inner.dims())
            .field("lambda", &self.lambda)
            .finish()
    }
}

impl NnmProblem {
    pub fn new(inner: Arc<dyn RectObjective>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(Self { inner, lambda })
    }

    pub fn d1(&self) -> usize {
        self.inner.dims().0
    }

    pub fn d2(&self) -> usize {
        self.inner.dims().1
    }

    pub fn h(&self, x: &Mat) -> f64 {
        self.inner.value(x)
    }

    pub fn h_grad(&self, x: &Mat) -> Mat {
        self.inner.grad(x)
    }

    /// `h(X) + λ‖X‖_*`
    pub fn objective(&self, x: &Mat) -> f64 {
        let nuc = if x.is_empty() {
            0.0
        } else {
            x.singular_values().sum()
        };
        self.inner.value(x) + self.lambda * nuc
    }
}

/// `h̄(X̄) = h(X̄₁₂) + λ/2·tr(X̄)` on `S^{d₁+d₂}`.
#[derive(Clone, Debug)]
pub struct NnmBc {
    pub nnm: NnmProblem,
}

pub fn make_nnm_bc(p: &NnmProblem) -> Result<NnmBc> {
    let (d1, d2) = p.inner.dims();
    if d1 == 0 || d2 == 0 {
        return Err(Error::BadDimension(format!(
            "nnm_bc needs positive dims, got {d1}x{d2}"
        )));
    }
    Ok(NnmBc { nnm: p.clone() })
}

impl NnmBc {
    pub fn off_block(&self, xbar: &Mat) -> Mat {
        let (d1, d2) = self.nnm.inner.dims();
        xbar.view((0, d1), (d1, d2)).into_owned()
    }

    /// `h(YZᵀ) + λ/2(‖Y‖² + ‖Z‖²)` for `F = [Y; Z]`.
    pub fn factored_value(&self, y: &Mat, z: &Mat) -> f64 {
        self.nnm.h(&(y * z.transpose()))
            + 0.5 * self.nnm.lambda * (y.norm_squared() + z.norm_squared())
    }

    /// `h(Y₁Y₃ + Y₃Y₂) + λ/2‖F‖²` for symmetric `F = [Y₁ Y₃; Y₃ᵀ Y₂]`.
    pub fn symmetric_factored_value(&self, f: &SymMatrix) -> f64 {
        let (d1, d2) = self.nnm.inner.dims();
        let y1 = f.view((0, 0), (d1, d1));
        let y3 = f.view((0, d1), (d1, d2));
        let y2 = f.view((d1, d1), (d2, d2));
        let x = y1 * y3 + y3 * y2;
        self.nnm.h(&x) + 0.5 * self.nnm.lambda * f.norm_squared()
    }
}

impl BcProblem for NnmBc {
    fn dim(&self) -> usize {
        let (d1, d2) = self.nnm.inner.dims();
        d1 + d2
    }

    fn value(&self, x: &SymMatrix) -> f64 {
        self.nnm.h(&self.off_block(x)) + 0.5 * self.nnm.lambda * x.trace()
    }

    fn grad(&self, x: &SymMatrix) -> SymMatrix {
        let (d1, d2) = self.nnm.inner.dims();
        let g = self.nnm.h_grad(&self.off_block(x)) * 0.5;
        let mut out = Mat::identity(d1 + d2, d1 + d2) * (0.5 * self.nnm.lambda);
        out.view_mut((0, d1), (d1, d2)).copy_from(&g);
        out.view_mut((d1, 0), (d2, d1)).copy_from(&g.transpose());
        SymMatrix::from_exact(out)
    }

    fn hess_form(&self, x: &SymMatrix, w1: &SymMatrix, w2: &SymMatrix) -> f64 {
        self.nnm
            .inner
            .hess_form(&self.off_block(x), &self.off_block(w1), &self.off_block(w2))
    }

    fn hess_gram(&self, x: &SymMatrix, dirs: &[SymMatrix]) -> Mat {
        let blocks: Vec<Mat> = dirs.iter().map(|w| self.off_block(w)).collect();
        self.nnm.inner.hess_gram(&self.off_block(x), &blocks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_inner_with_lambda_two_at_identity() {
        let p = NnmProblem::new(
            Arc::new(FrobeniusDistance {
                target: Mat::zeros(2, 2),
            }),
            2.0,
        )
        .unwrap();
        let bc = make_nnm_bc(&p).unwrap();
        // h(0) = 0, λ/2·tr(I₄) = 4
        assert_close!(bc.value(&SymMatrix::identity(4)), 4.0, 1e-15);
    }

    #[test]
    fn factored_objective_matches_lifted_value() {
        let mut r = random::rng(17);
        let target = random::gaussian(3, 2, &mut r);
        let p = NnmProblem::new(Arc::new(FrobeniusDistance { target }), 0.7).unwrap();
        let bc = make_nnm_bc(&p).unwrap();
        for _ in 0..20 {
            let y = random::gaussian(3, 5, &mut r);
            let z = random::gaussian(2, 5, &mut r);
            let mut f = Mat::zeros(5, 5);
            f.view_mut((0, 0), (3, 5)).copy_from(&y);
            f.view_mut((3, 0), (2, 5)).copy_from(&z);
            let lifted = bc.value(&SymMatrix::symmetrize(&f * f.transpose()));
            let direct = bc.factored_value(&y, &z);
            assert!((lifted - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn symmetric_factored_objective_matches_lifted_value() {
        let mut r = random::rng(18);
        let target = random::gaussian(2, 3, &mut r);
        let p = NnmProblem::new(Arc::new(FrobeniusDistance { target }), 0.3).unwrap();
        let bc = make_nnm_bc(&p).unwrap();
        for _ in 0..20 {
            let f = random::symmetric(5, &mut r);
            let lifted = bc.value(&SymMatrix::symmetrize(f.as_mat() * f.as_mat()));
            let direct = bc.symmetric_factored_value(&f);
            assert!((lifted - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn sensing_gradient_is_adjoint_of_residual() {
        let s = SensingLeastSquares::planted(4, 3, 1, 20, 9).unwrap();
        let truth = s.planted.clone().unwrap();
        assert!(s.value(&truth) < 1e-24);
        let mut r = random::rng(1);
        let x = random::gaussian(4, 3, &mut r);
        let w = random::gaussian(4, 3, &mut r);
        let g = s.grad(&x);
        let t = 1e-6;
        let fd = (s.value(&(&x + &w * t)) - s.value(&(&x - &w * t))) / (2.0 * t);
        assert!((fd - g.dot(&w)).abs() <= 1e-6 * (1.0 + fd.abs()));
    }

    #[test]
    fn lambda_must_be_positive() {
        let inner = Arc::new(FrobeniusDistance {
            target: Mat::zeros(1, 1),
        });
        assert!(NnmProblem::new(inner, 0.0).is_err());
    }
}
