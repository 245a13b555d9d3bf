use super::BcProblem;
use crate::error::{Error, Result};
use crate::matcore::{svec, sym_dim, Factor, Mat, SymMatrix, Vector};

fn same_dim(a: &SymMatrix, b: &SymMatrix, what: &str) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{what}: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// `h(X) = ⟨A, X²⟩ + ⟨B, X⟩`
#[derive(Clone, Debug)]
pub struct QuadraticSquare {
    pub a: SymMatrix,
    pub b: SymMatrix,
}

pub fn make_quadratic_square(a: SymMatrix, b: SymMatrix) -> Result<QuadraticSquare> {
    same_dim(&a, &b, "quadratic_square A and B")?;
    Ok(QuadraticSquare { a, b })
}

impl BcProblem for QuadraticSquare {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn value(&self, x: &SymMatrix) -> f64 {
        let ax = self.a.as_mat() * x.as_mat();
        ax.dot(x.as_mat()) + self.b.inner(x)
    }

    fn grad(&self, x: &SymMatrix) -> SymMatrix {
        let ax = self.a.as_mat() * x.as_mat();
        SymMatrix::symmetrize(&ax + ax.transpose() + self.b.as_mat())
    }

    fn hess_form(&self, _x: &SymMatrix, w1: &SymMatrix, w2: &SymMatrix) -> f64 {
        // tr(A(W₁W₂ + W₂W₁)) = 2⟨A W₁, W₂⟩ for symmetric A, W
        2.0 * (self.a.as_mat() * w1.as_mat()).dot(w2.as_mat())
    }
}

/// `h(X) = ⟨A, X⊙X⟩ + ⟨B, X⟩`
#[derive(Clone, Debug)]
pub struct QuadraticHadamard {
    pub a: SymMatrix,
    pub b: SymMatrix,
}

pub fn make_quadratic_hadamard(a: SymMatrix, b: SymMatrix) -> Result<QuadraticHadamard> {
    same_dim(&a, &b, "quadratic_hadamard A and B")?;
    Ok(QuadraticHadamard { a, b })
}

impl BcProblem for QuadraticHadamard {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn value(&self, x: &SymMatrix) -> f64 {
        self.a.dot(&x.component_mul(x)) + self.b.inner(x)
    }

    fn grad(&self, x: &SymMatrix) -> SymMatrix {
        SymMatrix::symmetrize(self.a.component_mul(x) * 2.0 + self.b.as_mat())
    }

    fn hess_form(&self, _x: &SymMatrix, w1: &SymMatrix, w2: &SymMatrix) -> f64 {
        2.0 * self.a.dot(&w1.component_mul(w2))
    }
}

/// `h(X) = ½‖𝒜(X) − b‖²` with `𝒜(X)ᵢ = ⟨Aᵢ, X⟩`.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub a_list: Vec<SymMatrix>,
    pub b: Vector,
    d: usize,
    /// Row i is `svec(Aᵢ)`, so `𝒜(X) = op · svec(X)`.
    op: Mat,
}

pub fn make_least_squares(a_list: Vec<SymMatrix>, b: Vector) -> Result<LeastSquares> {
    if a_list.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "least_squares has {} matrices but {} targets",
            a_list.len(),
            b.len()
        )));
    }
    let d = a_list.first().map_or(0, SymMatrix::dim);
    if let Some(bad) = a_list.iter().find(|a| a.dim() != d) {
        return Err(Error::DimensionMismatch(format!(
            "least_squares matrices of size {d} and {}",
            bad.dim()
        )));
    }
    if d == 0 {
        return Err(Error::BadDimension(
            "least_squares needs at least one matrix".into(),
        ));
    }
    let mut op = Mat::zeros(a_list.len(), sym_dim(d));
    for (i, a) in a_list.iter().enumerate() {
        op.row_mut(i).copy_from(&svec(a).transpose());
    }
    Ok(LeastSquares { a_list, b, d, op })
}

impl LeastSquares {
    /// `𝒜(X)`
    pub fn apply(&self, x: &SymMatrix) -> Vector {
        &self.op * svec(x)
    }

    /// `𝒜*(y) = Σ yᵢ Aᵢ`
    pub fn adjoint(&self, y: &Vector) -> SymMatrix {
        let mut out = Mat::zeros(self.d, self.d);
        for (a, yi) in self.a_list.iter().zip(y.iter()) {
            out += a.as_mat() * *yi;
        }
        SymMatrix::symmetrize(out)
    }

    pub fn residual(&self, x: &SymMatrix) -> Vector {
        self.apply(x) - &self.b
    }
}

impl BcProblem for LeastSquares {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, x: &SymMatrix) -> f64 {
        0.5 * self.residual(x).norm_squared()
    }

    fn grad(&self, x: &SymMatrix) -> SymMatrix {
        self.adjoint(&self.residual(x))
    }

    fn hess_form(&self, _x: &SymMatrix, w1: &SymMatrix, w2: &SymMatrix) -> f64 {
        self.apply(w1).dot(&self.apply(w2))
    }

    fn hess_gram(&self, _x: &SymMatrix, dirs: &[SymMatrix]) -> Mat {
        let mut cols = Mat::zeros(self.op.nrows(), dirs.len());
        for (j, w) in dirs.iter().enumerate() {
            cols.set_column(j, &self.apply(w));
        }
        cols.transpose() * cols
    }
}

fn sym2(a: f64, b: f64, c: f64) -> SymMatrix {
    SymMatrix::from_exact(Mat::from_row_slice(2, 2, &[a, b, b, c]))
}

/// `h(X) = ⟨A, X²⟩ + ⟨B, X⟩` with `A = [½ −1; −1 ½]`, `B = [−1 2; 2 −1]`.
/// `X = I` is first-order but not second-order; `F = diag(1, −1)` is a
/// second-order point of `h(F²)`.
pub fn make_example_2_2() -> QuadraticSquare {
    QuadraticSquare {
        a: sym2(0.5, -1.0, 0.5),
        b: sym2(-1.0, 2.0, -1.0),
    }
}

/// `h(X) = ⟨A, X⊙X⟩ + ⟨B, X⟩` with `A = [10 5; 5 −1]`, `B = [−20 0; 0 2]`.
/// `F = [0 1; 1 0]` is a local minimizer of `h(F²)` while `X = F² = I` is not
/// one of `h` over the PSD cone.
pub fn make_example_b_1() -> QuadraticHadamard {
    QuadraticHadamard {
        a: sym2(10.0, 5.0, -1.0),
        b: sym2(-20.0, 0.0, 2.0),
    }
}

/// The planted least-squares instance whose width-`k` factor `F_k` is a
/// spurious second-order point of `h(FFᵀ)` with `F ∈ R^{d×k}`.
#[derive(Clone, Debug)]
pub struct Example21 {
    pub problem: LeastSquares,
    pub f_k: Factor,
    pub x_star: SymMatrix,
    pub eps: f64,
    pub eta: f64,
}

impl Example21 {
    /// `5(d−1)²/(12k)`
    pub fn spurious_value(d: usize, k: usize) -> f64 {
        let dm1 = (d - 1) as f64;
        5.0 * dm1 * dm1 / (12.0 * k as f64)
    }
}

pub fn make_example_2_1(d: usize, k: usize) -> Result<Example21> {
    if d < 3 {
        return Err(Error::BadDimension(format!(
            "example 2.1 needs d >= 3, got {d}"
        )));
    }
    if k == 0 || k > d {
        return Err(Error::BadDimension(format!(
            "example 2.1 needs 1 <= k <= d, got k = {k}"
        )));
    }
    let eps = 0.5 * (6.0 / k as f64).sqrt();
    let dm1 = (d - 1) as f64;
    let top = 5.0 * dm1 / 3.0;
    let last = d - 1;

    let mut a_list = Vec::with_capacity(d + 1);
    for i in 0..last {
        let mut m = Mat::zeros(d, d);
        m[(i, last)] = 1.0;
        m[(last, i)] = 1.0;
        a_list.push(SymMatrix::symmetrize(m));
    }
    a_list.push(SymMatrix::identity(d).scale(eps));
    let mut diag = vec![2.0 * eps; d];
    diag[last] = eps;
    a_list.push(SymMatrix::from_diagonal(&diag));

    let mut b = Vector::zeros(d + 1);
    b[d - 1] = eps * top;
    b[d] = eps * top;

    let eta = (dm1 / k as f64).sqrt();
    let mut f = Mat::zeros(d, k);
    for i in 0..k {
        f[(i, i)] = eta;
    }
    let mut xs = vec![0.0; d];
    xs[last] = top;

    Ok(Example21 {
        problem: make_least_squares(a_list, b)?,
        f_k: Factor::new(f)?,
        x_star: SymMatrix::from_diagonal(&xs),
        eps,
        eta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::random;

    fn sym(rows: &[[f64; 2]; 2]) -> SymMatrix {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn quadratic_square_gradient_vanishes_at_identity() {
        let a = sym(&[[0.5, -1.0], [-1.0, 0.5]]);
        let b = sym(&[[-1.0, 2.0], [2.0, -1.0]]);
        let p = make_quadratic_square(a, b).unwrap();
        assert!(p.grad(&SymMatrix::identity(2)).fro_norm() < 1e-15);
    }

    #[test]
    fn quadratic_square_linear_case_has_zero_hessian() {
        let mut r = random::rng(0);
        let p = make_quadratic_square(SymMatrix::zeros(3), random::symmetric(3, &mut r)).unwrap();
        let (x, w) = (random::symmetric(3, &mut r), random::symmetric(3, &mut r));
        assert_eq!(p.hess_form(&x, &w, &w), 0.0);
    }

    #[test]
    fn hadamard_gradient_vanishes_at_identity() {
        let a = sym(&[[10.0, 5.0], [5.0, -1.0]]);
        let b = sym(&[[-20.0, 0.0], [0.0, 2.0]]);
        let p = make_quadratic_hadamard(a.clone(), b).unwrap();
        assert!(p.grad(&SymMatrix::identity(2)).fro_norm() < 1e-15);
        let p0 = make_quadratic_hadamard(a, SymMatrix::zeros(2)).unwrap();
        assert_eq!(p0.grad(&SymMatrix::zeros(2)).fro_norm(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let r = make_quadratic_square(SymMatrix::zeros(2), SymMatrix::zeros(3));
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
        let r = make_least_squares(vec![SymMatrix::identity(2)], Vector::zeros(2));
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn least_squares_direct_evaluation() {
        let p = make_least_squares(vec![SymMatrix::identity(2)], Vector::zeros(1)).unwrap();
        let x = SymMatrix::identity(2);
        assert_close!(p.value(&x), 2.0, 1e-15);
        assert!((p.grad(&x).as_mat() - Mat::identity(2, 2) * 2.0).norm() < 1e-15);
    }

    #[test]
    fn least_squares_gram_matches_pairwise_forms() {
        let mut r = random::rng(4);
        let a: Vec<_> = (0..5).map(|_| random::symmetric(3, &mut r)).collect();
        let p = make_least_squares(a, random::gaussian_vec(5, &mut r)).unwrap();
        let x = random::symmetric(3, &mut r);
        let dirs: Vec<_> = (0..4).map(|_| random::symmetric(3, &mut r)).collect();
        let g = p.hess_gram(&x, &dirs);
        for i in 0..4 {
            for j in 0..4 {
                assert_close!(g[(i, j)], p.hess_form(&x, &dirs[i], &dirs[j]), 1e-12);
            }
        }
    }

    #[test]
    fn example_2_1_constants() {
        let ex = make_example_2_1(3, 1).unwrap();
        assert_close!(ex.eps, 0.5 * 6f64.sqrt(), 1e-15);
        assert_close!(ex.eta, 2f64.sqrt(), 1e-15);
        let want = ex.eps * 10.0 / 3.0;
        assert_eq!(ex.problem.b.as_slice()[..2], [0.0, 0.0]);
        assert_close!(ex.problem.b[2], want, 1e-14);
        assert_close!(ex.problem.b[3], want, 1e-14);
        assert!(matches!(
            make_example_2_1(2, 1),
            Err(Error::BadDimension(_))
        ));
    }

    #[test]
    fn example_2_1_values() {
        for d in 3..=8 {
            for k in 1..=d {
                let ex = make_example_2_1(d, k).unwrap();
                assert!(ex.problem.value(&ex.x_star) < 1e-24);
                if k < d {
                    let g = ex.problem.value(&ex.f_k.gram());
                    let want = Example21::spurious_value(d, k);
                    assert!((g - want).abs() <= 1e-12 * want);
                }
            }
        }
        let ex = make_example_2_1(6, 3).unwrap();
        assert_close!(ex.problem.value(&ex.f_k.gram()), 125.0 / 36.0, 1e-12);
    }

    #[test]
    fn example_2_1_gradient_at_spurious_factor() {
        for d in 3..=7 {
            for k in 1..d {
                let ex = make_example_2_1(d, k).unwrap();
                let g = ex.problem.grad(&ex.f_k.gram());
                let mut want = Mat::zeros(d, d);
                want[(d - 1, d - 1)] = -ex.eps * ex.eps * (d - 1) as f64 / 3.0;
                assert!((g.as_mat() - want).norm() <= 1e-10);
            }
        }
    }
}
