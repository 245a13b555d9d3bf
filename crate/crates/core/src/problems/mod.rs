//! Problem data model with analytic derivatives.
//!
//! A [`BcProblem`] is a smooth `h` on symmetric matrices, minimized over the
//! PSD cone. An [`NsdpProblem`] is a smooth `f` on `Rⁿ` constrained by
//! `C(x) ⪰ 0`. Second derivatives are exposed as bilinear forms; the
//! certifiers assemble dense matrices from them by basis probing.

mod bc;
mod fd;
mod nnm;
mod nsdp;
mod schema;

pub use bc::{
    make_example_2_1, make_example_2_2, make_example_b_1, make_least_squares,
    make_quadratic_hadamard, make_quadratic_square, Example21, LeastSquares, QuadraticHadamard,
    QuadraticSquare,
};
pub use fd::{fd_check_bc, fd_check_nsdp, fd_check_rect, FdReport, FD_DIRECTIONS};
pub use nnm::{
    make_nnm_bc, FrobeniusDistance, NnmBc, NnmProblem, RectObjective, SensingLeastSquares,
};
pub use nsdp::{make_example_3_1, make_planted_nsdp, PlantedNsdp, QuadraticNsdp};
pub use schema::{InnerSpec, Problem, ProblemSpec};

use crate::matcore::{Mat, SymMatrix, Vector};

/// Smooth objective on `Sᵈ`, minimized subject to `X ⪰ 0`.
pub trait BcProblem: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &SymMatrix) -> f64;

    fn grad(&self, x: &SymMatrix) -> SymMatrix;

    /// `D²h_X[W₁, W₂]`
    fn hess_form(&self, x: &SymMatrix, w1: &SymMatrix, w2: &SymMatrix) -> f64;

    /// Gram matrix `[D²h_X[Wᵢ, Wⱼ]]ᵢⱼ` over a list of directions.
    fn hess_gram(&self, x: &SymMatrix, dirs: &[SymMatrix]) -> Mat {
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
}

/// Smooth `f: Rⁿ → R` with a matrix constraint `C: Rⁿ → Sᵈ`, `C(x) ⪰ 0`.
pub trait NsdpProblem: Send + Sync {
    fn n(&self) -> usize;

    fn d(&self) -> usize;

    fn f(&self, x: &Vector) -> f64;

    fn f_grad(&self, x: &Vector) -> Vector;

    fn f_hess_form(&self, x: &Vector, z1: &Vector, z2: &Vector) -> f64;

    fn c(&self, x: &Vector) -> SymMatrix;

    /// `DC_x[z]`
    fn dc(&self, x: &Vector, z: &Vector) -> SymMatrix;

    /// `DC_x*(Λ)`, the adjoint of [`NsdpProblem::dc`].
    fn dc_adj(&self, x: &Vector, lambda: &SymMatrix) -> Vector;

    /// `D²C_x[z₁, z₂]`
    fn d2c_form(&self, x: &Vector, z1: &Vector, z2: &Vector) -> SymMatrix;
}

impl<T: BcProblem + ?Sized> BcProblem for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &SymMatrix) -> f64 {
        (**self).value(x)
    }
    fn grad(&self, x: &SymMatrix) -> SymMatrix {
        (**self).grad(x)
    }
    fn hess_form(&self, x: &SymMatrix, w1: &SymMatrix, w2: &SymMatrix) -> f64 {
        (**self).hess_form(x, w1, w2)
    }
    fn hess_gram(&self, x: &SymMatrix, dirs: &[SymMatrix]) -> Mat {
        (**self).hess_gram(x, dirs)
    }
}

impl<T: NsdpProblem + ?Sized> NsdpProblem for Box<T> {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn d(&self) -> usize {
        (**self).d()
    }
    fn f(&self, x: &Vector) -> f64 {
        (**self).f(x)
    }
    fn f_grad(&self, x: &Vector) -> Vector {
        (**self).f_grad(x)
    }
    fn f_hess_form(&self, x: &Vector, z1: &Vector, z2: &Vector) -> f64 {
        (**self).f_hess_form(x, z1, z2)
    }
    fn c(&self, x: &Vector) -> SymMatrix {
        (**self).c(x)
    }
    fn dc(&self, x: &Vector, z: &Vector) -> SymMatrix {
        (**self).dc(x, z)
    }
    fn dc_adj(&self, x: &Vector, lambda: &SymMatrix) -> Vector {
        (**self).dc_adj(x, lambda)
    }
    fn d2c_form(&self, x: &Vector, z1: &Vector, z2: &Vector) -> SymMatrix {
        (**self).d2c_form(x, z1, z2)
    }
}
