//! Squared-variable reformulations of PSD-constrained optimization problems.
//!
//! The crate evaluates and certifies first- and second-order necessary
//! conditions for a problem `min h(X) s.t. X ⪰ 0` and its factorized forms
//! `h(FFᵀ)` and `h(F²)`, and likewise for nonlinear problems with a matrix
//! inequality `C(x) ⪰ 0` and their slack-variable forms. It also provides the
//! constructive liftings between formulations, second-order solvers, and the
//! nuclear-norm overparametrization.

#[cfg(test)]
macro_rules! assert_close {
    ($a:expr, $b:expr, $tol:expr) => {{
        let (a, b): (f64, f64) = ($a, $b);
        assert!((a - b).abs() <= $tol, "{a} vs {b} (tol {})", $tol);
    }};
}

pub mod certify;
pub mod demos;
pub mod error;
pub mod io;
pub mod lift;
pub mod matcore;
pub mod nucnorm;
pub mod problems;
pub mod solve;
pub mod tol;

pub use error::{Error, Result};
pub use matcore::{EigDecomp, Factor, Mat, Multiplier, SvdDecomp, SymMatrix, Vector};
pub use tol::Tolerances;
