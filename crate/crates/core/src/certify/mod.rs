//! First- and second-order necessary-condition certificates.
//!
//! Every certifier returns a [`CertReport`]. A refuted second-order condition
//! carries a unit-norm witness direction whose quadratic-form value equals the
//! reported `lambda_min`; the `*_form` functions re-evaluate it directly from
//! problem callbacks.

mod bc;
mod conditions;
mod nsdp;

use std::collections::BTreeMap;

use serde::Serialize;

pub use bc::{
    bc_form, bc_subspace_basis, certify_bc, certify_bc_1c, certify_bc_2nc, certify_dss,
    certify_dss_sym, dss_form, dss_gradient, dss_hessian, dss_sym_form, dss_sym_gradient,
    dss_sym_hessian,
};
pub use conditions::{
    check_eigenvalue_condition, check_strict_complementarity, EcResult, ScResult,
};
pub use nsdp::{
    certify_nsdp, certify_nsdp_1c, certify_nsdp_2nc, certify_ssv, certify_ssv_sym, nsdp_form,
    recover_multiplier, ssv_form, ssv_sym_form, Recovery,
};

use crate::error::Result;
use crate::matcore::{mat_to_rows, sym_eig, Mat, SymMatrix, Vector};
use crate::tol::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Formulation {
    Bc,
    Dss,
    DssSym,
    Nsdp,
    Ssv,
    SsvSym,
}

/// Which conditions to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

#[derive(Clone, Debug, Serialize)]
pub struct FirstOrder {
    pub pass: bool,
    pub residuals: BTreeMap<String, f64>,
    /// Multiplier applied to each tolerance: `1 + natural magnitude`.
    pub scale: f64,
}

impl FirstOrder {
    /// Each entry is `(name, residual, tolerance)`; a residual passes when it is
    /// at most `tolerance * scale`.
    pub(crate) fn new(entries: &[(&str, f64, f64)], scale: f64) -> Self {
        let pass = entries.iter().all(|(_, r, t)| *r <= t * scale);
        let residuals = entries
            .iter()
            .map(|(n, r, _)| (n.to_string(), *r))
            .collect();
        Self {
            pass,
            residuals,
            scale,
        }
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.get(name).copied()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    /// Variable part of the direction, for the nonlinear formulations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
    /// Matrix part (`W`, `Δ`), as rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<Vec<f64>>>,
    /// Quadratic-form value at this unit-norm direction.
    pub value: f64,
}

impl Witness {
    pub fn z_vec(&self) -> Option<Vector> {
        self.z.as_ref().map(|z| Vector::from_column_slice(z))
    }

    pub fn direction_mat(&self) -> Option<Mat> {
        self.direction
            .as_ref()
            .map(|rows| crate::matcore::mat_from_rows(rows).expect("witness rows are rectangular"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SecondOrderResult {
    pub pass: bool,
    /// `None` when the direction subspace is trivial.
    pub lambda_min: Option<f64>,
    /// Spectral norm of the reduced matrix, the scale of the curvature test.
    pub reduced_norm: f64,
    pub subspace_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SecondOrder {
    /// Skipped because the first-order conditions failed.
    NotEvaluated,
    NotRequested,
    Evaluated(SecondOrderResult),
}

impl SecondOrder {
    pub fn result(&self) -> Option<&SecondOrderResult> {
        match self {
            SecondOrder::Evaluated(r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertReport {
    pub formulation: Formulation,
    pub pass: bool,
    pub first_order: FirstOrder,
    pub second_order: SecondOrder,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CertReport {
    pub(crate) fn new(
        formulation: Formulation,
        first_order: FirstOrder,
        tolerances: Tolerances,
    ) -> Self {
        Self {
            formulation,
            pass: first_order.pass,
            first_order,
            second_order: SecondOrder::NotRequested,
            tolerances,
            notes: Vec::new(),
        }
    }

    pub(crate) fn with_second_order(mut self, so: SecondOrder) -> Self {
        if let SecondOrder::Evaluated(r) = &so {
            self.pass = self.pass && r.pass;
        }
        self.second_order = so;
        self
    }

    /// `true` when a second-order check ran and refuted the point.
    pub fn refuted_second_order(&self) -> bool {
        matches!(&self.second_order, SecondOrder::Evaluated(r) if !r.pass)
    }

    pub fn lambda_min(&self) -> Option<f64> {
        self.second_order.result().and_then(|r| r.lambda_min)
    }

    pub fn subspace_dim(&self) -> Option<usize> {
        self.second_order.result().map(|r| r.subspace_dim)
    }

    pub fn witness(&self) -> Option<&Witness> {
        self.second_order.result().and_then(|r| r.witness.as_ref())
    }
}

/// Outcome of the eigen test on a reduced matrix, with the minimizing
/// coefficient vector when the test fails.
pub(crate) struct ReducedTest {
    pub result: SecondOrderResult,
    pub coeffs: Option<Vector>,
}

/// Eigen test `λ_min ≥ −curv·(1 + ‖H‖₂)` on a symmetric reduced matrix.
pub(crate) fn reduced_test(h: Mat, tols: &Tolerances) -> Result<ReducedTest> {
    let m = h.nrows();
    if m == 0 {
        return Ok(ReducedTest {
            result: SecondOrderResult {
                pass: true,
                lambda_min: None,
                reduced_norm: 0.0,
                subspace_dim: 0,
                witness: None,
            },
            coeffs: None,
        });
    }
    let eig = sym_eig(&SymMatrix::symmetrize(h), tols.rank)?;
    let lmin = eig.sigma[m - 1];
    let norm = eig.max_abs();
    let pass = lmin >= -tols.curv * (1.0 + norm);
    Ok(ReducedTest {
        result: SecondOrderResult {
            pass,
            lambda_min: Some(lmin),
            reduced_norm: norm,
            subspace_dim: m,
            witness: None,
        },
        coeffs: (!pass).then(|| eig.u.column(m - 1).into_owned()),
    })
}

pub(crate) fn witness(z: Option<&Vector>, dir: Option<&Mat>, value: f64) -> Witness {
    Witness {
        z: z.map(|z| z.as_slice().to_vec()),
        direction: dir.map(mat_to_rows),
        value,
    }
}

/// `max(0, −λ_min(M))`
pub(crate) fn psd_violation(m: &SymMatrix, rank_tol: f64) -> Result<f64> {
    let e = sym_eig(m, rank_tol)?;
    Ok(if e.dim() == 0 {
        0.0
    } else {
        (-e.min()).max(0.0)
    })
}
