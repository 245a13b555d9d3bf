//! Second-order solvers for the squared-variable formulations.

mod auglag;
mod dss;
mod sample;
mod tr;

use serde::{Deserialize, Serialize};

pub use auglag::{default_ssv_init, solve_ssv_auglag, SsvSolution};
pub use dss::{default_dss_init, default_dss_sym_init, solve_dss, solve_dss_sym};
pub use sample::{sample_local_check, LocalCheck};
pub use tr::{trust_region, SmoothObjective};

use crate::error::{Error, Result};
use crate::tol::{DEFAULT_CURV_TOL, DEFAULT_RANK_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugLagOptions {
    pub rho_init: f64,
    pub rho_growth: f64,
    /// Consecutive non-improving rounds at the `ρ` cap before giving up.
    pub dual_step_count: usize,
    /// Gradient tolerance of each inner solve.
    pub inner_tol: f64,
    /// Target for the first-order residuals of the slack problem.
    pub kkt_tol: f64,
    pub rho_max: f64,
    pub max_outer: usize,
}

impl Default for AugLagOptions {
    fn default() -> Self {
        Self {
            rho_init: 10.0,
            rho_growth: 4.0,
            dual_step_count: 5,
            inner_tol: 1e-11,
            kkt_tol: 1e-9,
            rho_max: 1e12,
            max_outer: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub curv_tol: f64,
    pub initial_radius: f64,
    pub seed: u64,
    pub rank_tol: f64,
    pub auglag: AugLagOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-10,
            curv_tol: DEFAULT_CURV_TOL,
            initial_radius: 1.0,
            seed: 0,
            rank_tol: DEFAULT_RANK_TOL,
            auglag: AugLagOptions::default(),
        }
    }
}

impl SolveOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_grad_tol(mut self, grad_tol: f64) -> Self {
        self.grad_tol = grad_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let a = &self.auglag;
        let positive = [
            self.grad_tol,
            self.curv_tol,
            self.initial_radius,
            self.rank_tol,
            a.rho_init,
            a.inner_tol,
            a.kkt_tol,
            a.rho_max,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite()))
            || self.max_iter == 0
            || a.rho_growth <= 1.0
        {
            return Err(Error::InvalidArgument(
                "solver options must be positive, with rho_growth > 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Termination {
    FirstOrder,
    SecondOrder,
    MaxIter,
    Stalled,
}

#[derive(Clone, Debug, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub objective: f64,
    pub grad_norm: f64,
    /// Smallest Hessian eigenvalue at this iterate.
    pub min_curv: f64,
    /// Trust-region radius, or the penalty `ρ` for augmented-Lagrangian rounds.
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveTrace {
    pub records: Vec<IterRecord>,
    pub termination: Termination,
    /// Accepted steps.
    pub iterations: usize,
}

impl SolveTrace {
    /// One JSON object per iteration, newline-separated.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("plain record"));
            out.push('\n');
        }
        out
    }

    pub fn reached_second_order(&self) -> bool {
        self.termination == Termination::SecondOrder
    }
}
