//! Tolerance model shared by certifiers, liftings and solvers.
//!
//! Every pass/fail decision compares a residual against `tol * (1 + scale)`,
//! where `scale` is the natural magnitude of the quantity being tested.

use serde::{Deserialize, Serialize};

/// Symmetry tolerance used when validating matrix literals.
pub const SYM_TOL: f64 = 1e-8;

pub const DEFAULT_FEAS_TOL: f64 = 1e-8;
pub const DEFAULT_PSD_TOL: f64 = 1e-8;
pub const DEFAULT_CURV_TOL: f64 = 1e-6;
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Environment variable overriding the default rank tolerance.
pub const RANK_TOL_ENV: &str = "SQVAR_RANK_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Feasibility, stationarity and complementarity residuals.
    pub feas: f64,
    /// Negative-eigenvalue slack for PSD memberships.
    pub psd: f64,
    /// Negative-curvature slack on reduced Hessians.
    pub curv: f64,
    /// Relative threshold below which eigen/singular values count as zero.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feas: DEFAULT_FEAS_TOL,
            psd: DEFAULT_PSD_TOL,
            curv: DEFAULT_CURV_TOL,
            rank: DEFAULT_RANK_TOL,
        }
    }
}

impl Tolerances {
    /// Defaults, with `rank` taken from `SQVAR_RANK_TOL` when it parses to a
    /// positive finite number.
    pub fn from_env() -> Self {
        let mut tols = Self::default();
        if let Some(v) = std::env::var(RANK_TOL_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite() && *v > 0.0)
        {
            tols.rank = v;
        }
        tols
    }

    pub fn with_curv(mut self, curv: f64) -> Self {
        self.curv = curv;
        self
    }

    pub fn with_feas(mut self, feas: f64) -> Self {
        self.feas = feas;
        self
    }

    pub fn with_rank(mut self, rank: f64) -> Self {
        self.rank = rank;
        self
    }
}
