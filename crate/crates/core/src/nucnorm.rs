//! Nuclear-norm regularized problems `h(X) + λ‖X‖_*` and their PSD-block
//! reformulation on `S^{d₁+d₂}`.

use serde::{Deserialize, Serialize};

use crate::certify::{certify_bc_1c, FirstOrder};
use crate::error::{Error, Result};
use crate::matcore::{op_norm, random, svd, sym_eig, Factor, Mat, SymMatrix};
use crate::problems::BcProblem;
use crate::solve::{default_dss_init, solve_dss, solve_dss_sym, SolveOptions, SolveTrace};
use crate::tol::Tolerances;

pub use crate::problems::{make_nnm_bc, NnmBc, NnmProblem};

#[derive(Clone, Debug)]
pub struct NucBlock {
    pub value: f64,
    pub w1: SymMatrix,
    pub w2: SymMatrix,
    /// `[W₁ X; Xᵀ W₂]`, PSD with trace `2‖X‖_*`.
    pub xbar: SymMatrix,
}

/// Nuclear norm together with the block certificate `[UΣUᵀ X; Xᵀ VΣVᵀ]`.
pub fn nuclear_norm_block(x: &Mat) -> Result<NucBlock> {
    let (d1, d2) = x.shape();
    let s = svd(x, 0.0)?;
    let value = s.sigma.sum();
    let scaled = |m: &Mat| Mat::from_fn(m.nrows(), s.rank, |i, j| m[(i, j)] * s.sigma[j]);
    let w1 = SymMatrix::symmetrize(scaled(&s.u) * s.u.transpose());
    let w2 = SymMatrix::symmetrize(scaled(&s.v) * s.v.transpose());
    let mut xbar = Mat::zeros(d1 + d2, d1 + d2);
    xbar.view_mut((0, 0), (d1, d1)).copy_from(w1.as_mat());
    xbar.view_mut((d1, d1), (d2, d2)).copy_from(w2.as_mat());
    xbar.view_mut((0, d1), (d1, d2)).copy_from(x);
    xbar.view_mut((d1, 0), (d2, d1)).copy_from(&x.transpose());
    Ok(NucBlock {
        value,
        w1,
        w2,
        xbar: SymMatrix::symmetrize(xbar),
    })
}

/// Singular-value soft-thresholding, the prox of `τ‖·‖_*`.
pub fn soft_threshold(x: &Mat, tau: f64) -> Result<Mat> {
    let s = svd(x, 0.0)?;
    let us = Mat::from_fn(s.u.nrows(), s.rank, |i, j| {
        s.u[(i, j)] * (s.sigma[j] - tau).max(0.0)
    });
    Ok(us * s.v.transpose())
}

#[derive(Clone, Debug, Serialize)]
pub struct NnmReport {
    pub pass: bool,
    pub first_order: FirstOrder,
    pub rank: usize,
    pub tolerances: Tolerances,
}

/// First-order optimality of `h(X) + λ‖X‖_*`: with `H = −∇h(X)/λ` and
/// `X = UΣVᵀ` the compact SVD, `‖H‖_op ≤ 1`, `UᵀH = Vᵀ` and `VᵀHᵀ = Uᵀ`.
pub fn certify_nnm_1p(p: &NnmProblem, x: &Mat, tols: &Tolerances) -> Result<NnmReport> {
    if x.shape() != (p.d1(), p.d2()) {
        return Err(Error::DimensionMismatch(format!(
            "X is {}x{}, problem is {}x{}",
            x.nrows(),
            x.ncols(),
            p.d1(),
            p.d2()
        )));
    }
    let g = p.h_grad(x);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    let h = g / -p.lambda;
    let s = svd(x, tols.rank)?;
    let align1 = (s.u.transpose() * &h - s.v.transpose()).norm();
    let align2 = (s.v.transpose() * h.transpose() - s.u.transpose()).norm();
    let fo = FirstOrder::new(
        &[
            ("opNorm", (op_norm(&h) - 1.0).max(0.0), tols.feas),
            ("align1", align1, tols.feas),
            ("align2", align2, tols.feas),
        ],
        1.0,
    );
    Ok(NnmReport {
        pass: fo.pass,
        first_order: fo,
        rank: s.rank,
        tolerances: *tols,
    })
}

/// Lift a first-order point of the regularized problem to one of the block
/// problem `h(X̄₁₂) + λ/2·tr(X̄)` over `X̄ ⪰ 0`.
pub fn lift_nnm_1p(p: &NnmProblem, x: &Mat, tols: &Tolerances) -> Result<SymMatrix> {
    let rep = certify_nnm_1p(p, x, tols)?;
    if !rep.pass {
        return Err(Error::NotFirstOrder(format!(
            "nuclear-norm residuals {:?}",
            rep.first_order.residuals
        )));
    }
    let xbar = nuclear_norm_block(x)?.xbar;
    let bc = make_nnm_bc(p)?;
    let check = certify_bc_1c(&bc, &xbar, tols)?;
    if !check.pass {
        return Err(Error::NotFirstOrder(format!(
            "lifted block fails the cone first-order check: {:?}",
            check.first_order.residuals
        )));
    }
    Ok(xbar)
}

#[derive(Clone, Debug)]
pub struct NnmProjection {
    pub x: Mat,
    pub u: Mat,
    pub v: Mat,
    pub sigma: Vec<f64>,
}

/// Off-diagonal block of `X̄` with the SVD read off its eigendecomposition:
/// `X̄ = ŪΣ̄Ūᵀ`, `[U; V] = √2·Ū`, `Σ = Σ̄/2`.
pub fn project_nnm(xbar: &SymMatrix, d1: usize, rank_tol: f64) -> Result<NnmProjection> {
    let d = xbar.dim();
    if d1 > d {
        return Err(Error::DimensionMismatch(format!(
            "d1 = {d1} exceeds block size {d}"
        )));
    }
    let d2 = d - d1;
    let eig = sym_eig(xbar, rank_tol)?;
    if d > 0 && eig.min() < -rank_tol * (1.0 + eig.max_abs()) {
        return Err(Error::NotPsd { min_eig: eig.min() });
    }
    let range: Vec<usize> = eig
        .range_indices()
        .into_iter()
        .filter(|&i| eig.sigma[i] > 0.0)
        .collect();
    let ub = eig.columns(&range) * std::f64::consts::SQRT_2;
    Ok(NnmProjection {
        x: xbar.view((0, d1), (d1, d2)).into_owned(),
        u: ub.rows(0, d1).into_owned(),
        v: ub.rows(d1, d2).into_owned(),
        sigma: range.iter().map(|&i| 0.5 * eig.sigma[i]).collect(),
    })
}

#[derive(Clone, Debug)]
pub enum NnmInit {
    Factors { y: Mat, z: Mat },
    Seed(u64),
}

#[derive(Clone, Debug)]
pub struct NnmSolution {
    pub y: Mat,
    pub z: Mat,
    pub x: Mat,
    pub trace: SolveTrace,
}

/// Second-order solve of `h(YZᵀ) + λ/2(‖Y‖² + ‖Z‖²)` with square overall
/// factor `[Y; Z]`. The gradient tolerance is scaled by `min(1, λ)`.
pub fn solve_nnm_dss(p: &NnmProblem, init: &NnmInit, opts: &SolveOptions) -> Result<NnmSolution> {
    let (d1, d2) = (p.d1(), p.d2());
    let d = d1 + d2;
    let bc = make_nnm_bc(p)?;
    let f0 = match init {
        NnmInit::Factors { y, z } => {
            if y.shape() != (d1, d) || z.shape() != (d2, d) {
                return Err(Error::DimensionMismatch(format!(
                    "Y0 must be {d1}x{d} and Z0 {d2}x{d}, got {:?} and {:?}",
                    y.shape(),
                    z.shape()
                )));
            }
            let mut f = Mat::zeros(d, d);
            f.view_mut((0, 0), (d1, d)).copy_from(y);
            f.view_mut((d1, 0), (d2, d)).copy_from(z);
            Factor::new(f)?
        }
        NnmInit::Seed(seed) => default_dss_init(&bc, d, *seed)?,
    };
    // first-order residuals of the regularized problem are measured in units of λ
    let opts = SolveOptions {
        grad_tol: opts.grad_tol * p.lambda.min(1.0),
        ..opts.clone()
    };
    let (f, trace) = solve_dss(&bc, &f0, &opts)?;
    let y = f.as_mat().rows(0, d1).into_owned();
    let z = f.as_mat().rows(d1, d2).into_owned();
    let x = &y * z.transpose();
    Ok(NnmSolution { y, z, x, trace })
}

/// Symmetric parametrization `h(Y₁Y₃ + Y₃Y₂) + λ/2‖F‖²`, run through the
/// generic symmetric solver.
pub fn solve_nnm_dss_sym(
    p: &NnmProblem,
    f0: &SymMatrix,
    opts: &SolveOptions,
) -> Result<(SymMatrix, SolveTrace)> {
    let bc = make_nnm_bc(p)?;
    if f0.dim() != bc.dim() {
        return Err(Error::DimensionMismatch(format!(
            "start is {0}x{0}, expected {1}",
            f0.dim(),
            bc.dim()
        )));
    }
    solve_dss_sym(&bc, f0, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxOptions {
    pub max_iter: usize,
    /// Stop when the objective changes by at most `tol·(1 + |objective|)`
    /// and the prox-gradient mapping `L‖X⁺ − X‖` is at most `step_tol`.
    pub tol: f64,
    pub step_tol: f64,
    /// Step is `1/L`; backtracking doubles `L` when the descent test fails.
    pub lipschitz: Option<f64>,
}

impl Default for ProxOptions {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            tol: 1e-15,
            step_tol: 1e-12,
            lipschitz: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProxOutcome {
    pub x: Mat,
    pub iterations: usize,
    pub objectives: Vec<f64>,
}

/// Proximal gradient with singular-value soft-thresholding.
pub fn prox_grad_nnm_oracle(p: &NnmProblem, x0: &Mat, opts: &ProxOptions) -> Result<ProxOutcome> {
    if x0.shape() != (p.d1(), p.d2()) {
        return Err(Error::DimensionMismatch("start has wrong shape".into()));
    }
    let mut l = opts
        .lipschitz
        .or_else(|| p.inner.lipschitz())
        .unwrap_or(1.0);
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidArgument(
            "Lipschitz estimate must be positive".into(),
        ));
    }
    let mut x = x0.clone();
    let mut obj = p.objective(&x);
    let mut objectives = vec![obj];
    for it in 1..=opts.max_iter {
        let g = p.h_grad(&x);
        let hx = p.h(&x);
        let next = loop {
            let cand = soft_threshold(&(&x - &g / l), p.lambda / l)?;
            let step = &cand - &x;
            let upper = hx + g.dot(&step) + 0.5 * l * step.norm_squared();
            if p.h(&cand) <= upper + 1e-14 * (1.0 + hx.abs()) {
                break cand;
            }
            l *= 2.0;
            if l > 1e20 {
                return Err(Error::Stalled(
                    "backtracking failed to find a descent step".into(),
                ));
            }
        };
        let new_obj = p.objective(&next);
        if !new_obj.is_finite() {
            return Err(Error::NonFinite("objective"));
        }
        let mapping = l * (&next - &x).norm();
        x = next;
        let change = (obj - new_obj).abs();
        obj = new_obj;
        objectives.push(obj);
        if change <= opts.tol * (1.0 + obj.abs()) && mapping <= opts.step_tol {
            return Ok(ProxOutcome {
                x,
                iterations: it,
                objectives,
            });
        }
    }
    Err(Error::Stalled(format!(
        "no convergence in {} iterations",
        opts.max_iter
    )))
}

/// Random `d₁×d₂` matrix of the given rank with unit-scale singular values.
pub fn random_low_rank(d1: usize, d2: usize, rank: usize, seed: u64) -> Mat {
    let mut rng = random::rng(seed);
    random::gaussian(d1, rank, &mut rng) * random::gaussian(d2, rank, &mut rng).transpose()
}
