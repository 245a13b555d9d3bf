//! Central finite-difference validation of analytic derivatives.

use serde::Serialize;

use super::{BcProblem, NsdpProblem, RectObjective};
use crate::error::{Error, Result};
use crate::matcore::{random, Mat, SymMatrix, Vector};

/// Number of random unit directions probed per check.
pub const FD_DIRECTIONS: usize = 20;

/// Worst mixed relative errors `|a−b| / max(1, |a|, |b|)` per derivative.
#[derive(Clone, Debug, Default, Serialize)]
pub struct FdReport {
    pub grad: f64,
    pub hess: f64,
    pub dc: Option<f64>,
    pub d2c: Option<f64>,
    pub adjoint: Option<f64>,
}

impl FdReport {
    pub fn worst(&self) -> f64 {
        [
            Some(self.grad),
            Some(self.hess),
            self.dc,
            self.d2c,
            self.adjoint,
        ]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

fn rel_mat(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0 && step <= 1e-2) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step {step} not in (0, 1e-2]"
        )));
    }
    Ok(())
}

fn finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what))
    }
}

fn unit_sym(d: usize, rng: &mut random::SeededRng) -> SymMatrix {
    let s = random::symmetric(d, rng);
    let n = s.fro_norm();
    if n == 0.0 {
        s
    } else {
        s.scale(1.0 / n)
    }
}

pub fn fd_check_bc(p: &dyn BcProblem, x: &SymMatrix, step: f64, seed: u64) -> Result<FdReport> {
    check_step(step)?;
    if x.dim() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "point is {}, problem is {}",
            x.dim(),
            p.dim()
        )));
    }
    let mut rng = random::rng(seed);
    let g = p.grad(x);
    let mut report = FdReport::default();
    for _ in 0..FD_DIRECTIONS {
        let e = unit_sym(x.dim(), &mut rng);
        let e2 = unit_sym(x.dim(), &mut rng);
        let xp = x + &e.scale(step);
        let xm = x - &e.scale(step);
        let fd = (p.value(&xp) - p.value(&xm)) / (2.0 * step);
        report.grad = report.grad.max(rel(finite(fd, "objective")?, g.inner(&e)));
        let dg = (p.grad(&xp) - p.grad(&xm)).scale(1.0 / (2.0 * step));
        let analytic = finite(p.hess_form(x, &e, &e2), "hessian form")?;
        report.hess = report
            .hess
            .max(rel(finite(dg.inner(&e2), "gradient")?, analytic));
    }
    Ok(report)
}

pub fn fd_check_nsdp(p: &dyn NsdpProblem, x: &Vector, step: f64, seed: u64) -> Result<FdReport> {
    check_step(step)?;
    if x.len() != p.n() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} entries, problem n = {}",
            x.len(),
            p.n()
        )));
    }
    let mut rng = random::rng(seed);
    let g = p.f_grad(x);
    let mut report = FdReport::default();
    let (mut dc_err, mut d2c_err, mut adj_err) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..FD_DIRECTIONS {
        let z = random::in_ball(p.n(), 1.0, &mut rng).normalize();
        let z2 = random::in_ball(p.n(), 1.0, &mut rng).normalize();
        let (xp, xm) = (x + &z * step, x - &z * step);
        let fd = (p.f(&xp) - p.f(&xm)) / (2.0 * step);
        report.grad = report.grad.max(rel(finite(fd, "objective")?, g.dot(&z)));
        let dg = (p.f_grad(&xp) - p.f_grad(&xm)) / (2.0 * step);
        report.hess = report.hess.max(rel(dg.dot(&z2), p.f_hess_form(x, &z, &z2)));

        let dc_fd = (p.c(&xp).into_mat() - p.c(&xm).into_mat()) / (2.0 * step);
        if !dc_fd.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("constraint map"));
        }
        let dc = p.dc(x, &z);
        dc_err = dc_err.max(rel_mat(&dc_fd, dc.as_mat()));
        let d2c_fd = (p.dc(&xp, &z2).into_mat() - p.dc(&xm, &z2).into_mat()) / (2.0 * step);
        d2c_err = d2c_err.max(rel_mat(&d2c_fd, p.d2c_form(x, &z, &z2).as_mat()));

        let l = unit_sym(p.d(), &mut rng);
        let lhs = dc.inner(&l);
        let rhs = p.dc_adj(x, &l).dot(&z);
        adj_err = adj_err.max(rel(lhs, rhs));
    }
    report.dc = Some(dc_err);
    report.d2c = Some(d2c_err);
    report.adjoint = Some(adj_err);
    Ok(report)
}

pub fn fd_check_rect(p: &dyn RectObjective, x: &Mat, step: f64, seed: u64) -> Result<FdReport> {
    check_step(step)?;
    let (d1, d2) = p.dims();
    if x.shape() != (d1, d2) {
        return Err(Error::DimensionMismatch(format!(
            "point is {:?}, problem is {d1}x{d2}",
            x.shape()
        )));
    }
    let mut rng = random::rng(seed);
    let g = p.grad(x);
    let mut report = FdReport::default();
    for _ in 0..FD_DIRECTIONS {
        let e = random::unit(d1, d2, &mut rng);
        let e2 = random::unit(d1, d2, &mut rng);
        let (xp, xm) = (x + &e * step, x - &e * step);
        let fd = (p.value(&xp) - p.value(&xm)) / (2.0 * step);
        report.grad = report.grad.max(rel(finite(fd, "objective")?, g.dot(&e)));
        let dg = (p.grad(&xp) - p.grad(&xm)) / (2.0 * step);
        report.hess = report.hess.max(rel(dg.dot(&e2), p.hess_form(x, &e, &e2)));
    }
    Ok(report)
}
