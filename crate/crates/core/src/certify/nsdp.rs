use serde::Serialize;

use super::{
    psd_violation, reduced_test, witness, CertReport, FirstOrder, Formulation, Order, SecondOrder,
};
use crate::error::{Error, Result};
use crate::matcore::{
    pinv, pinv_rect, rect_null_space, smat, svd, svec, sym_basis, sym_dim, sym_eig, unit_matrix,
    Factor, Mat, Multiplier, SymMatrix, Vector,
};
use crate::problems::NsdpProblem;
use crate::tol::Tolerances;

fn check_dims(p: &dyn NsdpProblem, x: &Vector, lambda: &SymMatrix) -> Result<()> {
    if x.len() != p.n() || lambda.dim() != p.d() {
        return Err(Error::DimensionMismatch(format!(
            "point (n={}, d={}) vs problem (n={}, d={})",
            x.len(),
            lambda.dim(),
            p.n(),
            p.d()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("point"));
    }
    Ok(())
}

fn e(n: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[i] = 1.0;
    v
}

/// `[D²f(x)[eᵢ,eⱼ] − ⟨Λ, D²C_x[eᵢ,eⱼ]⟩]ᵢⱼ`
fn lagrangian_zz(p: &dyn NsdpProblem, x: &Vector, lambda: &SymMatrix) -> Mat {
    let n = p.n();
    let mut h = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let (ei, ej) = (e(n, i), e(n, j));
            let v = p.f_hess_form(x, &ei, &ej) - p.d2c_form(x, &ei, &ej).inner(lambda);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

fn nsdp_scale(p: &dyn NsdpProblem, x: &Vector, c: &SymMatrix, lambda: &SymMatrix) -> f64 {
    1.0 + p.f_grad(x).norm() + c.fro_norm() + lambda.fro_norm()
}

fn stationarity(p: &dyn NsdpProblem, x: &Vector, lambda: &SymMatrix) -> f64 {
    (p.f_grad(x) - p.dc_adj(x, lambda)).norm()
}

/// `D²f[z,z] − tr(Λ D²C_x[z,z]) + 2tr(DC_x[z] C(x)† DC_x[z] Λ)`
pub fn nsdp_form(
    p: &dyn NsdpProblem,
    x: &Vector,
    lambda: &SymMatrix,
    z: &Vector,
    rank_tol: f64,
) -> Result<f64> {
    let cp = pinv(&p.c(x), rank_tol)?;
    let dz = p.dc(x, z);
    let curv = (dz.as_mat() * cp.as_mat() * dz.as_mat()).dot(lambda.as_mat());
    Ok(p.f_hess_form(x, z, z) - p.d2c_form(x, z, z).inner(lambda) + 2.0 * curv)
}

pub fn certify_nsdp(
    p: &dyn NsdpProblem,
    x: &Vector,
    lambda: &Multiplier,
    order: Order,
    tols: &Tolerances,
) -> Result<CertReport> {
    let l = &lambda.0;
    check_dims(p, x, l)?;
    let c = p.c(x);
    let fo = FirstOrder::new(
        &[
            ("stationarity", stationarity(p, x, l), tols.feas),
            ("compl", (l.as_mat() * c.as_mat()).norm(), tols.feas),
            ("feas", psd_violation(&c, tols.rank)?, tols.psd),
            ("multPsd", psd_violation(l, tols.rank)?, tols.psd),
        ],
        nsdp_scale(p, x, &c, l),
    );
    let report = CertReport::new(Formulation::Nsdp, fo, *tols);
    if order == Order::First {
        return Ok(report);
    }
    if !report.first_order.pass {
        return Ok(report.with_second_order(SecondOrder::NotEvaluated));
    }
    let n = p.n();
    let v = sym_eig(&c, tols.rank)?.null_basis();
    // subspace {z : Vᵀ DC_x[z] V = 0}
    let basis = if v.ncols() == 0 {
        Mat::identity(n, n)
    } else {
        let mut map = Mat::zeros(sym_dim(v.ncols()), n);
        for i in 0..n {
            let dci = p.dc(x, &e(n, i));
            map.set_column(i, &svec(&dci.congruence(&v.transpose())));
        }
        rect_null_space(&map, tols.rank)?
    };
    let cp = pinv(&c, tols.rank)?;
    let dirs: Vec<Vector> = basis.column_iter().map(|c| c.into_owned()).collect();
    let dcs: Vec<SymMatrix> = dirs.iter().map(|z| p.dc(x, z)).collect();
    let k: Vec<Mat> = dcs
        .iter()
        .map(|d| cp.as_mat() * d.as_mat() * l.as_mat())
        .collect();
    let m = dirs.len();
    let mut h = basis.transpose() * lagrangian_zz(p, x, l) * &basis;
    for a in 0..m {
        for b in 0..m {
            h[(a, b)] += dcs[a].dot(&k[b]) + dcs[b].dot(&k[a]);
        }
    }
    let test = reduced_test(h, tols)?;
    let mut res = test.result;
    if let Some(coef) = test.coeffs {
        let z = &basis * coef;
        res.witness = Some(witness(Some(&z), None, res.lambda_min.unwrap_or(0.0)));
    }
    Ok(report.with_second_order(SecondOrder::Evaluated(res)))
}

pub fn certify_nsdp_1c(
    p: &dyn NsdpProblem,
    x: &Vector,
    lambda: &Multiplier,
    tols: &Tolerances,
) -> Result<CertReport> {
    certify_nsdp(p, x, lambda, Order::First, tols)
}

pub fn certify_nsdp_2nc(
    p: &dyn NsdpProblem,
    x: &Vector,
    lambda: &Multiplier,
    tols: &Tolerances,
) -> Result<CertReport> {
    certify_nsdp(p, x, lambda, Order::Second, tols)
}

/// `D²f[z,z] + 2tr(ΛΔΔᵀ) − tr(Λ D²C_x[z,z])`, without the subspace restriction.
pub fn ssv_form(
    p: &dyn NsdpProblem,
    x: &Vector,
    lambda: &SymMatrix,
    z: &Vector,
    delta: &Mat,
) -> f64 {
    p.f_hess_form(x, z, z) + 2.0 * lambda.dot(&(delta * delta.transpose()))
        - p.d2c_form(x, z, z).inner(lambda)
}

/// `D²f[z,z] + 2tr(ΛΔ²) − tr(Λ D²C_x[z,z])` for symmetric `Δ`.
pub fn ssv_sym_form(
    p: &dyn NsdpProblem,
    x: &Vector,
    lambda: &SymMatrix,
    z: &Vector,
    delta: &SymMatrix,
) -> f64 {
    ssv_form(p, x, lambda, z, delta.as_mat())
}

/// Shared second-order step of the slack formulations. `dir_images[a]` is the
/// image `FΔₐᵀ + ΔₐFᵀ` of the a-th orthonormal `Δ` coordinate, `dd_block` the
/// `Δ`-`Δ` block of the Lagrangian Hessian in the same coordinates.
fn slack_second_order(
    p: &dyn NsdpProblem,
    x: &Vector,
    lambda: &SymMatrix,
    dir_images: &[SymMatrix],
    dd_block: Mat,
    tols: &Tolerances,
) -> Result<(super::SecondOrderResult, Option<(Vector, Vector)>)> {
    let n = p.n();
    let md = dir_images.len();
    let mut map = Mat::zeros(sym_dim(p.d()), n + md);
    for i in 0..n {
        map.set_column(i, &svec(&p.dc(x, &e(n, i))));
    }
    for (a, w) in dir_images.iter().enumerate() {
        map.set_column(n + a, &(-svec(w)));
    }
    let basis = rect_null_space(&map, tols.rank)?;
    let mut full = Mat::zeros(n + md, n + md);
    full.view_mut((0, 0), (n, n))
        .copy_from(&lagrangian_zz(p, x, lambda));
    full.view_mut((n, n), (md, md)).copy_from(&dd_block);
    let h = basis.transpose() * full * &basis;
    let test = reduced_test(h, tols)?;
    let split = test.coeffs.map(|c| {
        let v = &basis * c;
        (v.rows(0, n).into_owned(), v.rows(n, md).into_owned())
    });
    Ok((test.result, split))
}

pub fn certify_ssv(
    p: &dyn NsdpProblem,
    x: &Vector,
    f: &Factor,
    lambda: &Multiplier,
    order: Order,
    tols: &Tolerances,
) -> Result<CertReport> {
    let l = &lambda.0;
    check_dims(p, x, l)?;
    if f.rows() != p.d() || f.width() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "factor is {}x{}, d = {}",
            f.rows(),
            f.width(),
            p.d()
        )));
    }
    let c = p.c(x);
    let fo = FirstOrder::new(
        &[
            ("stationarity", stationarity(p, x, l), tols.feas),
            ("complF", (l.as_mat() * f.as_mat()).norm(), tols.feas),
            (
                "factorFeas",
                (c.as_mat() - f.gram().as_mat()).norm(),
                tols.feas,
            ),
        ],
        nsdp_scale(p, x, &c, l),
    );
    let report = CertReport::new(Formulation::Ssv, fo, *tols);
    if order == Order::First {
        return Ok(report);
    }
    if !report.first_order.pass {
        return Ok(report.with_second_order(SecondOrder::NotEvaluated));
    }
    let (d, k) = (f.rows(), f.width());
    let images: Vec<SymMatrix> = (0..d * k)
        .map(|a| {
            let fe = f.as_mat() * unit_matrix(d, k, a).transpose();
            SymMatrix::symmetrize(&fe + fe.transpose())
        })
        .collect();
    // ⟨Λ, EₐE_bᵀ + E_bEₐᵀ⟩ = 2 δ(col) Λ(row, row)
    let mut dd = Mat::zeros(d * k, d * k);
    for a in 0..d * k {
        for b in 0..d * k {
            if a / d == b / d {
                dd[(a, b)] = 2.0 * l[(a % d, b % d)];
            }
        }
    }
    let (mut res, split) = slack_second_order(p, x, l, &images, dd, tols)?;
    if let Some((z, dv)) = split {
        let delta = Mat::from_column_slice(d, k, dv.as_slice());
        res.witness = Some(witness(
            Some(&z),
            Some(&delta),
            res.lambda_min.unwrap_or(0.0),
        ));
    }
    Ok(report.with_second_order(SecondOrder::Evaluated(res)))
}

pub fn certify_ssv_sym(
    p: &dyn NsdpProblem,
    x: &Vector,
    f: &SymMatrix,
    lambda: &Multiplier,
    order: Order,
    tols: &Tolerances,
) -> Result<CertReport> {
    let l = &lambda.0;
    check_dims(p, x, l)?;
    if f.dim() != p.d() {
        return Err(Error::DimensionMismatch(format!(
            "factor is {0}x{0}, d = {1}",
            f.dim(),
            p.d()
        )));
    }
    let c = p.c(x);
    let lf = l.as_mat() * f.as_mat();
    let fo = FirstOrder::new(
        &[
            ("stationarity", stationarity(p, x, l), tols.feas),
            ("complF", ((&lf + lf.transpose()) * 0.5).norm(), tols.feas),
            (
                "factorFeas",
                (c.as_mat() - f.as_mat() * f.as_mat()).norm(),
                tols.feas,
            ),
        ],
        nsdp_scale(p, x, &c, l),
    );
    let report = CertReport::new(Formulation::SsvSym, fo, *tols);
    if order == Order::First {
        return Ok(report);
    }
    if !report.first_order.pass {
        return Ok(report.with_second_order(SecondOrder::NotEvaluated));
    }
    let basis = sym_basis(f.dim());
    let images: Vec<SymMatrix> = basis
        .iter()
        .map(|b| {
            let fb = f.as_mat() * b.as_mat();
            SymMatrix::symmetrize(&fb + fb.transpose())
        })
        .collect();
    let m = basis.len();
    let mut dd = Mat::zeros(m, m);
    for a in 0..m {
        let lb = l.as_mat() * basis[a].as_mat();
        for b in 0..m {
            dd[(a, b)] = 2.0 * lb.dot(basis[b].as_mat());
        }
    }
    let (mut res, split) = slack_second_order(p, x, l, &images, dd, tols)?;
    if let Some((z, dv)) = split {
        let delta = smat(&dv)?;
        res.witness = Some(witness(
            Some(&z),
            Some(delta.as_mat()),
            res.lambda_min.unwrap_or(0.0),
        ));
    }
    Ok(report.with_second_order(SecondOrder::Evaluated(res)))
}

#[derive(Clone, Debug, Serialize)]
pub struct Recovery {
    pub multiplier: Multiplier,
    /// `min_M ‖∇f(x) − DC_x*(VMVᵀ)‖₂`
    pub residual: f64,
    /// Dimension of the kernel of `M ↦ DC_x*(VMVᵀ)`; zero means the
    /// recovered multiplier is unique.
    pub recovery_null_dim: usize,
}

/// Least-squares multiplier supported on the null space of `C(x)`.
///
/// The minimum-norm solution is returned; it is not projected onto the PSD
/// cone.
pub fn recover_multiplier(p: &dyn NsdpProblem, x: &Vector, rank_tol: f64) -> Result<Recovery> {
    if x.len() != p.n() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} entries, n = {}",
            x.len(),
            p.n()
        )));
    }
    let c = p.c(x);
    let eig = sym_eig(&c, rank_tol)?;
    if eig.dim() > 0 && eig.min() < -rank_tol * (1.0 + eig.max_abs()) {
        return Err(Error::NotFeasible { min_eig: eig.min() });
    }
    let v = eig.null_basis();
    let g = p.f_grad(x);
    let sb = sym_basis(v.ncols());
    if sb.is_empty() {
        return Ok(Recovery {
            multiplier: Multiplier::zeros(p.d()),
            residual: g.norm(),
            recovery_null_dim: 0,
        });
    }
    let lifted: Vec<SymMatrix> = sb.iter().map(|b| b.congruence(&v)).collect();
    let mut a = Mat::zeros(p.n(), lifted.len());
    for (j, l) in lifted.iter().enumerate() {
        a.set_column(j, &p.dc_adj(x, l));
    }
    let y = pinv_rect(&a, rank_tol)? * &g;
    let rank = svd(&a, rank_tol)?.rank;
    let mut lam = Mat::zeros(p.d(), p.d());
    for (yi, l) in y.iter().zip(&lifted) {
        lam += l.as_mat() * *yi;
    }
    Ok(Recovery {
        multiplier: Multiplier(SymMatrix::symmetrize(lam)),
        residual: (&g - &a * &y).norm(),
        recovery_null_dim: lifted.len() - rank,
    })
}
