use super::{
    psd_violation, reduced_test, witness, CertReport, FirstOrder, Formulation, Order, SecondOrder,
};
use crate::error::{Error, Result};
use crate::matcore::{pinv, sym_basis, sym_eig, unit_matrix, Factor, Mat, SymMatrix};
use crate::problems::BcProblem;
use crate::tol::Tolerances;

fn check_dim(p: &dyn BcProblem, d: usize) -> Result<()> {
    if p.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "point has dimension {d}, problem has {}",
            p.dim()
        )));
    }
    Ok(())
}

/// Orthonormal basis of `{W ∈ Sᵈ : V_Xᵀ W V_X = 0}`: range-range blocks
/// followed by range-null blocks.
pub fn bc_subspace_basis(x: &SymMatrix, rank_tol: f64) -> Result<Vec<SymMatrix>> {
    let eig = sym_eig(x, rank_tol)?;
    let u = eig.range_basis();
    let v = eig.null_basis();
    let r = u.ncols();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(r * (r + 1) / 2 + r * v.ncols());
    for i in 0..r {
        for j in i..r {
            let ui = u.column(i);
            let uj = u.column(j);
            let m = if i == j {
                ui * ui.transpose()
            } else {
                (ui * uj.transpose() + uj * ui.transpose()) * s
            };
            basis.push(SymMatrix::symmetrize(m));
        }
    }
    for i in 0..r {
        for j in 0..v.ncols() {
            let ui = u.column(i);
            let vj = v.column(j);
            basis.push(SymMatrix::symmetrize(
                (ui * vj.transpose() + vj * ui.transpose()) * s,
            ));
        }
    }
    Ok(basis)
}

/// `D²h_X[W,W] + 2tr(W X† W ∇h(X))`
pub fn bc_form(p: &dyn BcProblem, x: &SymMatrix, w: &SymMatrix, rank_tol: f64) -> Result<f64> {
    let xp = pinv(x, rank_tol)?;
    let g = p.grad(x);
    let curv = (w.as_mat() * xp.as_mat() * w.as_mat()).dot(g.as_mat());
    Ok(p.hess_form(x, w, w) + 2.0 * curv)
}

fn bc_first_order(
    p: &dyn BcProblem,
    x: &SymMatrix,
    tols: &Tolerances,
) -> Result<(FirstOrder, SymMatrix)> {
    let g = p.grad(x);
    if !g.is_finite() {
        return Err(Error::NonFinite("gradient"));
    }
    let scale = 1.0 + x.fro_norm() + g.fro_norm();
    let fo = FirstOrder::new(
        &[
            ("feas", psd_violation(x, tols.rank)?, tols.psd),
            ("dualPsd", psd_violation(&g, tols.rank)?, tols.psd),
            ("compl", (g.as_mat() * x.as_mat()).norm(), tols.feas),
        ],
        scale,
    );
    Ok((fo, g))
}

pub fn certify_bc(
    p: &dyn BcProblem,
    x: &SymMatrix,
    order: Order,
    tols: &Tolerances,
) -> Result<CertReport> {
    check_dim(p, x.dim())?;
    let (fo, g) = bc_first_order(p, x, tols)?;
    let report = CertReport::new(Formulation::Bc, fo, *tols);
    if order == Order::First {
        return Ok(report);
    }
    if !report.first_order.pass {
        return Ok(report.with_second_order(SecondOrder::NotEvaluated));
    }
    let basis = bc_subspace_basis(x, tols.rank)?;
    let xp = pinv(x, tols.rank)?;
    let mut h = p.hess_gram(x, &basis);
    // polarized curvature term tr(Wᵢ X† Wⱼ G) + tr(Wⱼ X† Wᵢ G)
    let k: Vec<Mat> = basis
        .iter()
        .map(|w| xp.as_mat() * w.as_mat() * g.as_mat())
        .collect();
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            h[(i, j)] += basis[i].dot(&k[j]) + basis[j].dot(&k[i]);
        }
    }
    let test = reduced_test(h, tols)?;
    let mut res = test.result;
    if let Some(c) = test.coeffs {
        let mut w = Mat::zeros(x.dim(), x.dim());
        for (ci, bi) in c.iter().zip(&basis) {
            w += bi.as_mat() * *ci;
        }
        res.witness = Some(witness(None, Some(&w), res.lambda_min.unwrap_or(0.0)));
    }
    Ok(report.with_second_order(SecondOrder::Evaluated(res)))
}

pub fn certify_bc_1c(p: &dyn BcProblem, x: &SymMatrix, tols: &Tolerances) -> Result<CertReport> {
    certify_bc(p, x, Order::First, tols)
}

pub fn certify_bc_2nc(p: &dyn BcProblem, x: &SymMatrix, tols: &Tolerances) -> Result<CertReport> {
    certify_bc(p, x, Order::Second, tols)
}

/// `∇g(F) = 2∇h(FFᵀ)F`
pub fn dss_gradient(p: &dyn BcProblem, f: &Mat) -> Mat {
    let x = SymMatrix::symmetrize(f * f.transpose());
    p.grad(&x).as_mat() * f * 2.0
}

/// Dense Hessian of `g(F) = h(FFᵀ)` in column-major `vec(Δ)` coordinates.
pub fn dss_hessian(p: &dyn BcProblem, f: &Mat) -> Mat {
    let (d, k) = f.shape();
    let x = SymMatrix::symmetrize(f * f.transpose());
    let g = p.grad(&x);
    let dirs: Vec<SymMatrix> = (0..d * k)
        .map(|a| {
            let e = unit_matrix(d, k, a);
            let fe = f * e.transpose();
            SymMatrix::symmetrize(&fe + fe.transpose())
        })
        .collect();
    let mut h = p.hess_gram(&x, &dirs);
    // ⟨G, EₐE_bᵀ + E_bEₐᵀ⟩ = 2 δ(col) G(row, row)
    for a in 0..d * k {
        for b in 0..d * k {
            if a / d == b / d {
                h[(a, b)] += 2.0 * g[(a % d, b % d)];
            }
        }
    }
    h
}

/// `D²g_F[Δ,Δ] = D²h[W,W] + 2⟨∇h(FFᵀ), ΔΔᵀ⟩` with `W = FΔᵀ + ΔFᵀ`.
pub fn dss_form(p: &dyn BcProblem, f: &Mat, delta: &Mat) -> f64 {
    let x = SymMatrix::symmetrize(f * f.transpose());
    let fd = f * delta.transpose();
    let w = SymMatrix::symmetrize(&fd + fd.transpose());
    p.hess_form(&x, &w, &w) + 2.0 * p.grad(&x).dot(&(delta * delta.transpose()))
}

pub fn certify_dss(
    p: &dyn BcProblem,
    f: &Factor,
    order: Order,
    tols: &Tolerances,
) -> Result<CertReport> {
    check_dim(p, f.rows())?;
    if f.width() == 0 {
        return Err(Error::BadDimension("factor has no columns".into()));
    }
    let x = f.gram();
    let g = p.grad(&x);
    if !g.is_finite() {
        return Err(Error::NonFinite("gradient"));
    }
    let scale = 1.0 + x.fro_norm() + g.fro_norm();
    let fo = FirstOrder::new(
        &[("stationarity", (g.as_mat() * f.as_mat()).norm(), tols.feas)],
        scale,
    );
    let mut report = CertReport::new(Formulation::Dss, fo, *tols);
    if f.width() < f.rows() {
        report
            .notes
            .push("equivalence not guaranteed: factor width k < d".into());
    }
    if order == Order::First {
        return Ok(report);
    }
    if !report.first_order.pass {
        return Ok(report.with_second_order(SecondOrder::NotEvaluated));
    }
    let test = reduced_test(dss_hessian(p, f), tols)?;
    let mut res = test.result;
    if let Some(c) = test.coeffs {
        let delta = Mat::from_column_slice(f.rows(), f.width(), c.as_slice());
        res.witness = Some(witness(None, Some(&delta), res.lambda_min.unwrap_or(0.0)));
    }
    Ok(report.with_second_order(SecondOrder::Evaluated(res)))
}

/// `∇g(F) = 2∇h(F²)∘F = ∇h F + F ∇h`
pub fn dss_sym_gradient(p: &dyn BcProblem, f: &SymMatrix) -> SymMatrix {
    let x = SymMatrix::symmetrize(f.as_mat() * f.as_mat());
    let gf = p.grad(&x).as_mat() * f.as_mat();
    SymMatrix::symmetrize(&gf + gf.transpose())
}

/// Dense Hessian of `g(F) = h(F²)` over `Sᵈ` in `svec` coordinates.
pub fn dss_sym_hessian(p: &dyn BcProblem, f: &SymMatrix) -> Mat {
    let x = SymMatrix::symmetrize(f.as_mat() * f.as_mat());
    let g = p.grad(&x);
    let basis = sym_basis(f.dim());
    let dirs: Vec<SymMatrix> = basis
        .iter()
        .map(|b| {
            let fb = f.as_mat() * b.as_mat();
            SymMatrix::symmetrize(&fb + fb.transpose())
        })
        .collect();
    let mut h = p.hess_gram(&x, &dirs);
    let gb: Vec<Mat> = basis.iter().map(|b| g.as_mat() * b.as_mat()).collect();
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            // ⟨G, BᵢBⱼ + BⱼBᵢ⟩ = 2 tr(G Bᵢ Bⱼ) for symmetric G, Bᵢ, Bⱼ
            h[(i, j)] += 2.0 * gb[i].dot(basis[j].as_mat());
        }
    }
    h
}

/// `D²h[W,W] + 2tr(∇h(F²)Δ²)` with `W = FΔ + ΔF`.
pub fn dss_sym_form(p: &dyn BcProblem, f: &SymMatrix, delta: &SymMatrix) -> f64 {
    let x = SymMatrix::symmetrize(f.as_mat() * f.as_mat());
    let fd = f.as_mat() * delta.as_mat();
    let w = SymMatrix::symmetrize(&fd + fd.transpose());
    p.hess_form(&x, &w, &w) + 2.0 * p.grad(&x).dot(&(delta.as_mat() * delta.as_mat()))
}

pub fn certify_dss_sym(
    p: &dyn BcProblem,
    f: &SymMatrix,
    order: Order,
    tols: &Tolerances,
) -> Result<CertReport> {
    check_dim(p, f.dim())?;
    let x = SymMatrix::symmetrize(f.as_mat() * f.as_mat());
    let g = p.grad(&x);
    if !g.is_finite() {
        return Err(Error::NonFinite("gradient"));
    }
    let scale = 1.0 + x.fro_norm() + g.fro_norm();
    let grad = dss_sym_gradient(p, f);
    let fo = FirstOrder::new(&[("stationarity", grad.fro_norm(), tols.feas)], scale);
    let report = CertReport::new(Formulation::DssSym, fo, *tols);
    if order == Order::First {
        return Ok(report);
    }
    if !report.first_order.pass {
        return Ok(report.with_second_order(SecondOrder::NotEvaluated));
    }
    let test = reduced_test(dss_sym_hessian(p, f), tols)?;
    let mut res = test.result;
    if let Some(c) = test.coeffs {
        let delta = crate::matcore::smat(&c)?;
        res.witness = Some(witness(
            None,
            Some(delta.as_mat()),
            res.lambda_min.unwrap_or(0.0),
        ));
    }
    Ok(report.with_second_order(SecondOrder::Evaluated(res)))
}
