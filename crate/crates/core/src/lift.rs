//! Constructive maps between formulations: factorizations `X = FFᵀ` and the
//! direction liftings `W ↦ Δ` with `W = FΔᵀ + ΔFᵀ` (or `W = FΔ + ΔF`).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{pinv, sym_eig, EigDecomp, Factor, Mat, SymMatrix};
use crate::tol::Tolerances;

/// `F = U·diag(√λ)` truncated or zero-padded to width `k`, optionally
/// right-multiplied by an orthogonal `k×k` rotation.
pub fn factor_any(x: &SymMatrix, k: usize, rotate: Option<&Mat>, rank_tol: f64) -> Result<Factor> {
    let eig = sym_eig(x, rank_tol)?;
    let d = eig.dim();
    if d > 0 && eig.min() < -rank_tol * (1.0 + eig.max_abs()) {
        return Err(Error::NotPsd { min_eig: eig.min() });
    }
    if k < eig.rank {
        return Err(Error::BadWidth {
            width: k,
            rank: eig.rank,
        });
    }
    let mut f = Mat::zeros(d, k);
    for j in 0..k.min(d) {
        let s = eig.sigma[j].max(0.0).sqrt();
        f.set_column(j, &(eig.u.column(j) * s));
    }
    if let Some(q) = rotate {
        if q.shape() != (k, k) {
            return Err(Error::DimensionMismatch(format!(
                "rotation is {:?}, width is {k}",
                q.shape()
            )));
        }
        f *= q;
    }
    Factor::new(f)
}

fn eig_with_range_first(
    x: &SymMatrix,
    rank_tol: f64,
) -> Result<(EigDecomp, Vec<usize>, Vec<usize>)> {
    let eig = sym_eig(x, rank_tol)?;
    let range = eig.range_indices();
    let null = eig.null_indices();
    Ok((eig, range, null))
}

fn check_subspace(v: &Mat, w: &SymMatrix, tol: f64) -> Result<()> {
    let residual = (v.transpose() * w.as_mat() * v).norm();
    if residual > tol * (1.0 + w.fro_norm()) {
        return Err(Error::SubspaceViolation { residual });
    }
    Ok(())
}

/// `Δ = U(L ⊙ UᵀWU)Uᵀ(F†)ᵀ` where `L` is `½` on the range-range block and `1`
/// elsewhere; satisfies `FΔᵀ + ΔFᵀ = W` whenever `V_XᵀWV_X = 0`.
pub fn construct_delta(f: &Factor, w: &SymMatrix, tols: &Tolerances) -> Result<Factor> {
    if w.dim() != f.rows() {
        return Err(Error::DimensionMismatch(format!(
            "W is {0}x{0}, F has {1} rows",
            w.dim(),
            f.rows()
        )));
    }
    let x = f.gram();
    let (eig, range, null) = eig_with_range_first(&x, tols.rank)?;
    let order: Vec<usize> = range.iter().chain(&null).copied().collect();
    let u = eig.columns(&order);
    check_subspace(&eig.columns(&null), w, tols.feas)?;
    let r = range.len();
    let mut m = u.transpose() * w.as_mat() * &u;
    for i in 0..r {
        for j in 0..r {
            m[(i, j)] *= 0.5;
        }
    }
    // (F†)ᵀ = X†F
    let ft_pinv = pinv(&x, tols.rank)?.as_mat() * f.as_mat();
    Factor::new(&u * m * u.transpose() * ft_pinv)
}

/// Symmetric `Δ` with `FΔ + ΔF = W`: in the eigenbasis of `F`,
/// `Δᵢⱼ = Wᵢⱼ/(σᵢ+σⱼ)` when `σᵢ` or `σⱼ` is nonzero, else `0`.
pub fn construct_delta_sym(f: &SymMatrix, w: &SymMatrix, tols: &Tolerances) -> Result<SymMatrix> {
    if w.dim() != f.dim() {
        return Err(Error::DimensionMismatch(format!(
            "W is {0}x{0}, F is {1}x{1}",
            w.dim(),
            f.dim()
        )));
    }
    let (eig, _, null) = eig_with_range_first(f, tols.rank)?;
    let thr = eig.threshold();
    let d = f.dim();
    for i in 0..d {
        for j in i..d {
            let (si, sj) = (eig.sigma[i], eig.sigma[j]);
            let any_nonzero = !eig.is_zero(i) || !eig.is_zero(j);
            if any_nonzero && (si + sj).abs() <= thr {
                return Err(Error::EigenvalueConditionViolated {
                    i: i + 1,
                    j: j + 1,
                    sigma_i: si,
                    sigma_j: sj,
                });
            }
        }
    }
    check_subspace(&eig.columns(&null), w, tols.feas)?;
    let what = eig.u.transpose() * w.as_mat() * &eig.u;
    let dhat = Mat::from_fn(d, d, |i, j| {
        if eig.is_zero(i) && eig.is_zero(j) {
            0.0
        } else {
            what[(i, j)] / (eig.sigma[i] + eig.sigma[j])
        }
    });
    Ok(SymMatrix::symmetrize(&eig.u * dhat * eig.u.transpose()))
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    /// `tr(S(ΔΔᵀ − W X† W))` with `W = FΔᵀ + ΔFᵀ`, `X = FFᵀ`.
    pub gap: f64,
    /// `‖SF‖_F`; the inequality `gap ≥ 0` assumes this is zero.
    pub sf_residual: f64,
    /// `λ_min(S)`; the inequality assumes this is nonnegative.
    pub s_min_eig: f64,
}

pub fn lemma_t2_gap(s: &SymMatrix, f: &Factor, delta: &Factor, rank_tol: f64) -> Result<GapReport> {
    if s.dim() != f.rows() || delta.shape() != f.shape() {
        return Err(Error::DimensionMismatch(format!(
            "S is {0}x{0}, F is {1:?}, Δ is {2:?}",
            s.dim(),
            f.shape(),
            delta.shape()
        )));
    }
    let x = f.gram();
    let fd = f.as_mat() * delta.transpose();
    let w = &fd + fd.transpose();
    let xp = pinv(&x, rank_tol)?;
    let inner = delta.as_mat() * delta.transpose() - &w * xp.as_mat() * &w;
    let s_eig = sym_eig(s, rank_tol)?;
    Ok(GapReport {
        gap: s.dot(&inner),
        sf_residual: (s.as_mat() * f.as_mat()).norm(),
        s_min_eig: if s_eig.dim() == 0 { 0.0 } else { s_eig.min() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{null_space_basis, random};

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    /// Random `W` with `VᵀWV = 0` for the null basis `V` of `X`.
    fn feasible_w(x: &SymMatrix, r: &mut random::SeededRng) -> SymMatrix {
        let v = null_space_basis(x, 1e-9).unwrap();
        let p = Mat::identity(x.dim(), x.dim()) - &v * v.transpose();
        let g = random::symmetric(x.dim(), r);
        // keep range-range and range-null blocks only
        let w = &p * g.as_mat() * &p
            + &p * g.as_mat() * (&v * v.transpose())
            + (&v * v.transpose()) * g.as_mat() * &p;
        SymMatrix::symmetrize(w)
    }

    #[test]
    fn factor_any_examples() {
        let f = factor_any(&SymMatrix::identity(2), 2, None, 1e-9).unwrap();
        assert!((f.gram().as_mat() - Mat::identity(2, 2)).norm() < 1e-14);
        let xs = SymMatrix::from_diagonal(&[0.0, 0.0, 0.0, 5.0]);
        let f = factor_any(&xs, 4, None, 1e-9).unwrap();
        assert_close!(f.column(0).norm(), 5f64.sqrt(), 1e-14);
        assert_close!(f[(3, 0)].abs(), 5f64.sqrt(), 1e-14);
        assert!(f.columns(1, 3).norm() < 1e-14);
        let mut r = random::rng(1);
        let x = random::psd_of_rank(5, 3, &mut r);
        let q = random::orthogonal(4, &mut r);
        let f = factor_any(&x, 4, Some(&q), 1e-9).unwrap();
        assert!((f.gram().as_mat() - x.as_mat()).norm() <= 1e-10 * (1.0 + x.fro_norm()));
    }

    #[test]
    fn factor_any_errors() {
        let mut r = random::rng(2);
        let x = random::psd_of_rank(4, 3, &mut r);
        assert!(matches!(
            factor_any(&x, 2, None, 1e-9),
            Err(Error::BadWidth { width: 2, rank: 3 })
        ));
        let neg = SymMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(
            factor_any(&neg, 2, None, 1e-9),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn construct_delta_zero_and_identity() {
        let f = Factor::new(Mat::identity(3, 3)).unwrap();
        let d = construct_delta(&f, &SymMatrix::zeros(3), &tols()).unwrap();
        assert_eq!(d.norm(), 0.0);
        let mut r = random::rng(3);
        let w = random::symmetric(3, &mut r);
        let d = construct_delta(&f, &w, &tols()).unwrap();
        // X = I: Δ = W/2
        assert!((d.as_mat() - w.as_mat() * 0.5).norm() < 1e-12);
    }

    #[test]
    fn construct_delta_reconstructs_and_zeroes_the_gap() {
        let mut r = random::rng(4);
        let f =
            Factor::new(random::gaussian(5, 2, &mut r) * random::gaussian(2, 3, &mut r)).unwrap();
        let x = f.gram();
        for _ in 0..20 {
            let w = feasible_w(&x, &mut r);
            let d = construct_delta(&f, &w, &tols()).unwrap();
            let fd = f.as_mat() * d.transpose();
            assert!((&fd + fd.transpose() - w.as_mat()).norm() <= 1e-9 * (1.0 + w.fro_norm()));
            let v = null_space_basis(&x, 1e-9).unwrap();
            let s = random::psd_of_rank(v.ncols(), v.ncols(), &mut r).congruence(&v);
            let gap = lemma_t2_gap(&s, &f, &d, 1e-9).unwrap();
            assert!(gap.gap.abs() <= 1e-8 * (1.0 + s.fro_norm() * w.fro_norm().powi(2)));
        }
    }

    #[test]
    fn construct_delta_rejects_infeasible_w() {
        let f = Factor::new(Mat::from_row_slice(2, 1, &[1.0, 0.0])).unwrap();
        let w = SymMatrix::identity(2);
        assert!(matches!(
            construct_delta(&f, &w, &tols()),
            Err(Error::SubspaceViolation { .. })
        ));
    }

    #[test]
    fn construct_delta_sym_examples() {
        let mut r = random::rng(5);
        let w = random::symmetric(3, &mut r);
        let d = construct_delta_sym(&SymMatrix::identity(3), &w, &tols()).unwrap();
        assert!((d.as_mat() - w.as_mat() * 0.5).norm() < 1e-12);

        let f = SymMatrix::from_diagonal(&[2.0, -1.0]);
        let w = SymMatrix::from_rows(&[vec![4.0, 3.0], vec![3.0, -2.0]]).unwrap();
        let d = construct_delta_sym(&f, &w, &tols()).unwrap();
        assert_close!(d[(0, 1)], 3.0, 1e-12);
        assert_close!(d[(0, 0)], 1.0, 1e-12);
        assert_close!(d[(1, 1)], 1.0, 1e-12);

        let f = SymMatrix::from_diagonal(&[1.0, -1.0]);
        let r = construct_delta_sym(&f, &SymMatrix::zeros(2), &tols());
        assert!(matches!(
            r,
            Err(Error::EigenvalueConditionViolated { i: 1, j: 2, .. })
        ));
    }

    #[test]
    fn gap_trivial_cases() {
        let mut r = random::rng(6);
        let f = Factor::new(random::gaussian(3, 3, &mut r)).unwrap();
        let zero = Factor::zeros(3, 3);
        let s = random::psd_of_rank(3, 2, &mut r);
        assert_eq!(lemma_t2_gap(&s, &f, &zero, 1e-9).unwrap().gap, 0.0);
        let dl = Factor::new(random::gaussian(3, 3, &mut r)).unwrap();
        assert_eq!(
            lemma_t2_gap(&SymMatrix::zeros(3), &f, &dl, 1e-9)
                .unwrap()
                .gap,
            0.0
        );
    }
}
