use serde::Serialize;

use crate::error::Result;
use crate::matcore::{rank_threshold, sym_eig, SymMatrix};

#[derive(Clone, Debug, Serialize)]
pub struct EcResult {
    pub pass: bool,
    /// 1-based eigenvalue indices `(i, j, σᵢ, σⱼ)` of the first offending pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offending: Option<(usize, usize, f64, f64)>,
}

/// No two nonzero eigenvalues of `F` may sum to zero.
pub fn check_eigenvalue_condition(f: &SymMatrix, tol: f64) -> Result<EcResult> {
    let eig = sym_eig(f, tol)?;
    let thr = rank_threshold(eig.sigma.as_slice(), tol);
    let nz = eig.range_indices();
    for (a, &i) in nz.iter().enumerate() {
        for &j in &nz[a..] {
            let (si, sj) = (eig.sigma[i], eig.sigma[j]);
            if (si + sj).abs() <= thr {
                return Ok(EcResult {
                    pass: false,
                    offending: Some((i + 1, j + 1, si, sj)),
                });
            }
        }
    }
    Ok(EcResult {
        pass: true,
        offending: None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScResult {
    pub pass: bool,
    pub rank_x: usize,
    pub rank_l: usize,
    /// `‖ΛX‖_F`, reported but not enforced.
    pub compl: f64,
}

/// `rank(X) + rank(Λ) = d`
pub fn check_strict_complementarity(
    x: &SymMatrix,
    lambda: &SymMatrix,
    rank_tol: f64,
) -> Result<ScResult> {
    let rank_x = sym_eig(x, rank_tol)?.rank;
    let rank_l = sym_eig(lambda, rank_tol)?.rank;
    Ok(ScResult {
        pass: rank_x + rank_l == x.dim(),
        rank_x,
        rank_l,
        compl: (lambda.as_mat() * x.as_mat()).norm(),
    })
}
