use super::tr::{trust_region, SmoothObjective};
use super::{SolveOptions, SolveTrace};
use crate::certify::{dss_gradient, dss_hessian, dss_sym_gradient, dss_sym_hessian};
use crate::error::{Error, Result};
use crate::matcore::{
    psd_sqrt, random, smat, svec, sym_dim, sym_eig, Factor, Mat, SymMatrix, Vector,
};
use crate::problems::BcProblem;

struct DssObjective<'a> {
    p: &'a dyn BcProblem,
    d: usize,
    k: usize,
}

impl DssObjective<'_> {
    fn unflatten(&self, v: &Vector) -> Mat {
        Mat::from_column_slice(self.d, self.k, v.as_slice())
    }
}

impl SmoothObjective for DssObjective<'_> {
    fn dim(&self) -> usize {
        self.d * self.k
    }
    fn value(&self, v: &Vector) -> f64 {
        let f = self.unflatten(v);
        self.p.value(&SymMatrix::symmetrize(&f * f.transpose()))
    }
    fn grad(&self, v: &Vector) -> Vector {
        let g = dss_gradient(self.p, &self.unflatten(v));
        Vector::from_column_slice(g.as_slice())
    }
    fn hessian(&self, v: &Vector) -> Mat {
        dss_hessian(self.p, &self.unflatten(v))
    }
}

struct DssSymObjective<'a> {
    p: &'a dyn BcProblem,
    d: usize,
}

impl DssSymObjective<'_> {
    fn unflatten(&self, v: &Vector) -> SymMatrix {
        smat(v).expect("length checked at entry")
    }
}

impl SmoothObjective for DssSymObjective<'_> {
    fn dim(&self) -> usize {
        sym_dim(self.d)
    }
    fn value(&self, v: &Vector) -> f64 {
        let f = self.unflatten(v);
        self.p
            .value(&SymMatrix::symmetrize(f.as_mat() * f.as_mat()))
    }
    fn grad(&self, v: &Vector) -> Vector {
        svec(&dss_sym_gradient(self.p, &self.unflatten(v)))
    }
    fn hessian(&self, v: &Vector) -> Mat {
        dss_sym_hessian(self.p, &self.unflatten(v))
    }
}

/// Minimize `h(FFᵀ)` over `d×k` factors starting from `f0`.
pub fn solve_dss(
    p: &dyn BcProblem,
    f0: &Factor,
    opts: &SolveOptions,
) -> Result<(Factor, SolveTrace)> {
    if f0.rows() != p.dim() || f0.width() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "start is {}x{}, problem has d = {}",
            f0.rows(),
            f0.width(),
            p.dim()
        )));
    }
    let obj = DssObjective {
        p,
        d: f0.rows(),
        k: f0.width(),
    };
    let v0 = Vector::from_column_slice(f0.as_mat().as_slice());
    let (v, trace) = trust_region(&obj, &v0, opts)?;
    Ok((Factor::new(obj.unflatten(&v))?, trace))
}

/// Minimize `h(F²)` over symmetric `F` starting from `f0`.
pub fn solve_dss_sym(
    p: &dyn BcProblem,
    f0: &SymMatrix,
    opts: &SolveOptions,
) -> Result<(SymMatrix, SolveTrace)> {
    if f0.dim() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "start is {0}x{0}, problem has d = {1}",
            f0.dim(),
            p.dim()
        )));
    }
    let obj = DssSymObjective { p, d: f0.dim() };
    let (v, trace) = trust_region(&obj, &svec(f0), opts)?;
    Ok((obj.unflatten(&v), trace))
}

/// Heuristic start: square root of the PSD part of `−∇h(0)`, truncated or
/// padded to `k` columns, plus a small seeded perturbation.
pub fn default_dss_init(p: &dyn BcProblem, k: usize, seed: u64) -> Result<Factor> {
    let d = p.dim();
    if k == 0 {
        return Err(Error::BadDimension("factor width must be positive".into()));
    }
    let g0 = p.grad(&SymMatrix::zeros(d));
    let eig = sym_eig(&g0.scale(-1.0), 1e-12)?;
    let mut f = Mat::zeros(d, k);
    for (c, i) in (0..d).filter(|&i| eig.sigma[i] > 0.0).take(k).enumerate() {
        f.set_column(c, &(eig.u.column(i) * eig.sigma[i].sqrt()));
    }
    let mut rng = random::rng(seed);
    let noise = random::gaussian(d, k, &mut rng);
    let scale = 1e-2 * (1.0 + f.norm()) / (d * k) as f64;
    Factor::new(f + noise * scale)
}

/// Symmetric counterpart of [`default_dss_init`]: PSD root of the heuristic
/// Gram matrix plus a small seeded symmetric perturbation.
pub fn default_dss_sym_init(p: &dyn BcProblem, seed: u64) -> Result<SymMatrix> {
    let d = p.dim();
    let f = default_dss_init(p, d, seed)?;
    let root = psd_sqrt(&f.gram(), 1e-12)?;
    let mut rng = random::rng(seed.wrapping_add(1));
    let noise = random::symmetric(d, &mut rng);
    let scale = 1e-2 * (1.0 + root.fro_norm()) / (d * d) as f64;
    Ok(SymMatrix::symmetrize(
        root.as_mat() + noise.as_mat() * scale,
    ))
}
