use nalgebra::SymmetricEigen;

use super::{IterRecord, SolveOptions, SolveTrace, Termination};
use crate::error::{Error, Result};
use crate::matcore::{random, Mat, Vector};

/// Twice-differentiable objective on `Rᵐ` with a dense Hessian.
pub trait SmoothObjective {
    fn dim(&self) -> usize;
    fn value(&self, v: &Vector) -> f64;
    fn grad(&self, v: &Vector) -> Vector;
    fn hessian(&self, v: &Vector) -> Mat;
}

struct Spectrum {
    q: Mat,
    vals: Vector,
}

impl Spectrum {
    fn of(h: &Mat) -> Result<Self> {
        let sym = (h + h.transpose()) * 0.5;
        if sym.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("hessian"));
        }
        let e = SymmetricEigen::new(sym);
        Ok(Self {
            q: e.eigenvectors,
            vals: e.eigenvalues,
        })
    }

    fn argmin(&self) -> usize {
        self.vals.imin()
    }

    fn min(&self) -> f64 {
        if self.vals.is_empty() {
            0.0
        } else {
            self.vals.min()
        }
    }

    fn norm(&self) -> f64 {
        self.vals.amax()
    }
}

/// Global minimizer of `gᵀp + ½pᵀHp` over `‖p‖ ≤ radius`, hard case included.
fn tr_subproblem(spec: &Spectrum, g: &Vector, radius: f64) -> Vector {
    let gt = spec.q.transpose() * g;
    let lmin = spec.min();
    let scale = spec.norm().max(1.0);
    let tiny = 1e-14 * scale;
    let step_at = |mu: f64| -> Vector {
        let mut c = Vector::zeros(gt.len());
        for i in 0..gt.len() {
            let den = spec.vals[i] + mu;
            if den.abs() > tiny {
                c[i] = -gt[i] / den;
            }
        }
        c
    };
    if lmin > tiny {
        let c = step_at(0.0);
        if c.norm() <= radius {
            return &spec.q * c;
        }
    }
    let lo = (-lmin).max(0.0);
    // hard case: gradient orthogonal to the bottom eigenspace
    let bottom: Vec<usize> = (0..gt.len())
        .filter(|&i| spec.vals[i] - lmin <= tiny)
        .collect();
    let g_bottom: f64 = bottom.iter().map(|&i| gt[i] * gt[i]).sum::<f64>().sqrt();
    if g_bottom <= 1e-12 * g.norm().max(f64::MIN_POSITIVE) || g.norm() == 0.0 {
        let mut c = Vector::zeros(gt.len());
        for i in 0..gt.len() {
            if !bottom.contains(&i) {
                c[i] = -gt[i] / (spec.vals[i] + lo);
            }
        }
        let n = c.norm();
        if n <= radius {
            let tau = (radius * radius - n * n).max(0.0).sqrt();
            c[bottom[0]] = tau;
            return &spec.q * c;
        }
    }
    // secular equation ‖p(μ)‖ = radius on (lo, hi]
    let mut a = lo;
    let mut b = lo + g.norm() / radius + tiny;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if step_at(mid).norm() > radius {
            a = mid;
        } else {
            b = mid;
        }
    }
    let c = step_at(b);
    &spec.q * c
}

/// Relative size below which changes in the objective are treated as noise.
const FLAT_REL: f64 = 1e-11;

fn model_decrease(g: &Vector, h: &Mat, p: &Vector) -> f64 {
    -(g.dot(p) + 0.5 * p.dot(&(h * p)))
}

/// Trust-region Newton with exact subproblem solves and negative-curvature
/// escapes.
///
/// Termination is `SecondOrder` once `‖∇φ‖ ≤ grad_tol·(1 + |φ|)` and
/// `λ_min(∇²φ) ≥ −curv_tol·(1 + ‖∇²φ‖₂)`. A point that is first-order but only
/// marginally indefinite gets one seeded perturbation of norm `10·grad_tol`
/// before being accepted. Steps whose predicted decrease is below the
/// objective's rounding noise are accepted when they reduce `‖∇φ‖` below
/// every earlier such step.
pub fn trust_region(
    obj: &dyn SmoothObjective,
    v0: &Vector,
    opts: &SolveOptions,
) -> Result<(Vector, SolveTrace)> {
    opts.validate()?;
    if v0.len() != obj.dim() {
        return Err(Error::DimensionMismatch(format!(
            "start has {} entries, expected {}",
            v0.len(),
            obj.dim()
        )));
    }
    let mut v = v0.clone();
    let mut fv = obj.value(&v);
    if !fv.is_finite() {
        return Err(Error::NonFinite("objective at start"));
    }
    let mut radius = opts.initial_radius;
    let max_radius = 1e3 * opts.initial_radius.max(1.0);
    let mut rng = random::rng(opts.seed);
    let mut perturbed = false;
    let mut records = Vec::new();
    let mut accepted = 0usize;
    // gradient norms along flat steps only ever decrease, so they cannot cycle
    let mut flat_best = f64::INFINITY;

    let finish = |records, termination, iterations, v| {
        Ok((
            v,
            SolveTrace {
                records,
                termination,
                iterations,
            },
        ))
    };

    for iter in 0..opts.max_iter {
        let g = obj.grad(&v);
        let h = obj.hessian(&v);
        let spec = Spectrum::of(&h)?;
        let gnorm = g.norm();
        if !gnorm.is_finite() {
            return Err(Error::NonFinite("gradient"));
        }
        let lmin = spec.min();
        records.push(IterRecord {
            iter,
            objective: fv,
            grad_norm: gnorm,
            min_curv: lmin,
            radius,
        });
        let curv_slack = opts.curv_tol * (1.0 + spec.norm());

        if gnorm <= opts.grad_tol * (1.0 + fv.abs()) {
            if lmin >= -curv_slack {
                return finish(records, Termination::SecondOrder, accepted, v);
            }
            if lmin >= -10.0 * curv_slack {
                if perturbed {
                    return finish(records, Termination::SecondOrder, accepted, v);
                }
                perturbed = true;
                let kick = random::in_ball(v.len(), 1.0, &mut rng);
                let nk = kick.norm().max(f64::MIN_POSITIVE);
                v += kick * (10.0 * opts.grad_tol / nk);
                fv = obj.value(&v);
                continue;
            }
            // clear negative curvature: move along the bottom eigenvector
            let mut u: Vector = spec.q.column(spec.argmin()).into_owned();
            if g.dot(&u) > 0.0 {
                u = -u;
            }
            let mut t = radius.max(opts.initial_radius);
            let mut moved = false;
            while t > 1e-14 * (1.0 + v.norm()) {
                let cand = &v + &u * t;
                let fc = obj.value(&cand);
                if fc.is_finite() && fc < fv {
                    v = cand;
                    fv = fc;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                return finish(records, Termination::Stalled, accepted, v);
            }
            accepted += 1;
            radius = t.max(radius);
            continue;
        }

        let p = tr_subproblem(&spec, &g, radius);
        let pred = model_decrease(&g, &h, &p);
        let cand = &v + &p;
        let fc = obj.value(&cand);
        let actual = fv - fc;
        let rho = if pred > 0.0 { actual / pred } else { -1.0 };
        let pnorm = p.norm();
        // when the model decrease is lost in rounding error of φ, the gradient
        // norm decides; φ may sum terms as large as ‖∇²φ‖‖v‖², far above |φ|
        let vn = v.norm();
        let noise = FLAT_REL * (1.0 + fv.abs())
            + 16.0 * f64::EPSILON * (gnorm * vn + spec.norm() * vn * vn);
        let gc = obj.grad(&cand).norm();
        let flat = fc.is_finite() && pred <= noise && actual >= -noise && gc < gnorm.min(flat_best);
        if fc.is_finite() && fc < fv && rho > 1e-4 {
            v = cand;
            fv = fc;
            accepted += 1;
            if rho > 0.75 && pnorm >= 0.99 * radius {
                radius = (2.0 * radius).min(max_radius);
            } else if rho < 0.25 {
                radius = 0.25 * pnorm;
            }
        } else if flat {
            flat_best = gc;
            v = cand;
            fv = fc;
            accepted += 1;
            if pnorm >= 0.99 * radius {
                radius = (2.0 * radius).min(max_radius);
            }
        } else {
            radius = 0.25 * pnorm.min(radius);
        }
        if radius < 1e-15 * (1.0 + v.norm()) {
            return finish(records, Termination::Stalled, accepted, v);
        }
    }
    finish(records, Termination::MaxIter, accepted, v)
}
