use super::tr::{trust_region, SmoothObjective};
use super::{IterRecord, SolveOptions, SolveTrace, Termination};
use crate::certify::{certify_ssv, Order, Witness};
use crate::error::{Error, Result};
use crate::matcore::{random, svec, sym_dim, sym_eig, Factor, Mat, Multiplier, SymMatrix, Vector};
use crate::problems::NsdpProblem;
use crate::tol::Tolerances;

/// `φ(x, F) = f(x) − ⟨Λ, R⟩ + ρ/2 ‖R‖²` with `R = C(x) − FFᵀ`.
struct Penalized<'a> {
    p: &'a dyn NsdpProblem,
    lambda: SymMatrix,
    rho: f64,
    k: usize,
}

impl Penalized<'_> {
    fn split(&self, v: &Vector) -> (Vector, Mat) {
        let n = self.p.n();
        let x = v.rows(0, n).into_owned();
        let f = Mat::from_column_slice(self.p.d(), self.k, &v.as_slice()[n..]);
        (x, f)
    }

    fn residual(&self, x: &Vector, f: &Mat) -> SymMatrix {
        SymMatrix::symmetrize(self.p.c(x).as_mat() - f * f.transpose())
    }

    /// `ρR − Λ`
    fn shifted(&self, r: &SymMatrix) -> SymMatrix {
        SymMatrix::symmetrize(r.as_mat() * self.rho - self.lambda.as_mat())
    }
}

fn e(n: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[i] = 1.0;
    v
}

impl SmoothObjective for Penalized<'_> {
    fn dim(&self) -> usize {
        self.p.n() + self.p.d() * self.k
    }

    fn value(&self, v: &Vector) -> f64 {
        let (x, f) = self.split(v);
        let r = self.residual(&x, &f);
        self.p.f(&x) - self.lambda.inner(&r) + 0.5 * self.rho * r.inner(&r)
    }

    fn grad(&self, v: &Vector) -> Vector {
        let (x, f) = self.split(v);
        let m = self.shifted(&self.residual(&x, &f));
        let gx = self.p.f_grad(&x) + self.p.dc_adj(&x, &m);
        let gf = m.as_mat() * &f * -2.0;
        let mut out = Vector::zeros(self.dim());
        out.rows_mut(0, gx.len()).copy_from(&gx);
        out.rows_mut(gx.len(), gf.len())
            .copy_from_slice(gf.as_slice());
        out
    }

    fn hessian(&self, v: &Vector) -> Mat {
        let (x, f) = self.split(v);
        let (n, d, k) = (self.p.n(), self.p.d(), self.k);
        let m = self.shifted(&self.residual(&x, &f));
        let dim = self.dim();
        // columns: svec of the first derivative of R along each coordinate
        let mut jac = Mat::zeros(sym_dim(d), dim);
        for i in 0..n {
            jac.set_column(i, &svec(&self.p.dc(&x, &e(n, i))));
        }
        for a in 0..d * k {
            let (row, col) = (a % d, a / d);
            let mut fe = Mat::zeros(d, d);
            for r in 0..d {
                fe[(r, row)] = f[(r, col)];
            }
            jac.set_column(n + a, &-svec(&SymMatrix::symmetrize(&fe + fe.transpose())));
        }
        let mut h = jac.transpose() * &jac * self.rho;
        for i in 0..n {
            for j in i..n {
                let (ei, ej) = (e(n, i), e(n, j));
                let v = self.p.f_hess_form(&x, &ei, &ej) + self.p.d2c_form(&x, &ei, &ej).inner(&m);
                h[(i, j)] += v;
                if i != j {
                    h[(j, i)] += v;
                }
            }
        }
        // second derivative of −FFᵀ: −(EₐE_bᵀ + E_bEₐᵀ), paired with M
        for a in 0..d * k {
            for b in 0..d * k {
                if a / d == b / d {
                    h[(n + a, n + b)] -= 2.0 * m[(a % d, b % d)];
                }
            }
        }
        h
    }
}

#[derive(Clone, Debug)]
pub struct SsvSolution {
    pub x: Vector,
    pub factor: Factor,
    pub multiplier: Multiplier,
    pub trace: SolveTrace,
    /// Outer rounds, each a full inner trust-region solve.
    pub rounds: usize,
}

/// Augmented Lagrangian on `C(x) = FFᵀ` with trust-region inner solves.
///
/// Returns once the first-order residuals of the slack problem are below
/// `auglag.kkt_tol`. The termination is `SecondOrder` when the last inner solve
/// also certified second-order stationarity of the penalized objective.
/// A round that is first-order but fails the second-order test steps along the
/// witness direction before continuing. When the budget runs out, the round
/// with the smallest scaled residual is returned.
pub fn solve_ssv_auglag(
    p: &dyn NsdpProblem,
    x0: &Vector,
    f0: &Factor,
    opts: &SolveOptions,
) -> Result<SsvSolution> {
    opts.validate()?;
    if x0.len() != p.n() || f0.rows() != p.d() || f0.width() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "start (n={}, F {}x{}) vs problem (n={}, d={})",
            x0.len(),
            f0.rows(),
            f0.width(),
            p.n(),
            p.d()
        )));
    }
    let al = &opts.auglag;
    let k = f0.width();
    let mut obj = Penalized {
        p,
        lambda: SymMatrix::zeros(p.d()),
        rho: al.rho_init,
        k,
    };
    let mut v = Vector::zeros(obj.dim());
    v.rows_mut(0, p.n()).copy_from(x0);
    v.rows_mut(p.n(), p.d() * k)
        .copy_from_slice(f0.as_mat().as_slice());

    let inner_opts = SolveOptions {
        grad_tol: al.inner_tol,
        ..opts.clone()
    };
    let check_tols = Tolerances::default().with_feas(al.kkt_tol);
    let mut records = Vec::new();
    let mut iterations = 0;
    let mut prev_viol = f64::INFINITY;
    let mut stalls = 0;
    let mut escapes = 0;
    // (scaled KKT residual, x, F, Λ) of the best round so far
    let mut best: Option<(f64, Vector, Factor, Multiplier)> = None;

    for round in 0..al.max_outer {
        let (v_new, inner) = trust_region(
            &obj,
            &v,
            &inner_opts
                .clone()
                .with_seed(opts.seed.wrapping_add(round as u64)),
        )?;
        v = v_new;
        iterations += inner.iterations;
        let (x, f) = obj.split(&v);
        let r = obj.residual(&x, &f);
        let viol = r.fro_norm();
        obj.lambda = SymMatrix::symmetrize(obj.lambda.as_mat() - r.as_mat() * obj.rho);
        let last = inner.records.last().cloned();
        records.push(IterRecord {
            iter: round,
            objective: p.f(&x),
            grad_norm: last.as_ref().map_or(f64::NAN, |l| l.grad_norm),
            min_curv: last.as_ref().map_or(f64::NAN, |l| l.min_curv),
            radius: obj.rho,
        });

        let factor = Factor::new(f)?;
        let multiplier = Multiplier(obj.lambda.clone());
        let report = certify_ssv(p, &x, &factor, &multiplier, Order::First, &check_tols)?;
        let score = report
            .first_order
            .residuals
            .values()
            .fold(0.0, |m: f64, r| m.max(*r))
            / report.first_order.scale;
        if best.as_ref().is_none_or(|b| score < b.0) {
            best = Some((score, x.clone(), factor.clone(), multiplier.clone()));
        }
        if report.first_order.pass {
            let second = certify_ssv(p, &x, &factor, &multiplier, Order::Second, &check_tols)?;
            let witness = second
                .second_order
                .result()
                .filter(|r| !r.pass)
                .and_then(|r| r.witness.clone());
            if let Some(w) = witness.filter(|_| escapes < al.dual_step_count) {
                escapes += 1;
                if let Some(moved) = escape(&obj, &v, &w) {
                    v = moved;
                    continue;
                }
            }
            let termination = match inner.termination {
                Termination::SecondOrder if second.pass => Termination::SecondOrder,
                _ => Termination::FirstOrder,
            };
            return Ok(SsvSolution {
                x,
                factor,
                multiplier,
                trace: SolveTrace {
                    records,
                    termination,
                    iterations,
                },
                rounds: round + 1,
            });
        }

        if viol > 0.5 * prev_viol {
            obj.rho = (obj.rho * al.rho_growth).min(al.rho_max);
        }
        if obj.rho >= al.rho_max && viol >= prev_viol {
            stalls += 1;
            if stalls >= al.dual_step_count {
                let (_, x, factor, multiplier) = best.expect("at least one round");
                return Ok(SsvSolution {
                    x,
                    factor,
                    multiplier,
                    trace: SolveTrace {
                        records,
                        termination: Termination::Stalled,
                        iterations,
                    },
                    rounds: round + 1,
                });
            }
        } else {
            stalls = 0;
        }
        prev_viol = viol;
    }
    let (x, factor, multiplier) = match best {
        Some((_, x, factor, multiplier)) => (x, factor, multiplier),
        None => {
            let (x, f) = obj.split(&v);
            (x, Factor::new(f)?, Multiplier(obj.lambda))
        }
    };
    Ok(SsvSolution {
        x,
        factor,
        multiplier,
        trace: SolveTrace {
            records,
            termination: Termination::MaxIter,
            iterations,
        },
        rounds: al.max_outer,
    })
}

/// Backtracking along a negative-curvature witness `(z, Δ)` of the slack
/// problem until the penalized objective decreases.
fn escape(obj: &Penalized, v: &Vector, w: &Witness) -> Option<Vector> {
    let n = obj.p.n();
    let mut dir = Vector::zeros(v.len());
    if let Some(z) = &w.z {
        dir.rows_mut(0, n).copy_from_slice(z);
    }
    let rows = w.direction.as_ref()?;
    for (i, row) in rows.iter().enumerate() {
        for (j, val) in row.iter().enumerate() {
            dir[n + j * obj.p.d() + i] = *val;
        }
    }
    let dn = dir.norm();
    if dn == 0.0 {
        return None;
    }
    let f0 = obj.value(v);
    let mut t = (1.0 + v.norm()) / dn;
    while t * dn > 1e-10 * (1.0 + v.norm()) {
        for s in [t, -t] {
            let cand = v + &dir * s;
            if obj.value(&cand) < f0 {
                return Some(cand);
            }
        }
        t *= 0.5;
    }
    None
}

/// Square root of the PSD part of `C(x0)` with a small seeded perturbation.
pub fn default_ssv_init(p: &dyn NsdpProblem, x0: &Vector, seed: u64) -> Result<Factor> {
    if x0.len() != p.n() {
        return Err(Error::DimensionMismatch(format!(
            "start has {} entries, n = {}",
            x0.len(),
            p.n()
        )));
    }
    let d = p.d();
    let root = sym_eig(&p.c(x0), 1e-12)?.map(|s| s.max(0.0).sqrt());
    let mut rng = random::rng(seed);
    let noise = random::gaussian(d, d, &mut rng);
    let scale = 1e-2 * (1.0 + root.fro_norm()) / (d * d) as f64;
    Factor::new(root.as_mat() + noise * scale)
}
