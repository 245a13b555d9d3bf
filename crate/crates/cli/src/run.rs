use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use sqvar_core::certify::{
    certify_bc, certify_bc_1c, certify_dss, certify_dss_sym, certify_nsdp, certify_ssv,
    certify_ssv_sym, Formulation, Order,
};
use sqvar_core::demos::{reproduce, Demo};
use sqvar_core::io::{to_canonical_json, Point, RawPoint};
use sqvar_core::lift::{construct_delta, construct_delta_sym, factor_any};
use sqvar_core::matcore::{mat_from_rows, mat_to_rows, random, Factor, Mat, SymMatrix, Vector};
use sqvar_core::nucnorm::{
    certify_nnm_1p, lift_nnm_1p, project_nnm, solve_nnm_dss, NnmInit, NnmProblem,
};
use sqvar_core::problems::{BcProblem, NsdpProblem, Problem, ProblemSpec, SensingLeastSquares};
use sqvar_core::solve::{
    default_dss_init, default_dss_sym_init, default_ssv_init, solve_dss, solve_dss_sym,
    solve_ssv_auglag, SolveOptions, SolveTrace, Termination,
};
use sqvar_core::tol::RANK_TOL_ENV;
use sqvar_core::{Error, Tolerances};

use crate::args::*;

/// Process exit statuses.
pub mod code {
    pub const PASS: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const REFUTED: i32 = 3;
    pub const NUMERICAL: i32 = 4;
    pub const NOT_CONVERGED: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Read { .. } | CliError::Write { .. } => code::USAGE,
            CliError::Core(e) => match e {
                Error::Parse(_)
                | Error::InvalidArgument(_)
                | Error::DimensionMismatch(_)
                | Error::BadDimension(_)
                | Error::NotSymmetric { .. }
                | Error::BadWidth { .. } => code::USAGE,
                Error::NotFirstOrder(_) => code::REFUTED,
                Error::Stalled(_) => code::NOT_CONVERGED,
                Error::NonFinite(_)
                | Error::NotPsd { .. }
                | Error::SubspaceViolation { .. }
                | Error::EigenvalueConditionViolated { .. }
                | Error::NotFeasible { .. } => code::NUMERICAL,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// A finished command: the JSON document to emit and the exit status.
pub struct Outcome {
    pub report: Value,
    pub code: i32,
    pub out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Core(e.into()))
}

fn load_problem(path: &Path) -> Result<Problem> {
    Ok(ProblemSpec::from_json(&read(path)?)?.build()?)
}

fn bc_of(p: &Problem) -> Result<Arc<dyn BcProblem>> {
    p.as_bc().ok_or_else(|| {
        CliError::Usage("this formulation needs a problem on symmetric matrices".into())
    })
}

fn nsdp_of(p: &Problem) -> Result<Arc<dyn NsdpProblem>> {
    p.as_nsdp().ok_or_else(|| {
        CliError::Usage("this formulation needs a problem with a matrix constraint".into())
    })
}

fn nnm_of(p: &Problem) -> Result<&NnmProblem> {
    p.as_nnm()
        .ok_or_else(|| CliError::Usage("this command needs an nnm_bc problem".into()))
}

fn check_tol(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!(
            "--tol-{name} must be positive and finite, got {v}"
        )))
    }
}

fn tolerances(args: &TolArgs) -> Result<Tolerances> {
    let mut t = Tolerances::from_env();
    if let Some(v) = args.tol_feas {
        t.feas = check_tol("feas", v)?;
    }
    if let Some(v) = args.tol_psd {
        t.psd = check_tol("psd", v)?;
    }
    if let Some(v) = args.tol_curv {
        t.curv = check_tol("curv", v)?;
    }
    if let Some(v) = args.tol_rank {
        t.rank = check_tol("rank", v)?;
    }
    Ok(t)
}

fn verdict(pass: bool) -> i32 {
    if pass {
        code::PASS
    } else {
        code::REFUTED
    }
}

fn termination_code(t: Termination) -> i32 {
    match t {
        Termination::SecondOrder | Termination::FirstOrder => code::PASS,
        Termination::MaxIter | Termination::Stalled => code::NOT_CONVERGED,
    }
}

fn core_formulation(f: FormulationArg) -> Option<Formulation> {
    Some(match f {
        FormulationArg::Bc => Formulation::Bc,
        FormulationArg::Dss => Formulation::Dss,
        FormulationArg::DssSym => Formulation::DssSym,
        FormulationArg::Nsdp => Formulation::Nsdp,
        FormulationArg::Ssv => Formulation::Ssv,
        FormulationArg::SsvSym => Formulation::SsvSym,
        FormulationArg::Nnm => return None,
    })
}

fn raw_point(path: &Path) -> Result<RawPoint> {
    Ok(serde_json::from_str(&read(path)?).map_err(Error::from)?)
}

/// Rectangular `{"X"}` point, used by the nuclear-norm commands.
fn rect_point(path: &Path) -> Result<Mat> {
    let raw = raw_point(path)?;
    match raw {
        RawPoint {
            x_mat: Some(rows),
            f: None,
            x: None,
            lambda: None,
        } => Ok(mat_from_rows(&rows)?),
        _ => Err(Error::Parse("expected exactly the key \"X\"".into()).into()),
    }
}

pub fn certify(args: &CertifyArgs) -> Result<Outcome> {
    let problem = load_problem(&args.problem)?;
    let tols = tolerances(&args.tols)?;
    let order = if args.order == 1 {
        Order::First
    } else {
        Order::Second
    };
    let Some(formulation) = core_formulation(args.formulation) else {
        let p = nnm_of(&problem)?;
        let x = rect_point(&args.point)?;
        if order == Order::Second {
            return Err(CliError::Usage(
                "the nnm formulation supports --order 1 only".into(),
            ));
        }
        let report = certify_nnm_1p(p, &x, &tols)?;
        return Ok(Outcome {
            code: verdict(report.pass),
            report: to_value(&report)?,
            out: args.out.clone(),
        });
    };
    let point = Point::parse(&read(&args.point)?, formulation)?;
    let report = match point {
        Point::Bc { x } => certify_bc(bc_of(&problem)?.as_ref(), &x, order, &tols)?,
        Point::Dss { f } => certify_dss(bc_of(&problem)?.as_ref(), &f, order, &tols)?,
        Point::DssSym { f } => certify_dss_sym(bc_of(&problem)?.as_ref(), &f, order, &tols)?,
        Point::Nsdp { x, lambda } => {
            certify_nsdp(nsdp_of(&problem)?.as_ref(), &x, &lambda, order, &tols)?
        }
        Point::Ssv { x, f, lambda } => {
            certify_ssv(nsdp_of(&problem)?.as_ref(), &x, &f, &lambda, order, &tols)?
        }
        Point::SsvSym { x, f, lambda } => {
            certify_ssv_sym(nsdp_of(&problem)?.as_ref(), &x, &f, &lambda, order, &tols)?
        }
    };
    Ok(Outcome {
        code: verdict(report.pass),
        report: to_value(&report)?,
        out: args.out.clone(),
    })
}

fn solve_options(args: &SolveArgs) -> Result<SolveOptions> {
    let mut opts = SolveOptions::default().with_seed(args.seed);
    if let Some(m) = args.max_iter {
        opts.max_iter = m;
    }
    if let Some(g) = args.grad_tol {
        opts.grad_tol = g;
    }
    if let Some(c) = args.tols.tol_curv {
        opts.curv_tol = c;
    }
    opts.validate()?;
    Ok(opts)
}

struct Solved {
    point: RawPoint,
    objective: f64,
    certificate: Value,
    trace: SolveTrace,
}

pub fn solve(args: &SolveArgs) -> Result<Outcome> {
    let problem = load_problem(&args.problem)?;
    let opts = solve_options(args)?;
    let mut tols = tolerances(&args.tols)?;
    let init = args.init.as_deref().map(raw_point).transpose()?;
    if args.width.is_some() && args.method != Method::Dss {
        return Err(CliError::Usage(
            "--width applies to --method dss only".into(),
        ));
    }
    let solved = match args.method {
        Method::Dss => {
            let p = bc_of(&problem)?;
            let f0 = match &init {
                Some(raw) => match Point::from_raw(raw, Formulation::Dss)? {
                    Point::Dss { f } => f,
                    _ => unreachable!("dss points carry a factor"),
                },
                None => default_dss_init(p.as_ref(), args.width.unwrap_or(p.dim()), args.seed)?,
            };
            if let Some(w) = args.width.filter(|&w| w != f0.width()) {
                return Err(CliError::Usage(format!(
                    "--width {w} disagrees with the initial factor width {}",
                    f0.width()
                )));
            }
            let (f, trace) = solve_dss(p.as_ref(), &f0, &opts)?;
            let certificate = to_value(&certify_dss(p.as_ref(), &f, Order::Second, &tols)?)?;
            let objective = p.value(&f.gram());
            Solved {
                point: Point::Dss { f }.to_raw(),
                objective,
                certificate,
                trace,
            }
        }
        Method::DssSym => {
            let p = bc_of(&problem)?;
            let f0 = match &init {
                Some(raw) => match Point::from_raw(raw, Formulation::DssSym)? {
                    Point::DssSym { f } => f,
                    _ => unreachable!("dss_sym points carry a symmetric factor"),
                },
                None => default_dss_sym_init(p.as_ref(), args.seed)?,
            };
            let (f, trace) = solve_dss_sym(p.as_ref(), &f0, &opts)?;
            let certificate = to_value(&certify_dss_sym(p.as_ref(), &f, Order::Second, &tols)?)?;
            let objective = p.value(&SymMatrix::symmetrize(f.as_mat() * f.as_mat()));
            Solved {
                point: Point::DssSym { f }.to_raw(),
                objective,
                certificate,
                trace,
            }
        }
        Method::SsvAuglag => {
            let p = nsdp_of(&problem)?;
            let (x0, f0) = match &init {
                Some(RawPoint {
                    x: Some(x),
                    f: Some(f),
                    x_mat: None,
                    lambda: None,
                }) => (
                    Vector::from_column_slice(x),
                    Factor::new(mat_from_rows(f)?)?,
                ),
                Some(_) => {
                    return Err(Error::Parse(
                        "ssv_auglag starts need exactly the keys \"x\" and \"F\"".into(),
                    )
                    .into())
                }
                None => {
                    let x0 = Vector::zeros(p.n());
                    let f0 = default_ssv_init(p.as_ref(), &x0, args.seed)?;
                    (x0, f0)
                }
            };
            // constraint eigenvalues near the solver's feasibility level count as zero
            if args.tols.tol_rank.is_none() && std::env::var_os(RANK_TOL_ENV).is_none() {
                tols.rank = 1e-6;
            }
            let sol = solve_ssv_auglag(p.as_ref(), &x0, &f0, &opts)?;
            let certificate = to_value(&certify_ssv(
                p.as_ref(),
                &sol.x,
                &sol.factor,
                &sol.multiplier,
                Order::Second,
                &tols,
            )?)?;
            let objective = p.f(&sol.x);
            let point = Point::Ssv {
                x: sol.x,
                f: sol.factor,
                lambda: sol.multiplier,
            }
            .to_raw();
            Solved {
                point,
                objective,
                certificate,
                trace: sol.trace,
            }
        }
        Method::NnmDss => {
            let p = nnm_of(&problem)?;
            let init = match &init {
                Some(raw) => {
                    let f = match Point::from_raw(raw, Formulation::Dss)? {
                        Point::Dss { f } => f.into_mat(),
                        _ => unreachable!("dss points carry a factor"),
                    };
                    if f.nrows() != p.d1() + p.d2() {
                        return Err(Error::DimensionMismatch(format!(
                            "initial factor has {} rows, expected {}",
                            f.nrows(),
                            p.d1() + p.d2()
                        ))
                        .into());
                    }
                    NnmInit::Factors {
                        y: f.rows(0, p.d1()).into_owned(),
                        z: f.rows(p.d1(), p.d2()).into_owned(),
                    }
                }
                None => NnmInit::Seed(args.seed),
            };
            let sol = solve_nnm_dss(p, &init, &opts)?;
            let certificate = to_value(&certify_nnm_1p(p, &sol.x, &tols)?)?;
            let point = RawPoint {
                x_mat: Some(mat_to_rows(&sol.x)),
                ..Default::default()
            };
            Solved {
                point,
                objective: p.objective(&sol.x),
                certificate,
                trace: sol.trace,
            }
        }
    };
    if let Some(path) = &args.trace {
        write(path, &solved.trace.to_json_lines())?;
    }
    if let Some(path) = &args.point_out {
        write(path, &to_canonical_json(&solved.point)?)?;
    }
    let report = json!({
        "method": args.method.to_possible_value().map(|v| v.get_name().to_string()),
        "termination": solved.trace.termination,
        "iterations": solved.trace.iterations,
        "objective": solved.objective,
        "point": solved.point,
        "certificate": solved.certificate,
    });
    Ok(Outcome {
        code: termination_code(solved.trace.termination),
        report,
        out: args.out.clone(),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DirectionFile {
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
}

fn direction(path: &Path) -> Result<SymMatrix> {
    let file: DirectionFile = serde_json::from_str(&read(path)?).map_err(Error::from)?;
    Ok(SymMatrix::from_rows(&file.w)?)
}

pub fn lift(args: &LiftArgs) -> Result<Outcome> {
    match &args.op {
        LiftOp::Factor {
            point,
            width,
            rotation_seed,
            tols,
            out,
        } => {
            let tols = tolerances(tols)?;
            let Point::Bc { x } = Point::parse(&read(point)?, Formulation::Bc)? else {
                unreachable!()
            };
            let k = width.unwrap_or(x.dim());
            let rotation = rotation_seed.map(|s| random::orthogonal(k, &mut random::rng(s)));
            let f = factor_any(&x, k, rotation.as_ref(), tols.rank)?;
            let residual = (f.gram().as_mat() - x.as_mat()).norm();
            let report = json!({ "F": mat_to_rows(f.as_mat()), "residual": residual });
            Ok(Outcome {
                report,
                code: code::PASS,
                out: out.clone(),
            })
        }
        LiftOp::Delta {
            point,
            direction: dir,
            tols,
            out,
        } => {
            let tols = tolerances(tols)?;
            let Point::Dss { f } = Point::parse(&read(point)?, Formulation::Dss)? else {
                unreachable!()
            };
            let w = direction(dir)?;
            let delta = construct_delta(&f, &w, &tols)?;
            let fd = f.as_mat() * delta.transpose();
            let residual = (&fd + fd.transpose() - w.as_mat()).norm();
            let report = json!({ "Delta": mat_to_rows(delta.as_mat()), "residual": residual });
            Ok(Outcome {
                report,
                code: code::PASS,
                out: out.clone(),
            })
        }
        LiftOp::DeltaSym {
            point,
            direction: dir,
            tols,
            out,
        } => {
            let tols = tolerances(tols)?;
            let Point::DssSym { f } = Point::parse(&read(point)?, Formulation::DssSym)? else {
                unreachable!()
            };
            let w = direction(dir)?;
            let delta = construct_delta_sym(&f, &w, &tols)?;
            let fd = f.as_mat() * delta.as_mat();
            let residual = (&fd + fd.transpose() - w.as_mat()).norm();
            let report = json!({ "Delta": mat_to_rows(delta.as_mat()), "residual": residual });
            Ok(Outcome {
                report,
                code: code::PASS,
                out: out.clone(),
            })
        }
        LiftOp::Nnm {
            problem,
            point,
            tols,
            out,
        } => {
            let tols = tolerances(tols)?;
            let problem = load_problem(problem)?;
            let p = nnm_of(&problem)?;
            let x = rect_point(point)?;
            let xbar = lift_nnm_1p(p, &x, &tols)?;
            let bc = bc_of(&problem)?;
            let report = certify_bc_1c(bc.as_ref(), &xbar, &tols)?;
            let code = verdict(report.pass);
            let report = json!({ "X": mat_to_rows(xbar.as_mat()), "certificate": report });
            Ok(Outcome {
                report,
                code,
                out: out.clone(),
            })
        }
        LiftOp::Project {
            point,
            d1,
            tols,
            out,
        } => {
            let tols = tolerances(tols)?;
            let Point::Bc { x } = Point::parse(&read(point)?, Formulation::Bc)? else {
                unreachable!()
            };
            if *d1 == 0 || *d1 >= x.dim() {
                return Err(CliError::Usage(format!("--d1 must lie in 1..{}", x.dim())));
            }
            let proj = project_nnm(&x, *d1, tols.rank)?;
            let report = json!({
                "X": mat_to_rows(&proj.x),
                "U": mat_to_rows(&proj.u),
                "V": mat_to_rows(&proj.v),
                "sigma": proj.sigma,
            });
            Ok(Outcome {
                report,
                code: code::PASS,
                out: out.clone(),
            })
        }
    }
}

pub fn reproduce_example(args: &ReproduceArgs) -> Result<Outcome> {
    let demo = Demo::parse(&args.name, args.d, args.k)?;
    let report = reproduce(demo, args.seed)?;
    Ok(Outcome {
        code: verdict(report.pass),
        report: to_value(&report)?,
        out: args.out.clone(),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SensingConfig {
    d1: usize,
    d2: usize,
    rank: usize,
    m: usize,
    seed: u64,
    lambda: f64,
}

pub fn nucnorm(args: &NucnormArgs) -> Result<Outcome> {
    let NucnormOp::Demo { config, out, trace } = &args.op;
    let cfg: SensingConfig = serde_json::from_str(&read(config)?).map_err(Error::from)?;
    let sensing = SensingLeastSquares::planted(cfg.d1, cfg.d2, cfg.rank, cfg.m, cfg.seed)?;
    let truth = sensing
        .planted
        .clone()
        .expect("planted instances carry their truth");
    let p = NnmProblem::new(Arc::new(sensing), cfg.lambda)?;
    let sol = solve_nnm_dss(
        &p,
        &NnmInit::Seed(cfg.seed),
        &SolveOptions::default().with_seed(cfg.seed),
    )?;
    if let Some(path) = trace {
        write(path, &sol.trace.to_json_lines())?;
    }
    let cert = certify_nnm_1p(&p, &sol.x, &Tolerances::from_env())?;
    let recovery_error = (&sol.x - &truth).norm() / truth.norm().max(f64::MIN_POSITIVE);
    let code = match sol.trace.termination {
        Termination::MaxIter | Termination::Stalled => code::NOT_CONVERGED,
        _ => verdict(cert.pass),
    };
    let report = json!({
        "objective": p.objective(&sol.x),
        "recovery_error": recovery_error,
        "certified_1p": cert.pass,
        "rank": cert.rank,
        "termination": sol.trace.termination,
        "iterations": sol.trace.iterations,
    });
    Ok(Outcome {
        report,
        code,
        out: out.clone(),
    })
}
