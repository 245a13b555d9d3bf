use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "sqvar",
    version,
    about = "Certify, solve and lift squared-variable reformulations of PSD-constrained problems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check first- or second-order conditions at a point.
    Certify(CertifyArgs),
    /// Run a second-order solver and certify its output.
    Solve(SolveArgs),
    /// Factorizations and direction liftings between formulations.
    Lift(LiftArgs),
    /// Run the scripted checks of a worked example.
    Reproduce(ReproduceArgs),
    /// Nuclear-norm regularization tools.
    Nucnorm(NucnormArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct TolArgs {
    /// Feasibility, stationarity and complementarity tolerance.
    #[arg(long)]
    pub tol_feas: Option<f64>,
    /// Slack on PSD memberships.
    #[arg(long)]
    pub tol_psd: Option<f64>,
    /// Slack on reduced-Hessian curvature.
    #[arg(long)]
    pub tol_curv: Option<f64>,
    /// Relative zero threshold for eigenvalues (default from SQVAR_RANK_TOL or 1e-9).
    #[arg(long)]
    pub tol_rank: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum FormulationArg {
    Bc,
    Dss,
    DssSym,
    Nsdp,
    Ssv,
    SsvSym,
    /// Nuclear-norm problem at a rectangular `X`; first order only.
    Nnm,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[arg(long, value_enum)]
    pub formulation: FormulationArg,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub order: u8,
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub point: PathBuf,
    #[command(flatten)]
    pub tols: TolArgs,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Method {
    Dss,
    DssSym,
    SsvAuglag,
    NnmDss,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    #[arg(long)]
    pub problem: PathBuf,
    /// Starting point; `{"F"}` for dss/dss_sym, `{"x", "F"}` for ssv_auglag.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Factor width for dss (default: full width).
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    #[command(flatten)]
    pub tols: TolArgs,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the solution as a point file accepted by `certify`.
    #[arg(long)]
    pub point_out: Option<PathBuf>,
    /// Write one JSON line per iteration.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LiftArgs {
    #[command(subcommand)]
    pub op: LiftOp,
}

#[derive(Subcommand, Debug)]
pub enum LiftOp {
    /// Factor `X ⪰ 0` as `FFᵀ` with `F` of the given width.
    Factor {
        /// Point file `{"X"}`.
        #[arg(long)]
        point: PathBuf,
        #[arg(long)]
        width: Option<usize>,
        /// Apply a random orthogonal rotation drawn from this seed.
        #[arg(long)]
        rotation_seed: Option<u64>,
        #[command(flatten)]
        tols: TolArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Direction `Δ` with `FΔᵀ + ΔFᵀ = W`.
    Delta {
        /// Point file `{"F"}`.
        #[arg(long)]
        point: PathBuf,
        /// Direction file `{"W"}`.
        #[arg(long)]
        direction: PathBuf,
        #[command(flatten)]
        tols: TolArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Symmetric direction `Δ` with `FΔ + ΔF = W`.
    DeltaSym {
        #[arg(long)]
        point: PathBuf,
        #[arg(long)]
        direction: PathBuf,
        #[command(flatten)]
        tols: TolArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lift a first-order point `X` of a nuclear-norm problem to the PSD block form.
    Nnm {
        #[arg(long)]
        problem: PathBuf,
        /// Point file `{"X"}` holding the rectangular matrix.
        #[arg(long)]
        point: PathBuf,
        #[command(flatten)]
        tols: TolArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover `X` and its SVD from a PSD block matrix.
    Project {
        /// Point file `{"X"}` holding the block matrix.
        #[arg(long)]
        point: PathBuf,
        /// Row count of the off-diagonal block.
        #[arg(long)]
        d1: usize,
        #[command(flatten)]
        tols: TolArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// One of ex2.1, ex2.2, ex3.1, exB.1.
    pub name: String,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NucnormArgs {
    #[command(subcommand)]
    pub op: NucnormOp,
}

#[derive(Subcommand, Debug)]
pub enum NucnormOp {
    /// Planted low-rank sensing recovery with a certified first-order point.
    Demo {
        /// `{"d1", "d2", "rank", "m", "seed", "lambda"}`.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}
