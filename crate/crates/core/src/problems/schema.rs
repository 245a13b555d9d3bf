//! JSON problem descriptions for the built-in families.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    make_example_2_1, make_example_2_2, make_example_3_1, make_example_b_1, make_least_squares,
    make_nnm_bc, make_quadratic_hadamard, make_quadratic_square, BcProblem, FrobeniusDistance,
    NnmProblem, NsdpProblem, QuadraticNsdp, SensingLeastSquares,
};
use crate::error::{Error, Result};
use crate::matcore::{mat_from_rows, SymMatrix, Vector};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProblemSpec {
    QuadraticSquare {
        #[serde(rename = "A")]
        a: SymMatrix,
        #[serde(rename = "B")]
        b: SymMatrix,
    },
    QuadraticHadamard {
        #[serde(rename = "A")]
        a: SymMatrix,
        #[serde(rename = "B")]
        b: SymMatrix,
    },
    LeastSquares {
        #[serde(rename = "A_list")]
        a_list: Vec<SymMatrix>,
        b: Vec<f64>,
    },
    #[serde(rename = "example_2_1")]
    Example21 {
        d: usize,
        k: usize,
    },
    #[serde(rename = "example_2_2")]
    Example22,
    #[serde(rename = "example_3_1")]
    Example31,
    #[serde(rename = "example_b_1")]
    ExampleB1,
    NnmBc {
        lambda: f64,
        inner: InnerSpec,
    },
    QuadraticNsdp(QuadraticNsdp),
}

/// Smooth part `h` of a nuclear-norm problem.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerSpec {
    Frobenius {
        #[serde(rename = "M")]
        m: Vec<Vec<f64>>,
    },
    Sensing {
        d1: usize,
        d2: usize,
        rank: usize,
        m: usize,
        seed: u64,
    },
}

/// A built problem, tagged by the formulation family it belongs to.
#[derive(Clone)]
pub enum Problem {
    Bc(Arc<dyn BcProblem>),
    Nsdp(Arc<dyn NsdpProblem>),
    Nnm(NnmProblem),
}

impl Problem {
    /// The PSD-constrained view: `h` itself, or `h̄` for nuclear-norm problems.
    pub fn as_bc(&self) -> Option<Arc<dyn BcProblem>> {
        match self {
            Problem::Bc(p) => Some(p.clone()),
            Problem::Nnm(p) => make_nnm_bc(p)
                .ok()
                .map(|b| Arc::new(b) as Arc<dyn BcProblem>),
            Problem::Nsdp(_) => None,
        }
    }

    pub fn as_nsdp(&self) -> Option<Arc<dyn NsdpProblem>> {
        match self {
            Problem::Nsdp(p) => Some(p.clone()),
            _ => None,
        }
    }

    pub fn as_nnm(&self) -> Option<&NnmProblem> {
        match self {
            Problem::Nnm(p) => Some(p),
            _ => None,
        }
    }
}

impl InnerSpec {
    pub fn build(&self) -> Result<Arc<dyn super::RectObjective>> {
        Ok(match self {
            InnerSpec::Frobenius { m } => {
                let target = mat_from_rows(m)?;
                if target.is_empty() {
                    return Err(Error::BadDimension("frobenius target is empty".into()));
                }
                Arc::new(FrobeniusDistance { target })
            }
            InnerSpec::Sensing {
                d1,
                d2,
                rank,
                m,
                seed,
            } => Arc::new(SensingLeastSquares::planted(*d1, *d2, *rank, *m, *seed)?),
        })
    }
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<Problem> {
        Ok(match self {
            ProblemSpec::QuadraticSquare { a, b } => {
                Problem::Bc(Arc::new(make_quadratic_square(a.clone(), b.clone())?))
            }
            ProblemSpec::QuadraticHadamard { a, b } => {
                Problem::Bc(Arc::new(make_quadratic_hadamard(a.clone(), b.clone())?))
            }
            ProblemSpec::LeastSquares { a_list, b } => Problem::Bc(Arc::new(make_least_squares(
                a_list.clone(),
                Vector::from_column_slice(b),
            )?)),
            ProblemSpec::Example21 { d, k } => {
                Problem::Bc(Arc::new(make_example_2_1(*d, *k)?.problem))
            }
            ProblemSpec::Example22 => Problem::Bc(Arc::new(make_example_2_2())),
            ProblemSpec::Example31 => Problem::Nsdp(Arc::new(make_example_3_1())),
            ProblemSpec::ExampleB1 => Problem::Bc(Arc::new(make_example_b_1())),
            ProblemSpec::NnmBc { lambda, inner } => {
                Problem::Nnm(NnmProblem::new(inner.build()?, *lambda)?)
            }
            ProblemSpec::QuadraticNsdp(q) => {
                q.validate()?;
                Problem::Nsdp(Arc::new(q.clone()))
            }
        })
    }
}
