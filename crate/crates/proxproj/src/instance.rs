//! A tagged union over the four applications.

use crate::apps::bp::{run_bp, BpProblem};
use crate::apps::emd::{run_emd, EmdProblem};
use crate::apps::smc::{run_smc, SmcProblem};
use crate::apps::spcp::{run_spcp, SpcpProblem};
use crate::baselines::bp::run_bp_baseline;
use crate::baselines::emd::run_emd_baseline;
use crate::baselines::smc::run_smc_baseline;
use crate::baselines::spcp::run_spcp_baseline;
use crate::baselines::BaselineConfig;
use crate::drs::{IterateLog, SolverConfig};
use crate::error::Result;
use crate::linalg::{DenseMatrix, DenseVector};

#[derive(Debug, Clone)]
pub enum ProblemInstance {
    Bp(BpProblem),
    Spcp(SpcpProblem),
    Emd(EmdProblem),
    Smc(SmcProblem),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Vector(DenseVector),
    /// `(L, S)`.
    Pair(DenseMatrix, DenseMatrix),
    Matrix(DenseMatrix),
}

impl ProblemInstance {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemInstance::Bp(_) => "bp",
            ProblemInstance::Spcp(_) => "spcp",
            ProblemInstance::Emd(_) => "emd",
            ProblemInstance::Smc(_) => "smc",
        }
    }

    pub fn eps(&self) -> f64 {
        match self {
            ProblemInstance::Bp(_) => 0.0,
            ProblemInstance::Spcp(p) => p.eps(),
            ProblemInstance::Emd(p) => p.eps(),
            ProblemInstance::Smc(p) => p.eps(),
        }
    }

    pub fn run_pp(&self, cfg: &SolverConfig) -> Result<(IterateLog, Solution)> {
        Ok(match self {
            ProblemInstance::Bp(p) => {
                let (log, x) = run_bp(p, cfg)?;
                (log, Solution::Vector(x))
            }
            ProblemInstance::Spcp(p) => {
                let (log, sol) = run_spcp(p, cfg)?;
                (log, Solution::Pair(sol.l, sol.s))
            }
            ProblemInstance::Emd(p) => {
                let (log, sol) = run_emd(p, cfg)?;
                (log, Solution::Matrix(sol.flux))
            }
            ProblemInstance::Smc(p) => {
                let (log, x) = run_smc(p, cfg)?;
                (log, Solution::Matrix(x))
            }
        })
    }

    pub fn run_baseline(&self, cfg: &BaselineConfig) -> Result<(IterateLog, Solution)> {
        Ok(match self {
            ProblemInstance::Bp(p) => {
                let (log, x) = run_bp_baseline(p, cfg)?;
                (log, Solution::Vector(x))
            }
            ProblemInstance::Spcp(p) => {
                let (log, (l, s)) = run_spcp_baseline(p, cfg)?;
                (log, Solution::Pair(l, s))
            }
            ProblemInstance::Emd(p) => {
                let (log, m) = run_emd_baseline(p, cfg)?;
                (log, Solution::Matrix(m))
            }
            ProblemInstance::Smc(p) => {
                let (log, x) = run_smc_baseline(p, cfg)?;
                (log, Solution::Matrix(x))
            }
        })
    }
}
