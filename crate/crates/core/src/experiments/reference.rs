use serde::{Deserialize, Serialize};

use super::numerical::build_numerical_example;
use super::traffic::build_traffic_example;
use crate::error::Error;
use crate::optcore::{solve_plaintext, Method, PrimalPoint, ProblemSpec, SolverParams};
use crate::scalar::Real;

/// Cached reference optima shipped with the crate.
pub const REFERENCE_OPTIMA_TOML: &str = include_str!("../../fixtures/reference_optima.toml");

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceOptimum<T> {
    pub x: PrimalPoint<T>,
    pub lambda: Vec<T>,
}

/// How the cached optima were produced: the plaintext solver with each
/// benchmark's own step sizes, run to a much tighter tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSettings {
    pub method: Method,
    pub eps0: f64,
    pub k_max: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            method: Method::Spds,
            eps0: 1e-8,
            k_max: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceEntry {
    pub iterations: usize,
    pub x: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
}

impl ReferenceEntry {
    pub fn to_optimum<T: Real>(&self) -> ReferenceOptimum<T> {
        ReferenceOptimum {
            x: self.x.iter().map(|xi| xi.iter().map(|&v| T::lit(v)).collect()).collect(),
            lambda: self.lambda.iter().map(|&v| T::lit(v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceOptima {
    pub oracle: OracleSettings,
    pub numerical: ReferenceEntry,
    pub traffic: ReferenceEntry,
}

fn solve_reference(
    spec: &ProblemSpec<f64>,
    params: &SolverParams<f64>,
    oracle: &OracleSettings,
) -> Result<ReferenceEntry, Error> {
    let mut params = params.clone();
    params.eps0 = oracle.eps0;
    params.k_max = oracle.k_max;
    let traj = solve_plaintext(spec, &params, oracle.method, None)?;
    if !traj.converged {
        return Err(Error::Experiment(format!(
            "reference oracle did not reach eps0 = {} within {} iterations",
            oracle.eps0, oracle.k_max
        )));
    }
    let last = traj.last();
    Ok(ReferenceEntry {
        iterations: traj.iterations(),
        x: last.x.clone(),
        lambda: last.lambda.clone(),
    })
}

impl ReferenceOptima {
    /// The embedded cache.
    pub fn cached() -> Self {
        Self::parse(REFERENCE_OPTIMA_TOML).expect("embedded reference optima parse")
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Experiment(format!("reference optima: {e}")))
    }

    /// Recomputes both optima in `f64`.
    pub fn compute(oracle: OracleSettings) -> Result<Self, Error> {
        let (spec, params) = build_numerical_example();
        let numerical = solve_reference(&spec, &params, &oracle)?;
        let (spec, params) = build_traffic_example();
        let traffic = solve_reference(&spec, &params, &oracle)?;
        Ok(Self {
            oracle,
            numerical,
            traffic,
        })
    }

    pub fn to_toml(&self) -> Result<String, Error> {
        let body = toml::to_string(self).map_err(|e| Error::Experiment(format!("reference optima: {e}")))?;
        Ok(format!(
            "# Reference optima of the built-in benchmarks, produced by `privopt reference`.\n\
             # Each entry is the plaintext solver run with the benchmark's own step sizes\n\
             # until the stopping error falls to [oracle].eps0.\n\n{body}"
        ))
    }
}
