//! Benchmark problems, error metrics and the paired encrypted / plaintext
//! harness that turns runs into per-iteration records.

mod harness;
mod metrics;
mod numerical;
mod problem_file;
mod records;
mod reference;
mod traffic;

use std::path::Path;

pub use harness::{run_experiment, ExperimentRun, RunOptions, Summary};
pub use metrics::{encryption_error, encryption_errors, optimality_gap};
pub use numerical::{build_numerical_example, NUMERICAL_SIGMA, PUBLISHED_OPTIMUM};
pub use problem_file::{AgentSection, LocalSection, ProblemFile, ReferenceSection, SolverSection, StepSize};
pub use records::{format_sig, write_records, IterationRecord, OutputFormat, RECORD_SCHEMA};
pub use reference::{OracleSettings, ReferenceEntry, ReferenceOptima, ReferenceOptimum, REFERENCE_OPTIMA_TOML};
pub use traffic::{build_traffic_example, incidence_matrix, TrafficConfig, TRAFFIC_SIGMA};

use crate::error::Error;
use crate::optcore::{Method, ProblemSpec, SolverParams};
use crate::scalar::Real;

/// Names accepted by [`Experiment::builtin`].
pub const BUILTIN_EXPERIMENTS: [&str; 2] = ["numerical", "traffic"];

/// A problem instance with its solver settings and, when known, its optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment<T> {
    pub name: String,
    pub spec: ProblemSpec<T>,
    pub params: SolverParams<T>,
    pub method: Method,
    pub sigma: u32,
    /// Set for route-based problems so they round-trip through problem files.
    pub traffic: Option<TrafficConfig>,
    pub reference: Option<ReferenceOptimum<T>>,
}

impl<T: Real> Experiment<T> {
    pub fn numerical() -> Self {
        let (spec, params) = build_numerical_example();
        Self {
            name: "numerical".into(),
            spec,
            params,
            method: Method::Spds,
            sigma: NUMERICAL_SIGMA,
            traffic: None,
            reference: Some(ReferenceOptima::cached().numerical.to_optimum()),
        }
    }

    pub fn traffic() -> Self {
        let (spec, params) = build_traffic_example();
        Self {
            name: "traffic".into(),
            spec,
            params,
            method: Method::Spds,
            sigma: TRAFFIC_SIGMA,
            traffic: Some(TrafficConfig::standard()),
            reference: Some(ReferenceOptima::cached().traffic.to_optimum()),
        }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "numerical" => Some(Self::numerical()),
            "traffic" => Some(Self::traffic()),
            _ => None,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        ProblemFile::parse(&text)?.into_experiment()
    }

    /// A built-in name, or else a path to a problem file.
    pub fn resolve(name_or_path: &str) -> Result<Self, Error> {
        match Self::builtin(name_or_path) {
            Some(e) => Ok(e),
            None => {
                let path = Path::new(name_or_path);
                if !path.exists() {
                    return Err(Error::Experiment(format!(
                        "`{name_or_path}` is neither a built-in experiment ({}) nor an existing file",
                        BUILTIN_EXPERIMENTS.join(", ")
                    )));
                }
                Self::from_file(path)
            }
        }
    }
}
