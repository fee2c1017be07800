use std::fmt;

use super::metrics::{encryption_errors, optimality_gap};
use super::records::IterationRecord;
use super::Experiment;
use crate::error::Error;
use crate::optcore::{run_iterations, solve_plaintext, PrimalDualState, Trajectory};
use crate::protocol::{run_protocol, CryptoSettings, ProtocolConfig, ProtocolRun, DEFAULT_B_MAX};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    /// `None` runs the plaintext baseline without any protocol.
    pub crypto: Option<CryptoSettings>,
    pub master_seed: u64,
    /// Shadow the encrypted run with a plaintext run of the same length and
    /// report `P_e`.
    pub compare_plaintext: bool,
}

impl RunOptions {
    pub fn plaintext() -> Self {
        Self {
            crypto: None,
            master_seed: 0,
            compare_plaintext: false,
        }
    }

    pub fn encrypted(crypto: CryptoSettings, master_seed: u64) -> Self {
        Self {
            crypto: Some(crypto),
            master_seed,
            compare_plaintext: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary<T> {
    pub iterations: usize,
    pub final_g_e: Option<T>,
    pub max_p_e: Option<T>,
    pub converged: bool,
}

impl<T: Real> fmt::Display for Summary<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<T>| v.map_or("n/a".to_string(), |v| format!("{:.6e}", v.as_f64()));
        write!(
            f,
            "iterations={} final_G_e={} max_P_e={} converged={}",
            self.iterations,
            opt(self.final_g_e),
            opt(self.max_p_e),
            self.converged
        )
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentRun<T> {
    pub records: Vec<IterationRecord<T>>,
    pub summary: Summary<T>,
    /// `x^0 … x^K` of the primary run.
    pub states: Vec<PrimalDualState<T>>,
    pub protocol: Option<ProtocolRun<T>>,
    pub baseline: Option<Trajectory<T>>,
}

/// Runs an experiment and assembles one record per iteration.
///
/// With encryption the plaintext twin is run for exactly as many iterations
/// as the encrypted run took, from the same start. The masks need no replay
/// there: they cancel in the aggregate, so the twin differs from the
/// encrypted run only by fixed-point rounding.
pub fn run_experiment<T: Real>(exp: &Experiment<T>, opts: &RunOptions) -> Result<ExperimentRun<T>, Error> {
    let (states, eps, converged, protocol, baseline, p_e) = match &opts.crypto {
        Some(crypto) => {
            let mut config = ProtocolConfig::new(exp.spec.clone(), exp.params.clone(), crypto.clone(), opts.master_seed);
            config.method = exp.method;
            config.b_max = T::lit(DEFAULT_B_MAX);
            let run = run_protocol(&config)?;
            let states = run.states();
            let eps: Vec<T> = run.iterations.iter().map(|it| it.eps).collect();
            let (baseline, p_e) = if opts.compare_plaintext {
                let twin = run_iterations(&exp.spec, &exp.params, exp.method, None, run.len())?;
                let p_e = encryption_errors(&states, &twin.states)?;
                (Some(twin), Some(p_e))
            } else {
                (None, None)
            };
            let converged = run.converged;
            (states, eps, converged, Some(run), baseline, p_e)
        }
        None => {
            let traj = solve_plaintext(&exp.spec, &exp.params, exp.method, None)?;
            (traj.states, traj.errors, traj.converged, None, None, None)
        }
    };

    let records: Vec<IterationRecord<T>> = eps
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let state = &states[i + 1];
            IterationRecord {
                k: i + 1,
                x: state.flat_x(),
                lambda: state.lambda.clone(),
                p_e: p_e.as_ref().map(|p| p[i + 1]),
                g_e: exp.reference.as_ref().map(|r| optimality_gap(&state.x, &r.x)),
                eps: e,
            }
        })
        .collect();

    let summary = Summary {
        iterations: records.len(),
        final_g_e: records.last().and_then(|r| r.g_e),
        max_p_e: records
            .iter()
            .filter_map(|r| r.p_e)
            .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.max(v)))),
        converged,
    };
    Ok(ExperimentRun {
        records,
        summary,
        states,
        protocol,
        baseline,
    })
}
