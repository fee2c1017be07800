use serde::{Deserialize, Serialize};

use super::traffic::TrafficConfig;
use super::{Experiment, ReferenceOptimum};
use crate::error::{Error, OptError};
use crate::linalg::Matrix;
use crate::optcore::{AgentSpec, BoxSet, LocalObjective, Method, ProblemSpec, SolverParams};
use crate::scalar::Real;

/// On-disk problem definition (TOML).
///
/// Either `[traffic]` or the explicit `rho` / `c` / `d` / `[[agents]]` form
/// is given, never both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    #[serde(default = "default_sigma")]
    pub sigma: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<f64>>,
    pub solver: SolverSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traffic: Option<TrafficConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub agents: Vec<AgentSection>,
}

fn default_sigma() -> u32 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSize {
    Uniform(f64),
    PerAgent(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_method")]
    pub method: Method,
    pub alpha: StepSize,
    pub beta: f64,
    /// Shorthand for equal `tau_x` and `tau_lambda`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_lambda: Option<f64>,
    #[serde(default)]
    pub v: f64,
    #[serde(default)]
    pub eps_reg: f64,
    #[serde(default = "default_lambda_max")]
    pub lambda_max: f64,
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

fn default_method() -> Method {
    Method::Spds
}

fn default_lambda_max() -> f64 {
    1e3
}

fn default_eps0() -> f64 {
    1e-4
}

fn default_k_max() -> usize {
    5000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSection {
    pub a_u: Vec<Vec<f64>>,
    pub a_g: Vec<Vec<f64>>,
    /// Omitted bounds are unbounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
    pub local: LocalSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LocalSection {
    Quadratic {
        a_q: Vec<Vec<f64>>,
        a_l: Vec<f64>,
        #[serde(default)]
        c_t: f64,
    },
    Neglog {
        k: f64,
    },
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    pub x: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
}

fn matrix<T: Real>(rows: &[Vec<f64>], what: &str, agent: usize) -> Result<Matrix<T>, OptError> {
    let converted: Vec<Vec<T>> = rows.iter().map(|r| r.iter().map(|&v| T::lit(v)).collect()).collect();
    Matrix::from_rows(&converted).ok_or_else(|| OptError::InvalidProblem(format!("agent {agent}: {what} is ragged")))
}

fn lits<T: Real>(xs: &[f64]) -> Vec<T> {
    xs.iter().map(|&x| T::lit(x)).collect()
}

fn unlit<T: Real>(xs: &[T]) -> Vec<f64> {
    xs.iter().map(|x| x.as_f64()).collect()
}

fn rows_of<T: Real>(m: &Matrix<T>) -> Vec<Vec<f64>> {
    m.to_rows().iter().map(|r| unlit(r)).collect()
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Experiment(format!("problem file: {e}")))
    }

    pub fn to_toml(&self) -> Result<String, Error> {
        toml::to_string(self).map_err(|e| Error::Experiment(format!("problem file: {e}")))
    }

    pub fn into_experiment<T: Real>(self) -> Result<Experiment<T>, Error> {
        let explicit = self.rho.is_some() || self.c.is_some() || self.d.is_some() || !self.agents.is_empty();
        let spec = match (&self.traffic, explicit) {
            (Some(_), true) => {
                return Err(OptError::InvalidProblem(
                    "a [traffic] problem cannot also define rho, c, d or agents".into(),
                )
                .into())
            }
            (Some(t), false) => t.build()?,
            (None, _) => {
                let missing = |k: &str| OptError::InvalidProblem(format!("missing key `{k}`"));
                let rho = self.rho.ok_or_else(|| missing("rho"))?;
                let c = self.c.as_deref().ok_or_else(|| missing("c"))?;
                let d = self.d.as_deref().ok_or_else(|| missing("d"))?;
                let agents = self
                    .agents
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a.build(i))
                    .collect::<Result<Vec<_>, _>>()?;
                ProblemSpec::new(agents, lits(c), lits(d), T::lit(rho))?
            }
        };
        let params = self.solver.build(spec.n())?;
        let reference = self.reference.map(|r| ReferenceOptimum {
            x: r.x.iter().map(|xi| lits(xi)).collect(),
            lambda: lits(&r.lambda),
        });
        if let Some(r) = &reference {
            spec.check_point(&r.x)?;
        }
        Ok(Experiment {
            name: self.name,
            spec,
            params,
            method: self.solver.method,
            sigma: self.sigma,
            traffic: self.traffic,
            reference,
        })
    }

    pub fn from_experiment<T: Real>(exp: &Experiment<T>) -> Self {
        let p = &exp.params;
        let alpha = if p.alpha.windows(2).all(|w| w[0] == w[1]) && !p.alpha.is_empty() {
            StepSize::Uniform(p.alpha[0].as_f64())
        } else {
            StepSize::PerAgent(unlit(&p.alpha))
        };
        let (tau, tau_x, tau_lambda) = if p.tau_x == p.tau_lambda {
            (Some(p.tau_x.as_f64()), None, None)
        } else {
            (None, Some(p.tau_x.as_f64()), Some(p.tau_lambda.as_f64()))
        };
        let solver = SolverSection {
            method: exp.method,
            alpha,
            beta: p.beta.as_f64(),
            tau,
            tau_x,
            tau_lambda,
            v: p.v.as_f64(),
            eps_reg: p.eps_reg.as_f64(),
            lambda_max: p.lambda_max.as_f64(),
            eps0: p.eps0.as_f64(),
            k_max: p.k_max,
        };
        let explicit = exp.traffic.is_none();
        let spec = &exp.spec;
        Self {
            name: exp.name.clone(),
            sigma: exp.sigma,
            rho: explicit.then(|| spec.rho().as_f64()),
            c: explicit.then(|| unlit(spec.c())),
            d: explicit.then(|| unlit(spec.d())),
            solver,
            traffic: exp.traffic.clone(),
            reference: None,
            agents: if explicit {
                spec.agents().iter().map(AgentSection::from_spec).collect()
            } else {
                Vec::new()
            },
        }
    }
}

impl SolverSection {
    fn build<T: Real>(&self, n: usize) -> Result<SolverParams<T>, OptError> {
        let alpha = match &self.alpha {
            StepSize::Uniform(a) => vec![T::lit(*a); n],
            StepSize::PerAgent(a) => lits(a),
        };
        let (tau_x, tau_lambda) = match (self.tau, self.tau_x, self.tau_lambda) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(OptError::InvalidParameter(
                    "give either `tau` or `tau_x` / `tau_lambda`, not both".into(),
                ))
            }
            (Some(t), None, None) => (t, t),
            (None, tx, tl) => (tx.unwrap_or(1.0), tl.unwrap_or(1.0)),
        };
        let params = SolverParams {
            alpha,
            beta: T::lit(self.beta),
            tau_x: T::lit(tau_x),
            tau_lambda: T::lit(tau_lambda),
            v: T::lit(self.v),
            eps_reg: T::lit(self.eps_reg),
            lambda_max: T::lit(self.lambda_max),
            eps0: T::lit(self.eps0),
            k_max: self.k_max,
        };
        params.validate(n)?;
        Ok(params)
    }
}

impl AgentSection {
    fn build<T: Real>(&self, i: usize) -> Result<AgentSpec<T>, OptError> {
        let a_u = matrix(&self.a_u, "a_u", i)?;
        let a_g = matrix(&self.a_g, "a_g", i)?;
        let dim = self
            .lower
            .as_ref()
            .or(self.upper.as_ref())
            .map_or(a_u.cols(), Vec::len);
        let lower = self.lower.clone().unwrap_or_else(|| vec![f64::NEG_INFINITY; dim]);
        let upper = self.upper.clone().unwrap_or_else(|| vec![f64::INFINITY; dim]);
        let local = match &self.local {
            LocalSection::Quadratic { a_q, a_l, c_t } => LocalObjective::Quadratic {
                a_q: matrix(a_q, "a_q", i)?,
                a_l: lits(a_l),
                c_t: T::lit(*c_t),
            },
            LocalSection::Neglog { k } => LocalObjective::NegLog { k: T::lit(*k) },
            LocalSection::Zero => LocalObjective::Zero,
        };
        Ok(AgentSpec {
            a_u,
            a_g,
            local,
            bounds: BoxSet::new(lits(&lower), lits(&upper))?,
        })
    }

    fn from_spec<T: Real>(a: &AgentSpec<T>) -> Self {
        let bound = |b: &[T], inf: f64| {
            let v = unlit(b);
            (!v.iter().all(|&x| x == inf)).then_some(v)
        };
        Self {
            a_u: rows_of(&a.a_u),
            a_g: rows_of(&a.a_g),
            lower: bound(a.bounds.lower(), f64::NEG_INFINITY),
            upper: bound(a.bounds.upper(), f64::INFINITY),
            local: match &a.local {
                LocalObjective::Quadratic { a_q, a_l, c_t } => LocalSection::Quadratic {
                    a_q: rows_of(a_q),
                    a_l: unlit(a_l),
                    c_t: c_t.as_f64(),
                },
                LocalObjective::NegLog { k } => LocalSection::Neglog { k: k.as_f64() },
                LocalObjective::Zero => LocalSection::Zero,
            },
        }
    }
}
