use serde::{Deserialize, Serialize};

use crate::error::OptError;
use crate::linalg::Matrix;
use crate::optcore::{AgentSpec, BoxSet, LocalObjective, ProblemSpec, SolverParams};
use crate::scalar::Real;

pub const TRAFFIC_SIGMA: u32 = 3;

/// Congestion instance: each agent routes one flow over a fixed path of links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficConfig {
    /// 1-based link indices per agent.
    pub routes: Vec<Vec<usize>>,
    /// Utility weight `k_i` of each agent's `-k_i log(1 + x_i)` cost.
    pub k: Vec<f64>,
    /// Link capacities.
    pub b: Vec<f64>,
}

impl TrafficConfig {
    /// Five agents on nine unit-capacity links.
    pub fn standard() -> Self {
        Self {
            routes: vec![vec![2, 3, 6], vec![2, 5, 9], vec![1, 5, 9], vec![6, 4, 9], vec![8, 9]],
            k: vec![10.0, 0.0, 10.0, 10.0, 10.0],
            b: vec![1.0; 9],
        }
    }

    pub fn links(&self) -> usize {
        self.b.len()
    }

    pub fn agents(&self) -> usize {
        self.routes.len()
    }

    pub fn validate(&self) -> Result<(), OptError> {
        if self.k.len() != self.routes.len() {
            return Err(OptError::dim("traffic weights k", self.routes.len(), self.k.len()));
        }
        if let Some(j) = self.b.iter().position(|&b| !(b > 0.0)) {
            return Err(OptError::InvalidProblem(format!("link {}: capacity must be positive", j + 1)));
        }
        Ok(())
    }

    /// One scalar agent per route with `A_ui = A_gi =` its incidence
    /// column, `c = 0`, `d = -b`, `ρ = 2` and boxes `[0, ∞)`.
    pub fn build<T: Real>(&self) -> Result<ProblemSpec<T>, OptError> {
        self.validate()?;
        let a: Matrix<T> = incidence_matrix(&self.routes, self.links(), self.agents())?;
        let agents = (0..self.agents())
            .map(|i| {
                let col: Vec<T> = (0..self.links()).map(|j| a.get(j, i)).collect();
                let col = Matrix::column(&col);
                Ok(AgentSpec {
                    a_u: col.clone(),
                    a_g: col,
                    local: LocalObjective::NegLog { k: T::lit(self.k[i]) },
                    bounds: BoxSet::uniform(1, T::zero(), T::infinity())?,
                })
            })
            .collect::<Result<Vec<_>, OptError>>()?;
        let d = self.b.iter().map(|&b| T::lit(-b)).collect();
        ProblemSpec::new(agents, vec![T::zero(); self.links()], d, T::lit(2.0))
    }
}

/// `L × N` 0/1 matrix with `A[j][i] = 1` iff link `j + 1` is on route `i`.
pub fn incidence_matrix<T: Real>(routes: &[Vec<usize>], links: usize, agents: usize) -> Result<Matrix<T>, OptError> {
    if routes.len() != agents {
        return Err(OptError::dim("route count", agents, routes.len()));
    }
    let mut a = Matrix::zeros(links, agents);
    for (i, route) in routes.iter().enumerate() {
        for &link in route {
            if link == 0 || link > links {
                return Err(OptError::InvalidProblem(format!(
                    "agent {i}: link {link} outside 1..={links}"
                )));
            }
            a.set(link - 1, i, T::one());
        }
    }
    Ok(a)
}

pub fn build_traffic_example<T: Real>() -> (ProblemSpec<T>, SolverParams<T>) {
    let spec = TrafficConfig::standard().build().expect("valid instance");
    let params = SolverParams::uniform(5, T::lit(1e-3), T::lit(0.5), T::lit(0.98), T::lit(1e-4), 5000);
    (spec, params)
}
