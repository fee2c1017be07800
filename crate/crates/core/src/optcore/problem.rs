use serde::{Deserialize, Serialize};

use crate::error::OptError;
use crate::linalg::{add_into, dot, Matrix};
use crate::scalar::Real;

/// One primal vector per agent.
pub type PrimalPoint<T> = Vec<Vec<T>>;

/// Axis-aligned local constraint set `X_i`; bounds may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSet<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Real> BoxSet<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self, OptError> {
        if lower.len() != upper.len() {
            return Err(OptError::dim("box upper bound", lower.len(), upper.len()));
        }
        for (index, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(OptError::InvalidBox {
                    index,
                    lower: lo.as_f64(),
                    upper: hi.as_f64(),
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[lo, hi]^dim`
    pub fn uniform(dim: usize, lo: T, hi: T) -> Result<Self, OptError> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    /// Elementwise clamp. Caller guarantees matching dimension.
    pub fn project(&self, v: &[T]) -> Vec<T> {
        v.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&x, (&lo, &hi))| x.max(lo).min(hi))
            .collect()
    }

    pub fn contains(&self, v: &[T]) -> bool {
        v.len() == self.dim()
            && v
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&lo, &hi))| x >= lo && x <= hi)
    }
}

/// Euclidean projection onto a box.
pub fn project_box<T: Real>(set: &BoxSet<T>, v: &[T]) -> Result<Vec<T>, OptError> {
    if v.len() != set.dim() {
        return Err(OptError::dim("projected vector", set.dim(), v.len()));
    }
    Ok(set.project(v))
}

/// Private local cost `f_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LocalObjective<T> {
    /// `(A_q x)ᵀ(A_q x) + A_l x + C_t`
    Quadratic {
        a_q: Matrix<T>,
        a_l: Vec<T>,
        c_t: T,
    },
    /// `-k Σ_j log(1 + x_j)`
    NegLog { k: T },
    Zero,
}

impl<T: Real> LocalObjective<T> {
    fn check(&self, agent: usize, dim: usize, bounds: &BoxSet<T>) -> Result<(), OptError> {
        match self {
            LocalObjective::Quadratic { a_q, a_l, .. } => {
                if a_q.cols() != dim {
                    return Err(OptError::dim(format!("agent {agent}: A_q columns"), dim, a_q.cols()));
                }
                if a_l.len() != dim {
                    return Err(OptError::dim(format!("agent {agent}: A_l length"), dim, a_l.len()));
                }
            }
            LocalObjective::NegLog { k } => {
                if bounds.lower().iter().any(|&lo| lo < T::zero()) {
                    return Err(OptError::InvalidProblem(format!(
                        "agent {agent}: log objective requires lower bounds >= 0"
                    )));
                }
                if k.is_nan() {
                    return Err(OptError::InvalidProblem(format!("agent {agent}: k is NaN")));
                }
            }
            LocalObjective::Zero => {}
        }
        Ok(())
    }

    pub fn value(&self, agent: usize, x: &[T]) -> Result<T, OptError> {
        match self {
            LocalObjective::Quadratic { a_q, a_l, c_t } => {
                let q = a_q.mul_vec(x);
                Ok(dot(&q, &q) + dot(a_l, x) + *c_t)
            }
            LocalObjective::NegLog { k } => {
                let mut acc = T::zero();
                for &xj in x {
                    if xj <= -T::one() {
                        return Err(OptError::Domain { agent, value: xj.as_f64() });
                    }
                    acc = acc - *k * xj.ln_1p();
                }
                Ok(acc)
            }
            LocalObjective::Zero => Ok(T::zero()),
        }
    }

    pub fn gradient(&self, agent: usize, x: &[T]) -> Result<Vec<T>, OptError> {
        match self {
            LocalObjective::Quadratic { a_q, a_l, .. } => {
                let two = T::one() + T::one();
                let g = a_q.tr_mul_vec(&a_q.mul_vec(x));
                Ok(g.iter().zip(a_l).map(|(&gi, &li)| two * gi + li).collect())
            }
            LocalObjective::NegLog { k } => x
                .iter()
                .map(|&xj| {
                    if xj <= -T::one() {
                        Err(OptError::Domain { agent, value: xj.as_f64() })
                    } else {
                        Ok(-*k / (T::one() + xj))
                    }
                })
                .collect(),
            LocalObjective::Zero => Ok(vec![T::zero(); x.len()]),
        }
    }
}

/// Everything agent `i` privately holds: its coupling slices, local cost and
/// local constraint set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec<T> {
    pub a_u: Matrix<T>,
    pub a_g: Matrix<T>,
    pub local: LocalObjective<T>,
    pub bounds: BoxSet<T>,
}

impl<T: Real> AgentSpec<T> {
    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }
}

/// The coupled program
/// `min (ρ/2)‖Σ A_ui x_i + c‖² + Σ f_i(x_i)  s.t.  x_i ∈ X_i,  Σ A_gi x_i + d ≤ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec<T> {
    agents: Vec<AgentSpec<T>>,
    c: Vec<T>,
    d: Vec<T>,
    rho: T,
}

impl<T: Real> ProblemSpec<T> {
    pub fn new(agents: Vec<AgentSpec<T>>, c: Vec<T>, d: Vec<T>, rho: T) -> Result<Self, OptError> {
        if agents.is_empty() {
            return Err(OptError::InvalidProblem("no agents".into()));
        }
        if !(rho > T::zero()) {
            return Err(OptError::InvalidProblem(format!("rho must be positive, got {rho}")));
        }
        let (p, m) = (c.len(), d.len());
        for (i, a) in agents.iter().enumerate() {
            let ni = a.dim();
            if a.a_u.rows() != p {
                return Err(OptError::dim(format!("agent {i}: A_u rows"), p, a.a_u.rows()));
            }
            if a.a_u.cols() != ni {
                return Err(OptError::dim(format!("agent {i}: A_u columns"), ni, a.a_u.cols()));
            }
            if a.a_g.rows() != m {
                return Err(OptError::dim(format!("agent {i}: A_g rows"), m, a.a_g.rows()));
            }
            if a.a_g.cols() != ni {
                return Err(OptError::dim(format!("agent {i}: A_g columns"), ni, a.a_g.cols()));
            }
            a.local.check(i, ni, &a.bounds)?;
        }
        Ok(Self { agents, c, d, rho })
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[AgentSpec<T>] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &AgentSpec<T> {
        &self.agents[i]
    }

    pub fn c(&self) -> &[T] {
        &self.c
    }

    pub fn d(&self) -> &[T] {
        &self.d
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    /// Dimension `p` of the coupled objective term.
    pub fn objective_dim(&self) -> usize {
        self.c.len()
    }

    /// Dimension `m` of the dual variable.
    pub fn dual_dim(&self) -> usize {
        self.d.len()
    }

    pub fn primal_dims(&self) -> Vec<usize> {
        self.agents.iter().map(AgentSpec::dim).collect()
    }

    pub fn check_point(&self, x: &[Vec<T>]) -> Result<(), OptError> {
        if x.len() != self.n() {
            return Err(OptError::dim("primal point agent count", self.n(), x.len()));
        }
        for (i, (a, xi)) in self.agents.iter().zip(x).enumerate() {
            if xi.len() != a.dim() {
                return Err(OptError::dim(format!("agent {i}: x_i"), a.dim(), xi.len()));
            }
        }
        Ok(())
    }

    /// `Σ A_ui x_i + c`
    pub fn coupled_sum(&self, x: &[Vec<T>]) -> Result<Vec<T>, OptError> {
        self.check_point(x)?;
        let mut acc = self.c.clone();
        for (a, xi) in self.agents.iter().zip(x) {
            add_into(&mut acc, &a.a_u.mul_vec(xi));
        }
        Ok(acc)
    }

    /// `h(x) = Σ A_gi x_i + d`
    pub fn constraint_value(&self, x: &[Vec<T>]) -> Result<Vec<T>, OptError> {
        self.check_point(x)?;
        let mut acc = self.d.clone();
        for (a, xi) in self.agents.iter().zip(x) {
            add_into(&mut acc, &a.a_g.mul_vec(xi));
        }
        Ok(acc)
    }

    /// Projection of the origin into every local box.
    pub fn default_start(&self) -> PrimalPoint<T> {
        self.agents
            .iter()
            .map(|a| a.bounds.project(&vec![T::zero(); a.dim()]))
            .collect()
    }
}

pub fn eval_objective<T: Real>(spec: &ProblemSpec<T>, x: &[Vec<T>]) -> Result<T, OptError> {
    let u = spec.coupled_sum(x)?;
    let half = T::lit(0.5);
    let mut total = half * spec.rho() * dot(&u, &u);
    for (i, (a, xi)) in spec.agents().iter().zip(x).enumerate() {
        total = total + a.local.value(i, xi)?;
    }
    Ok(total)
}

/// `∇_{x_i} L = ρ A_uiᵀ u + ∇f_i(x_i) + A_giᵀ λ` given the aggregate
/// `u = Σ A_uj x_j + c`. This is the form an agent evaluates after decrypting
/// the broadcast aggregate.
pub fn primal_subgradient_from_aggregate<T: Real>(
    agent_index: usize,
    agent: &AgentSpec<T>,
    rho: T,
    x_i: &[T],
    aggregate: &[T],
    lambda: &[T],
) -> Result<Vec<T>, OptError> {
    if x_i.len() != agent.dim() {
        return Err(OptError::dim(format!("agent {agent_index}: x_i"), agent.dim(), x_i.len()));
    }
    if aggregate.len() != agent.a_u.rows() {
        return Err(OptError::dim("objective aggregate", agent.a_u.rows(), aggregate.len()));
    }
    if lambda.len() != agent.a_g.rows() {
        return Err(OptError::dim("dual variable", agent.a_g.rows(), lambda.len()));
    }
    let coupling = agent.a_u.tr_mul_vec(aggregate);
    let local = agent.local.gradient(agent_index, x_i)?;
    let dual = agent.a_g.tr_mul_vec(lambda);
    Ok(coupling
        .iter()
        .zip(&local)
        .zip(&dual)
        .map(|((&cu, &lf), &dl)| rho * cu + lf + dl)
        .collect())
}

pub fn primal_subgradient<T: Real>(
    spec: &ProblemSpec<T>,
    x: &[Vec<T>],
    lambda: &[T],
    i: usize,
) -> Result<Vec<T>, OptError> {
    if i >= spec.n() {
        return Err(OptError::InvalidProblem(format!(
            "agent index {i} out of range for {} agents",
            spec.n()
        )));
    }
    let u = spec.coupled_sum(x)?;
    primal_subgradient_from_aggregate(i, spec.agent(i), spec.rho(), &x[i], &u, lambda)
}

/// `∇_λ L = Σ A_gi x_i + d`
pub fn dual_subgradient<T: Real>(spec: &ProblemSpec<T>, x: &[Vec<T>]) -> Result<Vec<T>, OptError> {
    spec.constraint_value(x)
}
