use serde::{Deserialize, Serialize};

use super::problem::{primal_subgradient_from_aggregate, BoxSet, PrimalPoint, ProblemSpec};
use crate::error::OptError;
use crate::linalg::dist2;
use crate::scalar::Real;

/// Primal-dual iteration rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Shrunken primal-dual subgradient: double projection with shrink factors.
    Spds,
    /// Regularized primal-dual subgradient on `L_{v,ε}`.
    Rpds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams<T> {
    /// Per-agent primal step sizes.
    pub alpha: Vec<T>,
    pub beta: T,
    pub tau_x: T,
    pub tau_lambda: T,
    /// Primal regularization weight (RPDS only).
    pub v: T,
    /// Dual regularization weight (RPDS only).
    pub eps_reg: T,
    /// Dual iterates live in `[0, lambda_max]^m`.
    pub lambda_max: T,
    pub eps0: T,
    pub k_max: usize,
}

impl<T: Real> SolverParams<T> {
    /// Same step size for every agent, no regularization, `lambda_max = 1e3`.
    pub fn uniform(n: usize, alpha: T, beta: T, tau: T, eps0: T, k_max: usize) -> Self {
        Self {
            alpha: vec![alpha; n],
            beta,
            tau_x: tau,
            tau_lambda: tau,
            v: T::zero(),
            eps_reg: T::zero(),
            lambda_max: T::lit(1e3),
            eps0,
            k_max,
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), OptError> {
        let bad = |what: &str| Err(OptError::InvalidParameter(what.to_string()));
        if self.alpha.len() != n {
            return Err(OptError::dim("alpha", n, self.alpha.len()));
        }
        if self.alpha.iter().any(|&a| !(a > T::zero()) || !a.is_finite()) {
            return bad("alpha_i must be positive and finite");
        }
        if !(self.beta > T::zero()) || !self.beta.is_finite() {
            return bad("beta must be positive and finite");
        }
        for tau in [self.tau_x, self.tau_lambda] {
            if !(tau > T::zero() && tau <= T::one()) {
                return bad("tau must lie in (0, 1]");
            }
        }
        if !(self.v >= T::zero()) || !(self.eps_reg >= T::zero()) {
            return bad("regularization weights must be nonnegative");
        }
        if !(self.lambda_max > T::zero()) {
            return bad("lambda_max must be positive");
        }
        if !(self.eps0 > T::zero()) {
            return bad("eps0 must be positive");
        }
        if self.k_max < 1 {
            return bad("k_max must be at least 1");
        }
        Ok(())
    }

    fn dual_box(&self, m: usize) -> BoxSet<T> {
        BoxSet::uniform(m, T::zero(), self.lambda_max).expect("lambda_max validated positive")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimalDualState<T> {
    pub x: PrimalPoint<T>,
    pub lambda: Vec<T>,
    pub k: usize,
}

impl<T: Real> PrimalDualState<T> {
    /// `x⁰` is the origin projected into each box, `λ⁰ = 0`.
    pub fn initial(spec: &ProblemSpec<T>) -> Self {
        Self {
            x: spec.default_start(),
            lambda: vec![T::zero(); spec.dual_dim()],
            k: 0,
        }
    }

    pub fn flat_x(&self) -> Vec<T> {
        self.x.iter().flatten().copied().collect()
    }

    fn is_finite(&self) -> bool {
        self.x.iter().flatten().chain(&self.lambda).all(|v| v.is_finite())
    }
}

/// Primal update of agent `i` given its Lagrangian subgradient.
pub fn primal_update<T: Real>(
    method: Method,
    params: &SolverParams<T>,
    i: usize,
    x_i: &[T],
    grad: &[T],
    bounds: &BoxSet<T>,
) -> Vec<T> {
    let alpha = params.alpha[i];
    match method {
        Method::Spds => {
            let tau = params.tau_x;
            let inner: Vec<T> = x_i.iter().zip(grad).map(|(&x, &g)| tau * x - alpha * g).collect();
            let inner = bounds.project(&inner);
            let scaled: Vec<T> = inner.iter().map(|&v| v / tau).collect();
            bounds.project(&scaled)
        }
        Method::Rpds => {
            let v = params.v;
            let stepped: Vec<T> = x_i
                .iter()
                .zip(grad)
                .map(|(&x, &g)| x - alpha * (g + v * x))
                .collect();
            bounds.project(&stepped)
        }
    }
}

/// Dual update given `∇_λ L = Σ A_gi x_i + d`.
pub fn dual_update<T: Real>(
    method: Method,
    params: &SolverParams<T>,
    lambda: &[T],
    dual_grad: &[T],
) -> Vec<T> {
    let dual_box = params.dual_box(lambda.len());
    let beta = params.beta;
    match method {
        Method::Spds => {
            let tau = params.tau_lambda;
            let inner: Vec<T> = lambda
                .iter()
                .zip(dual_grad)
                .map(|(&l, &h)| tau * l + beta * h)
                .collect();
            let inner = dual_box.project(&inner);
            let scaled: Vec<T> = inner.iter().map(|&v| v / tau).collect();
            dual_box.project(&scaled)
        }
        Method::Rpds => {
            let eps = params.eps_reg;
            let stepped: Vec<T> = lambda
                .iter()
                .zip(dual_grad)
                .map(|(&l, &h)| l + beta * (h - eps * l))
                .collect();
            dual_box.project(&stepped)
        }
    }
}

/// `‖x⁺ − x‖₂ + ‖λ⁺ − λ‖₂` over the stacked primal vector.
pub fn stopping_error<T: Real>(prev: &PrimalDualState<T>, next: &PrimalDualState<T>) -> T {
    dist2(&prev.flat_x(), &next.flat_x()) + dist2(&prev.lambda, &next.lambda)
}

fn step<T: Real>(
    method: Method,
    spec: &ProblemSpec<T>,
    params: &SolverParams<T>,
    state: &PrimalDualState<T>,
) -> Result<PrimalDualState<T>, OptError> {
    params.validate(spec.n())?;
    if state.lambda.len() != spec.dual_dim() {
        return Err(OptError::dim("dual variable", spec.dual_dim(), state.lambda.len()));
    }
    let aggregate = spec.coupled_sum(&state.x)?;
    let dual_grad = spec.constraint_value(&state.x)?;
    let mut x = Vec::with_capacity(spec.n());
    for (i, agent) in spec.agents().iter().enumerate() {
        let grad = primal_subgradient_from_aggregate(
            i,
            agent,
            spec.rho(),
            &state.x[i],
            &aggregate,
            &state.lambda,
        )?;
        x.push(primal_update(method, params, i, &state.x[i], &grad, &agent.bounds));
    }
    let next = PrimalDualState {
        x,
        lambda: dual_update(method, params, &state.lambda, &dual_grad),
        k: state.k + 1,
    };
    if !next.is_finite() {
        return Err(OptError::Divergence { k: next.k });
    }
    Ok(next)
}

pub fn spds_step<T: Real>(
    spec: &ProblemSpec<T>,
    params: &SolverParams<T>,
    state: &PrimalDualState<T>,
) -> Result<PrimalDualState<T>, OptError> {
    step(Method::Spds, spec, params, state)
}

pub fn rpds_step<T: Real>(
    spec: &ProblemSpec<T>,
    params: &SolverParams<T>,
    state: &PrimalDualState<T>,
) -> Result<PrimalDualState<T>, OptError> {
    step(Method::Rpds, spec, params, state)
}

/// Iterates of a plaintext run. `states[0]` is the starting point and
/// `errors[k-1]` is the stopping error of the step producing `states[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub states: Vec<PrimalDualState<T>>,
    pub errors: Vec<T>,
    pub converged: bool,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &PrimalDualState<T> {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn iterations(&self) -> usize {
        self.errors.len()
    }
}

fn iterate<T: Real>(
    spec: &ProblemSpec<T>,
    params: &SolverParams<T>,
    method: Method,
    init: Option<PrimalDualState<T>>,
    budget: usize,
    stop_early: bool,
) -> Result<Trajectory<T>, OptError> {
    params.validate(spec.n())?;
    let start = init.unwrap_or_else(|| PrimalDualState::initial(spec));
    spec.check_point(&start.x)?;
    let mut states = vec![start];
    let mut errors = Vec::new();
    let mut converged = false;
    while errors.len() < budget {
        let prev = states.last().expect("nonempty");
        let next = step(method, spec, params, prev)?;
        let eps = stopping_error(prev, &next);
        errors.push(eps);
        states.push(next);
        if eps <= params.eps0 {
            converged = true;
            if stop_early {
                break;
            }
        }
    }
    Ok(Trajectory {
        states,
        errors,
        converged,
    })
}

/// Runs until the stopping error drops to `eps0` or `k_max` steps are taken.
pub fn solve_plaintext<T: Real>(
    spec: &ProblemSpec<T>,
    params: &SolverParams<T>,
    method: Method,
    init: Option<PrimalDualState<T>>,
) -> Result<Trajectory<T>, OptError> {
    iterate(spec, params, method, init, params.k_max, true)
}

/// Runs exactly `iterations` steps regardless of the stopping rule; used to
/// shadow an encrypted run iteration by iteration.
pub fn run_iterations<T: Real>(
    spec: &ProblemSpec<T>,
    params: &SolverParams<T>,
    method: Method,
    init: Option<PrimalDualState<T>>,
    iterations: usize,
) -> Result<Trajectory<T>, OptError> {
    let mut t = iterate(spec, params, method, init, iterations, false)?;
    t.converged = t.errors.last().is_some_and(|&e| e <= params.eps0);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::optcore::{AgentSpec, LocalObjective};

    fn zero_problem(n: usize, dim: usize) -> ProblemSpec<f64> {
        let agent = AgentSpec {
            a_u: Matrix::zeros(1, dim),
            a_g: Matrix::zeros(1, dim),
            local: LocalObjective::Zero,
            bounds: BoxSet::uniform(dim, 0.0, 1.0).unwrap(),
        };
        ProblemSpec::new(vec![agent; n], vec![0.0], vec![0.0], 1.0).unwrap()
    }

    #[test]
    fn zero_gradient_is_fixed_point_of_double_projection() {
        let spec = zero_problem(1, 3);
        let params = SolverParams::uniform(1, 0.1, 1.0, 0.98, 1e-4, 10);
        let state = PrimalDualState {
            x: vec![vec![0.1, 0.5, 0.9]],
            lambda: vec![0.0],
            k: 0,
        };
        let next = spds_step(&spec, &params, &state).unwrap();
        for (a, b) in next.x[0].iter().zip(&state.x[0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(next.k, 1);
    }

    #[test]
    fn rpds_regularizer_shrinks_toward_zero() {
        let spec = zero_problem(1, 2);
        let mut params = SolverParams::uniform(1, 0.1, 1.0, 1.0, 1e-4, 10);
        params.v = 0.5;
        let state = PrimalDualState {
            x: vec![vec![0.4, 0.8]],
            lambda: vec![0.0],
            k: 0,
        };
        let next = rpds_step(&spec, &params, &state).unwrap();
        let factor = 1.0 - 0.1 * 0.5;
        assert!((next.x[0][0] - 0.4 * factor).abs() < 1e-15);
        assert!((next.x[0][1] - 0.8 * factor).abs() < 1e-15);
    }

    #[test]
    fn trivial_quadratic_converges_to_origin() {
        let agent = AgentSpec {
            a_u: Matrix::identity(2),
            a_g: Matrix::zeros(1, 2),
            local: LocalObjective::Zero,
            bounds: BoxSet::uniform(2, 0.0, 1.0).unwrap(),
        };
        let spec = ProblemSpec::new(vec![agent], vec![0.0, 0.0], vec![0.0], 2.0).unwrap();
        let params = SolverParams::uniform(1, 0.1, 1.0, 0.98, 1e-10, 10_000);
        let init = PrimalDualState {
            x: vec![vec![1.0, 0.6]],
            lambda: vec![0.0],
            k: 0,
        };
        let t = solve_plaintext(&spec, &params, Method::Spds, Some(init)).unwrap();
        assert!(t.converged);
        assert!(t.last().x[0].iter().all(|&v: &f64| v.abs() < 1e-8));
    }

    #[test]
    fn bad_params_rejected() {
        let spec = zero_problem(2, 1);
        let mut p = SolverParams::uniform(2, 0.1, 1.0, 0.98, 1e-4, 10);
        p.tau_x = 1.5;
        assert!(p.validate(2).is_err());
        let p = SolverParams::uniform(3, 0.1, 1.0, 0.98, 1e-4, 10);
        assert!(solve_plaintext(&spec, &p, Method::Spds, None).is_err());
        let mut p = SolverParams::uniform(2, 0.1, 1.0, 0.98, 1e-4, 10);
        p.k_max = 0;
        assert!(p.validate(2).is_err());
    }

    #[test]
    fn divergence_reports_iteration() {
        let agent = AgentSpec {
            a_u: Matrix::identity(1),
            a_g: Matrix::zeros(1, 1),
            local: LocalObjective::Zero,
            bounds: BoxSet::new(vec![f64::NEG_INFINITY], vec![f64::INFINITY]).unwrap(),
        };
        let spec = ProblemSpec::new(vec![agent], vec![1.0], vec![0.0], 1.0).unwrap();
        // step far beyond the stability limit 2/ρ
        let params = SolverParams::uniform(1, 1e150, 1.0, 1.0, 1e-4, 100);
        let err = solve_plaintext(&spec, &params, Method::Spds, None).unwrap_err();
        assert!(matches!(err, OptError::Divergence { .. }), "{err:?}");
    }

    #[test]
    fn fixed_budget_ignores_stopping_rule() {
        let spec = zero_problem(2, 1);
        let params = SolverParams::uniform(2, 0.1, 1.0, 0.98, 1e-4, 10);
        let t = run_iterations(&spec, &params, Method::Spds, None, 25).unwrap();
        assert_eq!(t.iterations(), 25);
        assert!(t.converged);
    }
}
