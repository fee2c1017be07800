use crate::linalg::Matrix;
use crate::optcore::{AgentSpec, BoxSet, LocalObjective, ProblemSpec, SolverParams};
use crate::scalar::Real;

/// Fixed-point precision used by the two-agent benchmark.
pub const NUMERICAL_SIGMA: u32 = 3;

/// Optimizer published alongside the two-agent benchmark. It is not a
/// minimizer of the instance built below (both coupled constraints are slack
/// there and the box-only minimizer is elsewhere); see
/// [`super::ReferenceOptima`] for the computed optimum.
pub const PUBLISHED_OPTIMUM: [[f64; 2]; 2] = [[0.0, 0.5750], [0.4814, 0.0564]];

fn m<T: Real>(rows: &[&[f64]]) -> Matrix<T> {
    Matrix::from_f64_rows(rows).expect("rectangular literal")
}

fn v<T: Real>(xs: &[f64]) -> Vec<T> {
    xs.iter().map(|&x| T::lit(x)).collect()
}

/// Two agents with two variables each, quadratic local costs, two coupled
/// linear constraints and unit boxes.
pub fn build_numerical_example<T: Real>() -> (ProblemSpec<T>, SolverParams<T>) {
    let unit = BoxSet::uniform(2, T::zero(), T::one()).expect("valid box");
    let agents = vec![
        AgentSpec {
            a_u: m(&[&[-1.0, 0.0], &[1.0, -0.5]]),
            a_g: m(&[&[1.0, 0.0], &[1.0, -1.0]]),
            local: LocalObjective::Quadratic {
                a_q: m(&[&[1.0, 0.0], &[1.0, 1.0]]),
                a_l: v(&[1.0, 1.0]),
                c_t: T::one(),
            },
            bounds: unit.clone(),
        },
        AgentSpec {
            a_u: m(&[&[0.0, -2.0], &[0.0, -10.0]]),
            a_g: m(&[&[0.0, 1.0], &[-1.0, -1.0]]),
            local: LocalObjective::Quadratic {
                a_q: m(&[&[0.0, 1.0], &[1.0, 1.0]]),
                a_l: v(&[1.0, 0.0]),
                c_t: T::zero(),
            },
            bounds: unit,
        },
    ];
    let spec = ProblemSpec::new(agents, v(&[1.0, 1.0]), v(&[-1.0, 1.0]), T::one()).expect("valid instance");
    let params = SolverParams::uniform(2, T::lit(5e-3), T::lit(2.0), T::lit(0.98), T::lit(1e-4), 5000);
    (spec, params)
}
