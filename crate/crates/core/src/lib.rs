//! Privacy-preserving decentralized optimization.
//!
//! `n` agents and a system operator solve a coupled convex program with
//! primal-dual subgradient iterations. Every quantity that aggregates more than
//! one agent's decision variable travels as a masked, additively homomorphic
//! ciphertext; only the agents can decrypt the aggregate, and no single
//! message reveals an individual decision variable.
//!
//! * [`optcore`]: problem model, subgradients, SPDS / RPDS, plaintext baseline
//! * [`crypto`]: SingleMod and Paillier schemes, fixed-point codec
//! * [`protocol`]: the system-operator / agent message exchange and audits
//! * [`experiments`]: benchmark problems, metrics, paired runs
//!
//! The numerical modules are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

pub mod crypto;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod optcore;
pub mod protocol;
mod scalar;

pub use error::{CryptoError, Error, OptError, ProtocolError, Result};
pub use scalar::Real;

pub type Matrix = linalg::Matrix<f64>;
pub type ProblemSpec = optcore::ProblemSpec<f64>;
pub type AgentSpec = optcore::AgentSpec<f64>;
pub type BoxSet = optcore::BoxSet<f64>;
pub type LocalObjective = optcore::LocalObjective<f64>;
pub type SolverParams = optcore::SolverParams<f64>;
pub type PrimalDualState = optcore::PrimalDualState<f64>;
pub type Trajectory = optcore::Trajectory<f64>;
pub type ProtocolConfig = protocol::ProtocolConfig<f64>;
pub type ProtocolRun = protocol::ProtocolRun<f64>;
pub type IterationRecord = experiments::IterationRecord<f64>;
