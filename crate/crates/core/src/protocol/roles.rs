use rand::Rng;
use rand_chacha::ChaCha20Rng;

use super::masks::{MaskMode, MaskSet};
use super::message::{Message, Payload, Role};
use crate::crypto::{Ciphertext, CryptoContext, Evaluator};
use crate::error::{OptError, ProtocolError};
use crate::linalg::{add_into, dist2, scaled};
use crate::optcore::{dual_update, primal_subgradient_from_aggregate, primal_update, AgentSpec, Method, SolverParams};
use crate::scalar::Real;

/// The coordinator. Holds the offsets `c` and `d`, draws masks, and sums
/// ciphertexts; it never holds a decryption key.
#[derive(Debug, Clone)]
pub struct SystemOperator<T> {
    n: usize,
    c: Vec<T>,
    d: Vec<T>,
    objective_mode: MaskMode,
    constraint_mode: MaskMode,
    evaluator: Evaluator,
    rng: ChaCha20Rng,
}

impl<T: Real> SystemOperator<T> {
    pub fn new(
        n: usize,
        c: Vec<T>,
        d: Vec<T>,
        modes: (MaskMode, MaskMode),
        evaluator: Evaluator,
        rng: ChaCha20Rng,
    ) -> Result<Self, ProtocolError> {
        if n < 2 {
            return Err(ProtocolError::TooFewAgents(n));
        }
        for (mode, offset, name) in [(modes.0, &c, "c"), (modes.1, &d, "d")] {
            if mode == MaskMode::Zero && offset.iter().any(|v| !v.is_zero()) {
                return Err(ProtocolError::InvalidConfig(format!(
                    "zero-sum masks would drop the nonzero offset {name}"
                )));
            }
        }
        Ok(Self {
            n,
            c,
            d,
            objective_mode: modes.0,
            constraint_mode: modes.1,
            evaluator,
            rng,
        })
    }

    pub fn generate_masks(&mut self, k: usize) -> Result<MaskSet<T>, ProtocolError> {
        MaskSet::generate(self.n, self.objective_mode, self.constraint_mode, k, &mut self.rng)
    }

    fn carrier(&mut self, mode: MaskMode, offset: &[T]) -> Vec<T> {
        match mode {
            MaskMode::Affine => offset.to_vec(),
            MaskMode::Zero => offset
                .iter()
                .map(|_| T::lit(self.rng.gen_range(-1.0..=1.0)))
                .collect(),
        }
    }

    /// Agent `i` receives exactly `r_i·c` and `s_i·d`. In zero-sum mode a fresh
    /// random carrier stands in for the vanishing offset.
    pub fn distribute_masks(&mut self, masks: &MaskSet<T>) -> Vec<Message<T>> {
        let c = self.c.clone();
        let d = self.d.clone();
        let c_carrier = self.carrier(masks.objective_mode, &c);
        let d_carrier = self.carrier(masks.constraint_mode, &d);
        (0..self.n)
            .map(|i| Message {
                k: masks.k,
                sender: Role::SystemOperator,
                receiver: Role::Agent(i),
                payload: Payload::MaskShare {
                    objective: scaled(&c_carrier, masks.r[i]),
                    constraint: scaled(&d_carrier, masks.s[i]),
                },
            })
            .collect()
    }

    /// Sums one upload per agent in ciphertext space and addresses the result
    /// to every agent.
    pub fn aggregate(&self, k: usize, uploads: &[Message<T>]) -> Result<Vec<Message<T>>, ProtocolError> {
        let mut by_agent: Vec<Option<(&[Ciphertext], &[Ciphertext])>> = vec![None; self.n];
        for m in uploads {
            if let (Role::Agent(i), Payload::AgentUpload { objective, constraint }) = (m.sender, &m.payload) {
                if m.k == k && i < self.n {
                    by_agent[i] = Some((objective, constraint));
                }
            }
        }
        let mut parts = Vec::with_capacity(self.n);
        for (agent, slot) in by_agent.into_iter().enumerate() {
            parts.push(slot.ok_or(ProtocolError::MissingUpload { k, agent })?);
        }
        let objective = self.sum_columns(parts.iter().map(|p| p.0))?;
        let constraint = self.sum_columns(parts.iter().map(|p| p.1))?;
        Ok((0..self.n)
            .map(|i| Message {
                k,
                sender: Role::SystemOperator,
                receiver: Role::Agent(i),
                payload: Payload::AggregateBroadcast {
                    objective: objective.clone(),
                    constraint: constraint.clone(),
                },
            })
            .collect())
    }

    fn sum_columns<'a>(
        &self,
        rows: impl Iterator<Item = &'a [Ciphertext]>,
    ) -> Result<Vec<Ciphertext>, ProtocolError> {
        let rows: Vec<&[Ciphertext]> = rows.collect();
        let width = rows[0].len();
        if rows.iter().any(|r| r.len() != width) {
            return Err(ProtocolError::InvalidConfig("upload vectors differ in length".into()));
        }
        (0..width)
            .map(|j| Ok(self.evaluator.sum(rows.iter().map(|r| &r[j]))?))
            .collect()
    }
}

/// One participant. Holds its own coefficient slices, its local objective,
/// the shared key, and a replicated copy of the dual variable.
#[derive(Debug, Clone)]
pub struct Agent<T> {
    index: usize,
    n: usize,
    spec: AgentSpec<T>,
    rho: T,
    method: Method,
    params: SolverParams<T>,
    ctx: CryptoContext,
    b_max: T,
    rng: ChaCha20Rng,
    x: Vec<T>,
    lambda: Vec<T>,
}

impl<T: Real> Agent<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        index: usize,
        n: usize,
        spec: AgentSpec<T>,
        rho: T,
        method: Method,
        params: SolverParams<T>,
        ctx: CryptoContext,
        b_max: T,
        rng: ChaCha20Rng,
        x0: Vec<T>,
        lambda0: Vec<T>,
    ) -> Self {
        Self {
            index,
            n,
            spec,
            rho,
            method,
            params,
            ctx,
            b_max,
            rng,
            x: x0,
            lambda: lambda0,
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn lambda(&self) -> &[T] {
        &self.lambda
    }

    /// Encrypts `A_ui x_i + r_i c` and `A_gi x_i + s_i d`.
    pub fn upload(&mut self, share: &Message<T>) -> Result<Message<T>, ProtocolError> {
        let Payload::MaskShare { objective, constraint } = &share.payload else {
            return Err(ProtocolError::InvalidConfig(format!(
                "agent {} expected a mask share, got {}",
                self.index,
                share.kind().name()
            )));
        };
        let mut obj = self.spec.a_u.mul_vec(&self.x);
        add_into(&mut obj, objective);
        let mut con = self.spec.a_g.mul_vec(&self.x);
        add_into(&mut con, constraint);
        for &v in obj.iter().chain(&con) {
            if !(v.abs() <= self.b_max) {
                return Err(ProtocolError::MessageOverflow {
                    k: share.k,
                    agent: self.index,
                    value: v.as_f64(),
                    bound: self.b_max.as_f64(),
                });
            }
        }
        Ok(Message {
            k: share.k,
            sender: Role::Agent(self.index),
            receiver: Role::SystemOperator,
            payload: Payload::AgentUpload {
                objective: self.ctx.encrypt_vector(&obj, &mut self.rng)?,
                constraint: self.ctx.encrypt_vector(&con, &mut self.rng)?,
            },
        })
    }

    fn decrypt_checked(&self, k: usize, cts: &[Ciphertext]) -> Result<Vec<T>, ProtocolError> {
        let values: Vec<T> = self.ctx.decrypt_vector(cts)?;
        let bound = self.b_max * T::from_usize(self.n).expect("agent count fits");
        if values.iter().any(|v| !(v.abs() <= bound)) {
            return Err(ProtocolError::KeyMismatch { k, agent: self.index });
        }
        Ok(values)
    }

    /// Decrypts the aggregates and takes one primal-dual step. Returns the
    /// squared primal movement and the dual movement, from which the stopping
    /// error is assembled.
    pub fn apply_update(&mut self, broadcast: &Message<T>) -> Result<(T, T), ProtocolError> {
        let Payload::AggregateBroadcast { objective, constraint } = &broadcast.payload else {
            return Err(ProtocolError::InvalidConfig(format!(
                "agent {} expected an aggregate broadcast, got {}",
                self.index,
                broadcast.kind().name()
            )));
        };
        let aggregate = self.decrypt_checked(broadcast.k, objective)?;
        let dual_grad = self.decrypt_checked(broadcast.k, constraint)?;
        let grad = primal_subgradient_from_aggregate(
            self.index,
            &self.spec,
            self.rho,
            &self.x,
            &aggregate,
            &self.lambda,
        )?;
        let x_next = primal_update(self.method, &self.params, self.index, &self.x, &grad, &self.spec.bounds);
        let lambda_next = dual_update(self.method, &self.params, &self.lambda, &dual_grad);
        if x_next.iter().chain(&lambda_next).any(|v| !v.is_finite()) {
            return Err(OptError::Divergence { k: broadcast.k + 1 }.into());
        }
        let dx = dist2(&self.x, &x_next);
        let dl = dist2(&self.lambda, &lambda_next);
        self.x = x_next;
        self.lambda = lambda_next;
        Ok((dx * dx, dl))
    }
}
