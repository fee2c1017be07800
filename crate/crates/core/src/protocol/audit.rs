use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::message::{MessageKind, Observer, Payload, Role, Transcript};
use crate::crypto::CryptoContext;
use crate::error::ProtocolError;
use crate::optcore::{PrimalDualState, ProblemSpec};
use crate::scalar::Real;

/// Plaintext facts the audit checks the transcript against. `states[k]` is
/// the primal-dual point the agents held when uploading in iteration `k`.
#[derive(Debug, Clone, Copy)]
pub struct GroundTruth<'a, T> {
    pub spec: &'a ProblemSpec<T>,
    pub states: &'a [PrimalDualState<T>],
}

/// An iteration in which an agent's mask share was too small to hide anything.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegenerateMask {
    pub k: usize,
    pub agent: usize,
    pub constraint: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub messages: usize,
    pub ciphertexts: usize,
    pub peer_views_checked: usize,
    pub so_view_messages: usize,
    /// Ciphertexts whose raw integer already lies in the plausible plaintext range.
    pub eavesdropper_hits: usize,
    /// Mask-degenerate iterations; reported, not failed.
    pub degenerate: Vec<DegenerateMask>,
}

/// Largest tolerated fraction of ciphertexts an eavesdropper could read as a
/// plausible plaintext without the key.
pub const EAVESDROPPER_HIT_RATE: f64 = 1e-6;

fn regression(msg: String) -> ProtocolError {
    ProtocolError::SecurityRegression(msg)
}

fn max_abs_diff<T: Real>(a: &[T], b: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs().as_f64())
        .fold(0.0, f64::max)
}

fn max_abs<T: Real>(a: &[T]) -> f64 {
    a.iter().map(|v| v.abs().as_f64()).fold(0.0, f64::max)
}

/// Replays a transcript from the point of view of each adversary class.
///
/// Fails when an agent message carries plaintext, when a ciphertext is the
/// bare encoding of a decision variable, when a curious agent's decryption of
/// a peer upload is not offset from the peer's true message by that peer's
/// mask share, when the SO sees anything but its own shares and ciphertexts,
/// or when raw ciphertexts fall into the plausible plaintext range more often
/// than [`EAVESDROPPER_HIT_RATE`].
pub fn adversary_audit<T: Real>(
    transcript: &Transcript<T>,
    ctx: &CryptoContext,
    b_max: T,
    truth: GroundTruth<'_, T>,
) -> Result<AuditReport, ProtocolError> {
    let spec = truth.spec;
    let n = spec.n();
    let codec = ctx.codec();
    let tol = 0.5 * codec.resolution() * (1.0 + 1e-9) + 1e-12;
    let mut report = AuditReport {
        messages: transcript.len(),
        ..Default::default()
    };

    let state_at = |k: usize| {
        truth
            .states
            .get(k)
            .ok_or_else(|| regression(format!("no ground-truth state for iteration {k}")))
    };

    // (a) message schema: agents only ever emit ciphertexts, and no
    // ciphertext is the bare residue of a decision variable
    let mut shares: HashMap<(usize, usize), (&[T], &[T])> = HashMap::new();
    for m in transcript.messages() {
        match (&m.payload, m.sender) {
            (Payload::MaskShare { objective, constraint }, Role::SystemOperator) => {
                if let Role::Agent(i) = m.receiver {
                    shares.insert((m.k, i), (objective, constraint));
                }
                let state = state_at(m.k)?;
                for &v in objective.iter().chain(constraint) {
                    if !v.is_zero() && state.x.iter().flatten().any(|&xi| xi == v) {
                        return Err(regression(format!(
                            "k = {}: mask share to {} repeats a decision variable",
                            m.k, m.receiver
                        )));
                    }
                }
            }
            (Payload::MaskShare { .. }, sender) => {
                return Err(regression(format!("k = {}: plaintext share sent by {sender}", m.k)));
            }
            (Payload::AgentUpload { objective, constraint }, Role::Agent(i)) => {
                let x_i = &state_at(m.k)?.x[i];
                let encoded: Vec<BigUint> = x_i
                    .iter()
                    .map(|&v| codec.encode(v))
                    .collect::<Result<_, _>>()?;
                for ct in objective.iter().chain(constraint) {
                    if ct.scheme() != ctx.kind() {
                        return Err(regression(format!("k = {}: foreign scheme from agent {i}", m.k)));
                    }
                    if encoded.iter().any(|z| z == ct.value()) {
                        return Err(regression(format!(
                            "k = {}: agent {i} upload carries x_{i} unencrypted",
                            m.k
                        )));
                    }
                }
            }
            (Payload::AgentUpload { .. }, Role::SystemOperator) => {
                return Err(regression(format!("k = {}: upload attributed to the SO", m.k)));
            }
            (Payload::AggregateBroadcast { .. }, Role::SystemOperator) => {}
            (Payload::AggregateBroadcast { .. }, sender) => {
                return Err(regression(format!("k = {}: broadcast sent by {sender}", m.k)));
            }
        }
    }

    // (b) curious agents hold the key and wiretap peer uploads
    for observer in 0..n {
        let tap = transcript.tap(Observer::CuriousAgent(observer));
        for m in &tap.messages {
            let (Role::Agent(i), Payload::AgentUpload { objective, constraint }) = (m.sender, &m.payload) else {
                continue;
            };
            // each upload is checked once, through the next agent's eyes
            if i == observer || observer != (i + 1) % n {
                continue;
            }
            let x_i = &state_at(m.k)?.x[i];
            let agent = spec.agent(i);
            let (obj_share, con_share) = shares
                .get(&(m.k, i))
                .copied()
                .ok_or_else(|| regression(format!("k = {}: upload from agent {i} without a mask share", m.k)))?;
            for (is_constraint, cts, true_msg, share) in [
                (false, objective, agent.a_u.mul_vec(x_i), obj_share),
                (true, constraint, agent.a_g.mul_vec(x_i), con_share),
            ] {
                let seen: Vec<T> = ctx.decrypt_vector(cts)?;
                let offset: Vec<T> = seen.iter().zip(&true_msg).map(|(&a, &b)| a - b).collect();
                if max_abs_diff(&offset, share) > tol {
                    return Err(regression(format!(
                        "k = {}: agent {observer}'s view of agent {i} is not offset by the mask share",
                        m.k
                    )));
                }
                if max_abs(share) > tol {
                    if max_abs(&offset) == 0.0 {
                        return Err(regression(format!(
                            "k = {}: agent {observer} recovered agent {i}'s true message",
                            m.k
                        )));
                    }
                } else {
                    report.degenerate.push(DegenerateMask {
                        k: m.k,
                        agent: i,
                        constraint: is_constraint,
                    });
                }
            }
            report.peer_views_checked += 1;
        }
    }

    // (c) the SO only sees what it generated and what it must aggregate
    let so_tap = transcript.tap(Observer::SystemOperator);
    for m in &so_tap.messages {
        let ok = match m.kind() {
            MessageKind::MaskShare | MessageKind::AggregateBroadcast => m.sender == Role::SystemOperator,
            MessageKind::AgentUpload => m.receiver == Role::SystemOperator,
        };
        if !ok {
            return Err(regression(format!(
                "k = {}: SO observed {} from {} to {}",
                m.k,
                m.kind().name(),
                m.sender,
                m.receiver
            )));
        }
    }
    report.so_view_messages = so_tap.messages.len();

    // (d) without the key, raw ciphertexts should not look like plaintexts
    let eve = transcript.tap(Observer::ExternalEavesdropper);
    let plausible = BigUint::from(10u32).pow(codec.sigma())
        * BigUint::from(b_max.as_f64().ceil().to_u128().unwrap_or(u128::MAX))
        * n;
    for m in &eve.messages {
        if let Some((a, b)) = m.payload.ciphertexts() {
            for ct in a.iter().chain(b) {
                report.ciphertexts += 1;
                if ct.value() <= &plausible {
                    report.eavesdropper_hits += 1;
                }
            }
        }
    }
    if report.ciphertexts > 0
        && (report.eavesdropper_hits as f64) > EAVESDROPPER_HIT_RATE * report.ciphertexts as f64
    {
        return Err(regression(format!(
            "{} of {} ciphertexts readable as plaintexts without the key",
            report.eavesdropper_hits, report.ciphertexts
        )));
    }

    Ok(report)
}
