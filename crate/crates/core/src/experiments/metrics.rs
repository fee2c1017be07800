use crate::error::Error;
use crate::linalg::dist2;
use crate::optcore::PrimalDualState;
use crate::scalar::Real;

fn agent_distance_sum<T: Real>(a: &[Vec<T>], b: &[Vec<T>]) -> T {
    a.iter().zip(b).map(|(ai, bi)| dist2(ai, bi)).sum()
}

/// `P_e = Σ_i ‖x̂_i − x_i‖₂` between an encrypted iterate and its plaintext twin.
pub fn encryption_error<T: Real>(encrypted: &[Vec<T>], plaintext: &[Vec<T>]) -> Result<T, Error> {
    if encrypted.len() != plaintext.len()
        || encrypted.iter().zip(plaintext).any(|(a, b)| a.len() != b.len())
    {
        return Err(Error::Experiment("encrypted and plaintext iterates differ in shape".into()));
    }
    Ok(agent_distance_sum(encrypted, plaintext))
}

/// `P_e^k` for every `k` of two paired trajectories.
pub fn encryption_errors<T: Real>(
    encrypted: &[PrimalDualState<T>],
    plaintext: &[PrimalDualState<T>],
) -> Result<Vec<T>, Error> {
    if encrypted.len() != plaintext.len() {
        return Err(Error::Experiment(format!(
            "trajectory lengths differ: {} encrypted vs {} plaintext",
            encrypted.len(),
            plaintext.len()
        )));
    }
    encrypted
        .iter()
        .zip(plaintext)
        .map(|(e, p)| encryption_error(&e.x, &p.x))
        .collect()
}

/// `G_e = Σ_i ‖x_i − x_i*‖₂`
pub fn optimality_gap<T: Real>(x: &[Vec<T>], x_star: &[Vec<T>]) -> T {
    agent_distance_sum(x, x_star)
}
