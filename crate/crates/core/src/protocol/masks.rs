use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ProtocolError;
use crate::scalar::Real;

/// Target of the mask weights: `Σ r_i = 1` splits a nonzero offset across the
/// agents; `Σ r_i = 0` masks with a random carrier when the offset is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskMode {
    Affine,
    Zero,
}

impl MaskMode {
    pub fn target<T: Real>(self) -> T {
        match self {
            MaskMode::Affine => T::one(),
            MaskMode::Zero => T::zero(),
        }
    }

    /// `Zero` exactly when the offset vector vanishes.
    pub fn for_offset<T: Real>(offset: &[T]) -> Self {
        if offset.iter().all(|v| v.is_zero()) {
            MaskMode::Zero
        } else {
            MaskMode::Affine
        }
    }
}

/// `n − 1` weights uniform on `[−1, 1]`, the last one closing the sum.
pub fn generate_masks<T: Real, R: Rng + ?Sized>(
    n: usize,
    mode: MaskMode,
    rng: &mut R,
) -> Result<Vec<T>, ProtocolError> {
    if n < 2 {
        return Err(ProtocolError::TooFewAgents(n));
    }
    let mut weights: Vec<T> = (0..n - 1).map(|_| T::lit(rng.gen_range(-1.0..=1.0))).collect();
    let partial: T = weights.iter().copied().sum();
    weights.push(mode.target::<T>() - partial);
    Ok(weights)
}

/// Mask weights of one iteration: `r` for the objective offset `c`, `s` for
/// the constraint offset `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSet<T> {
    pub r: Vec<T>,
    pub s: Vec<T>,
    pub objective_mode: MaskMode,
    pub constraint_mode: MaskMode,
    pub k: usize,
}

impl<T: Real> MaskSet<T> {
    pub fn generate<R: Rng + ?Sized>(
        n: usize,
        objective_mode: MaskMode,
        constraint_mode: MaskMode,
        k: usize,
        rng: &mut R,
    ) -> Result<Self, ProtocolError> {
        Ok(Self {
            r: generate_masks(n, objective_mode, rng)?,
            s: generate_masks(n, constraint_mode, rng)?,
            objective_mode,
            constraint_mode,
            k,
        })
    }
}
