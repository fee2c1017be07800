use num_bigint::{BigUint, RandBigInt};
use num_traits::One;
use rand::Rng;

use super::ciphertext::{Ciphertext, SchemeKind};
use super::prime::{is_probable_prime, random_prime, MR_ROUNDS};
use crate::error::CryptoError;

pub const SINGLEMOD_MIN_BITS: u64 = 32;
pub const DEFAULT_M_BITS: u32 = 40;

/// Shared private key of the SingleMod scheme: a prime `w` and the bit bound
/// on the per-encryption random multiplier `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleModKey {
    w: BigUint,
    m_bits: u32,
}

impl SingleModKey {
    /// Draws a random `bits`-bit prime. Deterministic for a seeded `rng`.
    pub fn generate<R: Rng + ?Sized>(bits: u64, m_bits: u32, rng: &mut R) -> Result<Self, CryptoError> {
        if bits < SINGLEMOD_MIN_BITS {
            return Err(CryptoError::KeyTooSmall {
                bits,
                min: SINGLEMOD_MIN_BITS,
            });
        }
        check_m_bits(m_bits)?;
        Ok(Self {
            w: random_prime(bits, false, rng),
            m_bits,
        })
    }

    /// Wraps an existing modulus, verifying primality.
    pub fn from_modulus<R: Rng + ?Sized>(w: BigUint, m_bits: u32, rng: &mut R) -> Result<Self, CryptoError> {
        if w.bits() < SINGLEMOD_MIN_BITS {
            return Err(CryptoError::KeyTooSmall {
                bits: w.bits(),
                min: SINGLEMOD_MIN_BITS,
            });
        }
        check_m_bits(m_bits)?;
        if !is_probable_prime(&w, MR_ROUNDS, rng) {
            return Err(CryptoError::InvalidKey("SingleMod modulus is not prime".into()));
        }
        Ok(Self { w, m_bits })
    }

    pub fn modulus(&self) -> &BigUint {
        &self.w
    }

    pub fn m_bits(&self) -> u32 {
        self.m_bits
    }

    /// `e = m·w + z` with `m` uniform on `[1, 2^m_bits]`.
    pub fn encrypt<R: Rng + ?Sized>(&self, z: &BigUint, rng: &mut R) -> Result<Ciphertext, CryptoError> {
        if z >= &self.w {
            return Err(CryptoError::ResidueOutOfRange);
        }
        let upper = (BigUint::one() << self.m_bits) + 1u32;
        let m = rng.gen_biguint_range(&BigUint::one(), &upper);
        Ok(Ciphertext::new(m * &self.w + z, SchemeKind::SingleMod))
    }

    pub fn decrypt(&self, ct: &Ciphertext) -> Result<BigUint, CryptoError> {
        if ct.scheme() != SchemeKind::SingleMod {
            return Err(CryptoError::SchemeMismatch {
                expected: SchemeKind::SingleMod.name(),
                found: ct.scheme().name(),
            });
        }
        Ok(ct.value() % &self.w)
    }
}

fn check_m_bits(m_bits: u32) -> Result<(), CryptoError> {
    if m_bits == 0 || m_bits > 4096 {
        return Err(CryptoError::InvalidKey(format!("m_bits {m_bits} outside [1, 4096]")));
    }
    Ok(())
}
