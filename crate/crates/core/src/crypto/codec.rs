use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{FromPrimitive, ToPrimitive, Zero};

use crate::error::CryptoError;
use crate::scalar::Real;

/// Largest σ for which `10^σ` is exactly representable as an `f64`.
pub const MAX_SIGMA: u32 = 22;

/// Signed fixed-point map between reals and residues modulo `modulus`.
///
/// A real `r` becomes `round(10^σ r) mod modulus`; residues in the upper half
/// of `[0, modulus)` decode to negative values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedPointCodec {
    sigma: u32,
    modulus: BigUint,
    half: BigUint,
}

impl FixedPointCodec {
    pub fn new(sigma: u32, modulus: BigUint) -> Result<Self, CryptoError> {
        if sigma > MAX_SIGMA {
            return Err(CryptoError::InvalidCodec(format!(
                "sigma {sigma} exceeds maximum {MAX_SIGMA}"
            )));
        }
        if modulus.is_even() {
            return Err(CryptoError::InvalidCodec("modulus must be odd".into()));
        }
        let scale = BigUint::from(10u32).pow(sigma);
        if modulus <= scale * 2u32 {
            return Err(CryptoError::InvalidCodec(format!(
                "modulus must exceed 2·10^{sigma}"
            )));
        }
        let half = (&modulus - 1u32) >> 1;
        Ok(Self {
            sigma,
            modulus,
            half,
        })
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    /// `10^{-σ}`: the quantum of the encoding.
    pub fn resolution(&self) -> f64 {
        10f64.powi(-(self.sigma as i32))
    }

    /// Largest representable magnitude `(modulus − 1) / (2·10^σ)`.
    pub fn max_magnitude(&self) -> f64 {
        self.half.to_f64().unwrap_or(f64::INFINITY) / 10f64.powi(self.sigma as i32)
    }

    /// Rounds `10^σ r` half away from zero, as a signed integer.
    pub fn scale_round<T: Real>(&self, r: T) -> Result<BigInt, CryptoError> {
        let r = r.as_f64();
        let bound = self.max_magnitude();
        if !r.is_finite() {
            return Err(CryptoError::Overflow { value: r, bound });
        }
        let scaled = (r * 10f64.powi(self.sigma as i32)).round();
        let int = BigInt::from_f64(scaled).ok_or(CryptoError::Overflow { value: r, bound })?;
        if int.magnitude() > &self.half {
            return Err(CryptoError::Overflow { value: r, bound });
        }
        Ok(int)
    }

    pub fn encode<T: Real>(&self, r: T) -> Result<BigUint, CryptoError> {
        let int = self.scale_round(r)?;
        Ok(self.reduce(&int))
    }

    /// Maps a signed integer into `[0, modulus)`.
    pub fn reduce(&self, v: &BigInt) -> BigUint {
        let m = BigInt::from_biguint(Sign::Plus, self.modulus.clone());
        v.mod_floor(&m).to_biguint().expect("mod_floor is nonnegative")
    }

    /// Lifts a residue to its signed representative in `[−(w−1)/2, (w−1)/2]`.
    pub fn signed(&self, z: &BigUint) -> Result<BigInt, CryptoError> {
        if z >= &self.modulus {
            return Err(CryptoError::ResidueOutOfRange);
        }
        if z <= &self.half {
            Ok(BigInt::from_biguint(Sign::Plus, z.clone()))
        } else {
            Ok(BigInt::from_biguint(Sign::Plus, z.clone()) - BigInt::from_biguint(Sign::Plus, self.modulus.clone()))
        }
    }

    pub fn decode<T: Real>(&self, z: &BigUint) -> Result<T, CryptoError> {
        self.decode_scaled(z, 1)
    }

    /// Decodes a residue that carries `scale` factors of `10^σ`.
    pub fn decode_scaled<T: Real>(&self, z: &BigUint, scale: u32) -> Result<T, CryptoError> {
        let signed = self.signed(z)?;
        let int = if signed.is_zero() { 0.0 } else { signed.to_f64().unwrap_or(f64::NAN) };
        let value = int / 10f64.powi((self.sigma * scale) as i32);
        Ok(T::lit(value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codec(sigma: u32, w: u64) -> FixedPointCodec {
        FixedPointCodec::new(sigma, BigUint::from(w)).unwrap()
    }

    #[test]
    fn rounds_half_away_from_zero() {
        let c = codec(3, 1_000_000_007);
        assert_eq!(c.encode(1.2345f64).unwrap(), BigUint::from(1235u32));
        assert_eq!(c.scale_round(-1.2345f64).unwrap(), BigInt::from(-1235));
    }

    #[test]
    fn negative_uses_upper_residues() {
        let w = 1_000_000_000_000_037u64;
        let c = codec(3, w);
        assert_eq!(c.encode(-0.5f64).unwrap(), BigUint::from(w - 500));
    }

    #[test]
    fn sigma_zero_is_identity() {
        let c = codec(0, 101);
        assert_eq!(c.encode(7.0f64).unwrap(), BigUint::from(7u32));
    }

    #[test]
    fn decode_branches() {
        let c = codec(0, 101);
        assert_eq!(c.decode::<f64>(&BigUint::from(60u32)).unwrap(), -41.0);
        assert_eq!(c.decode::<f64>(&BigUint::from(50u32)).unwrap(), 50.0);
        // (w-1)/2 = 50 is the last positive residue, (w+1)/2 = 51 the first negative
        assert_eq!(c.decode::<f64>(&BigUint::from(51u32)).unwrap(), -50.0);
        assert!(c.decode::<f64>(&BigUint::from(101u32)).is_err());
    }

    #[test]
    fn out_of_range_rejected() {
        let c = codec(3, 1_000_003);
        assert!(c.encode(500.0f64).is_ok());
        assert!(matches!(c.encode(501.0f64), Err(CryptoError::Overflow { .. })));
        assert!(c.encode(f64::NAN).is_err());
    }

    #[test]
    fn invalid_modulus_rejected() {
        assert!(FixedPointCodec::new(3, BigUint::from(2000u32)).is_err());
        assert!(FixedPointCodec::new(3, BigUint::from(1999u32)).is_err());
        assert!(FixedPointCodec::new(3, BigUint::from(2001u32)).is_ok());
    }

    #[test]
    fn generic_over_f32() {
        let c = codec(2, 1_000_003);
        let z = c.encode(0.25f32).unwrap();
        assert_eq!(c.decode::<f32>(&z).unwrap(), 0.25f32);
    }
}
