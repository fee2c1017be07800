use num_bigint::BigUint;
use rand::Rng;

use super::ciphertext::{Ciphertext, Evaluator, SchemeKind};
use super::codec::FixedPointCodec;
use super::paillier::PaillierKeyPair;
use super::singlemod::SingleModKey;
use crate::error::CryptoError;
use crate::scalar::Real;

/// Secret key material for one of the supported schemes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeKey {
    SingleMod(SingleModKey),
    Paillier(PaillierKeyPair),
}

impl SchemeKey {
    pub fn kind(&self) -> SchemeKind {
        match self {
            SchemeKey::SingleMod(_) => SchemeKind::SingleMod,
            SchemeKey::Paillier(_) => SchemeKind::Paillier,
        }
    }

    /// Plaintext modulus: `w` for SingleMod, `n` for Paillier.
    pub fn plaintext_modulus(&self) -> &BigUint {
        match self {
            SchemeKey::SingleMod(k) => k.modulus(),
            SchemeKey::Paillier(k) => k.public().n(),
        }
    }

    pub fn evaluator(&self) -> Evaluator {
        match self {
            SchemeKey::SingleMod(_) => Evaluator::SingleMod,
            SchemeKey::Paillier(k) => k.public().evaluator(),
        }
    }

    pub fn encrypt<R: Rng + ?Sized>(&self, z: &BigUint, rng: &mut R) -> Result<Ciphertext, CryptoError> {
        match self {
            SchemeKey::SingleMod(k) => k.encrypt(z, rng),
            SchemeKey::Paillier(k) => k.encrypt(z, rng),
        }
    }

    pub fn decrypt(&self, ct: &Ciphertext) -> Result<BigUint, CryptoError> {
        match self {
            SchemeKey::SingleMod(k) => k.decrypt(ct),
            SchemeKey::Paillier(k) => k.decrypt(ct),
        }
    }
}

/// Key plus fixed-point codec: everything an agent needs to move real
/// vectors in and out of ciphertext space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CryptoContext {
    key: SchemeKey,
    codec: FixedPointCodec,
}

impl CryptoContext {
    pub fn new(key: SchemeKey, sigma: u32) -> Result<Self, CryptoError> {
        let codec = FixedPointCodec::new(sigma, key.plaintext_modulus().clone())?;
        Ok(Self { key, codec })
    }

    pub fn key(&self) -> &SchemeKey {
        &self.key
    }

    pub fn codec(&self) -> &FixedPointCodec {
        &self.codec
    }

    pub fn kind(&self) -> SchemeKind {
        self.key.kind()
    }

    pub fn evaluator(&self) -> Evaluator {
        self.key.evaluator()
    }

    pub fn encrypt_real<T: Real, R: Rng + ?Sized>(&self, r: T, rng: &mut R) -> Result<Ciphertext, CryptoError> {
        let z = self.codec.encode(r)?;
        self.key.encrypt(&z, rng)
    }

    pub fn decrypt_real<T: Real>(&self, ct: &Ciphertext) -> Result<T, CryptoError> {
        let z = self.key.decrypt(ct)?;
        self.codec.decode_scaled(&z, ct.scale())
    }

    pub fn encrypt_vector<T: Real, R: Rng + ?Sized>(
        &self,
        v: &[T],
        rng: &mut R,
    ) -> Result<Vec<Ciphertext>, CryptoError> {
        v.iter().map(|&r| self.encrypt_real(r, rng)).collect()
    }

    pub fn decrypt_vector<T: Real>(&self, cts: &[Ciphertext]) -> Result<Vec<T>, CryptoError> {
        cts.iter().map(|ct| self.decrypt_real(ct)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn ctx(sigma: u32) -> (CryptoContext, ChaCha20Rng) {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let key = SingleModKey::generate(51, 40, &mut rng).unwrap();
        (CryptoContext::new(SchemeKey::SingleMod(key), sigma).unwrap(), rng)
    }

    #[test]
    fn zero_vector_round_trip() {
        let (ctx, mut rng) = ctx(3);
        let cts = ctx.encrypt_vector(&[0.0f64; 4], &mut rng).unwrap();
        assert_eq!(ctx.decrypt_vector::<f64>(&cts).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn vector_round_trip_within_half_quantum() {
        let (ctx, mut rng) = ctx(3);
        let v = [0.123456, -7.77777, 3.0005, -0.0004999];
        let back: Vec<f64> = ctx.decrypt_vector(&ctx.encrypt_vector(&v, &mut rng).unwrap()).unwrap();
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() <= 0.5e-3 + 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn overflowing_component_rejected() {
        let (ctx, mut rng) = ctx(3);
        let too_big = ctx.codec().max_magnitude() * 2.0;
        assert!(matches!(
            ctx.encrypt_vector(&[1.0, too_big], &mut rng),
            Err(CryptoError::Overflow { .. })
        ));
    }

    #[test]
    fn product_decodes_at_double_scale() {
        let (ctx, mut rng) = ctx(3);
        let a = ctx.encrypt_real(1.5f64, &mut rng).unwrap();
        let b = ctx.encrypt_real(-2.25f64, &mut rng).unwrap();
        let prod = ctx.evaluator().mul(&a, &b).unwrap();
        assert_eq!(prod.scale(), 2);
        assert_eq!(ctx.decrypt_real::<f64>(&prod).unwrap(), -3.375);
        assert!(matches!(
            ctx.evaluator().add(&prod, &a),
            Err(CryptoError::ScaleMismatch { left: 2, right: 1 })
        ));
    }

    #[test]
    fn scheme_mismatch_detected() {
        let (ctx, mut rng) = ctx(3);
        let kp = PaillierKeyPair::generate(512, &mut rng).unwrap();
        let foreign = kp.encrypt(&BigUint::from(1u32), &mut rng).unwrap();
        assert!(matches!(
            ctx.decrypt_real::<f64>(&foreign),
            Err(CryptoError::SchemeMismatch { .. })
        ));
    }
}
