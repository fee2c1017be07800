use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::One;
use rand::Rng;

use super::ciphertext::{Ciphertext, Evaluator, SchemeKind};
use super::prime::{lcm, random_prime};
use crate::error::CryptoError;

pub const PAILLIER_MIN_BITS: u64 = 512;

/// Public part of a Paillier key with the standard generator `g = n + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaillierPublicKey {
    n: BigUint,
    n_squared: BigUint,
    g: BigUint,
}

impl PaillierPublicKey {
    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn n_squared(&self) -> &BigUint {
        &self.n_squared
    }

    pub fn evaluator(&self) -> Evaluator {
        Evaluator::Paillier {
            n_squared: self.n_squared.clone(),
        }
    }

    /// `c = g^z · r^n mod n²` with `r` uniform on the units of `Z_n`.
    pub fn encrypt<R: Rng + ?Sized>(&self, z: &BigUint, rng: &mut R) -> Result<Ciphertext, CryptoError> {
        if z >= &self.n {
            return Err(CryptoError::ResidueOutOfRange);
        }
        let r = self.randomizer(rng);
        let rn = r.modpow(&self.n, &self.n_squared);
        Ok(self.finish(z, rn))
    }

    fn randomizer<R: Rng + ?Sized>(&self, rng: &mut R) -> BigUint {
        loop {
            let r = rng.gen_biguint_range(&BigUint::one(), &self.n);
            if r.gcd(&self.n).is_one() {
                return r;
            }
        }
    }

    fn finish(&self, z: &BigUint, rn: BigUint) -> Ciphertext {
        // g^z = (1 + n)^z = 1 + z·n  (mod n²)
        let gz = (z * &self.n + 1u32) % &self.n_squared;
        Ciphertext::new((gz * rn) % &self.n_squared, SchemeKind::Paillier)
    }
}

/// Paillier key pair. Decryption uses the CRT over `p` and `q`; the textbook
/// `λ, μ` route is kept for cross-checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaillierKeyPair {
    public: PaillierPublicKey,
    p: BigUint,
    q: BigUint,
    lambda: BigUint,
    mu: BigUint,
    p_squared: BigUint,
    q_squared: BigUint,
    hp: BigUint,
    hq: BigUint,
    q_inv_p: BigUint,
    // n reduced modulo the group orders p(p-1), q(q-1) and (q²)⁻¹ mod p²,
    // for computing r^n mod n² by CRT.
    n_mod_p: BigUint,
    n_mod_q: BigUint,
    q_sq_inv: BigUint,
}

impl PaillierKeyPair {
    /// `bits` is the size of the modulus `n`.
    pub fn generate<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Result<Self, CryptoError> {
        if bits < PAILLIER_MIN_BITS {
            return Err(CryptoError::KeyTooSmall {
                bits,
                min: PAILLIER_MIN_BITS,
            });
        }
        let half = bits / 2;
        loop {
            let p = random_prime(half, true, rng);
            let q = random_prime(bits - half, true, rng);
            if p == q {
                continue;
            }
            if let Ok(kp) = Self::from_primes(p, q) {
                return Ok(kp);
            }
        }
    }

    pub fn from_primes(p: BigUint, q: BigUint) -> Result<Self, CryptoError> {
        let n = &p * &q;
        if n.bits() < PAILLIER_MIN_BITS {
            return Err(CryptoError::KeyTooSmall {
                bits: n.bits(),
                min: PAILLIER_MIN_BITS,
            });
        }
        let p1 = &p - 1u32;
        let q1 = &q - 1u32;
        if !n.gcd(&(&p1 * &q1)).is_one() {
            return Err(CryptoError::InvalidKey("gcd(n, φ(n)) != 1".into()));
        }
        let n_squared = &n * &n;
        let g = &n + 1u32;
        let lambda = lcm(&p1, &q1);
        let mu = lambda
            .modinv(&n)
            .ok_or_else(|| CryptoError::InvalidKey("λ not invertible mod n".into()))?;
        let p_squared = &p * &p;
        let q_squared = &q * &q;
        let hp = crt_h(&g, &p, &p_squared)?;
        let hq = crt_h(&g, &q, &q_squared)?;
        let q_inv_p = q
            .modinv(&p)
            .ok_or_else(|| CryptoError::InvalidKey("q not invertible mod p".into()))?;
        let n_mod_p = &n % (&p * &p1);
        let n_mod_q = &n % (&q * &q1);
        let q_sq_inv = q_squared
            .modinv(&p_squared)
            .ok_or_else(|| CryptoError::InvalidKey("q² not invertible mod p²".into()))?;
        Ok(Self {
            public: PaillierPublicKey { n, n_squared, g },
            p,
            q,
            lambda,
            mu,
            p_squared,
            q_squared,
            hp,
            hq,
            q_inv_p,
            n_mod_p,
            n_mod_q,
            q_sq_inv,
        })
    }

    pub fn public(&self) -> &PaillierPublicKey {
        &self.public
    }

    pub fn primes(&self) -> (&BigUint, &BigUint) {
        (&self.p, &self.q)
    }

    /// Same ciphertext as [`PaillierPublicKey::encrypt`] for the same
    /// randomness, with `r^n` computed modulo `p²` and `q²` separately.
    pub fn encrypt<R: Rng + ?Sized>(&self, z: &BigUint, rng: &mut R) -> Result<Ciphertext, CryptoError> {
        if z >= &self.public.n {
            return Err(CryptoError::ResidueOutOfRange);
        }
        let r = self.public.randomizer(rng);
        let a = r.modpow(&self.n_mod_p, &self.p_squared);
        let b = r.modpow(&self.n_mod_q, &self.q_squared);
        let diff = (&a + &self.p_squared - (&b % &self.p_squared)) % &self.p_squared;
        let rn = b + ((diff * &self.q_sq_inv) % &self.p_squared) * &self.q_squared;
        Ok(self.public.finish(z, rn))
    }

    fn check(&self, ct: &Ciphertext) -> Result<(), CryptoError> {
        if ct.scheme() != SchemeKind::Paillier {
            return Err(CryptoError::SchemeMismatch {
                expected: SchemeKind::Paillier.name(),
                found: ct.scheme().name(),
            });
        }
        if ct.value() >= &self.public.n_squared {
            return Err(CryptoError::ResidueOutOfRange);
        }
        Ok(())
    }

    pub fn decrypt(&self, ct: &Ciphertext) -> Result<BigUint, CryptoError> {
        self.check(ct)?;
        let c = ct.value();
        let mp = (l_function(&c.modpow(&(&self.p - 1u32), &self.p_squared), &self.p) * &self.hp) % &self.p;
        let mq = (l_function(&c.modpow(&(&self.q - 1u32), &self.q_squared), &self.q) * &self.hq) % &self.q;
        // Garner: m = mq + q·((mp − mq)·q⁻¹ mod p)
        let diff = (&mp + &self.p - (&mq % &self.p)) % &self.p;
        let h = (diff * &self.q_inv_p) % &self.p;
        Ok(mq + h * &self.q)
    }

    /// Textbook decryption `L(c^λ mod n²)·μ mod n`.
    pub fn decrypt_textbook(&self, ct: &Ciphertext) -> Result<BigUint, CryptoError> {
        self.check(ct)?;
        let n = &self.public.n;
        let u = ct.value().modpow(&self.lambda, &self.public.n_squared);
        Ok((l_function(&u, n) * &self.mu) % n)
    }
}

fn l_function(u: &BigUint, n: &BigUint) -> BigUint {
    (u - 1u32) / n
}

fn crt_h(g: &BigUint, p: &BigUint, p_squared: &BigUint) -> Result<BigUint, CryptoError> {
    let lp = l_function(&g.modpow(&(p - 1u32), p_squared), p) % p;
    lp.modinv(p)
        .ok_or_else(|| CryptoError::InvalidKey("CRT precomputation failed".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn undersized_keys_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert!(matches!(
            PaillierKeyPair::generate(256, &mut rng),
            Err(CryptoError::KeyTooSmall { bits: 256, .. })
        ));
    }

    #[test]
    fn crt_and_textbook_decryption_agree() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let kp = PaillierKeyPair::generate(512, &mut rng).unwrap();
        assert_eq!(kp.public().n().bits(), 512);
        for _ in 0..20 {
            let z = rng.gen_biguint_below(kp.public().n());
            let ct = kp.encrypt(&z, &mut rng).unwrap();
            assert_eq!(kp.decrypt(&ct).unwrap(), z);
            assert_eq!(kp.decrypt_textbook(&ct).unwrap(), z);
        }
    }

    #[test]
    fn crt_encryption_matches_public_encryption() {
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let kp = PaillierKeyPair::generate(512, &mut rng).unwrap();
        for seed in 0..20 {
            let z = rng.gen_biguint_below(kp.public().n());
            let fast = kp.encrypt(&z, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
            let slow = kp.public().encrypt(&z, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn multiplication_unsupported() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let kp = PaillierKeyPair::generate(512, &mut rng).unwrap();
        let a = kp.encrypt(&BigUint::from(3u32), &mut rng).unwrap();
        let b = kp.encrypt(&BigUint::from(4u32), &mut rng).unwrap();
        let ev = kp.public().evaluator();
        assert!(matches!(ev.mul(&a, &b), Err(CryptoError::Unsupported(_))));
        assert_eq!(kp.decrypt(&ev.add(&a, &b).unwrap()).unwrap(), BigUint::from(7u32));
    }
}
