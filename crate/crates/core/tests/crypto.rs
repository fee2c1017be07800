use num_bigint::{BigUint, RandBigInt};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use privopt::crypto::prime::{is_probable_prime, MR_ROUNDS};
use privopt::crypto::{
    cipher_add, cipher_mul, cipher_sum, Ciphertext, CryptoContext, FixedPointCodec, PaillierKeyPair, SchemeKey,
    SchemeKind, SingleModKey,
};
use privopt::CryptoError;

fn singlemod(seed: u64) -> SingleModKey {
    SingleModKey::generate(51, 40, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap()
}

#[test]
fn encode_rounds_half_away_from_zero() {
    let codec = FixedPointCodec::new(3, BigUint::from(1_000_003u32)).unwrap();
    assert_eq!(codec.encode(1.2345f64).unwrap(), BigUint::from(1235u32));
    assert_eq!(codec.encode(-1.2345f64).unwrap(), BigUint::from(1_000_003u32 - 1235));
    assert_eq!(codec.encode(0.0005f64).unwrap(), BigUint::from(1u32));
    assert_eq!(codec.encode(-0.0005f64).unwrap(), BigUint::from(1_000_002u32));
    assert_eq!(codec.encode(0.0f64).unwrap(), BigUint::from(0u32));
}

#[test]
fn decode_branch_boundary() {
    let w = 1_000_003u32;
    let codec = FixedPointCodec::new(3, BigUint::from(w)).unwrap();
    let lo = BigUint::from((w - 1) / 2);
    let hi = BigUint::from((w + 1) / 2);
    assert_eq!(codec.decode::<f64>(&lo).unwrap(), 500.001);
    assert_eq!(codec.decode::<f64>(&hi).unwrap(), -500.001);
    assert_eq!(codec.decode::<f64>(&BigUint::from(w - 1)).unwrap(), -0.001);
    assert!(matches!(
        codec.decode::<f64>(&BigUint::from(w)),
        Err(CryptoError::ResidueOutOfRange)
    ));
    assert_eq!(codec.max_magnitude(), 500.001);
    assert!(codec.encode(500.001f64).is_ok());
    assert!(matches!(codec.encode(500.002f64), Err(CryptoError::Overflow { .. })));
    assert!(matches!(codec.encode(f64::NAN), Err(CryptoError::Overflow { .. })));
}

#[test]
fn codec_rejects_bad_parameters() {
    assert!(FixedPointCodec::new(3, BigUint::from(1_000_004u32)).is_err());
    assert!(FixedPointCodec::new(3, BigUint::from(1999u32)).is_err());
    assert!(FixedPointCodec::new(23, BigUint::from(10u32).pow(30) + 1u32).is_err());
}

#[test]
fn singlemod_keys_are_prime_and_sized() {
    let key = singlemod(5);
    assert_eq!(key.modulus().bits(), 51);
    assert!(is_probable_prime(key.modulus(), MR_ROUNDS, &mut ChaCha20Rng::seed_from_u64(0)));
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    assert!(SingleModKey::from_modulus(BigUint::from(1u64 << 40), 40, &mut rng).is_err());
    assert!(SingleModKey::generate(16, 40, &mut rng).is_err());
}

#[test]
fn schemes_do_not_mix() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let sm = CryptoContext::new(SchemeKey::SingleMod(singlemod(2)), 3).unwrap();
    let pa = CryptoContext::new(SchemeKey::Paillier(PaillierKeyPair::generate(512, &mut rng).unwrap()), 3).unwrap();
    let a = sm.encrypt_real(1.0f64, &mut rng).unwrap();
    let b = pa.encrypt_real(1.0f64, &mut rng).unwrap();
    assert!(matches!(
        cipher_add(&sm.evaluator(), &a, &b),
        Err(CryptoError::SchemeMismatch { .. })
    ));
    assert!(pa.decrypt_real::<f64>(&a).is_err());
    let prod = cipher_mul(&sm.evaluator(), &a, &a).unwrap();
    assert_eq!(prod.scale(), 2);
    assert!(matches!(
        cipher_add(&sm.evaluator(), &prod, &a),
        Err(CryptoError::ScaleMismatch { left: 2, right: 1 })
    ));
}

#[test]
fn scaled_product_decodes() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let ctx = CryptoContext::new(SchemeKey::SingleMod(singlemod(3)), 3).unwrap();
    let a = ctx.encrypt_real(1.5f64, &mut rng).unwrap();
    let b = ctx.encrypt_real(-2.25f64, &mut rng).unwrap();
    let prod = cipher_mul(&ctx.evaluator(), &a, &b).unwrap();
    assert_eq!(ctx.decrypt_real::<f64>(&prod).unwrap(), -3.375);
}

#[test]
fn ciphertext_carries_scheme_and_decimal_form() {
    let ct = Ciphertext::from_parts(BigUint::from(12345u32), SchemeKind::Paillier, 1);
    assert_eq!(ct.to_decimal(), "12345");
    assert_eq!(ct.scheme().to_string(), "paillier");
    assert!(cipher_sum(&privopt::crypto::Evaluator::SingleMod, &[]).is_err());
}

proptest! {
    #[test]
    fn singlemod_additive_identity(seed in any::<u64>(), n in 1usize..8) {
        let key = singlemod(seed % 4);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let w = key.modulus().clone();
        let zs: Vec<BigUint> = (0..n).map(|_| rng.gen_biguint_below(&w)).collect();
        let cts: Vec<Ciphertext> = zs.iter().map(|z| key.encrypt(z, &mut rng).unwrap()).collect();
        let sum = cipher_sum(&privopt::crypto::Evaluator::SingleMod, &cts).unwrap();
        let want = zs.iter().fold(BigUint::from(0u32), |a, z| a + z) % &w;
        prop_assert_eq!(key.decrypt(&sum).unwrap(), want);
    }

    #[test]
    fn real_vectors_survive_encryption(seed in any::<u64>(), xs in prop::collection::vec(-1e3f64..1e3, 1..10)) {
        let ctx = CryptoContext::new(SchemeKey::SingleMod(singlemod(seed % 4)), 6).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let cts = ctx.encrypt_vector(&xs, &mut rng).unwrap();
        let back: Vec<f64> = ctx.decrypt_vector(&cts).unwrap();
        for (a, b) in xs.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 0.5e-6 + 1e-12);
        }
    }

    #[test]
    fn ciphertexts_are_fresh(seed in any::<u64>(), x in -10.0f64..10.0) {
        let ctx = CryptoContext::new(SchemeKey::SingleMod(singlemod(0)), 3).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let a = ctx.encrypt_real(x, &mut rng).unwrap();
        let b = ctx.encrypt_real(x, &mut rng).unwrap();
        prop_assert_ne!(a.value(), b.value());
        prop_assert_eq!(ctx.decrypt_real::<f64>(&a).unwrap(), ctx.decrypt_real::<f64>(&b).unwrap());
    }
}
