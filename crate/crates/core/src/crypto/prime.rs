//! Probabilistic primality testing and random prime generation.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

/// Miller–Rabin rounds; each round errs with probability at most 1/4, so 40
/// rounds bound the error by 2⁻⁸⁰.
pub const MR_ROUNDS: usize = 40;

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

pub fn is_probable_prime<R: Rng + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }

    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().expect("n > 2 so n - 1 > 0");
    let d = &n_minus_1 >> s;

    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
            if x.is_one() {
                return false;
            }
        }
        return false;
    }
    true
}

/// Uniformly random prime with exactly `bits` bits. When `top_two` is set the
/// two most significant bits are forced, so the product of two such primes has
/// exactly `2 * bits` bits.
pub fn random_prime<R: Rng + ?Sized>(bits: u64, top_two: bool, rng: &mut R) -> BigUint {
    assert!(bits >= 3, "prime bit length too small");
    loop {
        let mut candidate = rng.gen_biguint(bits);
        candidate.set_bit(bits - 1, true);
        if top_two {
            candidate.set_bit(bits - 2, true);
        }
        candidate.set_bit(0, true);
        if is_probable_prime(&candidate, MR_ROUNDS, rng) {
            return candidate;
        }
    }
}

pub(crate) fn lcm(a: &BigUint, b: &BigUint) -> BigUint {
    a.lcm(b)
}
