use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::CryptoError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    SingleMod,
    Paillier,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::SingleMod => "singlemod",
            SchemeKind::Paillier => "paillier",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A ciphertext tagged with the scheme that produced it and the number of
/// `10^σ` factors its plaintext carries (1 after encryption, summed by
/// multiplication).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ciphertext {
    value: BigUint,
    scheme: SchemeKind,
    scale: u32,
}

impl Ciphertext {
    pub(crate) fn new(value: BigUint, scheme: SchemeKind) -> Self {
        Self {
            value,
            scheme,
            scale: 1,
        }
    }

    /// Reassembles a ciphertext from its parts, e.g. when replaying a transcript.
    pub fn from_parts(value: BigUint, scheme: SchemeKind, scale: u32) -> Self {
        Self { value, scheme, scale }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn scheme(&self) -> SchemeKind {
        self.scheme
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn to_decimal(&self) -> String {
        self.value.to_str_radix(10)
    }
}

/// Public ciphertext arithmetic. This is all the aggregator needs; it holds no
/// secret material.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evaluator {
    SingleMod,
    Paillier { n_squared: BigUint },
}

impl Evaluator {
    pub fn kind(&self) -> SchemeKind {
        match self {
            Evaluator::SingleMod => SchemeKind::SingleMod,
            Evaluator::Paillier { .. } => SchemeKind::Paillier,
        }
    }

    fn check(&self, ct: &Ciphertext) -> Result<(), CryptoError> {
        if ct.scheme != self.kind() {
            return Err(CryptoError::SchemeMismatch {
                expected: self.kind().name(),
                found: ct.scheme.name(),
            });
        }
        Ok(())
    }

    pub fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, CryptoError> {
        self.check(a)?;
        self.check(b)?;
        if a.scale != b.scale {
            return Err(CryptoError::ScaleMismatch {
                left: a.scale,
                right: b.scale,
            });
        }
        let value = match self {
            Evaluator::SingleMod => &a.value + &b.value,
            Evaluator::Paillier { n_squared } => (&a.value * &b.value) % n_squared,
        };
        Ok(Ciphertext {
            value,
            scheme: a.scheme,
            scale: a.scale,
        })
    }

    pub fn mul(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, CryptoError> {
        self.check(a)?;
        self.check(b)?;
        match self {
            Evaluator::SingleMod => Ok(Ciphertext {
                value: &a.value * &b.value,
                scheme: SchemeKind::SingleMod,
                scale: a.scale + b.scale,
            }),
            Evaluator::Paillier { .. } => Err(CryptoError::Unsupported(
                "ciphertext multiplication is not available for paillier",
            )),
        }
    }

    /// Folds `add` over a nonempty slice.
    pub fn sum<'a, I>(&self, items: I) -> Result<Ciphertext, CryptoError>
    where
        I: IntoIterator<Item = &'a Ciphertext>,
    {
        let mut it = items.into_iter();
        let first = it
            .next()
            .ok_or(CryptoError::Unsupported("sum of zero ciphertexts"))?;
        self.check(first)?;
        it.try_fold(first.clone(), |acc, ct| self.add(&acc, ct))
    }
}

pub fn cipher_add(ev: &Evaluator, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, CryptoError> {
    ev.add(a, b)
}

pub fn cipher_mul(ev: &Evaluator, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, CryptoError> {
    ev.mul(a, b)
}

pub fn cipher_sum(ev: &Evaluator, items: &[Ciphertext]) -> Result<Ciphertext, CryptoError> {
    ev.sum(items)
}
