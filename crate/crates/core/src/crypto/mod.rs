//! Additively homomorphic encryption over arbitrary-precision integers and the
//! signed fixed-point codec that carries real vectors through it.
//!
//! Two schemes are provided. `SingleMod` is the private-key scheme
//! `e = m·w + z` (additively and multiplicatively homomorphic, not
//! semantically secure). Paillier is the public-key alternative; it supports
//! only ciphertext addition.

mod ciphertext;
mod codec;
mod context;
mod paillier;
pub mod prime;
mod singlemod;

pub use ciphertext::{cipher_add, cipher_mul, cipher_sum, Ciphertext, Evaluator, SchemeKind};
pub use codec::FixedPointCodec;
pub use context::{CryptoContext, SchemeKey};
pub use paillier::{PaillierKeyPair, PaillierPublicKey, PAILLIER_MIN_BITS};
pub use singlemod::{SingleModKey, DEFAULT_M_BITS, SINGLEMOD_MIN_BITS};
