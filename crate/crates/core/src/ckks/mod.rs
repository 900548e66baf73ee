//! RNS-CKKS: parameters, keys, encoding, encryption, and the homomorphic
//! operations built on hybrid key switching.

mod encoding;
mod eval;
mod keys;
mod params;
mod serial;

pub use encoding::Encoder;
pub use eval::{
    decrypt, encrypt, encrypt_public, hadd, hmul, hrot, keyswitch, keyswitch_error, keyswitch_reference,
    rescale, KeySwitchOutput, NoiseBounds,
};
pub use keys::{
    automorphism, gadget_residues, galois_element, gen_public_key, gen_rotation_key, keygen, EvaluationKey,
    KeySource, PublicKey, SecretKey,
};
pub use params::{split_even, CkksParams, CkksParamsBuilder, ParamShape, SECURITY_EXCLUSIONS};

pub(crate) use eval::check_keyswitch_inputs;
pub(crate) use keys::uniform_poly;

use crate::dataflow::ScheduleError;
use crate::rns::{RingError, RnsPolynomial};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CkksError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("(L, dnum) = ({max_level}, {dnum}) does not meet the security requirement")]
    SecurityExclusion { max_level: usize, dnum: usize },
    #[error("level {level} outside 1..={max}")]
    InvalidLevel { level: usize, max: usize },
    #[error("level exhausted: operation needs level >= {needed}, ciphertext is at {level}")]
    LevelExhausted { level: usize, needed: usize },
    #[error("operands are at different levels ({0} vs {1})")]
    LevelMismatch(usize, usize),
    #[error("operands have different scales ({0} vs {1})")]
    ScaleMismatch(f64, f64),
    #[error("encoded value overflows the modulus headroom")]
    Overflow,
    #[error("evaluation key has {have} digits, {need} required")]
    DigitCount { have: usize, need: usize },
    #[error("key mismatch: {0}")]
    KeyMismatch(String),
    #[error("missing rotation key for {0} steps")]
    MissingKey(i64),
}

/// An encoded message at a given level and scale.
#[derive(Clone, Debug, PartialEq)]
pub struct Plaintext {
    pub poly: RnsPolynomial,
    pub scale: f64,
    pub level: usize,
}

/// `(c0, c1)` over the first `level` ciphertext primes, NTT domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Ciphertext {
    pub c0: RnsPolynomial,
    pub c1: RnsPolynomial,
    pub level: usize,
    pub scale: f64,
}

impl Ciphertext {
    pub fn new(c0: RnsPolynomial, c1: RnsPolynomial, scale: f64) -> Result<Self, CkksError> {
        if c0.basis().moduli() != c1.basis().moduli() {
            return Err(RingError::BasisMismatch.into());
        }
        if c0.domain() != c1.domain() {
            return Err(RingError::DomainMismatch { expected: c0.domain(), found: c1.domain() }.into());
        }
        let level = c0.basis().len();
        Ok(Self { c0, c1, level, scale })
    }
}
