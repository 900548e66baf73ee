use std::sync::Arc;

use super::arith::mul_mod;
use super::{PrimeModulus, RingError};

/// Which part of the modulus chain a prime belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum PrimeRole {
    /// A ciphertext prime `q_i`.
    Ciphertext,
    /// A special (key-switching) prime `p_j`.
    Special,
}

/// An ordered list of distinct NTT-friendly primes sharing one ring degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RnsBasis {
    primes: Vec<Arc<PrimeModulus>>,
    roles: Vec<PrimeRole>,
}

impl RnsBasis {
    pub fn new(
        primes: Vec<Arc<PrimeModulus>>,
        roles: Vec<PrimeRole>,
    ) -> Result<Self, RingError> {
        if primes.is_empty() {
            return Err(RingError::EmptyBasis);
        }
        if primes.len() != roles.len() {
            return Err(RingError::LengthMismatch { expected: primes.len(), found: roles.len() });
        }
        let n = primes[0].degree();
        for (i, p) in primes.iter().enumerate() {
            if p.degree() != n {
                return Err(RingError::BasisMismatch);
            }
            if primes[..i].iter().any(|o| o.value() == p.value()) {
                return Err(RingError::DuplicatePrime(p.value()));
            }
        }
        Ok(Self { primes, roles })
    }

    /// A basis in which every prime carries the same role.
    pub fn uniform(primes: Vec<Arc<PrimeModulus>>, role: PrimeRole) -> Result<Self, RingError> {
        let roles = vec![role; primes.len()];
        Self::new(primes, roles)
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.primes[0].degree()
    }

    pub fn prime(&self, i: usize) -> &PrimeModulus {
        &self.primes[i]
    }

    pub fn primes(&self) -> &[Arc<PrimeModulus>] {
        &self.primes
    }

    pub fn roles(&self) -> &[PrimeRole] {
        &self.roles
    }

    pub fn moduli(&self) -> Vec<u64> {
        self.primes.iter().map(|p| p.value()).collect()
    }

    /// Sub-basis made of the given row indices, in the given order.
    pub fn select(&self, rows: &[usize]) -> Result<Self, RingError> {
        Self::new(
            rows.iter().map(|&i| self.primes[i].clone()).collect(),
            rows.iter().map(|&i| self.roles[i]).collect(),
        )
    }

    pub fn range(&self, range: std::ops::Range<usize>) -> Result<Self, RingError> {
        let rows: Vec<usize> = range.collect();
        self.select(&rows)
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &RnsBasis) -> Result<Self, RingError> {
        let mut primes = self.primes.clone();
        primes.extend(other.primes.iter().cloned());
        let mut roles = self.roles.clone();
        roles.extend_from_slice(&other.roles);
        Self::new(primes, roles)
    }

    /// Position of a modulus value in this basis.
    pub fn position(&self, q: u64) -> Option<usize> {
        self.primes.iter().position(|p| p.value() == q)
    }

    /// The product of all primes reduced modulo `m`.
    pub fn product_mod(&self, m: u64) -> u64 {
        self.primes.iter().fold(1 % m, |acc, p| mul_mod(acc, p.value() % m, m))
    }
}
