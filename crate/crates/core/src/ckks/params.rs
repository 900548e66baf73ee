use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::CkksError;
use crate::rns::{generate_prime_chain, PrimeRole, RnsBasis};

/// `(L, dnum)` pairs rejected in strict mode for not meeting the security target.
pub const SECURITY_EXCLUSIONS: &[(usize, usize)] = &[(10, 8)];

/// The size-only part of a CKKS parameter set: enough to lay out KeySwitch
/// without generating any primes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParamShape {
    /// Ring degree `N`.
    pub n: usize,
    /// Maximum level `L`, equal to the number of ciphertext primes.
    pub max_level: usize,
    pub dnum: usize,
}

impl ParamShape {
    pub fn new(n: usize, max_level: usize, dnum: usize) -> Result<Self, CkksError> {
        let shape = Self { n, max_level, dnum };
        shape.validate()?;
        Ok(shape)
    }

    fn validate(&self) -> Result<(), CkksError> {
        if !self.n.is_power_of_two() || self.n < 4 {
            return Err(CkksError::InvalidParams(format!("ring degree {} must be a power of two >= 4", self.n)));
        }
        if self.max_level == 0 {
            return Err(CkksError::InvalidParams("max level must be at least 1".into()));
        }
        if self.dnum == 0 || self.dnum > self.max_level {
            return Err(CkksError::InvalidParams(format!(
                "dnum {} must lie in 1..={}",
                self.dnum, self.max_level
            )));
        }
        Ok(())
    }

    /// `⌈(L+1)/dnum⌉`, the number of special primes.
    pub fn alpha(&self) -> usize {
        (self.max_level + 1).div_ceil(self.dnum)
    }

    pub fn is_excluded(&self) -> bool {
        SECURITY_EXCLUSIONS.contains(&(self.max_level, self.dnum))
    }

    /// Ciphertext-prime indices of each gadget digit at the maximum level.
    ///
    /// The `L` primes are split into `dnum` contiguous groups as evenly as
    /// possible, earlier digits taking the remainder. Every group has at most
    /// `alpha` primes.
    pub fn digit_ranges(&self) -> Vec<Range<usize>> {
        split_even(self.max_level, self.dnum)
    }

    /// Digits that still own at least one prime at `level`, clipped to it.
    pub fn active_digits(&self, level: usize) -> Vec<Range<usize>> {
        self.digit_ranges()
            .into_iter()
            .filter(|r| r.start < level)
            .map(|r| r.start..r.end.min(level))
            .collect()
    }
}

/// Splits `0..len` into `parts` contiguous ranges whose sizes differ by at
/// most one, larger ranges first. Ranges are empty when `parts > len`.
pub fn split_even(len: usize, parts: usize) -> Vec<Range<usize>> {
    let base = len / parts;
    let rem = len % parts;
    let mut start = 0;
    (0..parts)
        .map(|k| {
            let size = base + usize::from(k < rem);
            let r = start..start + size;
            start += size;
            r
        })
        .collect()
}

/// A full CKKS parameter set with its prime chain.
///
/// The ciphertext chain is `q_0` (wide, holds the decoded message) followed by
/// `L-1` scaling primes close to `Δ`. The `alpha` special primes are wider than
/// every ciphertext prime.
#[derive(Clone, Debug)]
pub struct CkksParams {
    shape: ParamShape,
    scale_bits: u32,
    ciphertext: RnsBasis,
    special: RnsBasis,
    full: RnsBasis,
    noise_std: f64,
    hamming_weight: Option<usize>,
}

impl CkksParams {
    pub fn builder(n: usize, max_level: usize, dnum: usize) -> CkksParamsBuilder {
        CkksParamsBuilder {
            n,
            max_level,
            dnum,
            scale_bits: 40,
            first_prime_bits: 58,
            special_prime_bits: 60,
            noise_std: 3.2,
            hamming_weight: None,
            strict: true,
        }
    }

    pub fn shape(&self) -> ParamShape {
        self.shape
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    pub fn max_level(&self) -> usize {
        self.shape.max_level
    }

    pub fn dnum(&self) -> usize {
        self.shape.dnum
    }

    pub fn alpha(&self) -> usize {
        self.shape.alpha()
    }

    pub fn slots(&self) -> usize {
        self.shape.n / 2
    }

    /// Default scale `Δ = 2^scale_bits`.
    pub fn scale(&self) -> f64 {
        2f64.powi(self.scale_bits as i32)
    }

    pub fn word_bytes(&self) -> usize {
        8
    }

    /// The `L` ciphertext primes `q_0..q_{L-1}`.
    pub fn ciphertext_basis(&self) -> &RnsBasis {
        &self.ciphertext
    }

    pub fn special_basis(&self) -> &RnsBasis {
        &self.special
    }

    /// `Q ∪ P`: ciphertext primes followed by special primes.
    pub fn full_basis(&self) -> &RnsBasis {
        &self.full
    }

    /// The first `level` ciphertext primes.
    pub fn level_basis(&self, level: usize) -> Result<RnsBasis, CkksError> {
        self.check_level(level)?;
        Ok(self.ciphertext.range(0..level)?)
    }

    /// Level primes followed by the special primes, the basis digits are raised to.
    pub fn extended_basis(&self, level: usize) -> Result<RnsBasis, CkksError> {
        Ok(self.level_basis(level)?.concat(&self.special)?)
    }

    /// Row indices of the extended basis inside [`full_basis`](Self::full_basis).
    pub fn extended_rows(&self, level: usize) -> Vec<usize> {
        let l = self.max_level();
        (0..level).chain(l..l + self.alpha()).collect()
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn hamming_weight(&self) -> Option<usize> {
        self.hamming_weight
    }

    pub(crate) fn check_level(&self, level: usize) -> Result<(), CkksError> {
        if level == 0 || level > self.max_level() {
            return Err(CkksError::InvalidLevel { level, max: self.max_level() });
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CkksParamsBuilder {
    n: usize,
    max_level: usize,
    dnum: usize,
    scale_bits: u32,
    first_prime_bits: u32,
    special_prime_bits: u32,
    noise_std: f64,
    hamming_weight: Option<usize>,
    strict: bool,
}

impl CkksParamsBuilder {
    pub fn scale_bits(mut self, bits: u32) -> Self {
        self.scale_bits = bits;
        self
    }

    pub fn first_prime_bits(mut self, bits: u32) -> Self {
        self.first_prime_bits = bits;
        self
    }

    pub fn special_prime_bits(mut self, bits: u32) -> Self {
        self.special_prime_bits = bits;
        self
    }

    pub fn noise_std(mut self, std: f64) -> Self {
        self.noise_std = std;
        self
    }

    /// Fixes the number of nonzero secret coefficients; full density otherwise.
    pub fn hamming_weight(mut self, h: usize) -> Self {
        self.hamming_weight = Some(h);
        self
    }

    /// When on (the default), security-excluded `(L, dnum)` pairs are rejected.
    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn build(self) -> Result<CkksParams, CkksError> {
        let shape = ParamShape::new(self.n, self.max_level, self.dnum)?;
        if self.strict && shape.is_excluded() {
            return Err(CkksError::SecurityExclusion { max_level: shape.max_level, dnum: shape.dnum });
        }
        if !(self.scale_bits < self.first_prime_bits && self.first_prime_bits < self.special_prime_bits) {
            return Err(CkksError::InvalidParams(
                "prime sizes must satisfy scale < first < special".into(),
            ));
        }
        if let Some(h) = self.hamming_weight {
            if h == 0 || h > self.n {
                return Err(CkksError::InvalidParams(format!("hamming weight {h} outside 1..={}", self.n)));
            }
        }
        let first = generate_prime_chain(self.first_prime_bits, 1, self.n)?;
        let scaling = generate_prime_chain(self.scale_bits, self.max_level - 1, self.n)?;
        let special = generate_prime_chain(self.special_prime_bits, shape.alpha(), self.n)?;
        let ciphertext = RnsBasis::uniform(
            first.into_iter().chain(scaling).map(Arc::new).collect(),
            PrimeRole::Ciphertext,
        )?;
        let special = RnsBasis::uniform(special.into_iter().map(Arc::new).collect(), PrimeRole::Special)?;
        let full = ciphertext.concat(&special)?;
        Ok(CkksParams {
            shape,
            scale_bits: self.scale_bits,
            ciphertext,
            special,
            full,
            noise_std: self.noise_std,
            hamming_weight: self.hamming_weight,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_follows_ceiling_formula() {
        assert_eq!(ParamShape::new(1 << 16, 30, 4).unwrap().alpha(), 8);
        assert_eq!(ParamShape::new(1 << 15, 10, 2).unwrap().alpha(), 6);
        assert_eq!(ParamShape::new(1 << 10, 6, 3).unwrap().alpha(), 3);
        for l in 1..60 {
            for d in 1..=l.min(10) {
                let s = ParamShape::new(1 << 10, l, d).unwrap();
                assert_eq!(s.alpha(), (l + 1).div_ceil(d));
                let digits = s.digit_ranges();
                assert_eq!(digits.len(), d);
                assert!(digits.iter().all(|r| !r.is_empty() && r.len() <= s.alpha()));
                assert_eq!(digits.last().unwrap().end, l);
            }
        }
    }

    #[test]
    fn strict_mode_rejects_exclusion() {
        let err = CkksParams::builder(1 << 10, 10, 8).build().unwrap_err();
        assert_eq!(err, CkksError::SecurityExclusion { max_level: 10, dnum: 8 });
        assert!(CkksParams::builder(1 << 10, 10, 8).strict(false).build().is_ok());
    }

    #[test]
    fn prime_chain_layout() {
        let p = CkksParams::builder(1 << 10, 6, 3).build().unwrap();
        assert_eq!(p.ciphertext_basis().len(), 6);
        assert_eq!(p.special_basis().len(), 3);
        let max_q = p.ciphertext_basis().moduli().into_iter().max().unwrap();
        assert!(p.special_basis().moduli().iter().all(|&sp| sp >= max_q));
        assert_eq!(p.extended_rows(4), vec![0, 1, 2, 3, 6, 7, 8]);
        assert_eq!(p.full_basis().len(), 9);
    }

    #[test]
    fn active_digits_shrink_with_level() {
        let s = ParamShape::new(1 << 10, 6, 3).unwrap();
        assert_eq!(s.active_digits(6), vec![0..2, 2..4, 4..6]);
        assert_eq!(s.active_digits(3), vec![0..2, 2..3]);
        assert_eq!(split_even(7, 3), vec![0..3, 3..5, 5..7]);
        assert_eq!(split_even(2, 3), vec![0..1, 1..2, 2..2]);
    }

    #[test]
    fn invalid_shapes() {
        assert!(ParamShape::new(1000, 6, 3).is_err());
        assert!(ParamShape::new(1 << 10, 0, 1).is_err());
        assert!(ParamShape::new(1 << 10, 3, 4).is_err());
    }
}
