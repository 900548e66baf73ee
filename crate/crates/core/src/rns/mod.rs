//! Residue-number-system ring arithmetic over `Z_Q[x]/(x^n + 1)`.
//!
//! Primes are word sized (below 2^62) and NTT friendly. Polynomials carry a
//! [`Domain`] flag; every operation checks it.

pub mod arith;
mod basis;
mod bconv;
mod modulus;
pub mod oracle;
mod poly;

pub use basis::{PrimeRole, RnsBasis};
pub use bconv::{bconv, mod_down, BaseConverter, ModDown};
pub use modulus::{generate_prime_chain, PrimeModulus};
pub use poly::{Domain, PointwiseOp, RnsPolynomial};

pub(crate) use poly::WordReader;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RingError {
    #[error("ring degree {0} is not a power of two")]
    InvalidDegree(usize),
    #[error("{q} is not a prime below 2^62 with q = 1 mod 2n for n = {n}")]
    InvalidModulus { q: u64, n: usize },
    #[error("no primitive 2n-th root of unity mod {q} for n = {n}")]
    NoRootOfUnity { q: u64, n: usize },
    #[error("prime bit size {0} outside 2..=61")]
    InvalidBitSize(u32),
    #[error("not enough {bit_size}-bit primes = 1 mod 2n: wanted {count} for n = {n}")]
    PrimeExhaustion { bit_size: u32, count: usize, n: usize },
    #[error("expected {expected:?} domain, found {found:?}")]
    DomainMismatch { expected: Domain, found: Domain },
    #[error("operands use different prime bases")]
    BasisMismatch,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("empty prime basis")]
    EmptyBasis,
    #[error("duplicate prime {0} in basis")]
    DuplicatePrime(u64),
    #[error("residue {value} is not reduced modulo {modulus}")]
    UnreducedResidue { value: u64, modulus: u64 },
    #[error("special basis is not a proper suffix of the polynomial basis")]
    NotASuffix,
    #[error("decode error: {0}")]
    Decode(String),
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::oracle::{crt_reconstruct, dft_oracle, schoolbook_negacyclic};
    use super::*;

    fn toy_basis(q: u64, n: usize, psi: u64) -> RnsBasis {
        let m = PrimeModulus::with_root(q, n, psi).unwrap();
        RnsBasis::uniform(vec![Arc::new(m)], PrimeRole::Ciphertext).unwrap()
    }

    fn basis_of(qs: &[u64], n: usize) -> RnsBasis {
        let primes = qs.iter().map(|&q| Arc::new(PrimeModulus::new(q, n).unwrap())).collect();
        RnsBasis::uniform(primes, PrimeRole::Ciphertext).unwrap()
    }

    fn poly(basis: &RnsBasis, coeffs: &[u64], domain: Domain) -> RnsPolynomial {
        RnsPolynomial::from_rows(basis, vec![coeffs.to_vec()], domain).unwrap()
    }

    #[test]
    fn ntt_worked_examples() {
        let b = toy_basis(17, 4, 2);
        let delta = poly(&b, &[1, 0, 0, 0], Domain::Coefficient).ntt().unwrap();
        assert_eq!(delta.row(0), &[1, 1, 1, 1]);
        let x = poly(&b, &[0, 1, 0, 0], Domain::Coefficient).ntt().unwrap();
        assert_eq!(x.row(0), &[2, 8, 15, 9]);
        assert_eq!(x.domain(), Domain::Ntt);
    }

    #[test]
    fn intt_worked_examples() {
        let b = toy_basis(17, 4, 2);
        let ones = poly(&b, &[1, 1, 1, 1], Domain::Ntt).intt().unwrap();
        assert_eq!(ones.row(0), &[1, 0, 0, 0]);
        let x = poly(&b, &[2, 8, 15, 9], Domain::Ntt).intt().unwrap();
        assert_eq!(x.row(0), &[0, 1, 0, 0]);
        let z = poly(&b, &[0, 0, 0, 0], Domain::Ntt).intt().unwrap();
        assert_eq!(z.row(0), &[0, 0, 0, 0]);
    }

    #[test]
    fn wrong_domain_is_rejected() {
        let b = toy_basis(17, 4, 2);
        let p = poly(&b, &[1, 0, 0, 0], Domain::Ntt);
        assert!(matches!(p.ntt(), Err(RingError::DomainMismatch { .. })));
        let c = poly(&b, &[1, 0, 0, 0], Domain::Coefficient);
        assert!(matches!(c.intt(), Err(RingError::DomainMismatch { .. })));
        assert!(matches!(c.add(&p), Err(RingError::DomainMismatch { .. })));
    }

    #[test]
    fn dft_oracle_matches_ntt_exhaustively_q17() {
        let m = PrimeModulus::with_root(17, 4, 2).unwrap();
        assert_eq!(dft_oracle(&[1, 0, 0, 0], &m).unwrap(), vec![1, 1, 1, 1]);
        assert_eq!(dft_oracle(&[5, 0, 0, 0], &m).unwrap(), vec![5, 5, 5, 5]);
        let mut count = 0;
        for code in 0..17u64.pow(4) {
            let a: Vec<u64> = (0..4).map(|k| code / 17u64.pow(k) % 17).collect();
            let mut fast = a.clone();
            m.forward(&mut fast);
            assert_eq!(fast, dft_oracle(&a, &m).unwrap(), "a = {a:?}");
            count += 1;
        }
        assert_eq!(count, 83_521);
    }

    #[test]
    fn square_of_one_plus_x() {
        let b = toy_basis(17, 4, 2);
        let a = poly(&b, &[1, 1, 0, 0], Domain::Coefficient).ntt().unwrap();
        let sq = a.mul(&a).unwrap().intt().unwrap();
        assert_eq!(sq.row(0), &[1, 2, 1, 0]);
    }

    #[test]
    fn pointwise_identities() {
        let b = basis_of(&[97, 193], 16);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows = b.moduli().iter().map(|&q| (0..16).map(|_| rng.random_range(0..q)).collect()).collect();
        let a = RnsPolynomial::from_rows(&b, rows, Domain::Coefficient).unwrap();
        let zero = RnsPolynomial::zero(&b, Domain::Coefficient);
        assert_eq!(a.add(&zero).unwrap(), a);
        assert_eq!(a.sub(&a).unwrap(), zero);
        assert_eq!(a.add(&a.neg()).unwrap(), zero);
        let other = basis_of(&[97, 257], 16);
        assert_eq!(a.add(&RnsPolynomial::zero(&other, Domain::Coefficient)), Err(RingError::BasisMismatch));
    }

    #[test]
    fn bconv_worked_examples() {
        // Degree-1 rings admit any odd prime, which keeps these at scalar size.
        let single = basis_of(&[17], 1);
        let thirteen = basis_of(&[13], 1);
        let a = RnsPolynomial::from_rows(&single, vec![vec![5]], Domain::Coefficient).unwrap();
        assert_eq!(bconv(&a, &thirteen).unwrap().row(0), &[5]);

        // 100 = (15 mod 17, 9 mod 13): 9*13 + 12*17 = 321 = 100 + 221, so 2 mod 11.
        let pair = basis_of(&[17, 13], 1);
        let eleven = basis_of(&[11], 1);
        let v = RnsPolynomial::from_rows(&pair, vec![vec![15], vec![9]], Domain::Coefficient).unwrap();
        assert_eq!(bconv(&v, &eleven).unwrap().row(0), &[2]);
        assert_eq!(100 % 11, 1);
    }

    #[test]
    fn bconv_of_zero_is_zero() {
        let src = basis_of(&[97, 193], 16);
        let tgt = basis_of(&[257, 353], 16);
        let z = RnsPolynomial::zero(&src, Domain::Coefficient);
        assert_eq!(bconv(&z, &tgt).unwrap(), RnsPolynomial::zero(&tgt, Domain::Coefficient));
    }

    #[test]
    fn mod_down_worked_example() {
        let full = RnsBasis::new(
            vec![Arc::new(PrimeModulus::new(17, 2).unwrap()), Arc::new(PrimeModulus::new(13, 2).unwrap())],
            vec![PrimeRole::Ciphertext, PrimeRole::Special],
        )
        .unwrap();
        let special = full.range(1..2).unwrap();
        // x = 26 = (9 mod 17, 0 mod 13) → 26 / 13 = 2.
        let x = RnsPolynomial::from_rows(&full, vec![vec![9, 0], vec![0, 0]], Domain::Coefficient).unwrap();
        let y = mod_down(&x, &special).unwrap();
        assert_eq!(y.row(0), &[2, 0]);
        assert_eq!(y.basis().moduli(), vec![17]);
        let z = mod_down(&RnsPolynomial::zero(&full, Domain::Coefficient), &special).unwrap();
        assert_eq!(z.row(0), &[0, 0]);
        let wrong = full.range(0..1).unwrap();
        assert_eq!(mod_down(&x, &wrong).unwrap_err(), RingError::NotASuffix);
    }

    #[test]
    fn serialization_roundtrip() {
        let b = basis_of(&[97, 193, 257], 16);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows = b.moduli().iter().map(|&q| (0..16).map(|_| rng.random_range(0..q)).collect()).collect();
        let a = RnsPolynomial::from_rows(&b, rows, Domain::Ntt).unwrap();
        let bytes = a.to_bytes();
        assert_eq!(bytes.len(), 8 * (4 + 3 + 3 * 16));
        let (back, used) = RnsPolynomial::from_bytes(&bytes, &b).unwrap();
        assert_eq!(back, a);
        assert_eq!(used, bytes.len());
        assert!(RnsPolynomial::from_bytes(&bytes[..40], &b).is_err());
    }

    proptest! {
        #[test]
        fn ntt_roundtrip_is_identity(seed in any::<u64>(), log_n in 1u32..9) {
            let n = 1usize << log_n;
            let chain = generate_prime_chain(40, 2, n).unwrap();
            let b = RnsBasis::uniform(chain.into_iter().map(Arc::new).collect(), PrimeRole::Ciphertext).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows = b.moduli().iter().map(|&q| (0..n).map(|_| rng.random_range(0..q)).collect()).collect();
            let a = RnsPolynomial::from_rows(&b, rows, Domain::Coefficient).unwrap();
            prop_assert_eq!(a.ntt().unwrap().intt().unwrap(), a);
        }

        #[test]
        fn convolution_theorem(seed in any::<u64>(), log_n in 1u32..7) {
            let n = 1usize << log_n;
            let m = generate_prime_chain(30, 1, n).unwrap().remove(0);
            let q = m.value();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<u64> = (0..n).map(|_| rng.random_range(0..q)).collect();
            let c: Vec<u64> = (0..n).map(|_| rng.random_range(0..q)).collect();
            let b = RnsBasis::uniform(vec![Arc::new(m)], PrimeRole::Ciphertext).unwrap();
            let pa = RnsPolynomial::from_rows(&b, vec![a.clone()], Domain::Coefficient).unwrap();
            let pc = RnsPolynomial::from_rows(&b, vec![c.clone()], Domain::Coefficient).unwrap();
            let prod = pa.ntt().unwrap().mul(&pc.ntt().unwrap()).unwrap().intt().unwrap();
            prop_assert_eq!(prod.row(0), &schoolbook_negacyclic(&a, &c, q)[..]);
        }

        #[test]
        fn mod_down_divides_exact_multiples(y in 0u64..(97 * 193), coeff in 0usize..4) {
            let full = basis_of(&[97, 193, 113], 4);
            let special = full.range(2..3).unwrap();
            let x = 113 * y;
            let mut coeffs = vec![0i64; 4];
            coeffs[coeff] = x as i64;
            let poly = RnsPolynomial::from_signed(&full, &coeffs).unwrap();
            let out = mod_down(&poly, &special).unwrap();
            prop_assert_eq!(crt_reconstruct(&[out.row(0)[coeff], out.row(1)[coeff]], &[97, 193]), y as u128);
        }
    }
}
