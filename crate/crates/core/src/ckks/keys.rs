use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use super::{CkksError, CkksParams};
use crate::rns::arith::{inv_mod, mul_mod};
use crate::rns::{Domain, RnsBasis, RnsPolynomial};

/// Ternary secret `s ∈ {-1, 0, 1}^N`, kept in the NTT domain over `Q ∪ P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKey {
    coeffs: Vec<i64>,
    poly: RnsPolynomial,
}

impl SecretKey {
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// `s` over the full basis, NTT domain.
    pub fn poly(&self) -> &RnsPolynomial {
        &self.poly
    }

    /// `s` restricted to the given rows of the full basis.
    pub fn rows(&self, rows: &[usize]) -> Result<RnsPolynomial, CkksError> {
        Ok(self.poly.select_rows(rows)?)
    }

    /// `s` over the first `level` ciphertext primes.
    pub fn at_level(&self, level: usize) -> Result<RnsPolynomial, CkksError> {
        Ok(self.poly.truncate_rows(level)?)
    }

    fn from_coeffs(params: &CkksParams, coeffs: Vec<i64>) -> Result<Self, CkksError> {
        let poly = RnsPolynomial::from_signed(params.full_basis(), &coeffs)?.ntt()?;
        Ok(Self { coeffs, poly })
    }
}

/// What key an [`EvaluationKey`] re-encrypts under `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum KeySource {
    /// `s²`, used by HMUL.
    Square,
    /// `s(X^g)` for the Galois element `g`, used by HROT.
    Galois(usize),
}

/// Hybrid key-switching key: one `(b_i, a_i)` pair per gadget digit with
/// `b_i = -a_i·s + e_i + P·g_i·s_src (mod QP)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationKey {
    digits: Vec<(RnsPolynomial, RnsPolynomial)>,
    source: KeySource,
}

impl EvaluationKey {
    pub fn digits(&self) -> &[(RnsPolynomial, RnsPolynomial)] {
        &self.digits
    }

    pub fn source(&self) -> KeySource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// The first `digits` pairs only; useful to exercise digit-count checks.
    pub fn truncated(key: &Self, digits: usize) -> Self {
        Self { digits: key.digits[..digits.min(key.len())].to_vec(), source: key.source }
    }
}

/// RLWE public key `(b, a)` with `b = -a·s + e` over the ciphertext primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    pub b: RnsPolynomial,
    pub a: RnsPolynomial,
}

/// `g_i mod q` for every prime of the full basis:
/// `g_i = (Q/Q_i) · [(Q/Q_i)^{-1}]_{Q_i}` with `Q_i` the product of digit `i`.
///
/// Modulo a prime of digit `i` this is 1, modulo any other ciphertext prime it
/// vanishes because `Q/Q_i` does; special primes never see it since the key
/// term is multiplied by `P`.
pub fn gadget_residues(params: &CkksParams, digit: usize) -> Vec<u64> {
    let digits = params.shape().digit_ranges();
    let range = digits[digit].clone();
    let moduli = params.ciphertext_basis().moduli();
    params
        .full_basis()
        .moduli()
        .iter()
        .enumerate()
        .map(|(row, &q)| {
            if row >= moduli.len() {
                return 0;
            }
            // (Q/Q_i) mod q.
            let q_over_qi = moduli
                .iter()
                .enumerate()
                .filter(|(k, _)| !range.contains(k))
                .fold(1u64, |acc, (_, &m)| mul_mod(acc, m % q, q));
            if !range.contains(&row) {
                return q_over_qi;
            }
            // [(Q/Q_i)^{-1}]_{Q_i} is congruent to (Q/Q_i)^{-1} modulo each q in digit i.
            let inv = inv_mod(q_over_qi, q).expect("distinct primes are coprime");
            mul_mod(q_over_qi, inv, q)
        })
        .collect()
}

/// Deterministic key generation: the secret key and the relinearisation key.
pub fn keygen(params: &CkksParams, seed: u64) -> Result<(SecretKey, EvaluationKey), CkksError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let sk = sample_secret(params, &mut rng)?;
    let s2 = sk.poly.mul(&sk.poly)?;
    let evk = gen_switching_key(params, &sk, &s2, KeySource::Square, &mut rng)?;
    Ok((sk, evk))
}

/// Rotation key for a slot rotation by `steps` (negative rotates right).
pub fn gen_rotation_key(
    params: &CkksParams,
    sk: &SecretKey,
    steps: i64,
    seed: u64,
) -> Result<EvaluationKey, CkksError> {
    let g = galois_element(params.n(), steps);
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ (g as u64).rotate_left(32));
    let rotated = automorphism(&sk.poly, g)?;
    gen_switching_key(params, sk, &rotated, KeySource::Galois(g), &mut rng)
}

pub fn gen_public_key(params: &CkksParams, sk: &SecretKey, seed: u64) -> Result<PublicKey, CkksError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let level = params.max_level();
    let basis = params.level_basis(level)?;
    let a = uniform_poly(&basis, &mut rng);
    let e = gaussian_poly(&basis, params.noise_std(), &mut rng)?.ntt()?;
    let b = e.sub(&a.mul(&sk.at_level(level)?)?)?;
    Ok(PublicKey { b, a })
}

fn gen_switching_key(
    params: &CkksParams,
    sk: &SecretKey,
    source_key: &RnsPolynomial,
    source: KeySource,
    rng: &mut ChaCha20Rng,
) -> Result<EvaluationKey, CkksError> {
    let full = params.full_basis();
    let p_mod: Vec<u64> = full.moduli().iter().map(|&q| params.special_basis().product_mod(q)).collect();
    let mut digits = Vec::with_capacity(params.dnum());
    for i in 0..params.dnum() {
        let a = uniform_poly(full, rng);
        let e = gaussian_poly(full, params.noise_std(), rng)?.ntt()?;
        let factors: Vec<u64> = gadget_residues(params, i)
            .iter()
            .zip(full.moduli())
            .zip(&p_mod)
            .map(|((&g, q), &p)| mul_mod(g, p, q))
            .collect();
        let payload = source_key.scale_rows(&factors);
        let b = e.sub(&a.mul(&sk.poly)?)?.add(&payload)?;
        digits.push((b, a));
    }
    Ok(EvaluationKey { digits, source })
}

fn sample_secret(params: &CkksParams, rng: &mut ChaCha20Rng) -> Result<SecretKey, CkksError> {
    let n = params.n();
    let coeffs = match params.hamming_weight() {
        None => (0..n).map(|_| rng.random_range(-1i64..=1)).collect(),
        Some(h) => {
            let mut c = vec![0i64; n];
            let mut placed = 0;
            while placed < h {
                let i = rng.random_range(0..n);
                if c[i] == 0 {
                    c[i] = if rng.random::<bool>() { 1 } else { -1 };
                    placed += 1;
                }
            }
            c
        }
    };
    SecretKey::from_coeffs(params, coeffs)
}

pub(crate) fn uniform_poly(basis: &RnsBasis, rng: &mut impl Rng) -> RnsPolynomial {
    let n = basis.degree();
    let rows = basis.moduli().iter().map(|&q| (0..n).map(|_| rng.random_range(0..q)).collect()).collect();
    RnsPolynomial::from_rows(basis, rows, Domain::Ntt).expect("sampled residues are reduced")
}

pub(crate) fn gaussian_coeffs(n: usize, std: f64, rng: &mut impl Rng) -> Vec<i64> {
    let normal = Normal::new(0.0, std).expect("positive standard deviation");
    (0..n).map(|_| normal.sample(rng).round() as i64).collect()
}

pub(crate) fn gaussian_poly(basis: &RnsBasis, std: f64, rng: &mut impl Rng) -> Result<RnsPolynomial, CkksError> {
    Ok(RnsPolynomial::from_signed(basis, &gaussian_coeffs(basis.degree(), std, rng))?)
}

pub(crate) fn ternary_poly(basis: &RnsBasis, rng: &mut impl Rng) -> Result<RnsPolynomial, CkksError> {
    let coeffs: Vec<i64> = (0..basis.degree()).map(|_| rng.random_range(-1i64..=1)).collect();
    Ok(RnsPolynomial::from_signed(basis, &coeffs)?)
}

/// `5^steps mod 2N`, the Galois element of a left rotation by `steps` slots.
pub fn galois_element(n: usize, steps: i64) -> usize {
    let m = 2 * n as u64;
    let slots = (n / 2) as i64;
    let r = steps.rem_euclid(slots) as u64;
    crate::rns::arith::pow_mod(5, r, m) as usize
}

/// Applies `X → X^g` to an NTT-domain polynomial.
///
/// Slot `j` holds the evaluation at `psi^{2j+1}`, so the image at slot `j` is
/// the input at the slot whose exponent is `(2j+1)·g mod 2N`.
pub fn automorphism(poly: &RnsPolynomial, g: usize) -> Result<RnsPolynomial, CkksError> {
    if poly.domain() != Domain::Ntt {
        return Err(crate::rns::RingError::DomainMismatch { expected: Domain::Ntt, found: poly.domain() }.into());
    }
    let n = poly.degree();
    let m = 2 * n;
    let src: Vec<usize> = (0..n).map(|j| ((2 * j + 1) * g % m - 1) / 2).collect();
    let rows = poly.rows().iter().map(|row| src.iter().map(|&k| row[k]).collect()).collect();
    Ok(RnsPolynomial::from_rows(poly.basis(), rows, Domain::Ntt)?)
}
