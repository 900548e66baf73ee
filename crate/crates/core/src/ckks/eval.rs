use rand::Rng;
use serde::{Deserialize, Serialize};

use super::keys::{automorphism, galois_element, gaussian_poly, ternary_poly, uniform_poly};
use super::{CkksError, CkksParams, Ciphertext, EvaluationKey, KeySource, Plaintext, PublicKey, SecretKey};
use crate::dataflow::{run_scheduled_keyswitch, ExecutionTrace, ScheduleSpec};
use crate::rns::arith::center;
use crate::rns::{bconv, mod_down, RnsPolynomial};

/// Configured noise ceilings, in absolute coefficient units.
///
/// Defaults are four times the 99.9th percentile measured at desk scale
/// (`N = 2^10..2^12`, `L = 6`, `dnum = 3`, σ = 3.2, dense ternary secret).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseBounds {
    /// Fresh secret-key encryption noise.
    pub fresh: i64,
    /// KeySwitch output noise `‖⟨KS(d), (1, s)⟩ − d·s_src‖_∞`.
    pub keyswitch: i64,
}

impl Default for NoiseBounds {
    fn default() -> Self {
        Self { fresh: 64, keyswitch: 1200 }
    }
}

/// The two polynomials returned by KeySwitch, NTT domain over `Q_l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeySwitchOutput {
    pub c0: RnsPolynomial,
    pub c1: RnsPolynomial,
}

pub fn encrypt<R: Rng>(
    params: &CkksParams,
    pt: &Plaintext,
    sk: &SecretKey,
    rng: &mut R,
) -> Result<Ciphertext, CkksError> {
    params.check_level(pt.level)?;
    let basis = params.level_basis(pt.level)?;
    let a = uniform_poly(&basis, rng);
    let e = gaussian_poly(&basis, params.noise_std(), rng)?.ntt()?;
    let c0 = e.sub(&a.mul(&sk.at_level(pt.level)?)?)?.add(&pt.poly)?;
    Ciphertext::new(c0, a, pt.scale)
}

pub fn encrypt_public<R: Rng>(
    params: &CkksParams,
    pt: &Plaintext,
    pk: &PublicKey,
    rng: &mut R,
) -> Result<Ciphertext, CkksError> {
    params.check_level(pt.level)?;
    let basis = params.level_basis(pt.level)?;
    let v = ternary_poly(&basis, rng)?.ntt()?;
    let e0 = gaussian_poly(&basis, params.noise_std(), rng)?.ntt()?;
    let e1 = gaussian_poly(&basis, params.noise_std(), rng)?.ntt()?;
    let b = pk.b.truncate_rows(pt.level)?;
    let a = pk.a.truncate_rows(pt.level)?;
    let c0 = v.mul(&b)?.add(&e0)?.add(&pt.poly)?;
    let c1 = v.mul(&a)?.add(&e1)?;
    Ciphertext::new(c0, c1, pt.scale)
}

/// `c0 + c1·s mod Q_l`.
pub fn decrypt(ct: &Ciphertext, sk: &SecretKey) -> Result<Plaintext, CkksError> {
    let s = sk.at_level(ct.level)?;
    let poly = ct.c0.add(&ct.c1.mul(&s)?)?;
    Ok(Plaintext { poly, scale: ct.scale, level: ct.level })
}

fn same_scale(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

pub fn hadd(a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, CkksError> {
    if a.level != b.level {
        return Err(CkksError::LevelMismatch(a.level, b.level));
    }
    if !same_scale(a.scale, b.scale) {
        return Err(CkksError::ScaleMismatch(a.scale, b.scale));
    }
    Ciphertext::new(a.c0.add(&b.c0)?, a.c1.add(&b.c1)?, a.scale)
}

/// Divides by the last prime `q_{l-1}` and drops it.
pub fn rescale(params: &CkksParams, ct: &Ciphertext) -> Result<Ciphertext, CkksError> {
    if ct.level < 2 {
        return Err(CkksError::LevelExhausted { level: ct.level, needed: 2 });
    }
    let basis = params.level_basis(ct.level)?;
    let last = basis.range(ct.level - 1..ct.level)?;
    let q_last = last.prime(0).value() as f64;
    let drop = |p: &RnsPolynomial| -> Result<RnsPolynomial, CkksError> {
        Ok(mod_down(&p.intt()?, &last)?.ntt()?)
    };
    Ciphertext::new(drop(&ct.c0)?, drop(&ct.c1)?, ct.scale / q_last)
}

/// `(d0 + KS0(d2), d1 + KS1(d2))` followed by a rescale, with the tensor
/// `(ct0·ct0', ct0·ct1' + ct0'·ct1, ct1·ct1')`.
pub fn hmul(
    params: &CkksParams,
    a: &Ciphertext,
    b: &Ciphertext,
    evk: &EvaluationKey,
    schedule: ScheduleSpec,
) -> Result<Ciphertext, CkksError> {
    if a.level != b.level {
        return Err(CkksError::LevelMismatch(a.level, b.level));
    }
    if a.level < 2 {
        return Err(CkksError::LevelExhausted { level: a.level, needed: 2 });
    }
    if evk.source() != KeySource::Square {
        return Err(CkksError::KeyMismatch("HMUL needs the relinearisation key".into()));
    }
    let d0 = a.c0.mul(&b.c0)?;
    let d1 = a.c0.mul(&b.c1)?.add(&b.c0.mul(&a.c1)?)?;
    let d2 = a.c1.mul(&b.c1)?;
    let (ks, _) = keyswitch(params, &d2, evk, schedule)?;
    let product = Ciphertext::new(d0.add(&ks.c0)?, d1.add(&ks.c1)?, a.scale * b.scale)?;
    rescale(params, &product)
}

/// Rotates the slots left by `steps`.
///
/// Both components go through `X → X^{5^steps}`; the rotated `c1` is then
/// switched back to `s`, giving `(σ(c0) + KS0(σ(c1)), KS1(σ(c1)))`.
pub fn hrot(
    params: &CkksParams,
    ct: &Ciphertext,
    steps: i64,
    key: &EvaluationKey,
    schedule: ScheduleSpec,
) -> Result<Ciphertext, CkksError> {
    let g = galois_element(params.n(), steps);
    if g == 1 {
        return Ok(ct.clone());
    }
    if key.source() != KeySource::Galois(g) {
        return Err(CkksError::MissingKey(steps));
    }
    let c0 = automorphism(&ct.c0, g)?;
    let c1 = automorphism(&ct.c1, g)?;
    let (ks, _) = keyswitch(params, &c1, key, schedule)?;
    Ciphertext::new(c0.add(&ks.c0)?, ks.c1, ct.scale)
}

/// KeySwitch under the given dataflow schedule, returning the launch trace.
pub fn keyswitch(
    params: &CkksParams,
    d: &RnsPolynomial,
    evk: &EvaluationKey,
    schedule: ScheduleSpec,
) -> Result<(KeySwitchOutput, ExecutionTrace), CkksError> {
    run_scheduled_keyswitch(params, d, evk, schedule)
}

pub(crate) fn check_keyswitch_inputs(
    params: &CkksParams,
    d: &RnsPolynomial,
    evk: &EvaluationKey,
) -> Result<usize, CkksError> {
    let level = d.basis().len();
    params.check_level(level)?;
    if d.domain() != crate::rns::Domain::Ntt {
        return Err(crate::rns::RingError::DomainMismatch { expected: crate::rns::Domain::Ntt, found: d.domain() }.into());
    }
    if d.basis().moduli() != params.level_basis(level)?.moduli() {
        return Err(CkksError::KeyMismatch("input is not over the leading ciphertext primes".into()));
    }
    let need = params.shape().active_digits(level).len();
    if evk.len() < need {
        return Err(CkksError::DigitCount { have: evk.len(), need });
    }
    if evk.digits().iter().any(|(b, _)| b.basis().moduli() != params.full_basis().moduli()) {
        return Err(CkksError::KeyMismatch("evaluation key is not over Q ∪ P of these parameters".into()));
    }
    Ok(level)
}

/// Straight-line hybrid KeySwitch on whole polynomials, used as the reference
/// the scheduled executor is checked against.
pub fn keyswitch_reference(
    params: &CkksParams,
    d: &RnsPolynomial,
    evk: &EvaluationKey,
) -> Result<KeySwitchOutput, CkksError> {
    let level = check_keyswitch_inputs(params, d, evk)?;
    let ext = params.extended_basis(level)?;
    let key_rows = params.extended_rows(level);
    let ext_len = ext.len();
    let mut acc0 = RnsPolynomial::zero(&ext, crate::rns::Domain::Ntt);
    let mut acc1 = acc0.clone();
    for (i, digit) in params.shape().active_digits(level).into_iter().enumerate() {
        let own: Vec<usize> = digit.clone().collect();
        let others: Vec<usize> = (0..ext_len).filter(|r| !digit.contains(r)).collect();
        let coeff = d.select_rows(&own)?.intt()?;
        let raised = bconv(&coeff, &ext.select(&others)?)?.ntt()?;
        let mut rows = vec![Vec::new(); ext_len];
        for (k, &r) in others.iter().enumerate() {
            rows[r] = raised.row(k).to_vec();
        }
        for &r in &own {
            rows[r] = d.row(r).to_vec();
        }
        let expanded = RnsPolynomial::from_rows(&ext, rows, crate::rns::Domain::Ntt)?;
        let (b, a) = &evk.digits()[i];
        acc0 = acc0.add(&expanded.mul(&b.select_rows(&key_rows)?)?)?;
        acc1 = acc1.add(&expanded.mul(&a.select_rows(&key_rows)?)?)?;
    }
    let special = params.special_basis();
    let c0 = mod_down(&acc0.intt()?, special)?.ntt()?;
    let c1 = mod_down(&acc1.intt()?, special)?.ntt()?;
    Ok(KeySwitchOutput { c0, c1 })
}

/// The key an evaluation key re-encrypts, over the full basis.
pub(crate) fn source_key(sk: &SecretKey, source: KeySource) -> Result<RnsPolynomial, CkksError> {
    match source {
        KeySource::Square => Ok(sk.poly().mul(sk.poly())?),
        KeySource::Galois(g) => automorphism(sk.poly(), g),
    }
}

/// `‖⟨out, (1, s)⟩ − d·s_src‖_∞` over every prime of `Q_l`.
pub fn keyswitch_error(
    sk: &SecretKey,
    source: KeySource,
    d: &RnsPolynomial,
    out: &KeySwitchOutput,
) -> Result<i64, CkksError> {
    let level = d.basis().len();
    let s = sk.at_level(level)?;
    let src = source_key(sk, source)?.truncate_rows(level)?;
    let diff = out.c0.add(&out.c1.mul(&s)?)?.sub(&d.mul(&src)?)?.intt()?;
    Ok(max_centered(&diff))
}

pub(crate) fn max_centered(p: &RnsPolynomial) -> i64 {
    p.rows()
        .iter()
        .zip(p.basis().moduli())
        .flat_map(|(row, q)| row.iter().map(move |&c| center(c, q).abs()))
        .max()
        .unwrap_or(0)
}
