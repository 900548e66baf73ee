//! Canonical-embedding encoder.
//!
//! Slot `j` holds the evaluation of the message polynomial at `ζ^{5^j}` with
//! `ζ = exp(iπ/N)`, so the automorphism `X → X^{5^r}` rotates slots by `r`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{CkksError, CkksParams, Plaintext};
use crate::rns::arith::center;
use crate::rns::{Domain, RnsPolynomial};

#[derive(Clone, Debug)]
pub struct Encoder {
    n: usize,
    rot_group: Vec<usize>,
    ksi_pows: Vec<Complex64>,
}

impl Encoder {
    pub fn new(n: usize) -> Self {
        let m = 2 * n;
        let slots = n / 2;
        let mut rot_group = Vec::with_capacity(slots);
        let mut g = 1usize;
        for _ in 0..slots {
            rot_group.push(g);
            g = g * 5 % m;
        }
        let ksi_pows = (0..=m)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64))
            .collect();
        Self { n, rot_group, ksi_pows }
    }

    pub fn slots(&self) -> usize {
        self.n / 2
    }

    fn fft_special(&self, vals: &mut [Complex64]) {
        let size = vals.len();
        let m = 2 * self.n;
        bit_reverse_permute(vals);
        let mut len = 2;
        while len <= size {
            let lenh = len / 2;
            let lenq = len * 4;
            for i in (0..size).step_by(len) {
                for j in 0..lenh {
                    let idx = (self.rot_group[j] % lenq) * m / lenq;
                    let u = vals[i + j];
                    let v = vals[i + j + lenh] * self.ksi_pows[idx];
                    vals[i + j] = u + v;
                    vals[i + j + lenh] = u - v;
                }
            }
            len *= 2;
        }
    }

    fn fft_special_inv(&self, vals: &mut [Complex64]) {
        let size = vals.len();
        let m = 2 * self.n;
        let mut len = size;
        while len >= 2 {
            let lenh = len / 2;
            let lenq = len * 4;
            for i in (0..size).step_by(len) {
                for j in 0..lenh {
                    let idx = (lenq - self.rot_group[j] % lenq) * m / lenq;
                    let u = vals[i + j] + vals[i + j + lenh];
                    let v = (vals[i + j] - vals[i + j + lenh]) * self.ksi_pows[idx];
                    vals[i + j] = u;
                    vals[i + j + lenh] = v;
                }
            }
            len /= 2;
        }
        bit_reverse_permute(vals);
        let inv = 1.0 / size as f64;
        vals.iter_mut().for_each(|v| *v *= inv);
    }

    /// Integer coefficients of `round(Δ · m(X))` for the given slot values.
    pub fn encode_coeffs(&self, values: &[Complex64], scale: f64) -> Result<Vec<i64>, CkksError> {
        let slots = self.slots();
        if values.len() > slots {
            return Err(CkksError::InvalidParams(format!("{} values exceed {slots} slots", values.len())));
        }
        let mut vals = vec![Complex64::new(0.0, 0.0); slots];
        vals[..values.len()].copy_from_slice(values);
        self.fft_special_inv(&mut vals);
        let mut coeffs = vec![0i64; self.n];
        for (i, v) in vals.iter().enumerate() {
            coeffs[i] = to_int(v.re * scale)?;
            coeffs[i + slots] = to_int(v.im * scale)?;
        }
        Ok(coeffs)
    }

    /// Inverse of [`encode_coeffs`](Self::encode_coeffs).
    pub fn decode_coeffs(&self, coeffs: &[f64], scale: f64) -> Vec<Complex64> {
        let slots = self.slots();
        let mut vals: Vec<Complex64> =
            (0..slots).map(|i| Complex64::new(coeffs[i] / scale, coeffs[i + slots] / scale)).collect();
        self.fft_special(&mut vals);
        vals
    }

    /// Encodes at `level` with scale `Δ`; the result is in the NTT domain.
    pub fn encode(
        &self,
        params: &CkksParams,
        values: &[Complex64],
        level: usize,
        scale: f64,
    ) -> Result<Plaintext, CkksError> {
        let basis = params.level_basis(level)?;
        let coeffs = self.encode_coeffs(values, scale)?;
        let q0 = basis.prime(0).value();
        if coeffs.iter().any(|&c| c.unsigned_abs() >= q0 / 2) {
            return Err(CkksError::Overflow);
        }
        let poly = RnsPolynomial::from_signed(&basis, &coeffs)?.ntt()?;
        Ok(Plaintext { poly, scale, level })
    }

    /// Decodes from the centered residues modulo `q_0`, which hold the message
    /// exactly whenever its coefficients stay below `q_0 / 2`.
    pub fn decode(&self, pt: &Plaintext) -> Result<Vec<Complex64>, CkksError> {
        let poly = match pt.poly.domain() {
            Domain::Ntt => pt.poly.intt()?,
            Domain::Coefficient => pt.poly.clone(),
        };
        let q0 = poly.basis().prime(0).value();
        let coeffs: Vec<f64> = poly.row(0).iter().map(|&c| center(c, q0) as f64).collect();
        Ok(self.decode_coeffs(&coeffs, pt.scale))
    }
}

fn to_int(x: f64) -> Result<i64, CkksError> {
    let r = x.round();
    if !r.is_finite() || r.abs() >= 2f64.powi(62) {
        return Err(CkksError::Overflow);
    }
    Ok(r as i64)
}

fn bit_reverse_permute<T>(vals: &mut [T]) {
    let n = vals.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j ^= bit;
        if i < j {
            vals.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn random_values(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    #[test]
    fn fft_pair_roundtrip() {
        let enc = Encoder::new(64);
        let v = random_values(32, 3);
        let mut w = v.clone();
        enc.fft_special_inv(&mut w);
        enc.fft_special(&mut w);
        for (a, b) in v.iter().zip(&w) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn encoding_is_the_canonical_embedding() {
        // Check a few slots against direct polynomial evaluation.
        let n = 32;
        let enc = Encoder::new(n);
        let v = random_values(n / 2, 9);
        let scale = 2f64.powi(30);
        let coeffs = enc.encode_coeffs(&v, scale).unwrap();
        let m = 2 * n;
        for j in [0, 1, 5, 15] {
            let exp = enc.rot_group[j];
            let root = Complex64::from_polar(1.0, 2.0 * PI * exp as f64 / m as f64);
            let eval: Complex64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| root.powu(k as u32) * c as f64)
                .sum::<Complex64>()
                / scale;
            assert!((eval - v[j]).norm() < 1e-6, "slot {j}: {eval} vs {}", v[j]);
        }
    }

    #[test]
    fn zero_vector_encodes_to_zero() {
        let enc = Encoder::new(16);
        let z = vec![Complex64::new(0.0, 0.0); 8];
        assert!(enc.encode_coeffs(&z, 2f64.powi(40)).unwrap().iter().all(|&c| c == 0));
    }

    #[test]
    fn encode_is_linear_up_to_rounding() {
        let enc = Encoder::new(256);
        let scale = 2f64.powi(40);
        let u = random_values(128, 1);
        let v = random_values(128, 2);
        let sum: Vec<Complex64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let (cu, cv, cs) = (
            enc.encode_coeffs(&u, scale).unwrap(),
            enc.encode_coeffs(&v, scale).unwrap(),
            enc.encode_coeffs(&sum, scale).unwrap(),
        );
        for k in 0..256 {
            assert!((cs[k] - cu[k] - cv[k]).abs() <= 1, "coefficient {k}");
        }
    }

    #[test]
    fn roundtrip_within_tolerance() {
        let n = 1 << 10;
        let params = CkksParams::builder(n, 2, 1).build().unwrap();
        let enc = Encoder::new(n);
        let v = random_values(n / 2, 4);
        let pt = enc.encode(&params, &v, 2, params.scale()).unwrap();
        let back = enc.decode(&pt).unwrap();
        let err = v.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 2f64.powi(-20), "max error {err}");
    }

    #[test]
    fn overflow_is_reported() {
        let n = 1 << 10;
        let params = CkksParams::builder(n, 2, 1).build().unwrap();
        let enc = Encoder::new(n);
        let big = vec![Complex64::new(1e9, 0.0); n / 2];
        assert_eq!(enc.encode(&params, &big, 2, params.scale()).unwrap_err(), CkksError::Overflow);
    }
}
