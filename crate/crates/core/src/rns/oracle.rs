//! Slow reference implementations used to check the fast paths.
//!
//! Nothing here is used by the engine itself.

use super::arith::{add_mod, mul_mod, pow_mod, sub_mod};
use super::{PrimeModulus, RingError};

/// Direct `O(n²)` evaluation of `out_j = Σ_k a_k · psi^{(2j+1)k} mod q`.
pub fn dft_oracle(coeffs: &[u64], modulus: &PrimeModulus) -> Result<Vec<u64>, RingError> {
    let n = modulus.degree();
    if coeffs.len() != n {
        return Err(RingError::LengthMismatch { expected: n, found: coeffs.len() });
    }
    let q = modulus.value();
    Ok((0..n)
        .map(|j| {
            let root = pow_mod(modulus.psi(), 2 * j as u64 + 1, q);
            let mut acc = 0;
            let mut w = 1;
            for &a in coeffs {
                acc = add_mod(acc, mul_mod(a % q, w, q), q);
                w = mul_mod(w, root, q);
            }
            acc
        })
        .collect())
}

/// Schoolbook product in `Z_q[x]/(x^n + 1)`.
pub fn schoolbook_negacyclic(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let n = a.len();
    assert_eq!(n, b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        for j in 0..n {
            let t = mul_mod(a[i], b[j], q);
            let k = i + j;
            if k < n {
                out[k] = add_mod(out[k], t, q);
            } else {
                out[k - n] = sub_mod(out[k - n], t, q);
            }
        }
    }
    out
}

/// Exact CRT reconstruction by search, for products of moduli below 2^40.
pub fn crt_reconstruct(residues: &[u64], moduli: &[u64]) -> u128 {
    assert_eq!(residues.len(), moduli.len());
    let mut value: u128 = 0;
    let mut step: u128 = 1;
    for (&r, &m) in residues.iter().zip(moduli) {
        while value % m as u128 != r as u128 {
            value += step;
        }
        step *= m as u128;
    }
    value
}
