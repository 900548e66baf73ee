use super::arith::{add_mod, inv_mod, mul_mod, sub_mod};
use super::{Domain, RingError, RnsBasis, RnsPolynomial};

/// Precomputed constants for the approximate (no flooring correction) fast
/// base conversion from `source` to `target`.
///
/// For source residues `a_i` the output modulo `p` is
/// `Σ_i [a_i · (Q/q_i)^{-1}]_{q_i} · (Q/q_i) mod p`, which equals the exact
/// value plus `e·Q` for some `0 ≤ e < source.len()`.
#[derive(Clone, Debug)]
pub struct BaseConverter {
    source: RnsBasis,
    target: RnsBasis,
    /// `[(Q/q_i)^{-1}]_{q_i}` per source prime.
    q_hat_inv: Vec<u64>,
    /// `[Q/q_i]_{p_j}` indexed `[target j][source i]`.
    q_hat_mod_target: Vec<Vec<u64>>,
}

impl BaseConverter {
    pub fn new(source: &RnsBasis, target: &RnsBasis) -> Result<Self, RingError> {
        if source.is_empty() {
            return Err(RingError::EmptyBasis);
        }
        let src = source.moduli();
        let q_hat_inv = src
            .iter()
            .enumerate()
            .map(|(i, &qi)| {
                let hat = src
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i)
                    .fold(1u64, |acc, (_, &qk)| mul_mod(acc, qk % qi, qi));
                inv_mod(hat, qi).ok_or(RingError::BasisMismatch)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let q_hat_mod_target = target
            .moduli()
            .iter()
            .map(|&p| {
                (0..src.len())
                    .map(|i| {
                        src.iter()
                            .enumerate()
                            .filter(|&(k, _)| k != i)
                            .fold(1 % p, |acc, (_, &qk)| mul_mod(acc, qk % p, p))
                    })
                    .collect()
            })
            .collect();
        Ok(Self { source: source.clone(), target: target.clone(), q_hat_inv, q_hat_mod_target })
    }

    pub fn source(&self) -> &RnsBasis {
        &self.source
    }

    pub fn target(&self) -> &RnsBasis {
        &self.target
    }

    /// First pass: `y_i = [a_i · (Q/q_i)^{-1}]_{q_i}` for every source row.
    pub fn scale_inputs<R: AsRef<[u64]>>(&self, rows: &[R]) -> Vec<Vec<u64>> {
        assert_eq!(rows.len(), self.source.len(), "one input row per source prime");
        rows.iter()
            .zip(&self.q_hat_inv)
            .zip(self.source.primes())
            .map(|((row, &c), p)| {
                let q = p.value();
                row.as_ref().iter().map(|&a| mul_mod(a, c, q)).collect()
            })
            .collect()
    }

    /// Second pass for a single target row `j`, given [`scale_inputs`](Self::scale_inputs) output.
    pub fn convert_row(&self, scaled: &[Vec<u64>], j: usize) -> Vec<u64> {
        let p = self.target.prime(j).value();
        let hats = &self.q_hat_mod_target[j];
        let n = scaled[0].len();
        let mut out = vec![0u64; n];
        for (y, &h) in scaled.iter().zip(hats) {
            for (o, &v) in out.iter_mut().zip(y) {
                *o = add_mod(*o, mul_mod(v, h, p), p);
            }
        }
        out
    }

    /// Converts a whole coefficient-domain polynomial over `source`.
    pub fn convert(&self, poly: &RnsPolynomial) -> Result<RnsPolynomial, RingError> {
        if poly.domain() != Domain::Coefficient {
            return Err(RingError::DomainMismatch { expected: Domain::Coefficient, found: poly.domain() });
        }
        if poly.basis().moduli() != self.source.moduli() {
            return Err(RingError::BasisMismatch);
        }
        let scaled = self.scale_inputs(poly.rows());
        let rows = (0..self.target.len()).map(|j| self.convert_row(&scaled, j)).collect();
        RnsPolynomial::from_rows(&self.target, rows, Domain::Coefficient)
    }
}

/// Fast base conversion of a coefficient-domain polynomial onto `target`.
pub fn bconv(poly: &RnsPolynomial, target: &RnsBasis) -> Result<RnsPolynomial, RingError> {
    BaseConverter::new(poly.basis(), target)?.convert(poly)
}

/// Divides by `P = Π special` and drops the special primes:
/// `[P^{-1}]_Q · (x_Q − bconv_{P→Q}(x_P))`.
///
/// `special` must be the trailing primes of the polynomial's basis.
pub fn mod_down(poly: &RnsPolynomial, special: &RnsBasis) -> Result<RnsPolynomial, RingError> {
    ModDown::new(poly.basis(), special)?.apply(poly)
}

/// Precomputed constants for [`mod_down`].
#[derive(Clone, Debug)]
pub struct ModDown {
    converter: BaseConverter,
    /// `[P^{-1}]_{q_i}` per kept prime.
    p_inv: Vec<u64>,
    keep: usize,
}

impl ModDown {
    pub fn new(full: &RnsBasis, special: &RnsBasis) -> Result<Self, RingError> {
        let (f, s) = (full.moduli(), special.moduli());
        if s.is_empty() || s.len() >= f.len() || f[f.len() - s.len()..] != s[..] {
            return Err(RingError::NotASuffix);
        }
        let keep = f.len() - s.len();
        let kept = full.range(0..keep)?;
        let converter = BaseConverter::new(special, &kept)?;
        let p_inv = kept
            .moduli()
            .iter()
            .map(|&q| inv_mod(special.product_mod(q), q).ok_or(RingError::BasisMismatch))
            .collect::<Result<_, _>>()?;
        Ok(Self { converter, p_inv, keep })
    }

    pub fn converter(&self) -> &BaseConverter {
        &self.converter
    }

    pub fn p_inv(&self) -> &[u64] {
        &self.p_inv
    }

    /// `(x − c) · P^{-1} mod q` for one kept row. Valid in either domain.
    pub fn finish_row(&self, row: usize, x: &[u64], converted: &[u64]) -> Vec<u64> {
        let q = self.converter.target().prime(row).value();
        let s = self.p_inv[row];
        x.iter().zip(converted).map(|(&a, &c)| mul_mod(sub_mod(a, c, q), s, q)).collect()
    }

    pub fn apply(&self, poly: &RnsPolynomial) -> Result<RnsPolynomial, RingError> {
        if poly.domain() != Domain::Coefficient {
            return Err(RingError::DomainMismatch { expected: Domain::Coefficient, found: poly.domain() });
        }
        let special_rows = &poly.rows()[self.keep..];
        let scaled = self.converter.scale_inputs(special_rows);
        let rows = (0..self.keep)
            .map(|j| {
                let c = self.converter.convert_row(&scaled, j);
                self.finish_row(j, poly.row(j), &c)
            })
            .collect();
        RnsPolynomial::from_rows(self.converter.target(), rows, Domain::Coefficient)
    }
}
