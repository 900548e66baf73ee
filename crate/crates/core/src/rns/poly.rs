use serde::{Deserialize, Serialize};

use super::arith::{add_mod, mul_mod, neg_mod, reduce_i64, sub_mod};
use super::{RingError, RnsBasis};

/// Representation of a polynomial's residue rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    Coefficient,
    Ntt,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Coefficient => 0,
            Domain::Ntt => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointwiseOp {
    Add,
    Sub,
    Mul,
}

/// An element of `Z_Q[x]/(x^n + 1)` held as one residue row per prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RnsPolynomial {
    basis: RnsBasis,
    residues: Vec<Vec<u64>>,
    domain: Domain,
}

impl RnsPolynomial {
    pub fn zero(basis: &RnsBasis, domain: Domain) -> Self {
        let n = basis.degree();
        Self { basis: basis.clone(), residues: vec![vec![0; n]; basis.len()], domain }
    }

    /// Wraps residue rows, checking shape and that every value is reduced.
    pub fn from_rows(
        basis: &RnsBasis,
        residues: Vec<Vec<u64>>,
        domain: Domain,
    ) -> Result<Self, RingError> {
        if residues.len() != basis.len() {
            return Err(RingError::LengthMismatch { expected: basis.len(), found: residues.len() });
        }
        for (i, row) in residues.iter().enumerate() {
            if row.len() != basis.degree() {
                return Err(RingError::LengthMismatch { expected: basis.degree(), found: row.len() });
            }
            let q = basis.prime(i).value();
            if let Some(&v) = row.iter().find(|&&v| v >= q) {
                return Err(RingError::UnreducedResidue { value: v, modulus: q });
            }
        }
        Ok(Self { basis: basis.clone(), residues, domain })
    }

    /// Lifts signed integer coefficients into every prime of `basis`.
    pub fn from_signed(basis: &RnsBasis, coeffs: &[i64]) -> Result<Self, RingError> {
        if coeffs.len() != basis.degree() {
            return Err(RingError::LengthMismatch { expected: basis.degree(), found: coeffs.len() });
        }
        let residues = basis
            .primes()
            .iter()
            .map(|p| coeffs.iter().map(|&c| reduce_i64(c, p.value())).collect())
            .collect();
        Ok(Self { basis: basis.clone(), residues, domain: Domain::Coefficient })
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn basis(&self) -> &RnsBasis {
        &self.basis
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.residues
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.residues[i]
    }

    pub fn into_rows(self) -> Vec<Vec<u64>> {
        self.residues
    }

    fn expect_domain(&self, expected: Domain) -> Result<(), RingError> {
        if self.domain != expected {
            return Err(RingError::DomainMismatch { expected, found: self.domain });
        }
        Ok(())
    }

    /// Forward negacyclic NTT on every row.
    pub fn ntt(&self) -> Result<Self, RingError> {
        self.expect_domain(Domain::Coefficient)?;
        let mut out = self.clone();
        for (row, p) in out.residues.iter_mut().zip(self.basis.primes()) {
            p.forward(row);
        }
        out.domain = Domain::Ntt;
        Ok(out)
    }

    /// Inverse NTT on every row.
    pub fn intt(&self) -> Result<Self, RingError> {
        self.expect_domain(Domain::Ntt)?;
        let mut out = self.clone();
        for (row, p) in out.residues.iter_mut().zip(self.basis.primes()) {
            p.inverse(row);
        }
        out.domain = Domain::Coefficient;
        Ok(out)
    }

    /// Elementwise modular arithmetic. In the NTT domain `Mul` is the ring product.
    pub fn pointwise(op: PointwiseOp, a: &Self, b: &Self) -> Result<Self, RingError> {
        if a.basis.moduli() != b.basis.moduli() {
            return Err(RingError::BasisMismatch);
        }
        b.expect_domain(a.domain)?;
        let residues = a
            .residues
            .iter()
            .zip(&b.residues)
            .zip(a.basis.primes())
            .map(|((ra, rb), p)| {
                let q = p.value();
                ra.iter()
                    .zip(rb)
                    .map(|(&x, &y)| match op {
                        PointwiseOp::Add => add_mod(x, y, q),
                        PointwiseOp::Sub => sub_mod(x, y, q),
                        PointwiseOp::Mul => mul_mod(x, y, q),
                    })
                    .collect()
            })
            .collect();
        Ok(Self { basis: a.basis.clone(), residues, domain: a.domain })
    }

    pub fn add(&self, other: &Self) -> Result<Self, RingError> {
        Self::pointwise(PointwiseOp::Add, self, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, RingError> {
        Self::pointwise(PointwiseOp::Sub, self, other)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, RingError> {
        Self::pointwise(PointwiseOp::Mul, self, other)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for (row, p) in out.residues.iter_mut().zip(self.basis.primes()) {
            let q = p.value();
            row.iter_mut().for_each(|x| *x = neg_mod(*x, q));
        }
        out
    }

    /// Multiplies row `i` by `scalars[i]`.
    pub fn scale_rows(&self, scalars: &[u64]) -> Self {
        let mut out = self.clone();
        for ((row, p), &s) in out.residues.iter_mut().zip(self.basis.primes()).zip(scalars) {
            let q = p.value();
            let s = s % q;
            row.iter_mut().for_each(|x| *x = mul_mod(*x, s, q));
        }
        out
    }

    /// Keeps the given rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self, RingError> {
        Ok(Self {
            basis: self.basis.select(rows)?,
            residues: rows.iter().map(|&i| self.residues[i].clone()).collect(),
            domain: self.domain,
        })
    }

    /// Keeps the first `count` rows.
    pub fn truncate_rows(&self, count: usize) -> Result<Self, RingError> {
        let rows: Vec<usize> = (0..count).collect();
        self.select_rows(&rows)
    }

    /// Serializes as a little-endian word stream:
    /// `magic, n, rows, domain, moduli[rows], residues[rows][n]`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut words = Vec::with_capacity(4 + self.basis.len() * (self.degree() + 1));
        words.extend([POLY_MAGIC, self.degree() as u64, self.basis.len() as u64, self.domain.tag()]);
        words.extend(self.basis.moduli());
        for row in &self.residues {
            words.extend_from_slice(row);
        }
        words.iter().flat_map(|w| w.to_le_bytes()).collect()
    }

    /// Parses [`to_bytes`](Self::to_bytes) output. The moduli in the header are
    /// resolved against `basis`, whose primes carry the NTT tables.
    pub fn from_bytes(bytes: &[u8], basis: &RnsBasis) -> Result<(Self, usize), RingError> {
        let mut reader = WordReader { bytes, pos: 0 };
        if reader.next()? != POLY_MAGIC {
            return Err(RingError::Decode("bad polynomial magic".into()));
        }
        let n = reader.next()? as usize;
        let rows = reader.next()? as usize;
        let domain = match reader.next()? {
            0 => Domain::Coefficient,
            1 => Domain::Ntt,
            t => return Err(RingError::Decode(format!("unknown domain tag {t}"))),
        };
        if n != basis.degree() {
            return Err(RingError::Decode(format!("degree {n} does not match basis degree {}", basis.degree())));
        }
        let mut idx = Vec::with_capacity(rows);
        for _ in 0..rows {
            let q = reader.next()?;
            idx.push(basis.position(q).ok_or_else(|| RingError::Decode(format!("modulus {q} not in basis")))?);
        }
        let sub = basis.select(&idx)?;
        let mut residues = Vec::with_capacity(rows);
        for _ in 0..rows {
            let mut row = Vec::with_capacity(n);
            for _ in 0..n {
                row.push(reader.next()?);
            }
            residues.push(row);
        }
        Ok((Self::from_rows(&sub, residues, domain)?, reader.pos))
    }
}

const POLY_MAGIC: u64 = u64::from_le_bytes(*b"RNSPOLY1");

pub(crate) struct WordReader<'a> {
    pub bytes: &'a [u8],
    pub pos: usize,
}

impl WordReader<'_> {
    pub fn next(&mut self) -> Result<u64, RingError> {
        let end = self.pos + 8;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| RingError::Decode("unexpected end of input".into()))?;
        self.pos = end;
        Ok(u64::from_le_bytes(chunk.try_into().expect("8-byte slice")))
    }
}
