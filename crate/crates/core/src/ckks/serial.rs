//! Byte encoding of ciphertexts: `magic, level, scale bits` as little-endian
//! words followed by the two component polynomials.

use super::{Ciphertext, CkksError, CkksParams};
use crate::rns::{RingError, RnsPolynomial, WordReader};

const CT_MAGIC: u64 = u64::from_le_bytes(*b"CKKSCT01");

impl Ciphertext {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for w in [CT_MAGIC, self.level as u64, self.scale.to_bits()] {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.extend(self.c0.to_bytes());
        out.extend(self.c1.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &CkksParams) -> Result<Self, CkksError> {
        let mut reader = WordReader { bytes, pos: 0 };
        if reader.next()? != CT_MAGIC {
            return Err(RingError::Decode("bad ciphertext magic".into()).into());
        }
        let level = reader.next()? as usize;
        let scale = f64::from_bits(reader.next()?);
        let basis = params.level_basis(level)?;
        let (c0, used0) = RnsPolynomial::from_bytes(&bytes[reader.pos..], &basis)?;
        let (c1, used1) = RnsPolynomial::from_bytes(&bytes[reader.pos + used0..], &basis)?;
        if reader.pos + used0 + used1 != bytes.len() {
            return Err(RingError::Decode("trailing bytes after ciphertext".into()).into());
        }
        let ct = Ciphertext::new(c0, c1, scale)?;
        if ct.level != level {
            return Err(RingError::Decode(format!("header level {level}, body level {}", ct.level)).into());
        }
        Ok(ct)
    }
}
