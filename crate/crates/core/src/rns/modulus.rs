use super::arith::{
    add_mod, inv_mod, is_prime, mul_mod, mul_shoup, pow_mod, shoup, sub_mod,
};
use super::RingError;

/// An NTT-friendly prime `q ≡ 1 (mod 2n)` together with its negacyclic
/// transform tables.
///
/// Twiddle tables hold powers of `psi` indexed in bit-reversed order, which is
/// what the in-place Cooley-Tukey / Gentleman-Sande loops consume.
#[derive(Clone, PartialEq, Eq)]
pub struct PrimeModulus {
    q: u64,
    n: usize,
    psi: u64,
    twiddles: Vec<u64>,
    twiddles_shoup: Vec<u64>,
    inv_twiddles: Vec<u64>,
    inv_twiddles_shoup: Vec<u64>,
    n_inv: u64,
    n_inv_shoup: u64,
}

impl std::fmt::Debug for PrimeModulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PrimeModulus")
            .field("q", &self.q)
            .field("n", &self.n)
            .field("psi", &self.psi)
            .finish()
    }
}

pub(crate) fn bit_reverse(mut x: usize, bits: u32) -> usize {
    if bits == 0 {
        return 0;
    }
    x = x.reverse_bits();
    x >> (usize::BITS - bits)
}

impl PrimeModulus {
    /// Builds the modulus using the smallest primitive `2n`-th root of unity.
    pub fn new(q: u64, n: usize) -> Result<Self, RingError> {
        Self::check(q, n)?;
        let psi = smallest_primitive_root(q, n).ok_or(RingError::NoRootOfUnity { q, n })?;
        Self::with_root(q, n, psi)
    }

    /// Builds the modulus around a caller-chosen `psi`, which must satisfy
    /// `psi^n ≡ -1 (mod q)`.
    pub fn with_root(q: u64, n: usize, psi: u64) -> Result<Self, RingError> {
        Self::check(q, n)?;
        if psi == 0 || psi >= q || pow_mod(psi, n as u64, q) != q - 1 {
            return Err(RingError::NoRootOfUnity { q, n });
        }
        let bits = n.trailing_zeros();
        let psi_inv = inv_mod(psi, q).expect("psi is a unit");
        let mut pows = vec![1u64; n];
        let mut inv_pows = vec![1u64; n];
        for i in 1..n {
            pows[i] = mul_mod(pows[i - 1], psi, q);
            inv_pows[i] = mul_mod(inv_pows[i - 1], psi_inv, q);
        }
        let twiddles: Vec<u64> = (0..n).map(|i| pows[bit_reverse(i, bits)]).collect();
        let inv_twiddles: Vec<u64> = (0..n).map(|i| inv_pows[bit_reverse(i, bits)]).collect();
        let n_inv = inv_mod(n as u64 % q, q).expect("n is a unit mod q");
        Ok(Self {
            q,
            n,
            psi,
            twiddles_shoup: twiddles.iter().map(|&w| shoup(w, q)).collect(),
            inv_twiddles_shoup: inv_twiddles.iter().map(|&w| shoup(w, q)).collect(),
            twiddles,
            inv_twiddles,
            n_inv,
            n_inv_shoup: shoup(n_inv, q),
        })
    }

    fn check(q: u64, n: usize) -> Result<(), RingError> {
        if !n.is_power_of_two() {
            return Err(RingError::InvalidDegree(n));
        }
        if q >= 1 << 62 || !is_prime(q) || q % (2 * n as u64) != 1 {
            return Err(RingError::InvalidModulus { q, n });
        }
        Ok(())
    }

    pub fn value(&self) -> u64 {
        self.q
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn psi(&self) -> u64 {
        self.psi
    }

    /// Powers of `psi` in bit-reversed order.
    pub fn twiddles(&self) -> &[u64] {
        &self.twiddles
    }

    pub fn inv_twiddles(&self) -> &[u64] {
        &self.inv_twiddles
    }

    pub fn n_inv(&self) -> u64 {
        self.n_inv
    }

    /// In-place forward negacyclic NTT of one residue row.
    ///
    /// On return `a[j] = Σ_k a_k · psi^{(2j+1)k}` in natural order.
    pub fn forward(&self, a: &mut [u64]) {
        assert_eq!(a.len(), self.n, "row length must equal the ring degree");
        let q = self.q;
        let n = self.n;
        let mut t = n;
        let mut m = 1;
        while m < n {
            t >>= 1;
            for i in 0..m {
                let w = self.twiddles[m + i];
                let ws = self.twiddles_shoup[m + i];
                let j1 = 2 * i * t;
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = mul_shoup(a[j + t], w, ws, q);
                    a[j] = add_mod(u, v, q);
                    a[j + t] = sub_mod(u, v, q);
                }
            }
            m <<= 1;
        }
        permute_bit_reversed(a);
    }

    /// In-place inverse of [`forward`](Self::forward), including the `n^{-1}` scaling.
    pub fn inverse(&self, a: &mut [u64]) {
        assert_eq!(a.len(), self.n, "row length must equal the ring degree");
        permute_bit_reversed(a);
        let q = self.q;
        let mut t = 1;
        let mut m = self.n;
        while m > 1 {
            let h = m >> 1;
            let mut j1 = 0;
            for i in 0..h {
                let w = self.inv_twiddles[h + i];
                let ws = self.inv_twiddles_shoup[h + i];
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = a[j + t];
                    a[j] = add_mod(u, v, q);
                    a[j + t] = mul_shoup(sub_mod(u, v, q), w, ws, q);
                }
                j1 += 2 * t;
            }
            t <<= 1;
            m = h;
        }
        for x in a.iter_mut() {
            *x = mul_shoup(*x, self.n_inv, self.n_inv_shoup, q);
        }
    }
}

fn permute_bit_reversed(a: &mut [u64]) {
    let bits = a.len().trailing_zeros();
    for i in 0..a.len() {
        let j = bit_reverse(i, bits);
        if i < j {
            a.swap(i, j);
        }
    }
}

fn smallest_primitive_root(q: u64, n: usize) -> Option<u64> {
    let order = 2 * n as u64;
    let cofactor = (q - 1) / order;
    let root = (2..q.min(1 << 20))
        .map(|g| pow_mod(g, cofactor, q))
        .find(|&x| pow_mod(x, n as u64, q) == q - 1)?;
    // Every primitive 2n-th root is an odd power of any other one.
    let root_sq = mul_mod(root, root, q);
    let mut best = root;
    let mut cur = root;
    for _ in 1..n {
        cur = mul_mod(cur, root_sq, q);
        best = best.min(cur);
    }
    Some(best)
}

/// Scans downward from `2^bit_size` for `count` primes `q ≡ 1 (mod 2n)` that
/// have `bit_size` bits.
pub fn generate_prime_chain(
    bit_size: u32,
    count: usize,
    n: usize,
) -> Result<Vec<PrimeModulus>, RingError> {
    if !(2..=61).contains(&bit_size) {
        return Err(RingError::InvalidBitSize(bit_size));
    }
    if !n.is_power_of_two() {
        return Err(RingError::InvalidDegree(n));
    }
    let step = 2 * n as u64;
    let lower = 1u64 << (bit_size - 1);
    let upper = 1u64 << bit_size;
    let exhausted = || RingError::PrimeExhaustion { bit_size, count, n };
    // Largest candidate below 2^bit_size that is ≡ 1 mod 2n.
    if upper <= step {
        return Err(exhausted());
    }
    let mut candidate = (upper - 1) / step * step + 1;
    if candidate >= upper {
        candidate -= step;
    }
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if candidate < lower {
            return Err(exhausted());
        }
        if is_prime(candidate) {
            out.push(PrimeModulus::new(candidate, n)?);
        }
        if candidate < step {
            return Err(exhausted());
        }
        candidate -= step;
    }
    Ok(out)
}
