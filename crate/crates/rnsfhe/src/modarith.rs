//! Word-size modular arithmetic over NTT-friendly primes.
//!
//! Residues are plain integers in `[0, q)`. Products go through a Barrett
//! reduction with a 128-bit intermediate, which covers every modulus up to
//! 54 bits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported modulus width.
pub const MAX_BITS: u32 = 54;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("no {bits}-bit prime congruent to 1 mod {two_n} (requested index {skip})")]
    NoPrimeFound { bits: u32, two_n: u64, skip: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} is not a prime")]
    NotPrime(u64),
}

/// How twiddle factors are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TwiddleMode {
    #[default]
    Stored,
    OnTheFly,
}

pub fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1u64 % q;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % q as u128) as u64;
        }
        base = ((base as u128 * base as u128) % q as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit candidates.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

pub fn bit_reverse(x: usize, log_n: u32) -> usize {
    if log_n == 0 {
        0
    } else {
        x.reverse_bits() >> (usize::BITS - log_n)
    }
}

/// An NTT-friendly prime together with its 2N-th root of unity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeModulus {
    pub q: u64,
    pub two_n: u64,
    pub psi: u64,
    pub psi_inv: u64,
    pub n_inv: u64,
    bits: u32,
    mu: u128,
}

impl PrimeModulus {
    /// Builds a modulus from a known prime, picking the smallest generator-derived root.
    pub fn new(q: u64, two_n: u64) -> Result<Self, ArithError> {
        if !two_n.is_power_of_two() || two_n < 2 {
            return Err(ArithError::InvalidParameter(format!("2N = {two_n} is not a power of two")));
        }
        if q >= 1 << MAX_BITS {
            return Err(ArithError::InvalidParameter(format!("{q} exceeds {MAX_BITS} bits")));
        }
        if !is_prime(q) {
            return Err(ArithError::NotPrime(q));
        }
        if (q - 1) % two_n != 0 {
            return Err(ArithError::InvalidParameter(format!("{q} is not 1 mod {two_n}")));
        }
        let n = two_n / 2;
        let cofactor = (q - 1) / two_n;
        let psi = (2..q)
            .map(|x| pow_mod(x, cofactor, q))
            .find(|&g| pow_mod(g, n, q) == q - 1)
            .ok_or_else(|| ArithError::InvalidParameter(format!("no 2N-th root mod {q}")))?;
        Self::with_root(q, two_n, psi)
    }

    /// Builds a modulus with a caller-chosen primitive 2N-th root.
    pub fn with_root(q: u64, two_n: u64, psi: u64) -> Result<Self, ArithError> {
        let n = two_n / 2;
        if pow_mod(psi, n, q) != q - 1 {
            return Err(ArithError::InvalidParameter(format!("{psi} is not a primitive {two_n}-th root mod {q}")));
        }
        let bits = 64 - q.leading_zeros();
        let mu = (1u128 << (2 * bits)) / q as u128;
        let psi_inv = pow_mod(psi, q - 2, q);
        let n_inv = pow_mod(n % q, q - 2, q);
        Ok(Self { q, two_n, psi, psi_inv, n_inv, bits, mu })
    }

    pub fn n(&self) -> usize {
        (self.two_n / 2) as usize
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Barrett reduction of a double-word value `x < q^2`.
    #[inline]
    pub fn reduce_wide(&self, x: u128) -> u64 {
        let k = self.bits;
        let qhat = ((x >> (k - 1)) * self.mu) >> (k + 1);
        let mut r = (x - qhat * self.q as u128) as u64;
        if r >= self.q {
            r -= self.q;
        }
        if r >= self.q {
            r -= self.q;
        }
        r
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        debug_assert!(a < self.q && b < self.q);
        self.reduce_wide(a as u128 * b as u128)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    pub fn pow(&self, base: u64, exp: u64) -> u64 {
        let mut acc = 1;
        let mut b = base % self.q;
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a % self.q != 0);
        self.pow(a, self.q - 2)
    }

    /// Reduces an arbitrary unsigned value.
    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        a % self.q
    }

    /// Maps a signed integer into `[0, q)`.
    pub fn from_i64(&self, a: i64) -> u64 {
        let r = a.rem_euclid(self.q as i64);
        r as u64
    }

    /// Centered lift into `(-q/2, q/2]`.
    pub fn center(&self, a: u64) -> i64 {
        if a > self.q / 2 {
            a as i64 - self.q as i64
        } else {
            a as i64
        }
    }

    /// `psi^index` for `index` in `[0, 2N)`.
    pub fn twiddle(&self, table: &TwiddleTable, index: usize, mode: TwiddleMode) -> u64 {
        let two_n = self.two_n as usize;
        assert!(index < two_n, "twiddle index {index} out of range");
        match mode {
            TwiddleMode::Stored => table.natural(index),
            TwiddleMode::OnTheFly => self.pow(self.psi, index as u64),
        }
    }

    /// Multiplicative order of `x`, restricted to divisors of 2N.
    pub fn order_in_two_n(&self, x: u64) -> Option<u64> {
        let mut ord = 1;
        while ord <= self.two_n {
            if self.pow(x, ord) == 1 {
                return Some(ord);
            }
            ord *= 2;
        }
        None
    }
}

/// Precomputed powers of psi in bit-reversed order, forward and inverse.
#[derive(Debug, Clone)]
pub struct TwiddleTable {
    pub log_n: u32,
    /// `psi_rev[i] = psi^bitrev(i)` for `i < N`.
    pub psi_rev: Vec<u64>,
    /// `psi_inv_rev[i] = psi^-bitrev(i)` for `i < N`.
    pub psi_inv_rev: Vec<u64>,
    q: u64,
}

impl TwiddleTable {
    pub fn new(m: &PrimeModulus) -> Self {
        let n = m.n();
        let log_n = n.trailing_zeros();
        let mut fwd = vec![0; n];
        let mut inv = vec![0; n];
        let (mut p, mut pi) = (1u64, 1u64);
        for i in 0..n {
            let j = bit_reverse(i, log_n);
            fwd[j] = p;
            inv[j] = pi;
            p = m.mul(p, m.psi);
            pi = m.mul(pi, m.psi_inv);
        }
        Self { log_n, psi_rev: fwd, psi_inv_rev: inv, q: m.q }
    }

    /// Natural-order accessor derived from the bit-reversed table.
    pub fn natural(&self, index: usize) -> u64 {
        let n = self.psi_rev.len();
        if index < n {
            self.psi_rev[bit_reverse(index, self.log_n)]
        } else {
            let v = self.psi_rev[bit_reverse(index - n, self.log_n)];
            if v == 0 {
                0
            } else {
                self.q - v
            }
        }
    }
}

/// Twiddle-factor generator: yields `start, start*step, start*step^2, ...`.
#[derive(Debug, Clone)]
pub struct TwiddleGen<'a> {
    m: &'a PrimeModulus,
    cur: u64,
    step: u64,
}

impl<'a> TwiddleGen<'a> {
    pub fn new(m: &'a PrimeModulus, start: u64, step: u64) -> Self {
        Self { m, cur: start, step }
    }
}

impl Iterator for TwiddleGen<'_> {
    type Item = u64;
    fn next(&mut self) -> Option<u64> {
        let out = self.cur;
        self.cur = self.m.mul(self.cur, self.step);
        Some(out)
    }
}

/// Free-function form of modular multiplication.
pub fn mod_mul(a: u64, b: u64, m: &PrimeModulus) -> u64 {
    m.mul(a, b)
}

/// Returns the `(skip+1)`-th prime of exactly `bits` bits with `q = 1 mod two_n`, scanning upward.
pub fn find_ntt_prime(bits: u32, two_n: u64, skip: usize) -> Result<PrimeModulus, ArithError> {
    if bits == 0 || bits > MAX_BITS {
        return Err(ArithError::InvalidParameter(format!("bit length {bits} outside 1..={MAX_BITS}")));
    }
    if !two_n.is_power_of_two() || two_n < 2 {
        return Err(ArithError::InvalidParameter(format!("2N = {two_n} is not a power of two")));
    }
    let lo = 1u64 << (bits - 1);
    let hi = (1u64 << bits) - 1;
    let mut cand = (lo / two_n) * two_n + 1;
    if cand < lo {
        cand += two_n;
    }
    let mut seen = 0;
    while cand <= hi {
        if is_prime(cand) {
            if seen == skip {
                return PrimeModulus::new(cand, two_n);
            }
            seen += 1;
        }
        cand += two_n;
    }
    Err(ArithError::NoPrimeFound { bits, two_n, skip })
}

/// The full modulus chain: scaling primes `q_0..q_L` and special primes `p_0..p_{K-1}`.
#[derive(Debug, Clone)]
pub struct RnsBasis {
    pub n: usize,
    pub l_max: usize,
    pub dnum: usize,
    pub k: usize,
    pub q_list: Vec<PrimeModulus>,
    pub p_list: Vec<PrimeModulus>,
    /// `(P/p_i)^-1 mod p_i`.
    pub phat_inv: Vec<u64>,
    /// `phat[i][j] = (P/p_i) mod q_j`.
    pub phat: Vec<Vec<u64>>,
    /// `P mod q_j` and `P^-1 mod q_j`.
    pub p_mod_q: Vec<u64>,
    pub p_inv_mod_q: Vec<u64>,
    pub insecure: bool,
}

impl RnsBasis {
    /// Generates a chain of distinct primes of the requested widths.
    pub fn generate(
        n: usize,
        l_max: usize,
        dnum: usize,
        q_bits: u32,
        p_bits: u32,
    ) -> Result<Self, ArithError> {
        if dnum == 0 || dnum > l_max + 1 {
            return Err(ArithError::InvalidParameter(format!("dnum {dnum} outside 1..={}", l_max + 1)));
        }
        let two_n = 2 * n as u64;
        let k = (l_max + 1).div_ceil(dnum);
        let mut used = Vec::new();
        let pick = |bits: u32, used: &mut Vec<u64>| -> Result<PrimeModulus, ArithError> {
            let mut skip = 0;
            loop {
                let m = find_ntt_prime(bits, two_n, skip)?;
                if !used.contains(&m.q) {
                    used.push(m.q);
                    return Ok(m);
                }
                skip += 1;
            }
        };
        let mut q_list = Vec::with_capacity(l_max + 1);
        for _ in 0..=l_max {
            q_list.push(pick(q_bits, &mut used)?);
        }
        let mut p_list = Vec::with_capacity(k);
        for _ in 0..k {
            p_list.push(pick(p_bits, &mut used)?);
        }
        Self::from_moduli(n, dnum, q_list, p_list)
    }

    pub fn from_moduli(
        n: usize,
        dnum: usize,
        q_list: Vec<PrimeModulus>,
        p_list: Vec<PrimeModulus>,
    ) -> Result<Self, ArithError> {
        let l_max = q_list.len() - 1;
        let k = p_list.len();
        if k * dnum < l_max + 1 {
            return Err(ArithError::InvalidParameter(format!("K*dnum = {} < L+1 = {}", k * dnum, l_max + 1)));
        }
        let mut all: Vec<u64> = q_list.iter().chain(&p_list).map(|m| m.q).collect();
        all.sort_unstable();
        all.dedup();
        if all.len() != l_max + 1 + k {
            return Err(ArithError::InvalidParameter("moduli are not distinct".into()));
        }
        for m in q_list.iter().chain(&p_list) {
            if m.n() != n {
                return Err(ArithError::InvalidParameter(format!("modulus {} built for N={}", m.q, m.n())));
            }
        }
        let phat_inv = (0..k)
            .map(|i| {
                let pi = &p_list[i];
                let prod = (0..k).filter(|&t| t != i).fold(1, |acc, t| pi.mul(acc, p_list[t].q % pi.q));
                pi.inv(prod)
            })
            .collect();
        let phat = (0..k)
            .map(|i| {
                q_list
                    .iter()
                    .map(|qj| (0..k).filter(|&t| t != i).fold(1, |acc, t| qj.mul(acc, p_list[t].q % qj.q)))
                    .collect()
            })
            .collect();
        let p_mod_q: Vec<u64> = q_list
            .iter()
            .map(|qj| p_list.iter().fold(1, |acc, p| qj.mul(acc, p.q % qj.q)))
            .collect();
        let p_inv_mod_q = p_mod_q.iter().zip(&q_list).map(|(&v, qj)| qj.inv(v)).collect();
        Ok(Self { n, l_max, dnum, k, q_list, p_list, phat_inv, phat, p_mod_q, p_inv_mod_q, insecure: true })
    }

    /// Modulus of extended-basis limb `i`: `q_0..q_L` then `p_0..p_{K-1}`.
    pub fn modulus(&self, i: usize) -> &PrimeModulus {
        if i <= self.l_max {
            &self.q_list[i]
        } else {
            &self.p_list[i - self.l_max - 1]
        }
    }

    pub fn to_doc(&self) -> ParamsDoc {
        ParamsDoc {
            schema: 1,
            n: self.n,
            l_max: self.l_max,
            dnum: self.dnum,
            k: self.k,
            q: self.q_list.iter().map(|m| m.q.to_string()).collect(),
            q_psi: self.q_list.iter().map(|m| m.psi.to_string()).collect(),
            p: self.p_list.iter().map(|m| m.q.to_string()).collect(),
            p_psi: self.p_list.iter().map(|m| m.psi.to_string()).collect(),
            insecure: self.insecure,
        }
    }

    pub fn from_doc(doc: &ParamsDoc) -> Result<Self, ArithError> {
        let two_n = 2 * doc.n as u64;
        let parse = |s: &str| s.parse::<u64>().map_err(|e| ArithError::InvalidParameter(format!("{s}: {e}")));
        let build = |qs: &[String], psis: &[String]| -> Result<Vec<PrimeModulus>, ArithError> {
            qs.iter()
                .zip(psis)
                .map(|(q, psi)| PrimeModulus::new(parse(q)?, two_n).and_then(|m| PrimeModulus::with_root(m.q, two_n, parse(psi)?)))
                .collect()
        };
        let mut b = Self::from_moduli(doc.n, doc.dnum, build(&doc.q, &doc.q_psi)?, build(&doc.p, &doc.p_psi)?)?;
        b.insecure = doc.insecure;
        Ok(b)
    }
}

/// JSON form of a basis. Moduli and roots are decimal strings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ParamsDoc {
    pub schema: u32,
    pub n: usize,
    pub l_max: usize,
    pub dnum: usize,
    pub k: usize,
    pub q: Vec<String>,
    pub q_psi: Vec<String>,
    pub p: Vec<String>,
    pub p_psi: Vec<String>,
    pub insecure: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_products() {
        let m = PrimeModulus::new(17, 16).unwrap();
        assert_eq!(m.mul(3, 5), 15);
        assert_eq!(m.mul(16, 16), 1);
    }

    #[test]
    fn smallest_primes() {
        assert_eq!(find_ntt_prime(5, 16, 0).unwrap().q, 17);
        assert_eq!(find_ntt_prime(7, 16, 0).unwrap().q, 97);
        assert!(matches!(find_ntt_prime(3, 16, 0), Err(ArithError::NoPrimeFound { .. })));
    }

    #[test]
    fn root_has_full_order() {
        let m = find_ntt_prime(54, 1 << 17, 0).unwrap();
        assert_eq!(m.pow(m.psi, 1 << 16), m.q - 1);
        assert_eq!(m.order_in_two_n(m.psi), Some(1 << 17));
        assert_eq!(m.mul(m.psi, m.psi_inv), 1);
        assert_eq!(m.mul(m.n_inv, (1 << 16) % m.q), 1);
    }

    #[test]
    fn twiddle_endpoints() {
        let m = find_ntt_prime(30, 64, 0).unwrap();
        let t = TwiddleTable::new(&m);
        for mode in [TwiddleMode::Stored, TwiddleMode::OnTheFly] {
            assert_eq!(m.twiddle(&t, 0, mode), 1);
            assert_eq!(m.twiddle(&t, 32, mode), m.q - 1);
        }
    }

    #[test]
    fn miller_rabin_agrees_with_trial_division() {
        let trial = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..5000u64 {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
    }
}
