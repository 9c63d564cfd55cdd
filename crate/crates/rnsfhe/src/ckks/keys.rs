use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{CkksContext, RnsPoly};
use crate::poly::{galois_element, Domain, Poly};
use crate::trivium::ResidueSampler;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey {
    /// Ternary coefficients.
    pub coeffs: Vec<i64>,
}

impl SecretKey {
    pub fn rns(&self, ctx: &CkksContext, level: usize, extended: bool) -> RnsPoly {
        ctx.rns_from_signed(&self.coeffs, level, extended)
    }

    /// Coefficients of `s(x^gle)`.
    pub fn galois(&self, gle: u64) -> Vec<i64> {
        let n = self.coeffs.len() as u64;
        let mut out = vec![0i64; n as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let t = (i as u64 * gle) % (2 * n);
            out[(t % n) as usize] = if t >= n { -c } else { c };
        }
        out
    }

    pub fn square(&self, ctx: &CkksContext) -> Vec<i64> {
        negacyclic_square(&self.coeffs, ctx.n())
    }
}

fn negacyclic_square(s: &[i64], n: usize) -> Vec<i64> {
    let mut out = vec![0i64; n];
    for (i, &a) in s.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (j, &b) in s.iter().enumerate() {
            let k = i + j;
            if k < n {
                out[k] += a * b;
            } else {
                out[k - n] -= a * b;
            }
        }
    }
    out
}

/// The public half of one key digit: a per-limb seed list, or the residues it expands to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ksk1 {
    Seeded(Vec<u64>),
    Expanded(RnsPoly),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KskDigit {
    /// Over the full chain `P·Q_L`, NTT form.
    pub ksk0: RnsPoly,
    pub ksk1: Ksk1,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySwitchKey {
    pub dnum: usize,
    pub k: usize,
    pub digits: Vec<KskDigit>,
}

/// Residues of one seeded limb, read directly as NTT-form values.
pub fn expand_seed(ctx: &CkksContext, seed: u64, modulus_id: usize) -> Poly {
    let m = &ctx.ntt[modulus_id].m;
    let coeffs = ResidueSampler::new(seed).fill(m, ctx.n());
    Poly { coeffs, modulus_id, domain: Domain::Ntt }
}

impl KeySwitchKey {
    /// `ksk1` limb for chain index `modulus_id` of digit `d`.
    pub fn ksk1_limb(&self, ctx: &CkksContext, d: usize, modulus_id: usize) -> Poly {
        match &self.digits[d].ksk1 {
            Ksk1::Seeded(seeds) => expand_seed(ctx, seeds[modulus_id], modulus_id),
            Ksk1::Expanded(p) => p.limbs[modulus_id].clone(),
        }
    }

    /// `ksk0` limb for chain index `modulus_id` of digit `d`.
    pub fn ksk0_limb(&self, d: usize, modulus_id: usize) -> &Poly {
        &self.digits[d].ksk0.limbs[modulus_id]
    }

    pub fn expanded(&self, ctx: &CkksContext) -> KeySwitchKey {
        let digits = self
            .digits
            .iter()
            .enumerate()
            .map(|(d, dig)| {
                let limbs = (0..dig.ksk0.limbs.len()).map(|id| self.ksk1_limb(ctx, d, id)).collect();
                KskDigit { ksk0: dig.ksk0.clone(), ksk1: Ksk1::Expanded(RnsPoly { limbs, level: dig.ksk0.level }) }
            })
            .collect();
        KeySwitchKey { dnum: self.dnum, k: self.k, digits }
    }

    pub fn is_seeded(&self) -> bool {
        self.digits.iter().all(|d| matches!(d.ksk1, Ksk1::Seeded(_)))
    }

    /// Storage in bytes with residues packed to `word_bits` and 8-byte seeds.
    pub fn storage_bytes(&self, n: usize, word_bits: u32) -> u64 {
        let limb_bytes = (n as u64 * word_bits as u64).div_ceil(8);
        self.digits
            .iter()
            .map(|d| {
                let ksk0 = d.ksk0.limbs.len() as u64 * limb_bytes;
                let ksk1 = match &d.ksk1 {
                    Ksk1::Seeded(s) => 8 * s.len() as u64,
                    Ksk1::Expanded(p) => p.limbs.len() as u64 * limb_bytes,
                };
                ksk0 + ksk1
            })
            .sum()
    }
}

/// Chain indices of the `q` limbs in digit `d` at level `level`.
pub fn digit_limbs(d: usize, k: usize, level: usize) -> std::ops::Range<usize> {
    let lo = (d * k).min(level + 1);
    let hi = ((d + 1) * k).min(level + 1);
    lo..hi
}

/// Switching key from `s_prime` to `sk`, with its noise polynomials for inspection.
///
/// Digit `d` satisfies `ksk0 + ksk1·s = e + P·[i in digit d]·s'` on every `q_i`
/// limb and `ksk0 + ksk1·s = e` on the special limbs.
pub fn gen_switch_key(ctx: &CkksContext, sk: &SecretKey, s_prime: &[i64], seed: u64) -> (KeySwitchKey, Vec<Vec<i64>>) {
    let b = &ctx.basis;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let s = sk.rns(ctx, b.l_max, true);
    let sp = ctx.rns_from_signed(s_prime, b.l_max, true);
    let mut digits = Vec::with_capacity(b.dnum);
    let mut errors = Vec::with_capacity(b.dnum);
    for d in 0..b.dnum {
        let seeds: Vec<u64> = (0..=b.l_max + b.k).map(|_| rng.random()).collect();
        let e = ctx.gaussian(&mut rng);
        let e_rns = ctx.rns_from_signed(&e, b.l_max, true);
        let in_digit = digit_limbs(d, b.k, b.l_max);
        let limbs = (0..=b.l_max + b.k)
            .map(|id| {
                let m = &ctx.ntt[id].m;
                let a = expand_seed(ctx, seeds[id], id);
                let coeffs = (0..ctx.n())
                    .map(|x| {
                        let mut v = m.sub(e_rns.limbs[id].coeffs[x], m.mul(a.coeffs[x], s.limbs[id].coeffs[x]));
                        if in_digit.contains(&id) {
                            v = m.add(v, m.mul(b.p_mod_q[id], sp.limbs[id].coeffs[x]));
                        }
                        v
                    })
                    .collect();
                Poly { coeffs, modulus_id: id, domain: Domain::Ntt }
            })
            .collect();
        digits.push(KskDigit { ksk0: RnsPoly { limbs, level: b.l_max }, ksk1: Ksk1::Seeded(seeds) });
        errors.push(e);
    }
    (KeySwitchKey { dnum: b.dnum, k: b.k, digits }, errors)
}

#[derive(Debug, Clone)]
pub struct KeySet {
    pub relin: KeySwitchKey,
    pub rotations: BTreeMap<i64, KeySwitchKey>,
}

/// Ternary secret, relinearization key and one rotation key per entry of `rotations`.
pub fn keygen(ctx: &CkksContext, seed: u64, rotations: &[i64]) -> (SecretKey, KeySet) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let coeffs = (0..ctx.n()).map(|_| rng.random_range(-1i64..=1)).collect();
    let sk = SecretKey { coeffs };
    let (relin, _) = gen_switch_key(ctx, &sk, &sk.square(ctx), rng.random());
    let rotations = rotations
        .iter()
        .map(|&r| {
            let g = galois_element(r, ctx.n());
            (r, gen_switch_key(ctx, &sk, &sk.galois(g), rng.random()).0)
        })
        .collect();
    (sk, KeySet { relin, rotations })
}
