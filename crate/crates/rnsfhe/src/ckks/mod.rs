//! RNS-CKKS over the polynomial kernels.
//!
//! Ciphertext limbs are kept in NTT form. Extended polynomials (over `P·Q_l`)
//! carry the `q_0..q_l` limbs followed by the `K` special limbs; limb
//! `modulus_id`s always index the full chain `q_0..q_L, p_0..p_{K-1}`.

mod encoder;
mod keys;
mod keyswitch;

pub use encoder::Encoder;
pub use keys::{digit_limbs, expand_seed, gen_switch_key, keygen, KeySet, KeySwitchKey, Ksk1, KskDigit, SecretKey};
pub use keyswitch::{
    bconv_routine, census_full_dnum, census_generic, keyswitch_full_dnum, keyswitch_generic, moddown, relinearize,
    rotate, OpCensus,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modarith::{ArithError, RnsBasis};
use crate::poly::{
    automorphism_oracle, galois_element, negacyclic_ct, negacyclic_gs, Domain, NttContext, Poly, PolyError,
};

#[derive(Debug, Error)]
pub enum CkksError {
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(usize, usize),
    #[error("scale mismatch: {0} vs {1}")]
    ScaleMismatch(f64, f64),
    #[error("cannot rescale at level 0")]
    LevelExhausted,
    #[error("{given} slots exceed capacity {capacity}")]
    SlotOverflow { given: usize, capacity: usize },
    #[error("no rotation key for rotation {0}")]
    MissingRotationKey(i64),
    #[error("key covers level {key} but ciphertext is at level {ct}")]
    KeyLevelTooLow { key: usize, ct: usize },
    #[error("dnum {dnum} with K={k} cannot cover {limbs} limbs")]
    DigitCoverage { dnum: usize, k: usize, limbs: usize },
    #[error("full-dnum key switching needs K=1, basis has K={0}")]
    NotFullDnum(usize),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

pub type Result<T> = std::result::Result<T, CkksError>;

/// Parameter set. Security is not a goal here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CkksParams {
    pub n: usize,
    pub l_max: usize,
    pub dnum: usize,
    pub q_bits: u32,
    pub p_bits: u32,
    pub scale_bits: u32,
    pub sigma: f64,
    pub insecure: bool,
}

impl CkksParams {
    /// N=2^12, L=8, dnum=3, 40-bit moduli.
    pub fn toy() -> Self {
        Self { n: 1 << 12, l_max: 8, dnum: 3, q_bits: 40, p_bits: 40, scale_bits: 39, sigma: 3.2, insecure: true }
    }

    /// N=2^16, L=30, dnum=L+1, 54-bit words.
    pub fn full_scale() -> Self {
        Self { n: 1 << 16, l_max: 30, dnum: 31, q_bits: 54, p_bits: 54, scale_bits: 53, sigma: 3.2, insecure: true }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "toy" => Some(Self::toy()),
            "paper-main" => Some(Self::full_scale()),
            _ => None,
        }
    }

    pub fn k(&self) -> usize {
        (self.l_max + 1).div_ceil(self.dnum)
    }
}

/// Limb-wise polynomial over `Q_l` or `P·Q_l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RnsPoly {
    pub limbs: Vec<Poly>,
    pub level: usize,
}

impl RnsPoly {
    pub fn domain(&self) -> Domain {
        self.limbs[0].domain
    }

    pub fn is_extended(&self) -> bool {
        self.limbs.len() > self.level + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ciphertext {
    pub c0: RnsPoly,
    pub c1: RnsPoly,
    pub level: usize,
    pub scale: f64,
}

/// Degree-two ciphertext produced by multiplication.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtCiphertext {
    pub d0: RnsPoly,
    pub d1: RnsPoly,
    pub d2: RnsPoly,
    pub level: usize,
    pub scale: f64,
}

pub struct CkksContext {
    pub params: CkksParams,
    pub basis: RnsBasis,
    /// One transform context per modulus in chain order.
    pub ntt: Vec<NttContext>,
    pub delta: f64,
    pub encoder: Encoder,
}

impl CkksContext {
    pub fn new(params: CkksParams) -> Result<Self> {
        let mut basis = RnsBasis::generate(params.n, params.l_max, params.dnum, params.q_bits, params.p_bits)?;
        basis.insecure = params.insecure;
        Ok(Self::with_basis(params, basis))
    }

    pub fn with_basis(params: CkksParams, basis: RnsBasis) -> Self {
        let ntt = (0..=basis.l_max + basis.k).map(|i| NttContext::new(basis.modulus(i).clone())).collect();
        let delta = 2f64.powi(params.scale_bits as i32);
        let encoder = Encoder::new(params.n);
        Self { params, basis, ntt, delta, encoder }
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    /// Chain indices of the limbs of a polynomial at `level`.
    pub fn limb_ids(&self, level: usize, extended: bool) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..=level).collect();
        if extended {
            ids.extend(self.basis.l_max + 1..=self.basis.l_max + self.basis.k);
        }
        ids
    }

    pub fn ntt_limb(&self, p: &mut Poly) {
        debug_assert_eq!(p.domain, Domain::Coeff);
        let c = &self.ntt[p.modulus_id];
        negacyclic_ct(&mut p.coeffs, &c.m, &c.table.psi_rev);
        p.domain = Domain::Ntt;
    }

    pub fn intt_limb(&self, p: &mut Poly) {
        debug_assert_eq!(p.domain, Domain::Ntt);
        let c = &self.ntt[p.modulus_id];
        negacyclic_gs(&mut p.coeffs, &c.m, &c.table.psi_inv_rev);
        for x in p.coeffs.iter_mut() {
            *x = c.m.mul(*x, c.m.n_inv);
        }
        p.domain = Domain::Coeff;
    }

    /// Embeds signed integer coefficients into every limb, in NTT form.
    pub fn rns_from_signed(&self, coeffs: &[i64], level: usize, extended: bool) -> RnsPoly {
        let limbs = self
            .limb_ids(level, extended)
            .into_iter()
            .map(|id| {
                let m = &self.ntt[id].m;
                let mut p = Poly::from_coeffs(coeffs.iter().map(|&c| m.from_i64(c)).collect(), id);
                self.ntt_limb(&mut p);
                p
            })
            .collect();
        RnsPoly { limbs, level }
    }

    pub fn zero_rns(&self, level: usize, extended: bool) -> RnsPoly {
        let limbs = self.limb_ids(level, extended).into_iter().map(|id| Poly::zero(self.n(), id, Domain::Ntt)).collect();
        RnsPoly { limbs, level }
    }

    fn uniform_rns(&self, rng: &mut ChaCha20Rng, level: usize, extended: bool) -> RnsPoly {
        let limbs = self
            .limb_ids(level, extended)
            .into_iter()
            .map(|id| {
                let q = self.ntt[id].m.q;
                Poly { coeffs: (0..self.n()).map(|_| rng.random_range(0..q)).collect(), modulus_id: id, domain: Domain::Ntt }
            })
            .collect();
        RnsPoly { limbs, level }
    }

    pub(crate) fn gaussian(&self, rng: &mut ChaCha20Rng) -> Vec<i64> {
        let normal = Normal::new(0.0, self.params.sigma).expect("positive sigma");
        (0..self.n()).map(|_| normal.sample(rng).round() as i64).collect()
    }

    pub fn add_rns(&self, a: &RnsPoly, b: &RnsPoly) -> RnsPoly {
        self.zip_rns(a, b, |m, x, y| m.add(x, y))
    }

    pub fn sub_rns(&self, a: &RnsPoly, b: &RnsPoly) -> RnsPoly {
        self.zip_rns(a, b, |m, x, y| m.sub(x, y))
    }

    pub fn mul_rns(&self, a: &RnsPoly, b: &RnsPoly) -> RnsPoly {
        self.zip_rns(a, b, |m, x, y| m.mul(x, y))
    }

    fn zip_rns(&self, a: &RnsPoly, b: &RnsPoly, f: impl Fn(&crate::modarith::PrimeModulus, u64, u64) -> u64) -> RnsPoly {
        let limbs = a
            .limbs
            .iter()
            .zip(&b.limbs)
            .map(|(x, y)| {
                debug_assert_eq!(x.modulus_id, y.modulus_id);
                let m = &self.ntt[x.modulus_id].m;
                Poly {
                    coeffs: x.coeffs.iter().zip(&y.coeffs).map(|(&u, &v)| f(m, u, v)).collect(),
                    modulus_id: x.modulus_id,
                    domain: x.domain,
                }
            })
            .collect();
        RnsPoly { limbs, level: a.level }
    }

    /// Keeps limbs `q_0..q_level` of a `Q`-form polynomial.
    pub fn drop_to(&self, a: &RnsPoly, level: usize) -> RnsPoly {
        RnsPoly { limbs: a.limbs[..=level].to_vec(), level }
    }

    pub fn encode(&self, values: &[(f64, f64)], level: usize, scale: f64) -> Result<RnsPoly> {
        let coeffs = self.encoder.encode(values, scale)?;
        Ok(self.rns_from_signed(&coeffs, level, false))
    }

    pub fn decode(&self, p: &RnsPoly, scale: f64) -> Vec<(f64, f64)> {
        let coeffs = self.centered_coeffs(p);
        self.encoder.decode(&coeffs, scale)
    }

    /// Centered integer lift as `f64`, from the two lowest limbs (one at level 0).
    pub fn centered_coeffs(&self, p: &RnsPoly) -> Vec<f64> {
        let mut limbs: Vec<Poly> = p.limbs[..(p.level + 1).min(2)].to_vec();
        for l in limbs.iter_mut() {
            if l.domain == Domain::Ntt {
                self.intt_limb(l);
            }
        }
        let m0 = &self.ntt[0].m;
        if limbs.len() == 1 {
            return limbs[0].coeffs.iter().map(|&x| m0.center(x) as f64).collect();
        }
        let m1 = &self.ntt[1].m;
        let q0_inv = m1.inv(m0.q % m1.q);
        let big = m0.q as u128 * m1.q as u128;
        (0..self.n())
            .map(|i| {
                let a0 = limbs[0].coeffs[i];
                let a1 = limbs[1].coeffs[i];
                let t = m1.mul(m1.sub(a1, a0 % m1.q), q0_inv);
                let v = a0 as u128 + m0.q as u128 * t as u128;
                if v > big / 2 {
                    -((big - v) as f64)
                } else {
                    v as f64
                }
            })
            .collect()
    }

    pub fn encrypt(&self, pt: &RnsPoly, sk: &SecretKey, scale: f64, seed: u64) -> Ciphertext {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let level = pt.level;
        let a = self.uniform_rns(&mut rng, level, false);
        let e = self.rns_from_signed(&self.gaussian(&mut rng), level, false);
        let s = sk.rns(self, level, false);
        let c0 = self.add_rns(&self.sub_rns(&e, &self.mul_rns(&a, &s)), pt);
        Ciphertext { c0, c1: a, level, scale }
    }

    pub fn decrypt(&self, ct: &Ciphertext, sk: &SecretKey) -> RnsPoly {
        let s = sk.rns(self, ct.level, false);
        self.add_rns(&ct.c0, &self.mul_rns(&ct.c1, &s))
    }

    pub fn decrypt_ext(&self, ct: &ExtCiphertext, sk: &SecretKey) -> RnsPoly {
        let s = sk.rns(self, ct.level, false);
        let s2 = self.mul_rns(&s, &s);
        let t = self.add_rns(&ct.d0, &self.mul_rns(&ct.d1, &s));
        self.add_rns(&t, &self.mul_rns(&ct.d2, &s2))
    }

    pub fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        if a.level != b.level {
            return Err(CkksError::LevelMismatch(a.level, b.level));
        }
        if (a.scale - b.scale).abs() > 1e-9 * a.scale {
            return Err(CkksError::ScaleMismatch(a.scale, b.scale));
        }
        Ok(Ciphertext { c0: self.add_rns(&a.c0, &b.c0), c1: self.add_rns(&a.c1, &b.c1), level: a.level, scale: a.scale })
    }

    pub fn mult(&self, a: &Ciphertext, b: &Ciphertext) -> Result<ExtCiphertext> {
        if a.level != b.level {
            return Err(CkksError::LevelMismatch(a.level, b.level));
        }
        let d0 = self.mul_rns(&a.c0, &b.c0);
        let d1 = self.add_rns(&self.mul_rns(&a.c0, &b.c1), &self.mul_rns(&a.c1, &b.c0));
        let d2 = self.mul_rns(&a.c1, &b.c1);
        Ok(ExtCiphertext { d0, d1, d2, level: a.level, scale: a.scale * b.scale })
    }

    /// Drops the top limb `q_l`, dividing by it.
    pub fn rescale(&self, ct: &Ciphertext) -> Result<Ciphertext> {
        if ct.level == 0 {
            return Err(CkksError::LevelExhausted);
        }
        let l = ct.level;
        let ql = self.ntt[l].m.q;
        let c0 = self.rescale_poly(&ct.c0);
        let c1 = self.rescale_poly(&ct.c1);
        Ok(Ciphertext { c0, c1, level: l - 1, scale: ct.scale / ql as f64 })
    }

    /// One INTT of the dropped limb, one NTT per remaining limb.
    pub fn rescale_poly(&self, p: &RnsPoly) -> RnsPoly {
        let l = p.level;
        let mut top = p.limbs[l].clone();
        self.intt_limb(&mut top);
        let limbs = (0..l)
            .map(|i| {
                let m = &self.ntt[i].m;
                let mut t = Poly::from_coeffs(top.coeffs.iter().map(|&x| m.reduce(x)).collect(), i);
                self.ntt_limb(&mut t);
                let inv = m.inv(self.ntt[l].m.q % m.q);
                let coeffs = p.limbs[i].coeffs.iter().zip(&t.coeffs).map(|(&a, &b)| m.mul(m.sub(a, b), inv)).collect();
                Poly { coeffs, modulus_id: i, domain: Domain::Ntt }
            })
            .collect();
        RnsPoly { limbs, level: l - 1 }
    }

    /// Applies `x -> x^gle` limb by limb, passing through coefficient form.
    pub fn apply_galois(&self, p: &RnsPoly, gle: u64) -> Result<RnsPoly> {
        let limbs = p
            .limbs
            .iter()
            .map(|limb| {
                let mut c = limb.clone();
                self.intt_limb(&mut c);
                let mut r = automorphism_oracle(&self.ntt[c.modulus_id], &c, gle)?;
                self.ntt_limb(&mut r);
                Ok(r)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RnsPoly { limbs, level: p.level })
    }

    /// Permutation step of a rotation, before key switching.
    pub fn rotate_perm(&self, ct: &Ciphertext, rot: i64) -> Result<Ciphertext> {
        let g = galois_element(rot, self.n());
        Ok(Ciphertext {
            c0: self.apply_galois(&ct.c0, g)?,
            c1: self.apply_galois(&ct.c1, g)?,
            level: ct.level,
            scale: ct.scale,
        })
    }
}
