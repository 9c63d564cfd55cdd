use serde::{Deserialize, Serialize};

use super::keys::digit_limbs;
use super::{Ciphertext, CkksContext, CkksError, ExtCiphertext, KeySet, KeySwitchKey, Result, RnsPoly};
use crate::poly::{Domain, Poly};

/// Micro-operation tally of one routine.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCensus {
    pub intt: u64,
    pub ntt: u64,
    /// Key multiply-accumulate lanes.
    pub mas: u64,
    /// Base-conversion multiply-accumulates (limb-polynomial granularity).
    pub bconv_mas: u64,
}

impl std::ops::Add for OpCensus {
    type Output = OpCensus;
    fn add(self, o: OpCensus) -> OpCensus {
        OpCensus {
            intt: self.intt + o.intt,
            ntt: self.ntt + o.ntt,
            mas: self.mas + o.mas,
            bconv_mas: self.bconv_mas + o.bconv_mas,
        }
    }
}

/// Closed-form census of [`keyswitch_full_dnum`]: `(modup_keymul, moddown_per_component)`.
pub fn census_full_dnum(l: usize) -> (OpCensus, OpCensus) {
    let l = l as u64;
    let modup = OpCensus { intt: l + 1, ntt: (l + 1) * (l + 2), mas: 2 * (l + 1) * (l + 2), bconv_mas: 0 };
    (modup, census_moddown(l as usize, 1))
}

fn census_moddown(l: usize, k: usize) -> OpCensus {
    let (l, k) = (l as u64, k as u64);
    OpCensus { intt: k, ntt: l + 1, mas: 0, bconv_mas: k * (l + 1) }
}

/// Closed-form census of [`keyswitch_generic`] at level `l`.
pub fn census_generic(l: usize, dnum: usize, k: usize) -> (OpCensus, OpCensus) {
    let mut modup = OpCensus::default();
    for d in 0..dnum {
        let src = digit_limbs(d, k, l).len() as u64;
        if src == 0 {
            continue;
        }
        let targets = (l + 1 + k) as u64 - src;
        modup.intt += src;
        modup.ntt += targets;
        modup.mas += 2 * (l + 1 + k) as u64;
        modup.bconv_mas += src * targets;
    }
    (modup, census_moddown(l, k))
}

/// Fast base conversion of coefficient-form limbs `src` (chain indices
/// `src_ids`) into chain indices `targets`, followed by one NTT per target.
pub fn bconv_routine(ctx: &CkksContext, src: &[Poly], targets: &[usize], census: &mut OpCensus) -> Vec<Poly> {
    debug_assert!(src.iter().all(|p| p.domain == Domain::Coeff));
    let n = ctx.n();
    let src_m: Vec<_> = src.iter().map(|p| &ctx.ntt[p.modulus_id].m).collect();
    // hat-premultiplied inputs: [x_i · (Q/q_i)^-1]_{q_i}
    let scaled: Vec<Vec<u64>> = src
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let m = src_m[i];
            let hat = src_m.iter().enumerate().filter(|&(t, _)| t != i).fold(1, |acc, (_, o)| m.mul(acc, o.q % m.q));
            let hat_inv = m.inv(hat);
            p.coeffs.iter().map(|&x| m.mul(x, hat_inv)).collect()
        })
        .collect();
    targets
        .iter()
        .map(|&tid| {
            let mt = &ctx.ntt[tid].m;
            let hats: Vec<u64> = (0..src.len())
                .map(|i| src_m.iter().enumerate().filter(|&(t, _)| t != i).fold(1, |acc, (_, o)| mt.mul(acc, o.q % mt.q)))
                .collect();
            let mut acc = vec![0u64; n];
            for (i, y) in scaled.iter().enumerate() {
                for (a, &v) in acc.iter_mut().zip(y) {
                    *a = mt.add(*a, mt.mul(mt.reduce(v), hats[i]));
                }
                census.bconv_mas += 1;
            }
            let mut p = Poly::from_coeffs(acc, tid);
            ctx.ntt_limb(&mut p);
            census.ntt += 1;
            p
        })
        .collect()
}

/// Reduces `P·Q_l` to `Q_l`: `[(d - BConv(d_P)) · P^-1]` on every `q` limb.
pub fn moddown(ctx: &CkksContext, d: &RnsPoly, census: &mut OpCensus) -> RnsPoly {
    let l = d.level;
    let k = ctx.basis.k;
    debug_assert_eq!(d.limbs.len(), l + 1 + k);
    let p_part: Vec<Poly> = d.limbs[l + 1..]
        .iter()
        .map(|p| {
            let mut c = p.clone();
            ctx.intt_limb(&mut c);
            census.intt += 1;
            c
        })
        .collect();
    let targets: Vec<usize> = (0..=l).collect();
    let conv = bconv_routine(ctx, &p_part, &targets, census);
    let limbs = (0..=l)
        .map(|i| {
            let m = &ctx.ntt[i].m;
            let pinv = ctx.basis.p_inv_mod_q[i];
            let coeffs = d.limbs[i].coeffs.iter().zip(&conv[i].coeffs).map(|(&a, &b)| m.mul(m.sub(a, b), pinv)).collect();
            Poly { coeffs, modulus_id: i, domain: Domain::Ntt }
        })
        .collect();
    RnsPoly { limbs, level: l }
}

fn check_key(ctx: &CkksContext, ksk: &KeySwitchKey, level: usize) -> Result<()> {
    let key_level = ksk.digits[0].ksk0.level;
    if key_level < level {
        return Err(CkksError::KeyLevelTooLow { key: key_level, ct: level });
    }
    if ksk.dnum * ctx.basis.k < level + 1 {
        return Err(CkksError::DigitCoverage { dnum: ksk.dnum, k: ctx.basis.k, limbs: level + 1 });
    }
    Ok(())
}

fn accumulate(ctx: &CkksContext, acc: &mut Poly, key: &Poly, r: &Poly) {
    let m = &ctx.ntt[acc.modulus_id].m;
    for ((a, &kx), &rx) in acc.coeffs.iter_mut().zip(&key.coeffs).zip(&r.coeffs) {
        *a = m.add(*a, m.mul(kx, rx));
    }
}

fn finish(ctx: &CkksContext, d: &ExtCiphertext, c0: RnsPoly, c1: RnsPoly, census: &mut OpCensus) -> Ciphertext {
    let r0 = moddown(ctx, &c0, census);
    let r1 = moddown(ctx, &c1, census);
    Ciphertext { c0: ctx.add_rns(&d.d0, &r0), c1: ctx.add_rns(&d.d1, &r1), level: d.level, scale: d.scale }
}

/// Key switching with one limb per digit (`K = 1`).
///
/// All `l+1` limbs of `d2` go through INTT once; then, target base by target
/// base, every limb is reduced, transformed and multiplied into both key lanes.
pub fn keyswitch_full_dnum(ctx: &CkksContext, d: &ExtCiphertext, ksk: &KeySwitchKey, census: &mut OpCensus) -> Result<Ciphertext> {
    if ctx.basis.k != 1 {
        return Err(CkksError::NotFullDnum(ctx.basis.k));
    }
    let l = d.level;
    check_key(ctx, ksk, l)?;
    let coeff: Vec<Poly> = d
        .d2
        .limbs
        .iter()
        .map(|p| {
            let mut c = p.clone();
            ctx.intt_limb(&mut c);
            census.intt += 1;
            c
        })
        .collect();
    let mut c0 = ctx.zero_rns(l, true);
    let mut c1 = ctx.zero_rns(l, true);
    let targets = ctx.limb_ids(l, true);
    for (slot, &tid) in targets.iter().enumerate() {
        let mt = &ctx.ntt[tid].m;
        for (i, x) in coeff.iter().enumerate() {
            let mut r = Poly::from_coeffs(x.coeffs.iter().map(|&v| mt.reduce(v)).collect(), tid);
            ctx.ntt_limb(&mut r);
            census.ntt += 1;
            accumulate(ctx, &mut c0.limbs[slot], ksk.ksk0_limb(i, tid), &r);
            accumulate(ctx, &mut c1.limbs[slot], &ksk.ksk1_limb(ctx, i, tid), &r);
            census.mas += 2;
        }
    }
    Ok(finish(ctx, d, c0, c1, census))
}

/// Key switching for any digit count: per digit, extend its limbs to `P·Q_l`
/// by base conversion, multiply-accumulate against that digit's key, then
/// reduce both accumulators back to `Q_l`.
pub fn keyswitch_generic(
    ctx: &CkksContext,
    d: &ExtCiphertext,
    ksk: &KeySwitchKey,
    dnum: usize,
    census: &mut OpCensus,
) -> Result<Ciphertext> {
    let l = d.level;
    let k = ctx.basis.k;
    if dnum != ksk.dnum || dnum * k < l + 1 {
        return Err(CkksError::DigitCoverage { dnum, k, limbs: l + 1 });
    }
    check_key(ctx, ksk, l)?;
    let ids = ctx.limb_ids(l, true);
    let mut c0 = ctx.zero_rns(l, true);
    let mut c1 = ctx.zero_rns(l, true);
    for dg in 0..dnum {
        let own = digit_limbs(dg, k, l);
        if own.is_empty() {
            continue;
        }
        let src: Vec<Poly> = own
            .clone()
            .map(|i| {
                let mut c = d.d2.limbs[i].clone();
                ctx.intt_limb(&mut c);
                census.intt += 1;
                c
            })
            .collect();
        let targets: Vec<usize> = ids.iter().copied().filter(|id| !own.contains(id)).collect();
        let mut converted = bconv_routine(ctx, &src, &targets, census).into_iter();
        for (slot, &tid) in ids.iter().enumerate() {
            let y = if own.contains(&tid) { d.d2.limbs[tid].clone() } else { converted.next().expect("one per target") };
            accumulate(ctx, &mut c0.limbs[slot], ksk.ksk0_limb(dg, tid), &y);
            accumulate(ctx, &mut c1.limbs[slot], &ksk.ksk1_limb(ctx, dg, tid), &y);
            census.mas += 2;
        }
    }
    Ok(finish(ctx, d, c0, c1, census))
}

/// Relinearizes with the key set's relinearization key.
pub fn relinearize(ctx: &CkksContext, d: &ExtCiphertext, keys: &KeySet) -> Result<Ciphertext> {
    let mut census = OpCensus::default();
    keyswitch_generic(ctx, d, &keys.relin, keys.relin.dnum, &mut census)
}

/// Full rotation: permutation then key switch back to `s`.
pub fn rotate(ctx: &CkksContext, ct: &Ciphertext, rot: i64, keys: &KeySet) -> Result<Ciphertext> {
    let ksk = keys.rotations.get(&rot).ok_or(CkksError::MissingRotationKey(rot))?;
    let p = ctx.rotate_perm(ct, rot)?;
    let ext = ExtCiphertext { d0: p.c0, d1: ctx.zero_rns(ct.level, false), d2: p.c1, level: ct.level, scale: ct.scale };
    let mut census = OpCensus::default();
    keyswitch_generic(ctx, &ext, ksk, ksk.dnum, &mut census)
}
