use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use proptest::prelude::*;
use rnsfhe::ckks::{self, digit_limbs, gen_switch_key, CkksContext, CkksParams, OpCensus, RnsPoly};
use rnsfhe::poly::Poly;

fn params() -> CkksParams {
    CkksParams { n: 1 << 8, l_max: 4, dnum: 2, q_bits: 30, p_bits: 31, scale_bits: 25, ..CkksParams::toy() }
}

#[test]
fn key_identity_holds_limbwise() {
    let ctx = CkksContext::new(params()).unwrap();
    let (sk, _) = ckks::keygen(&ctx, 1, &[]);
    let sp = sk.square(&ctx);
    let (key, errors) = gen_switch_key(&ctx, &sk, &sp, 77);
    let b = &ctx.basis;
    let s = sk.rns(&ctx, b.l_max, true);
    let sp_rns = ctx.rns_from_signed(&sp, b.l_max, true);
    for (d, e) in errors.iter().enumerate() {
        let e_rns = ctx.rns_from_signed(e, b.l_max, true);
        for id in 0..=b.l_max + b.k {
            let m = &ctx.ntt[id].m;
            let k0 = key.ksk0_limb(d, id);
            let k1 = key.ksk1_limb(&ctx, d, id);
            for x in 0..ctx.n() {
                let mut lhs = m.add(k0.coeffs[x], m.mul(k1.coeffs[x], s.limbs[id].coeffs[x]));
                if digit_limbs(d, b.k, b.l_max).contains(&id) {
                    lhs = m.sub(lhs, m.mul(b.p_mod_q[id], sp_rns.limbs[id].coeffs[x]));
                }
                assert_eq!(lhs, e_rns.limbs[id].coeffs[x], "digit {d} limb {id}");
            }
        }
        assert!(e.iter().all(|&v| v.abs() <= 40));
    }
}

#[test]
fn digits_partition_the_chain() {
    for (k, l) in [(1usize, 0usize), (1, 7), (3, 8), (3, 6), (8, 22), (11, 30)] {
        let digits = (l + 1).div_ceil(k);
        let covered: Vec<usize> = (0..digits).flat_map(|d| digit_limbs(d, k, l)).collect();
        assert_eq!(covered, (0..=l).collect::<Vec<_>>());
    }
}

fn crt(residues: &[u64], moduli: &[u64]) -> BigUint {
    let big_q: BigUint = moduli.iter().map(|&q| BigUint::from(q)).product();
    let mut x = BigUint::from(0u32);
    for (&r, &q) in residues.iter().zip(moduli) {
        let qi = BigUint::from(q);
        let hat = &big_q / &qi;
        let inv = (&hat % &qi).modpow(&(&qi - 2u32), &qi);
        x += BigUint::from(r) * hat * inv;
    }
    x % big_q
}

fn to_coeff(ctx: &CkksContext, p: &RnsPoly) -> Vec<Poly> {
    p.limbs
        .iter()
        .map(|l| {
            let mut c = l.clone();
            ctx.intt_limb(&mut c);
            c
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn moddown_divides_by_p(level in 0usize..=4, seed in any::<u64>()) {
        let ctx = CkksContext::new(params()).unwrap();
        let b = &ctx.basis;
        let ids = ctx.limb_ids(level, true);
        let moduli: Vec<u64> = ids.iter().map(|&i| ctx.ntt[i].m.q).collect();
        let q_moduli = &moduli[..=level];
        let big_pq: BigUint = moduli.iter().map(|&q| BigUint::from(q)).product();
        let big_p: BigUint = b.p_list.iter().map(|m| BigUint::from(m.q)).product();
        let big_q: BigUint = q_moduli.iter().map(|&q| BigUint::from(q)).product();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        let xs: Vec<BigUint> = (0..ctx.n()).map(|_| {
            let bytes: Vec<u8> = (0..64).map(|_| rng.random()).collect();
            BigUint::from_bytes_le(&bytes) % &big_pq
        }).collect();
        let limbs = ids.iter().map(|&id| {
            let q = BigUint::from(ctx.ntt[id].m.q);
            let mut p = Poly::from_coeffs(xs.iter().map(|x| (x % &q).try_into().unwrap()).collect(), id);
            ctx.ntt_limb(&mut p);
            p
        }).collect();
        let mut census = OpCensus::default();
        let out = ckks::moddown(&ctx, &RnsPoly { limbs, level }, &mut census);
        let coeff = to_coeff(&ctx, &out);
        for (j, x) in xs.iter().enumerate() {
            let got = crt(&coeff.iter().map(|p| p.coeffs[j]).collect::<Vec<_>>(), q_moduli);
            let floor = (x / &big_p) % &big_q;
            // fast conversion overshoots by u·P with 0 <= u < K
            let ok = (0..b.k as u32).any(|u| (&got + BigUint::from(u)) % &big_q == floor);
            prop_assert!(ok, "coeff {}", j);
        }
        prop_assert_eq!(census.intt as usize, b.k);
        prop_assert_eq!(census.ntt as usize, level + 1);
    }

    #[test]
    fn bconv_is_exact_up_to_source_multiples(seed in any::<u64>()) {
        let ctx = CkksContext::new(params()).unwrap();
        let src_ids = [0usize, 1];
        let q: Vec<u64> = src_ids.iter().map(|&i| ctx.ntt[i].m.q).collect();
        let big: BigUint = q.iter().map(|&v| BigUint::from(v)).product();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        let xs: Vec<BigUint> = (0..ctx.n()).map(|_| BigUint::from(rng.random::<u64>()) * BigUint::from(rng.random::<u32>()) % &big).collect();
        let src: Vec<Poly> = src_ids.iter().map(|&id| {
            let qi = BigUint::from(ctx.ntt[id].m.q);
            Poly::from_coeffs(xs.iter().map(|x| (x % &qi).try_into().unwrap()).collect(), id)
        }).collect();
        let targets = [2usize, 5, 6];
        let mut census = OpCensus::default();
        let out = ckks::bconv_routine(&ctx, &src, &targets, &mut census);
        for (p, &tid) in out.iter().zip(&targets) {
            let mut c = p.clone();
            ctx.intt_limb(&mut c);
            let qt = BigUint::from(ctx.ntt[tid].m.q);
            for (j, x) in xs.iter().enumerate() {
                let ok = (0..src.len() as u32).any(|u| BigUint::from(c.coeffs[j]) == (x + &big * u) % &qt);
                prop_assert!(ok);
            }
        }
        prop_assert_eq!(census.bconv_mas, 6);
        prop_assert_eq!(census.ntt, 3);
    }
}
