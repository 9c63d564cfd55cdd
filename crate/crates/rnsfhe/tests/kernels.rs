use num_bigint::BigUint;
use proptest::prelude::*;
use rnsfhe::modarith::{bit_reverse, find_ntt_prime, is_prime, mod_mul, pow_mod, PrimeModulus, RnsBasis, TwiddleMode};
use rnsfhe::poly::{
    automorphism_oracle, automorphism_shuffle, automorphism_shuffle_faulty, galois_element, intt_reference, mas,
    ntt_hybrid, ntt_reference, shuffle_tree, Domain, MasOp, NttContext, NttPlan, Poly, ShuffleFault,
};
use rnsfhe::trivium::{trivium_stream, BitSerialTrivium, ResidueSampler};
use rnsfhe::{codec, verify};

fn ctx(log_n: u32, bits: u32) -> NttContext {
    NttContext::new(find_ntt_prime(bits, 2 << log_n, 0).unwrap())
}

fn poly(c: &NttContext, seed: u64) -> Poly {
    let mut s = ResidueSampler::new(seed);
    Poly::from_coeffs(s.fill(&c.m, c.n()), 0)
}

#[test]
fn smallest_ntt_primes() {
    assert_eq!(find_ntt_prime(5, 16, 0).unwrap().q, 17);
    assert_eq!(find_ntt_prime(7, 16, 0).unwrap().q, 97);
    let m = find_ntt_prime(54, 1 << 17, 0).unwrap();
    assert_eq!(m.q.ilog2() + 1, 54);
    assert_eq!(m.q % (1 << 17), 1);
    assert_eq!(m.order_in_two_n(m.psi), Some(1 << 17));
}

#[test]
fn unsupported_widths_are_rejected() {
    assert!(find_ntt_prime(60, 16, 0).is_err());
    assert!(PrimeModulus::new(91, 16).is_err());
    assert!(RnsBasis::generate(16, 3, 0, 20, 20).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn barrett_matches_bigint(a in any::<u64>(), b in any::<u64>(), bits in 20u32..=54, skip in 0usize..4) {
        let m = find_ntt_prime(bits, 1 << 12, skip).unwrap();
        let (a, b) = (a % m.q, b % m.q);
        let want = (BigUint::from(a) * BigUint::from(b)) % BigUint::from(m.q);
        prop_assert_eq!(BigUint::from(mod_mul(a, b, &m)), want);
        prop_assert_eq!(m.add(a, b) as u128, (a as u128 + b as u128) % m.q as u128);
        prop_assert_eq!(m.add(m.sub(a, b), b), a);
        prop_assert_eq!(m.mul(a, m.inv(if a == 0 { 1 } else { a })), if a == 0 { 0 } else { 1 });
    }

    #[test]
    fn wide_reduction_matches_bigint(x in any::<u128>(), bits in 20u32..=54) {
        let m = find_ntt_prime(bits, 1 << 10, 0).unwrap();
        let x = x % ((m.q as u128) * (m.q as u128));
        prop_assert_eq!(m.reduce_wide(x) as u128, x % m.q as u128);
    }

    #[test]
    fn primality_agrees_with_pow_test(n in 2u64..200_000) {
        let trial = (2..).take_while(|d: &u64| d * d <= n).all(|d| n % d != 0);
        prop_assert_eq!(is_prime(n), trial);
        if trial && n > 2 {
            prop_assert_eq!(pow_mod(2, n - 1, n), 1);
        }
    }

    #[test]
    fn hybrid_ntt_matches_reference(log_n in 1u32..=9, seed in any::<u64>()) {
        let c = ctx(log_n, 40);
        let p = poly(&c, seed);
        let want = ntt_reference(&c, &p).unwrap();
        for mode in [TwiddleMode::Stored, TwiddleMode::OnTheFly] {
            for plan in NttPlan::all_splits(c.n(), mode) {
                prop_assert_eq!(&ntt_hybrid(&c, &p, &plan).unwrap(), &want, "plan {:?}", plan);
            }
        }
        prop_assert_eq!(intt_reference(&c, &want).unwrap(), p);
    }

    #[test]
    fn ntt_product_matches_schoolbook(log_n in 1u32..=6, sa in any::<u64>(), sb in any::<u64>()) {
        let c = ctx(log_n, 30);
        let (a, b) = (poly(&c, sa), poly(&c, sb));
        let fa = ntt_reference(&c, &a).unwrap();
        let fb = ntt_reference(&c, &b).unwrap();
        let prod = intt_reference(&c, &mas(&c.m, MasOp::Mul, &fa, &fb, None).unwrap()).unwrap();
        prop_assert_eq!(prod.coeffs, verify::schoolbook_negacyclic(&a.coeffs, &b.coeffs, c.m.q));
    }

    #[test]
    fn shuffle_matches_oracle(log_n in 2u32..=9, g in any::<u64>(), split in any::<u32>(), seed in any::<u64>()) {
        let c = ctx(log_n, 30);
        let n = c.n();
        let gle = (g % (2 * n as u64)) | 1;
        let b = split % (log_n + 1);
        let plan = NttPlan::new(n >> b, 1 << b, TwiddleMode::Stored);
        let p = poly(&c, seed);
        prop_assert_eq!(automorphism_shuffle(&c, &p, gle, &plan).unwrap(), automorphism_oracle(&c, &p, gle).unwrap());
    }

    #[test]
    fn automorphisms_compose(log_n in 2u32..=8, g in any::<u64>(), h in any::<u64>(), seed in any::<u64>()) {
        let c = ctx(log_n, 30);
        let two_n = 2 * c.n() as u64;
        let (g, h) = ((g % two_n) | 1, (h % two_n) | 1);
        let p = poly(&c, seed);
        let gh = automorphism_oracle(&c, &automorphism_oracle(&c, &p, h).unwrap(), g).unwrap();
        prop_assert_eq!(gh, automorphism_oracle(&c, &p, g * h % two_n).unwrap());
    }

    #[test]
    fn automorphism_is_signed_permutation(log_n in 2u32..=8, g in any::<u64>()) {
        let c = ctx(log_n, 30);
        let n = c.n();
        let gle = (g % (2 * n as u64)) | 1;
        // coefficient i holds i+1, so the image identifies its source up to sign
        let p = Poly::from_coeffs((1..=n as u64).collect(), 0);
        let out = automorphism_oracle(&c, &p, gle).unwrap();
        let mut seen = vec![false; n];
        for (j, &v) in out.coeffs.iter().enumerate() {
            let (src, neg) = if v <= n as u64 { (v - 1, false) } else { (c.m.q - v - 1, true) };
            let t = src * gle % (2 * n as u64);
            prop_assert_eq!(t % n as u64, j as u64);
            prop_assert_eq!(t >= n as u64, neg);
            prop_assert!(!seen[src as usize]);
            seen[src as usize] = true;
        }
    }

    #[test]
    fn shuffle_tree_routes_odd_affine_maps(log_w in 0u32..=8, g in any::<usize>(), off in any::<usize>()) {
        let w = 1usize << log_w;
        let g = g | 1;
        let mut lanes: Vec<(usize, usize)> = (0..w).map(|j| (off.wrapping_add(j.wrapping_mul(g)) % w, j)).collect();
        prop_assert!(shuffle_tree(&mut lanes).is_some());
        for (i, &(dest, _)) in lanes.iter().enumerate() {
            prop_assert_eq!(dest, i);
        }
    }

    #[test]
    fn shuffle_destination_rows(log_n in 2u32..=8, g in any::<u64>(), split in any::<u32>()) {
        // a row of the matrix layout lands entirely on one address
        let c = ctx(log_n, 30);
        let n = c.n();
        let gle = (g % (2 * n as u64)) | 1;
        let b = split % (log_n + 1);
        let plan = NttPlan::new(n >> b, 1 << b, TwiddleMode::Stored);
        for l0 in 0..plan.n1 {
            let mut p = Poly::zero(n, 0, Domain::Coeff);
            for j in 0..plan.n2 {
                p.coeffs[j * plan.n1 + l0] = 1;
            }
            let out = automorphism_shuffle(&c, &p, gle, &plan).unwrap();
            let l1 = (l0 as u64 * gle % plan.n1 as u64) as usize;
            for (idx, &v) in out.coeffs.iter().enumerate() {
                prop_assert_eq!(v != 0, idx % plan.n1 == l1);
            }
        }
    }

    #[test]
    fn mac_chain_accumulates(log_n in 1u32..=6, seeds in proptest::collection::vec(any::<u64>(), 2..8)) {
        let c = ctx(log_n, 40);
        let terms: Vec<Poly> = seeds.iter().map(|&s| poly(&c, s)).collect();
        let mut acc = Poly::zero(c.n(), 0, Domain::Coeff);
        for pair in terms.windows(2) {
            acc = mas(&c.m, MasOp::Mac, &pair[0], &pair[1], Some(&acc)).unwrap();
        }
        for i in 0..c.n() {
            let want = terms.windows(2).fold(0u128, |s, w| (s + w[0].coeffs[i] as u128 * w[1].coeffs[i] as u128) % c.m.q as u128);
            prop_assert_eq!(acc.coeffs[i] as u128, want);
        }
    }

    #[test]
    fn trivium_parallel_matches_bit_serial(seed in any::<u64>()) {
        let mut serial = BitSerialTrivium::new(seed);
        for w in trivium_stream(seed, 8) {
            prop_assert_eq!(w, serial.next_word());
        }
    }

    #[test]
    fn sampled_residues_are_reduced(seed in any::<u64>(), bits in 20u32..=54) {
        let m = find_ntt_prime(bits, 1 << 10, 0).unwrap();
        let mut s = ResidueSampler::new(seed);
        let v = s.fill(&m, 256);
        prop_assert!(v.iter().all(|&x| x < m.q));
        prop_assert_eq!(v, ResidueSampler::new(seed).fill(&m, 256));
    }

    #[test]
    fn poly_codec_roundtrip(log_n in 0u32..=8, seed in any::<u64>(), ntt in any::<bool>(), id in 0usize..40) {
        let c = ctx(log_n.max(1), 40);
        let mut p = poly(&c, seed);
        p.modulus_id = id;
        if ntt {
            p.domain = Domain::Ntt;
        }
        let bytes = codec::encode_poly(&p);
        prop_assert_eq!(bytes.len(), 24 + 8 * p.n());
        prop_assert_eq!(codec::decode_poly(&bytes).unwrap(), p);
    }
}

#[test]
fn twiddle_modes_agree_on_every_power() {
    let c = ctx(8, 40);
    for i in 0..2 * c.n() {
        let direct = c.m.pow(c.m.psi, i as u64);
        assert_eq!(c.m.twiddle(&c.table, i, TwiddleMode::Stored), direct);
        assert_eq!(c.m.twiddle(&c.table, i, TwiddleMode::OnTheFly), direct);
    }
    assert_eq!(c.table.psi_rev[1], c.m.pow(c.m.psi, bit_reverse(1, 8) as u64));
}

#[test]
fn faulty_shuffle_is_detected() {
    let c = ctx(8, 30);
    let p = poly(&c, 3);
    let plan = NttPlan::new(16, 16, TwiddleMode::Stored);
    let gle = galois_element(1, c.n());
    let bad = automorphism_shuffle_faulty(&c, &p, gle, &plan, ShuffleFault::AddressOffByOne).unwrap();
    assert_ne!(bad, automorphism_oracle(&c, &p, gle).unwrap());
}

#[test]
fn domain_and_plan_errors() {
    let c = ctx(4, 30);
    let p = poly(&c, 1);
    let f = ntt_reference(&c, &p).unwrap();
    assert!(ntt_reference(&c, &f).is_err());
    assert!(intt_reference(&c, &p).is_err());
    assert!(ntt_hybrid(&c, &p, &NttPlan::new(4, 8, TwiddleMode::Stored)).is_err());
    assert!(mas(&c.m, MasOp::Add, &p, &f, None).is_err());
    assert!(mas(&c.m, MasOp::Mac, &p, &p, None).is_err());
    assert!(automorphism_oracle(&c, &p, 4).is_err());
}

#[test]
fn galois_elements_are_powers_of_five() {
    let n = 1 << 10;
    assert_eq!(galois_element(0, n), 1);
    assert_eq!(galois_element(1, n), 5);
    assert_eq!(galois_element(2, n), 25);
    assert_eq!(galois_element(-1, n), galois_element(n as i64 / 2 - 1, n));
}

#[test]
fn params_doc_roundtrip() {
    let b = RnsBasis::generate(1 << 8, 4, 2, 30, 31).unwrap();
    let doc = b.to_doc();
    let json = serde_json::to_string(&doc).unwrap();
    let back: rnsfhe::modarith::ParamsDoc = serde_json::from_str(&json).unwrap();
    assert_eq!(back, doc);
    let b2 = RnsBasis::from_doc(&back).unwrap();
    assert_eq!(b2.q_list.iter().map(|m| m.q).collect::<Vec<_>>(), b.q_list.iter().map(|m| m.q).collect::<Vec<_>>());
    assert_eq!(b2.p_inv_mod_q, b.p_inv_mod_q);
    assert_eq!(b.k, 3);
}
