use chipsim::analytic::{self, Technique, Q};
use chipsim::sweep::{bootstrap_levels, sweep_chiplets};
use chipsim::ChipletConfig;
use proptest::prelude::*;

#[test]
fn communication_examples() {
    assert_eq!(analytic::comm_polynomials(Technique::Ours, 30, 31, 1, 4), Q::from_integer(132));
    assert_eq!(analytic::comm_polynomials(Technique::B, 30, 31, 1, 4), Q::from_integer(1054));
    assert_eq!(analytic::comm_polynomials(Technique::A, 30, 31, 1, 4), Q::from_integer(33 * 32));
    assert_eq!(analytic::comm_polynomials(Technique::Digitwise, 22, 3, 8, 4), Q::new(140, 3));
    assert_eq!(analytic::comm_polynomials_early(22, 3, 8), Q::new(172, 3));
    assert_eq!(analytic::comm_polynomials(Technique::Alternate, 22, 3, 8, 4), Q::from_integer(117));
}

#[test]
fn census_example() {
    assert_eq!(analytic::census_digits(22, 3, 8, 4), Q::new(81, 2));
}

#[test]
fn chiplet_bound_at_default_bandwidths() {
    assert_eq!(analytic::chiplet_bound(30, 1200.0 / 630.0, 4.0), 4);
    assert_eq!(ChipletConfig::preset_1024x64().bound_warning(30), None);
    assert!(ChipletConfig::preset_512x128().bound_warning(30).is_some());
}

#[test]
fn key_storage_examples() {
    let s = analytic::key_storage(22, 3, 1 << 16, 54);
    assert_eq!(s.per_digit_limb, 884_736);
    let mb = s.expanded as f64 / 1e6;
    assert!((91.0 / 2.0..=91.0 * 2.0).contains(&mb), "{mb}");
    let ratio = s.seeded as f64 / s.expanded as f64;
    assert!((0.5..0.51).contains(&ratio), "{ratio}");
}

#[test]
fn throughput_examples() {
    let t = analytic::keyswitch_throughput(30, 1024, 1.5e9, true);
    assert!((t - 1431.9).abs() < 0.1);
    assert_eq!(analytic::keyswitch_throughput(4, 1, 1.0, true), 1.0 / 35.0);
    assert_eq!(analytic::keyswitch_cycles(30, 1024, false), 3_079_168);
}

#[test]
fn twiddle_table() {
    let rows = analytic::twiddle_rows();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.n1 * r.n2 == 1 << 16));
    assert!(rows.iter().all(|r| r.tfg_memory_words < r.stored_memory_words));
    assert_eq!(analytic::twiddle_tradeoff(1024, 64, true).unwrap(), (131, 310_624));
    assert_eq!(analytic::twiddle_tradeoff(1024, 64, false).unwrap(), (0, 4_228_064));
    assert!(analytic::twiddle_tradeoff(4096, 16, true).is_err());
}

#[test]
fn sweep_shrinks_with_more_chiplets() {
    let sw = sweep_chiplets(&ChipletConfig::preset_1024x64(), &[4, 8], 20..=24).unwrap();
    assert_eq!(sw.points.len(), 10);
    assert_eq!(sw.summary[0].ratio, 1.0);
    assert!(sw.summary[1].ratio < 0.7);
    assert!(sw.points.windows(2).all(|w| (w[0].r, w[0].l) < (w[1].r, w[1].l)));
    assert_eq!(bootstrap_levels(30, 15), 16..=30);
    assert_eq!(bootstrap_levels(10, 15), 0..=10);
}

proptest! {
    #[test]
    fn storage_doubles_with_ring_degree(l in 1usize..40, dnum in 1usize..8, logn in 10u32..17, w in 20u32..61) {
        let a = analytic::key_storage(l, dnum, 1 << logn, w);
        let b = analytic::key_storage(l, dnum, 1 << (logn + 1), w);
        prop_assert_eq!(b.expanded, 2 * a.expanded);
        prop_assert!(a.seeded < a.expanded);
    }

    #[test]
    fn shadowed_throughput_dominates(l in 0usize..64, n1 in 1usize..4096) {
        prop_assert!(analytic::keyswitch_cycles(l, n1, true) < analytic::keyswitch_cycles(l, n1, false));
        let imp = analytic::shadow_improvement(l);
        prop_assert!(imp > Q::new(1, 2) && imp < Q::new(2, 3));
    }

    #[test]
    fn bound_never_exceeds_chain(l in 0usize..64, k in 0.1f64..10.0, u in 0.5f64..8.0) {
        let b = analytic::chiplet_bound(l, k, u);
        prop_assert!((1..=l + 2).contains(&b));
    }
}
