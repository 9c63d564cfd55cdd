use chipsim::analytic::{self, Technique};
use chipsim::{schedule_keyswitch_ring, schedule_strawman, ChipletConfig, CommRule, Strawman};

fn cfg() -> ChipletConfig {
    ChipletConfig { comm_rule: CommRule::TwiceLinear, ..ChipletConfig::preset_1024x64() }
}

#[test]
fn transfer_counts_match_closed_forms() {
    for l in [6usize, 14, 30] {
        for (s, t) in [(Strawman::A, Technique::A), (Strawman::B, Technique::B), (Strawman::C, Technique::C)] {
            let sim = schedule_strawman(&cfg(), l, s).unwrap();
            let expect = analytic::comm_polynomials(t, l, l + 1, 1, 4).to_integer();
            assert_eq!(sim.report.polynomials_transferred, expect, "{s:?} l={l}");
        }
        let ours = schedule_keyswitch_ring(&cfg(), l).unwrap();
        assert_eq!(ours.report.polynomials_transferred, analytic::comm_polynomials(Technique::Ours, l, l + 1, 1, 4).to_integer());
    }
}

#[test]
fn function_split_puts_every_transform_on_one_chiplet() {
    let l = 14;
    let s = schedule_strawman(&cfg(), l, Strawman::A).unwrap();
    assert_eq!(s.report.chiplets.len(), 4);
    let c0 = &s.report.chiplets[0];
    assert_eq!(c0.intts as usize, l + 1);
    assert_eq!(c0.ntts as usize, (l + 1) * (l + 2));
    assert_eq!(s.report.census.intt as usize, l + 3);
    assert_eq!(s.report.census.ntt as usize, (l + 1) * (l + 4));
}

#[test]
fn limb_split_maxima() {
    let l = 14;
    let b = schedule_strawman(&cfg(), l, Strawman::B).unwrap();
    assert_eq!(b.report.chiplets.len(), l + 2);
    assert_eq!(b.report.chiplets.iter().map(|c| c.intts).max(), Some(2));
    assert_eq!(b.report.chiplets.iter().map(|c| c.ntts).max(), Some(l as u64 + 3));

    let c = schedule_strawman(&cfg(), l, Strawman::C).unwrap();
    assert_eq!(c.report.chiplets.iter().map(|c| c.intts).max(), Some(l as u64 + 3));
    assert_eq!(c.report.chiplets.iter().map(|c| c.ntts).max(), Some(l as u64 + 3));
}

#[test]
fn ring_beats_the_function_split() {
    let ours = schedule_keyswitch_ring(&cfg(), 30).unwrap().report.total_cycles;
    let a = schedule_strawman(&cfg(), 30, Strawman::A).unwrap().report.total_cycles;
    assert!(a > 5 * ours, "A {a} vs ring {ours}");
}

#[test]
fn chiplet_count_ignores_cfg_r() {
    let wide = ChipletConfig { r: 9, ..cfg() };
    assert_eq!(schedule_strawman(&wide, 6, Strawman::B).unwrap().report.chiplets.len(), 8);
    assert_eq!(schedule_strawman(&wide, 6, Strawman::A).unwrap().report.chiplets.len(), 4);
}
