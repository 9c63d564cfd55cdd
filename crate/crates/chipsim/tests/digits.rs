use chipsim::analytic::{self, Technique};
use chipsim::{schedule_keyswitch_digits, ChipletConfig, DigitError, DigitStrategy};
use proptest::prelude::*;

fn exact() -> ChipletConfig {
    ChipletConfig { exact: true, ..ChipletConfig::preset_1024x64() }
}

#[test]
fn census_matches_closed_form_on_grid() {
    for l in [11usize, 23, 29] {
        for dnum in [2usize, 3, 6] {
            let k = (l + 1) / dnum;
            let s = schedule_keyswitch_digits(&exact(), l, dnum, k, DigitStrategy::Alternate).unwrap();
            assert_eq!(s.census_ntt_equiv.unwrap(), analytic::census_digits(l, dnum, k, 4), "l={l} dnum={dnum}");
        }
    }
}

#[test]
fn dnum3_keeps_transform_pipe_busy() {
    let s = schedule_keyswitch_digits(&ChipletConfig::preset_1024x64(), 22, 3, 8, DigitStrategy::Alternate).unwrap();
    assert!(s.report.ntt_utilization >= 0.90, "{}", s.report.ntt_utilization);
    assert!(s.report.comm_overhead <= 0.08, "{}", s.report.comm_overhead);
    assert_eq!(s.report.polynomials_transferred, 3 * (23 + 16));
}

#[test]
fn digitwise_leaves_chiplets_idle() {
    let cfg = ChipletConfig::preset_1024x64();
    let alt = schedule_keyswitch_digits(&cfg, 22, 3, 8, DigitStrategy::Alternate).unwrap();
    let dw = schedule_keyswitch_digits(&cfg, 22, 3, 8, DigitStrategy::Digitwise).unwrap();
    assert!(dw.report.ntt_utilization < alt.report.ntt_utilization);
    assert!(dw.report.total_cycles > alt.report.total_cycles);
    // the fourth chiplet holds no digit
    assert_eq!(dw.report.chiplets[3].transforms, 0);
}

#[test]
fn rejects_bad_digit_shapes() {
    let cfg = ChipletConfig::preset_1024x64();
    assert_eq!(
        schedule_keyswitch_digits(&cfg, 22, 2, 8, DigitStrategy::Alternate).unwrap_err(),
        DigitError::Coverage { have: 16, need: 23 }
    );
    assert_eq!(
        schedule_keyswitch_digits(&cfg, 22, 6, 4, DigitStrategy::Digitwise).unwrap_err(),
        DigitError::TooFewChiplets { dnum: 6, r: 4 }
    );
}

#[test]
fn one_limb_digits_on_one_chiplet_need_no_links() {
    let cfg = ChipletConfig { r: 1, ..exact() };
    let s = schedule_keyswitch_digits(&cfg, 7, 8, 1, DigitStrategy::Alternate).unwrap();
    assert_eq!(s.report.polynomials_transferred, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn alternate_traffic_and_accounting(r in 2usize..7, k in 1usize..6, dnum in 1usize..6) {
        let l = k * dnum - 1;
        let cfg = ChipletConfig { r, ..ChipletConfig::preset_1024x64() };
        let s = schedule_keyswitch_digits(&cfg, l, dnum, k, DigitStrategy::Alternate).unwrap();
        let expect = analytic::comm_polynomials(Technique::Alternate, l, dnum, k, r);
        prop_assert_eq!(s.report.polynomials_transferred, expect.to_integer());
        for c in &s.report.chiplets {
            prop_assert_eq!(c.busy + c.idle + c.stall, s.report.total_cycles);
        }
    }
}
