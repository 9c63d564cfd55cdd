use chipsim::report::write_timeline;
use chipsim::workload::depth_program;
use chipsim::{run_workload, AssignmentMode, ChipletConfig, LimbAssignment, MacroOp, WorkloadError};
use proptest::prelude::*;

fn cfg() -> ChipletConfig {
    ChipletConfig::preset_1024x64()
}

#[test]
fn interleaving_idles_less_than_blocks() {
    let prog = depth_program(30);
    let run = |mode| run_workload(&cfg(), &prog, &LimbAssignment::new(mode, 30, 4, 8)).unwrap().report;
    let inter = run(AssignmentMode::Interleaved);
    let seq = run(AssignmentMode::Sequential);
    assert!(inter.idle_cycles() < seq.idle_cycles(), "{} vs {}", inter.idle_cycles(), seq.idle_cycles());
    assert!(inter.total_cycles < seq.total_cycles);
    assert_eq!(inter.steps.len(), prog.len());
    for st in &inter.steps {
        let lo = st.limbs_per_chiplet.iter().min().unwrap();
        let hi = st.limbs_per_chiplet.iter().max().unwrap();
        assert!(hi - lo <= 1, "step {} {:?}", st.index, st.limbs_per_chiplet);
    }
    // sequential blocks strand whole chiplets once the level drops
    assert!(seq.steps.iter().any(|s| s.active_chiplets() < 4));
}

#[test]
fn assignment_maps() {
    assert_eq!(LimbAssignment::new(AssignmentMode::Interleaved, 5, 4, 1).map, [0, 1, 2, 3, 0, 1]);
    assert_eq!(LimbAssignment::new(AssignmentMode::Sequential, 5, 4, 1).map, [0, 0, 1, 1, 2, 2]);
    assert_eq!(LimbAssignment::new(AssignmentMode::Digitwise, 5, 2, 2).map, [0, 0, 1, 1, 0, 0]);
    let a = LimbAssignment::new(AssignmentMode::Sequential, 30, 4, 1);
    assert_eq!(a.limbs_per_chiplet(30, 4), [8, 8, 8, 7]);
    assert_eq!(a.limbs_per_chiplet(7, 4), [8, 0, 0, 0]);
}

#[test]
fn steps_are_ordered_on_the_timeline() {
    let prog = vec![MacroOp::Hmult { l: 6 }, MacroOp::Keyswitch { l: 6, dnum: None }, MacroOp::Rescale { l: 6 }, MacroOp::Hadd { l: 5 }];
    let s = run_workload(&cfg(), &prog, &LimbAssignment::new(AssignmentMode::Interleaved, 6, 4, 1)).unwrap();
    let steps = &s.report.steps;
    for w in steps.windows(2) {
        assert!(w[1].last_end >= w[0].last_end);
    }
    assert_eq!(steps[3].l, Some(5));
    assert_eq!(steps.last().unwrap().last_end, s.report.total_cycles);
}

#[test]
fn program_json_roundtrip() {
    let prog = vec![
        MacroOp::Rotate { l: 3, rot: -2 },
        MacroOp::Keyswitch { l: 3, dnum: Some(4) },
        MacroOp::BootstrapSched { steps: vec![MacroOp::Hadd { l: 4 }, MacroOp::Moddown { l: 2 }] },
    ];
    let text = serde_json::to_string(&prog).unwrap();
    assert!(text.contains(r#""op":"bootstrap_sched""#));
    let back: Vec<MacroOp> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, prog);
    assert_eq!(prog[2].level(), None);
    assert_eq!(prog[2].max_level(), Some(4));
    let parsed: MacroOp = serde_json::from_str(r#"{"op":"keyswitch","l":7}"#).unwrap();
    assert_eq!(parsed, MacroOp::Keyswitch { l: 7, dnum: None });
}

#[test]
fn bundled_bootstrap_schedule_runs() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../specs/programs/bootstrap_sketch.json");
    let prog: Vec<MacroOp> = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let s = run_workload(&cfg(), &prog, &LimbAssignment::new(AssignmentMode::Interleaved, 30, 4, 1)).unwrap();
    assert!(s.report.census.aut > 0);
    assert_eq!(s.report.steps.len(), prog.len());
}

#[test]
fn rejects_invalid_programs() {
    let a = LimbAssignment::new(AssignmentMode::Interleaved, 8, 4, 1);
    let err = |p: Vec<MacroOp>| run_workload(&cfg(), &p, &a).unwrap_err();
    assert!(matches!(err(vec![MacroOp::Hadd { l: 9 }]), WorkloadError::Level { step: 0, l: 9, l_max: 8 }));
    assert!(matches!(err(vec![MacroOp::Hadd { l: 1 }, MacroOp::Rescale { l: 0 }]), WorkloadError::Unsupported { step: 1, .. }));
    assert!(matches!(err(vec![MacroOp::Keyswitch { l: 5, dnum: Some(2) }]), WorkloadError::Unsupported { step: 0, .. }));
    let wide = LimbAssignment { mode: AssignmentMode::Interleaved, map: vec![0, 7] };
    assert!(run_workload(&cfg(), &[MacroOp::Hadd { l: 1 }], &wide).is_err());
}

#[test]
fn timeline_has_one_row_per_op() {
    let prog = depth_program(3);
    let s = run_workload(&cfg(), &prog, &LimbAssignment::new(AssignmentMode::Interleaved, 3, 4, 1)).unwrap();
    let mut buf = Vec::new();
    write_timeline(&s.dag, &s.trace, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "op,chiplet,start,end,kind,limb,digit,dst");
    assert_eq!(lines.count(), s.dag.ops.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn interleaving_balances_every_level(l in 0usize..40, r in 1usize..9) {
        let a = LimbAssignment::new(AssignmentMode::Interleaved, l, r, 1);
        for lv in 0..=l {
            let n = a.limbs_per_chiplet(lv, r);
            prop_assert_eq!(n.iter().sum::<usize>(), lv + 1);
            prop_assert!(n.iter().max().unwrap() - n.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn workload_accounting(l in 1usize..12, r in 1usize..6) {
        let cfg = ChipletConfig { r, ..cfg() };
        let s = run_workload(&cfg, &depth_program(l), &LimbAssignment::new(AssignmentMode::Interleaved, l, r, 1)).unwrap();
        for c in &s.report.chiplets {
            prop_assert_eq!(c.busy + c.idle + c.stall, s.report.total_cycles);
        }
    }
}
