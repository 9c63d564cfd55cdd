//! A depth-30 multiplication chain under interleaved and sequential limb placement.

use chipsim::workload::depth_program;
use chipsim::{run_workload, AssignmentMode, ChipletConfig, LimbAssignment};

fn main() {
    let prog = depth_program(30);
    for mode in [AssignmentMode::Interleaved, AssignmentMode::Sequential] {
        let a = LimbAssignment::new(mode, 30, 4, 1);
        let rep = run_workload(&ChipletConfig::preset_1024x64(), &prog, &a).unwrap().report;
        println!("{mode:?}: {} cycles, {} idle chiplet-cycles", rep.total_cycles, rep.idle_cycles());
    }
}
