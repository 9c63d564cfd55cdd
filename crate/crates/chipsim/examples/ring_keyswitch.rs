//! KeySwitch on a four-chiplet ring at the top level, for both presets.

use chipsim::{schedule_keyswitch_ring, ChipletConfig, Phase};

fn main() {
    for cfg in [ChipletConfig::preset_1024x64(), ChipletConfig::preset_512x128()] {
        let s = schedule_keyswitch_ring(&cfg, 30).unwrap();
        let rep = &s.report;
        let stall = rep.phase(Phase::ModUp).map_or(0, |p| p.stall_c2c);
        println!(
            "{}x{}: {} cycles = {:.4} ms, {} transfers, ModUp link stall {stall}, utilization {:.3}",
            cfg.n1, cfg.n2, rep.total_cycles, rep.wall_time_ms, rep.polynomials_transferred, rep.ntt_utilization
        );
        for w in &rep.warnings {
            println!("  warning: {w}");
        }
    }
}
