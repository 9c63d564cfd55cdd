//! Library side of the `rnsfhe` command: experiment files, cross-checks and
//! the closed-form calculator.

pub mod analyze;
pub mod experiment;

use std::fmt::Write;

use chipsim::CycleReport;

/// Human-readable summary of a report.
pub fn summary_table(rep: &CycleReport) -> String {
    let mut s = String::new();
    let rows: [(&str, String); 6] = [
        ("total cycles", rep.total_cycles.to_string()),
        ("wall time (ms)", format!("{:.4}", rep.wall_time_ms)),
        ("ntt utilization", format!("{:.3}", rep.ntt_utilization)),
        ("comm overhead", format!("{:.3}", rep.comm_overhead)),
        ("polynomials sent", rep.polynomials_transferred.to_string()),
        ("c2c bytes", rep.c2c_bytes.to_string()),
    ];
    for (k, v) in rows {
        let _ = writeln!(s, "{k:<18}{v:>14}");
    }
    let _ = writeln!(s, "\n{:>7} {:>10} {:>10} {:>10} {:>10}", "chiplet", "busy", "idle", "stall", "transforms");
    for c in &rep.chiplets {
        let _ = writeln!(s, "{:>7} {:>10} {:>10} {:>10} {:>10}", c.chiplet, c.busy, c.idle, c.stall, c.transforms);
    }
    for w in &rep.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}
