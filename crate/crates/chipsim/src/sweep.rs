//! KeySwitch cost across chiplet counts and levels.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ChipletConfig;
use crate::engine::SimError;
use crate::ring::schedule_keyswitch_ring;

/// Levels a bootstrapping pass consumes when it starts at `l_max` and uses
/// `l_boot` levels; the KeySwitches it issues run at these levels.
pub fn bootstrap_levels(l_max: usize, l_boot: usize) -> RangeInclusive<usize> {
    (l_max + 1).saturating_sub(l_boot)..=l_max
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub r: usize,
    pub l: usize,
    pub total_cycles: u64,
    pub wall_time_ms: f64,
    pub ntt_utilization: f64,
    pub comm_overhead: f64,
}

/// Mean KeySwitch time over every level for one chiplet count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub r: usize,
    pub mean_cycles: f64,
    pub mean_time_ms: f64,
    /// `mean_time(r) / mean_time(first r in the sweep)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub points: Vec<SweepPoint>,
    pub summary: Vec<SweepSummary>,
}

/// Simulates one KeySwitch per `(r, l)` with `l` in `levels`. Runs are
/// independent and execute in parallel; the result is ordered by `(r, l)`.
pub fn sweep_chiplets(template: &ChipletConfig, r_list: &[usize], levels: RangeInclusive<usize>) -> Result<Sweep, SimError> {
    let jobs: Vec<(usize, usize)> = r_list.iter().flat_map(|&r| levels.clone().map(move |l| (r, l))).collect();
    let points = jobs
        .par_iter()
        .map(|&(r, l)| {
            let cfg = ChipletConfig { r, ..template.clone() };
            let rep = schedule_keyswitch_ring(&cfg, l)?.report;
            Ok(SweepPoint {
                r,
                l,
                total_cycles: rep.total_cycles,
                wall_time_ms: rep.wall_time_ms,
                ntt_utilization: rep.ntt_utilization,
                comm_overhead: rep.comm_overhead,
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    let mut summary: Vec<SweepSummary> = r_list
        .iter()
        .map(|&r| {
            let pts: Vec<&SweepPoint> = points.iter().filter(|p| p.r == r).collect();
            let n = pts.len().max(1) as f64;
            SweepSummary {
                r,
                mean_cycles: pts.iter().map(|p| p.total_cycles as f64).sum::<f64>() / n,
                mean_time_ms: pts.iter().map(|p| p.wall_time_ms).sum::<f64>() / n,
                ratio: 1.0,
            }
        })
        .collect();
    if let Some(base) = summary.first().map(|s| s.mean_cycles) {
        for s in &mut summary {
            s.ratio = s.mean_cycles / base;
        }
    }
    Ok(Sweep { points, summary })
}
