use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::ChipletConfig;
use crate::engine::{Dag, MicroKind, Phase, Trace, Unit};

/// Why a transform pipe sat without work for a stretch of cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gap {
    Idle,
    C2c,
    Hbm,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChipletStats {
    pub chiplet: usize,
    /// Cycles the transform pipe was issuing work.
    pub busy: u64,
    pub idle: u64,
    /// Waits on a chiplet-to-chiplet transfer or an HBM fetch.
    pub stall: u64,
    pub stall_c2c: u64,
    pub stall_hbm: u64,
    /// Cycles spent on NTT, INTT and AUT.
    pub transform_busy: u64,
    pub transforms: u64,
    pub intts: u64,
    pub ntts: u64,
    pub mas_unit_busy: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinkStats {
    pub from: usize,
    pub to: usize,
    pub transfers: u64,
    pub bytes: u64,
    pub busy: u64,
    pub occupancy: f64,
}

/// Operation counts in the same shape as the functional layer's tally.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimCensus {
    pub intt: u64,
    pub ntt: u64,
    pub mas: u64,
    pub bconv_mas: u64,
    pub aut: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseStats {
    pub phase: Phase,
    pub first_start: u64,
    pub last_end: u64,
    pub stall_c2c: u64,
    pub stall_hbm: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub schema: u32,
    pub total_cycles: u64,
    pub wall_time_ms: f64,
    /// Transform-pipe busy cycles over `r · total_cycles`.
    pub ntt_utilization: f64,
    /// Stall cycles over `r · total_cycles`.
    pub comm_overhead: f64,
    pub polynomials_transferred: u64,
    pub c2c_bytes: u64,
    pub census: SimCensus,
    pub chiplets: Vec<ChipletStats>,
    pub links: Vec<LinkStats>,
    pub phases: Vec<PhaseStats>,
    /// Per macro-op timing, filled in for programs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<crate::workload::StepStats>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl CycleReport {
    pub fn stall_cycles(&self) -> u64 {
        self.chiplets.iter().map(|c| c.stall).sum()
    }

    pub fn idle_cycles(&self) -> u64 {
        self.chiplets.iter().map(|c| c.idle).sum()
    }

    pub fn phase(&self, p: Phase) -> Option<&PhaseStats> {
        self.phases.iter().find(|s| s.phase == p)
    }

    pub fn build(cfg: &ChipletConfig, dag: &Dag, trace: &Trace) -> Self {
        let total = trace.makespan();
        let mut chiplets: Vec<ChipletStats> = (0..dag.r).map(|c| ChipletStats { chiplet: c, ..Default::default() }).collect();
        let mut phases: BTreeMap<Phase, PhaseStats> = BTreeMap::new();
        let mut census = SimCensus::default();
        let mut links: BTreeMap<(usize, usize), LinkStats> = BTreeMap::new();
        let mut last_end = vec![0u64; dag.r];

        for op in &dag.ops {
            let (s, e) = (trace.start[op.id], trace.end[op.id]);
            let ps = phases.entry(op.phase).or_insert(PhaseStats { phase: op.phase, first_start: s, ..Default::default() });
            ps.first_start = ps.first_start.min(s);
            ps.last_end = ps.last_end.max(e);
            census.mas += op.key_mas as u64;
            census.bconv_mas += op.bconv_mas as u64;
            match op.kind {
                MicroKind::Ntt => census.ntt += 1,
                MicroKind::Intt => census.intt += 1,
                MicroKind::Aut => census.aut += 1,
                _ => {}
            }
            let st = &mut chiplets[op.chiplet];
            match op.unit {
                Unit::Ntt => {
                    let gap = s - last_end[op.chiplet];
                    if gap > 0 {
                        let cause = match dag.critical_dep(trace, op.id).map(|d| dag.ops[d].kind) {
                            Some(MicroKind::Send) => Gap::C2c,
                            Some(MicroKind::HbmRd) => Gap::Hbm,
                            _ => Gap::Idle,
                        };
                        match cause {
                            Gap::Idle => st.idle += gap,
                            Gap::C2c => {
                                st.stall_c2c += gap;
                                ps.stall_c2c += gap;
                            }
                            Gap::Hbm => {
                                st.stall_hbm += gap;
                                ps.stall_hbm += gap;
                            }
                        }
                    }
                    st.busy += op.duration;
                    if op.kind.is_transform() {
                        st.transform_busy += op.duration;
                        st.transforms += 1;
                    }
                    match op.kind {
                        MicroKind::Intt => st.intts += 1,
                        MicroKind::Ntt => st.ntts += 1,
                        _ => {}
                    }
                    last_end[op.chiplet] = e;
                }
                Unit::Mas => st.mas_unit_busy += op.duration,
                Unit::Link => {
                    let to = op.dst.expect("transfer has a destination");
                    let l = links.entry((op.chiplet, to)).or_insert(LinkStats { from: op.chiplet, to, ..Default::default() });
                    l.transfers += 1;
                    l.bytes += op.bytes;
                    l.busy += op.duration;
                }
                Unit::Aut | Unit::Hbm => {}
            }
        }
        for (c, st) in chiplets.iter_mut().enumerate() {
            st.idle += total - last_end[c];
            st.stall = st.stall_c2c + st.stall_hbm;
            debug_assert_eq!(st.busy + st.idle + st.stall, total);
        }
        let links: Vec<LinkStats> = links
            .into_values()
            .map(|mut l| {
                l.occupancy = if total == 0 { 0.0 } else { l.busy as f64 / total as f64 };
                l
            })
            .collect();
        let denom = (dag.r as u64 * total).max(1) as f64;
        let transform_busy: u64 = chiplets.iter().map(|c| c.transform_busy).sum();
        let stall: u64 = chiplets.iter().map(|c| c.stall).sum();
        CycleReport {
            schema: 1,
            total_cycles: total,
            wall_time_ms: cfg.cycles_to_ms(total),
            ntt_utilization: transform_busy as f64 / denom,
            comm_overhead: stall as f64 / denom,
            polynomials_transferred: links.iter().map(|l| l.transfers).sum(),
            c2c_bytes: links.iter().map(|l| l.bytes).sum(),
            census,
            chiplets,
            links,
            phases: phases.into_values().collect(),
            steps: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

/// One CSV row per micro-op.
#[derive(Debug, Serialize)]
struct TimelineRow {
    op: usize,
    chiplet: usize,
    start: u64,
    end: u64,
    kind: MicroKind,
    limb: u32,
    digit: u32,
    dst: Option<usize>,
}

pub fn write_timeline<W: std::io::Write>(dag: &Dag, trace: &Trace, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut order: Vec<usize> = (0..dag.ops.len()).collect();
    order.sort_by_key(|&i| (dag.ops[i].chiplet, trace.start[i], i));
    for i in order {
        let op = &dag.ops[i];
        w.serialize(TimelineRow {
            op: i,
            chiplet: op.chiplet,
            start: trace.start[i],
            end: trace.end[i],
            kind: op.kind,
            limb: op.limb,
            digit: op.digit,
            dst: op.dst,
        })?;
    }
    w.flush()?;
    Ok(())
}
