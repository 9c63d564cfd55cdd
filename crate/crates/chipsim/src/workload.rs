//! Programs of homomorphic macro-operations executed on one shared timeline.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::build::{Builder, Simulation};
use crate::config::{ChipletConfig, ConfigError};
use crate::engine::{MicroKind, OpSpec, Phase, SimError, Unit};
use crate::ring::{emit_moddown, emit_modup, emit_rescale, Layout};

/// One macro-instruction. Levels are explicit so a program can be checked
/// without replaying it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum MacroOp {
    Hadd { l: usize },
    Hmult { l: usize },
    Keyswitch {
        l: usize,
        /// Only `l + 1` (one limb per digit) is scheduled on the ring.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dnum: Option<usize>,
    },
    Rotate { l: usize, rot: i64 },
    Rescale { l: usize },
    Moddown { l: usize },
    /// A user-supplied bootstrapping schedule, expanded in place.
    BootstrapSched { steps: Vec<MacroOp> },
}

impl MacroOp {
    pub fn name(&self) -> &'static str {
        match self {
            MacroOp::Hadd { .. } => "hadd",
            MacroOp::Hmult { .. } => "hmult",
            MacroOp::Keyswitch { .. } => "keyswitch",
            MacroOp::Rotate { .. } => "rotate",
            MacroOp::Rescale { .. } => "rescale",
            MacroOp::Moddown { .. } => "moddown",
            MacroOp::BootstrapSched { .. } => "bootstrap_sched",
        }
    }

    /// Level the op runs at; `None` for composite schedules.
    pub fn level(&self) -> Option<usize> {
        match *self {
            MacroOp::Hadd { l }
            | MacroOp::Hmult { l }
            | MacroOp::Keyswitch { l, .. }
            | MacroOp::Rotate { l, .. }
            | MacroOp::Rescale { l }
            | MacroOp::Moddown { l } => Some(l),
            MacroOp::BootstrapSched { .. } => None,
        }
    }

    /// Highest level touched, looking inside composite schedules.
    pub fn max_level(&self) -> Option<usize> {
        match self {
            MacroOp::BootstrapSched { steps } => steps.iter().filter_map(MacroOp::max_level).max(),
            op => op.level(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentMode {
    /// Limb `r·j + i` on chiplet `i`.
    Interleaved,
    /// Contiguous blocks of `ceil((L+1)/r)` limbs.
    Sequential,
    /// Whole digits of `K` limbs, dealt round-robin.
    Digitwise,
}

/// Which chiplet holds each limb of the top-level modulus chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimbAssignment {
    pub mode: AssignmentMode,
    pub map: Vec<usize>,
}

impl LimbAssignment {
    /// `k` is the digit size and only matters for [`AssignmentMode::Digitwise`].
    pub fn new(mode: AssignmentMode, l_max: usize, r: usize, k: usize) -> Self {
        let block = (l_max + 1).div_ceil(r).max(1);
        let k = k.max(1);
        let map = (0..=l_max)
            .map(|i| match mode {
                AssignmentMode::Interleaved => i % r,
                AssignmentMode::Sequential => (i / block).min(r - 1),
                AssignmentMode::Digitwise => (i / k) % r,
            })
            .collect();
        Self { mode, map }
    }

    /// Limbs each chiplet holds at level `l`.
    pub fn limbs_per_chiplet(&self, l: usize, r: usize) -> Vec<usize> {
        let mut n = vec![0; r];
        for &c in &self.map[..=l] {
            n[c] += 1;
        }
        n
    }
}

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("step {step}: level {l} exceeds the assignment's top level {l_max}")]
    Level { step: usize, l: usize, l_max: usize },
    #[error("step {step}: {msg}")]
    Unsupported { step: usize, msg: String },
}

/// Timing of one top-level macro-op.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub index: usize,
    pub op: String,
    pub l: Option<usize>,
    pub first_start: u64,
    pub last_end: u64,
    pub limbs_per_chiplet: Vec<usize>,
}

impl StepStats {
    /// Chiplets holding at least one limb during the step.
    pub fn active_chiplets(&self) -> usize {
        self.limbs_per_chiplet.iter().filter(|&&n| n > 0).count()
    }
}

/// Expands `program` into one DAG and simulates it. The report carries one
/// [`StepStats`] entry per top-level op.
pub fn run_workload(cfg: &ChipletConfig, program: &[MacroOp], assign: &LimbAssignment) -> Result<Simulation, WorkloadError> {
    cfg.validate()?;
    let r = cfg.r;
    if let Some(&c) = assign.map.iter().find(|&&c| c >= r) {
        return Err(WorkloadError::Unsupported { step: 0, msg: format!("assignment names chiplet {c} but r = {r}") });
    }
    let l_max = assign.map.len().checked_sub(1).ok_or(WorkloadError::Unsupported { step: 0, msg: "empty assignment".into() })?;
    let mut run = Runner { b: Builder::new(cfg, r), assign, l_max, prior: vec![None; l_max + 1] };
    let mut ranges = Vec::with_capacity(program.len());
    for (step, op) in program.iter().enumerate() {
        let from = run.b.dag.ops.len();
        run.emit(step, op)?;
        ranges.push((from, run.b.dag.ops.len()));
    }
    let top = program.iter().filter_map(MacroOp::max_level).max().unwrap_or(0);
    let mut sim = run.b.finish()?;
    sim.report.steps = program
        .iter()
        .zip(ranges)
        .enumerate()
        .map(|(index, (op, (from, to)))| {
            let starts = &sim.trace.start[from..to];
            let ends = &sim.trace.end[from..to];
            StepStats {
                index,
                op: op.name().to_string(),
                l: op.level(),
                first_start: starts.iter().copied().min().unwrap_or(0),
                last_end: ends.iter().copied().max().unwrap_or(0),
                limbs_per_chiplet: op.level().map_or_else(Vec::new, |l| assign.limbs_per_chiplet(l, r)),
            }
        })
        .collect();
    sim.report.warnings = cfg.bound_warning(top).into_iter().collect();
    Ok(sim)
}

struct Runner<'a, 'c> {
    b: Builder<'c>,
    assign: &'a LimbAssignment,
    l_max: usize,
    /// Last op writing each limb.
    prior: Vec<Option<usize>>,
}

impl Runner<'_, '_> {
    fn layout(&self, step: usize, l: usize) -> Result<Layout, WorkloadError> {
        if l > self.l_max {
            return Err(WorkloadError::Level { step, l, l_max: self.l_max });
        }
        Ok(Layout::new(&self.assign.map[..=l], self.b.r()))
    }

    /// Pointwise work on every limb: `ops` MAS ops of two lanes each.
    fn pointwise(&mut self, lay: &Layout, ops: usize) {
        for i in 0..=lay.l {
            for _ in 0..ops {
                let id = self.b.mas(lay.owner[i], Phase::Other, i, 0, 2, self.prior[i]);
                self.prior[i] = Some(id);
            }
        }
    }

    fn keyswitch(&mut self, lay: &Layout) {
        let prior = self.prior.clone();
        let p_last = emit_modup(&mut self.b, lay, &prior[..=lay.l]);
        let out = emit_moddown(&mut self.b, lay, p_last, &prior[..=lay.l], false);
        self.prior[..=lay.l].copy_from_slice(&out);
    }

    fn emit(&mut self, step: usize, op: &MacroOp) -> Result<(), WorkloadError> {
        match *op {
            MacroOp::Hadd { l } => {
                let lay = self.layout(step, l)?;
                self.pointwise(&lay, 1);
            }
            MacroOp::Hmult { l } => {
                let lay = self.layout(step, l)?;
                self.pointwise(&lay, 2);
            }
            MacroOp::Keyswitch { l, dnum } => {
                if dnum.is_some_and(|d| d != l + 1) {
                    return Err(WorkloadError::Unsupported {
                        step,
                        msg: "programs schedule KeySwitch with one limb per digit; use the digit flows for smaller dnum".into(),
                    });
                }
                let lay = self.layout(step, l)?;
                self.keyswitch(&lay);
            }
            MacroOp::Rotate { l, .. } => {
                let lay = self.layout(step, l)?;
                let n1 = self.b.n1;
                for i in 0..=l {
                    for comp in 0..2 {
                        let spec = OpSpec::new(lay.owner[i], Unit::Aut, MicroKind::Aut, n1).limb(i, comp).deps(self.prior[i]);
                        self.prior[i] = Some(self.b.dag.push(spec));
                    }
                }
                self.keyswitch(&lay);
            }
            MacroOp::Rescale { l } => {
                if l == 0 {
                    return Err(WorkloadError::Unsupported { step, msg: "no limb left to drop at level 0".into() });
                }
                let lay = self.layout(step, l)?;
                let out = emit_rescale(&mut self.b, &lay, &self.prior[..=l]);
                self.prior[..l].copy_from_slice(&out);
            }
            MacroOp::Moddown { l } => {
                let lay = self.layout(step, l)?;
                let prior = self.prior.clone();
                let out = emit_moddown(&mut self.b, &lay, None, &prior[..=l], false);
                self.prior[..=l].copy_from_slice(&out);
            }
            MacroOp::BootstrapSched { ref steps } => {
                for s in steps {
                    self.emit(step, s)?;
                }
            }
        }
        Ok(())
    }
}

/// Multiply, relinearize and rescale from level `l_top` down to 1.
pub fn depth_program(l_top: usize) -> Vec<MacroOp> {
    (1..=l_top)
        .rev()
        .flat_map(|l| [MacroOp::Hmult { l }, MacroOp::Keyswitch { l, dnum: None }, MacroOp::Rescale { l }])
        .collect()
}
