//! Experiment files: a chiplet configuration, a workload and where to write
//! the results.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chipsim::analytic::{self, Technique};
use chipsim::workload::{depth_program, AssignmentMode, LimbAssignment, MacroOp};
use chipsim::{
    schedule_keyswitch_digits, schedule_keyswitch_rescale_ring, schedule_keyswitch_ring, schedule_moddown_ring,
    schedule_rescale_ring, schedule_strawman, ChipletConfig, DigitStrategy, Phase, Simulation, Strawman,
};
use rnsfhe::ckks::{census_full_dnum, census_generic, CkksParams, OpCensus};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Parameter set by preset name or spelled out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamSpec {
    Named(String),
    Explicit { n: usize, l_max: usize, dnum: usize, w: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub l_max: usize,
    pub dnum: usize,
    pub w: u32,
}

impl ParamSpec {
    pub fn resolve(&self) -> Result<Params> {
        Ok(match self {
            ParamSpec::Named(name) => {
                let p = CkksParams::preset(name).with_context(|| format!("params: unknown preset {name:?}"))?;
                Params { n: p.n, l_max: p.l_max, dnum: p.dnum, w: p.q_bits }
            }
            &ParamSpec::Explicit { n, l_max, dnum, w } => Params { n, l_max, dnum, w },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProgramSource {
    Inline(Vec<MacroOp>),
    /// JSON file with a list of macro-ops, relative to the spec file.
    File(PathBuf),
    /// Multiply, relinearize and rescale from the given level down to 1.
    Depth { depth_from: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentSpec {
    pub mode: AssignmentMode,
    /// Digit size for digit-wise placement.
    #[serde(default)]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Workload {
    /// One KeySwitch with one limb per digit on the ring.
    Keyswitch {
        l: usize,
        #[serde(default)]
        rescale: bool,
    },
    Moddown { l: usize },
    Rescale { l: usize },
    /// One KeySwitch with `dnum` digits.
    Digits {
        l: usize,
        dnum: usize,
        #[serde(default)]
        k: Option<usize>,
        strategy: DigitStrategy,
    },
    Strawman { l: usize, technique: Strawman },
    Program { program: ProgramSource, assignment: AssignmentSpec },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub timeline: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "schema_v1")]
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub params: Option<ParamSpec>,
    /// Either a full configuration or `{"preset": name, ...overrides}`.
    pub chiplet: Value,
    pub workload: Workload,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub seed: u64,
}

fn schema_v1() -> u32 {
    1
}

/// A spec with its configuration resolved and checked.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub spec: ExperimentSpec,
    pub cfg: ChipletConfig,
    pub params: Option<Params>,
    /// Directory relative paths in the spec resolve against.
    pub base: PathBuf,
}

pub fn resolve_chiplet(v: &Value) -> Result<ChipletConfig> {
    let mut v = v.clone();
    if let Some(obj) = v.as_object_mut() {
        if let Some(name) = obj.remove("preset") {
            let name = name.as_str().context("chiplet.preset: expected a string")?;
            let base = ChipletConfig::preset(name).with_context(|| format!("chiplet.preset: unknown preset {name:?}"))?;
            let mut merged = serde_json::to_value(base)?;
            let m = merged.as_object_mut().expect("config serializes to an object");
            for (k, x) in std::mem::take(obj) {
                m.insert(k, x);
            }
            v = merged;
        }
    }
    let cfg: ChipletConfig = serde_json::from_value(v).map_err(|e| anyhow::anyhow!("chiplet: {e}"))?;
    cfg.validate().map_err(|e| anyhow::anyhow!("chiplet.{e}"))?;
    Ok(cfg)
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec: ExperimentSpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Self::new(spec, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn new(spec: ExperimentSpec, base: &Path) -> Result<Self> {
        if spec.schema != 1 {
            bail!("schema: unsupported version {}", spec.schema);
        }
        let cfg = resolve_chiplet(&spec.chiplet)?;
        let params = spec.params.as_ref().map(ParamSpec::resolve).transpose()?;
        if let Some(p) = params {
            if p.n != cfg.n() {
                bail!("params.n: {} does not match chiplet n1·n2 = {}", p.n, cfg.n());
            }
            if p.w != cfg.word_bits {
                bail!("params.w: {} does not match chiplet.word_bits = {}", p.w, cfg.word_bits);
            }
            if let Some(l) = spec.workload.level() {
                if l > p.l_max {
                    bail!("workload.l: {l} exceeds params.l_max = {}", p.l_max);
                }
            }
        }
        if let Workload::Program { program: ProgramSource::File(f), .. } = &spec.workload {
            let full = base.join(f);
            if !full.is_file() {
                bail!("workload.program: {} does not exist", full.display());
            }
        }
        Ok(Self { spec, cfg, params, base: base.to_path_buf() })
    }

    pub fn program(&self) -> Result<Vec<MacroOp>> {
        match &self.spec.workload {
            Workload::Program { program, .. } => Ok(match program {
                ProgramSource::Inline(ops) => ops.clone(),
                ProgramSource::Depth { depth_from } => depth_program(*depth_from),
                ProgramSource::File(f) => {
                    let full = self.base.join(f);
                    let text = std::fs::read_to_string(&full).with_context(|| format!("reading {}", full.display()))?;
                    serde_json::from_str(&text).with_context(|| format!("workload.program: parsing {}", full.display()))?
                }
            }),
            _ => bail!("workload is not a program"),
        }
    }

    pub fn run(&self) -> Result<Simulation> {
        let cfg = &self.cfg;
        Ok(match self.spec.workload {
            Workload::Keyswitch { l, rescale: false } => schedule_keyswitch_ring(cfg, l)?,
            Workload::Keyswitch { l, rescale: true } => schedule_keyswitch_rescale_ring(cfg, l)?,
            Workload::Moddown { l } => schedule_moddown_ring(cfg, l)?,
            Workload::Rescale { l } => {
                if l == 0 {
                    bail!("workload.l: rescale needs l >= 1");
                }
                schedule_rescale_ring(cfg, l)?
            }
            Workload::Digits { l, dnum, k, strategy } => {
                let k = k.unwrap_or((l + 1).div_ceil(dnum));
                schedule_keyswitch_digits(cfg, l, dnum, k, strategy)?
            }
            Workload::Strawman { l, technique } => schedule_strawman(cfg, l, technique)?,
            Workload::Program { ref assignment, .. } => {
                let ops = self.program()?;
                let top = self.params.map(|p| p.l_max).or_else(|| ops.iter().filter_map(MacroOp::max_level).max()).unwrap_or(0);
                let a = LimbAssignment::new(assignment.mode, top, cfg.r, assignment.k.unwrap_or(1));
                chipsim::run_workload(cfg, &ops, &a)?
            }
        })
    }

    /// Census the functional layer reports for the same operation, if the
    /// workload is a single KeySwitch-shaped routine.
    pub fn functional_census(&self) -> Option<OpCensus> {
        match self.spec.workload {
            Workload::Keyswitch { l, rescale: false } => {
                let (up, down) = census_full_dnum(l);
                Some(up + down + down)
            }
            Workload::Digits { l, dnum, k, .. } => {
                let k = k.unwrap_or((l + 1).div_ceil(dnum));
                let (up, down) = census_generic(l, (l + 1).div_ceil(k), k);
                Some(up + down + down)
            }
            _ => None,
        }
    }
}

impl Workload {
    pub fn level(&self) -> Option<usize> {
        match *self {
            Workload::Keyswitch { l, .. }
            | Workload::Moddown { l }
            | Workload::Rescale { l }
            | Workload::Digits { l, .. }
            | Workload::Strawman { l, .. } => Some(l),
            Workload::Program { .. } => None,
        }
    }
}

/// One quantity both the simulator and a closed form can produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub quantity: String,
    pub simulated: String,
    pub expected: String,
    pub agree: bool,
}

fn check(out: &mut Vec<Check>, quantity: &str, simulated: impl ToString, expected: impl ToString) {
    let (simulated, expected) = (simulated.to_string(), expected.to_string());
    out.push(Check { quantity: quantity.to_string(), agree: simulated == expected, simulated, expected });
}

/// Compares the simulation against the analytic layer and the functional
/// census on every quantity they share.
pub fn cross_check(exp: &Experiment, sim: &Simulation) -> Vec<Check> {
    let mut out = Vec::new();
    let rep = &sim.report;
    let r = exp.cfg.r;
    let transfers = rep.polynomials_transferred;
    match exp.spec.workload {
        Workload::Keyswitch { l, rescale: false } => {
            let want = if r == 1 { analytic::Q::from_integer(0) } else { analytic::comm_polynomials(Technique::Ours, l, l + 1, 1, r) };
            check(&mut out, "polynomials_transferred", transfers, want);
            if r == 1 && exp.cfg.exact {
                let modup = sim.phase_end(Phase::ModUp);
                check(&mut out, "modup_keymul_cycles", modup, analytic::keyswitch_cycles(l, exp.cfg.n1, exp.cfg.shadow_mas));
            }
        }
        Workload::Digits { l, dnum, k, strategy: DigitStrategy::Alternate } => {
            let k = k.unwrap_or((l + 1).div_ceil(dnum));
            let dnum = (l + 1).div_ceil(k);
            check(&mut out, "polynomials_transferred", transfers, analytic::comm_polynomials(Technique::Alternate, l, dnum, k, r));
            if dnum * k == l + 1 && exp.cfg.exact {
                if let Some(q) = sim.census_ntt_equiv {
                    check(&mut out, "ntt_equivalents_per_chiplet", q, analytic::census_digits(l, dnum, k, r));
                }
            }
        }
        Workload::Strawman { l, technique } => {
            let tech = match technique {
                Strawman::A => Technique::A,
                Strawman::B => Technique::B,
                Strawman::C => Technique::C,
            };
            check(&mut out, "polynomials_transferred", transfers, analytic::comm_polynomials(tech, l, l + 1, 1, r));
        }
        _ => {}
    }
    if let Some(f) = exp.functional_census() {
        let c = rep.census;
        check(&mut out, "census.intt", c.intt, f.intt);
        check(&mut out, "census.ntt", c.ntt, f.ntt);
        check(&mut out, "census.bconv_mas", c.bconv_mas, f.bconv_mas);
        if !matches!(exp.spec.workload, Workload::Digits { strategy: DigitStrategy::Digitwise, .. }) {
            check(&mut out, "census.mas", c.mas, f.mas);
        }
    }
    out
}
