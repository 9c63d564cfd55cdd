//! Named closed-form quantities, evaluated one point at a time or over a range.

use std::str::FromStr;

use anyhow::{bail, Context, Result};
use chipsim::analytic::{self, Technique, Q};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    Throughput,
    Improvement,
    Comm,
    CommEarly,
    Census,
    Bound,
    Storage,
    Twiddle,
}

impl FromStr for Formula {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "throughput" => Formula::Throughput,
            "improvement" => Formula::Improvement,
            "comm" => Formula::Comm,
            "comm-early" => Formula::CommEarly,
            "census" => Formula::Census,
            "bound" => Formula::Bound,
            "storage" => Formula::Storage,
            "twiddle" => Formula::Twiddle,
            _ => bail!("unknown formula {s:?} (throughput, improvement, comm, comm-early, census, bound, storage, twiddle)"),
        })
    }
}

impl Formula {
    pub fn name(self) -> &'static str {
        match self {
            Formula::Throughput => "throughput",
            Formula::Improvement => "improvement",
            Formula::Comm => "comm",
            Formula::CommEarly => "comm-early",
            Formula::Census => "census",
            Formula::Bound => "bound",
            Formula::Storage => "storage",
            Formula::Twiddle => "twiddle",
        }
    }
}

/// Inputs shared by all formulas; each formula reads the ones it needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inputs {
    pub l: usize,
    pub l_max: usize,
    pub dnum: Option<usize>,
    pub k: Option<usize>,
    pub r: usize,
    pub n1: usize,
    pub n2: usize,
    pub f_ghz: f64,
    pub hbm_gbps: f64,
    pub c2c_gbps: f64,
    pub u: f64,
    pub n: usize,
    pub w: u32,
    pub tech: Technique,
    pub unshadowed: bool,
    pub tfg: bool,
}

impl Default for Inputs {
    fn default() -> Self {
        Self {
            l: 30,
            l_max: 30,
            dnum: None,
            k: None,
            r: 4,
            n1: 1024,
            n2: 64,
            f_ghz: 1.5,
            hbm_gbps: 1200.0,
            c2c_gbps: 630.0,
            u: 4.0,
            n: 1 << 16,
            w: 54,
            tech: Technique::Ours,
            unshadowed: false,
            tfg: true,
        }
    }
}

impl Inputs {
    /// `dnum` and `K` for level `l`, defaulting to one limb per digit.
    fn digits(&self, top: usize) -> (usize, usize) {
        match (self.dnum, self.k) {
            (Some(d), Some(k)) => (d, k),
            (Some(d), None) => (d, (top + 1).div_ceil(d)),
            (None, Some(k)) => ((top + 1).div_ceil(k), k),
            (None, None) => (top + 1, 1),
        }
    }

    /// Sets one integer input by name, for sweeps.
    pub fn set(&mut self, name: &str, v: usize) -> Result<()> {
        match name {
            "l" => self.l = v,
            "L" => self.l_max = v,
            "dnum" => self.dnum = Some(v),
            "k" | "K" => self.k = Some(v),
            "r" => self.r = v,
            "n1" => self.n1 = v,
            "n2" => self.n2 = v,
            "n" | "N" => self.n = v,
            _ => bail!("cannot sweep {name:?} (l, L, dnum, k, r, n1, n2, n)"),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub formula: &'static str,
    pub point: String,
    pub quantity: &'static str,
    /// Exact value: an integer or a reduced fraction.
    pub value: String,
    pub approx: f64,
}

fn q(x: Q) -> (String, f64) {
    (x.to_string(), *x.numer() as f64 / *x.denom() as f64)
}

fn int(x: u64) -> (String, f64) {
    (x.to_string(), x as f64)
}

fn real(x: f64) -> (String, f64) {
    (format!("{x:.6}"), x)
}

/// Evaluates `f` at one point. `point` labels the rows.
pub fn evaluate(f: Formula, x: &Inputs, point: &str) -> Result<Vec<Row>> {
    let mut vals: Vec<(&'static str, (String, f64))> = Vec::new();
    match f {
        Formula::Throughput => {
            let shadowed = !x.unshadowed;
            vals.push(("ops_per_second", real(analytic::keyswitch_throughput(x.l_max, x.n1, x.f_ghz * 1e9, shadowed))));
            vals.push(("cycles", int(analytic::keyswitch_cycles(x.l_max, x.n1, shadowed))));
        }
        Formula::Improvement => vals.push(("fraction", q(analytic::shadow_improvement(x.l_max)))),
        Formula::Comm => {
            let (dnum, k) = x.digits(x.l);
            vals.push(("polynomials", q(analytic::comm_polynomials(x.tech, x.l, dnum, k, x.r))));
        }
        Formula::CommEarly => {
            let (dnum, k) = x.digits(x.l);
            vals.push(("polynomials_per_chiplet", q(analytic::comm_polynomials_early(x.l, dnum, k))));
        }
        Formula::Census => {
            let (dnum, k) = x.digits(x.l);
            vals.push(("ntt_equivalents_per_chiplet", q(analytic::census_digits(x.l, dnum, k, x.r))));
        }
        Formula::Bound => {
            if x.c2c_gbps <= 0.0 {
                bail!("--c2c must be positive");
            }
            let k = x.hbm_gbps / x.c2c_gbps;
            vals.push(("max_chiplets", int(analytic::chiplet_bound(x.l_max, k, x.u) as u64)));
        }
        Formula::Storage => {
            let (dnum, _) = x.digits(x.l_max);
            let s = analytic::key_storage(x.l_max, dnum, x.n, x.w);
            vals.push(("expanded_bytes", int(s.expanded)));
            vals.push(("seeded_bytes", int(s.seeded)));
            vals.push(("per_digit_limb_bytes", int(s.per_digit_limb)));
        }
        Formula::Twiddle => {
            let (mults, words) = analytic::twiddle_tradeoff(x.n1, x.n2, x.tfg).context("twiddle")?;
            vals.push(("extra_multipliers", int(mults as u64)));
            vals.push(("memory_words", int(words)));
        }
    }
    Ok(vals
        .into_iter()
        .map(|(quantity, (value, approx))| Row { formula: f.name(), point: point.to_string(), quantity, value, approx })
        .collect())
}

/// Parses `name=lo..hi` (inclusive).
pub fn parse_sweep(s: &str) -> Result<(String, Vec<usize>)> {
    let (name, range) = s.split_once('=').context("expected name=lo..hi")?;
    let (lo, hi) = range.split_once("..").context("expected name=lo..hi")?;
    let hi = hi.trim_start_matches('=');
    let (lo, hi): (usize, usize) = (lo.parse()?, hi.parse()?);
    if lo > hi {
        bail!("empty range {lo}..{hi}");
    }
    Ok((name.to_string(), (lo..=hi).collect()))
}

pub fn evaluate_sweep(f: Formula, base: &Inputs, name: &str, values: &[usize]) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &v in values {
        let mut x = base.clone();
        x.set(name, v)?;
        rows.extend(evaluate(f, &x, &format!("{name}={v}"))?);
    }
    Ok(rows)
}

pub fn write_csv<W: std::io::Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
