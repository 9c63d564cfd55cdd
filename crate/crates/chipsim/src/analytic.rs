//! Closed-form models the simulator is checked against.
//!
//! Per-chiplet averages are returned as exact rationals so equality tests
//! never depend on rounding.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Q = Ratio<u64>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalyticError {
    #[error("no tabulated values for {n1}x{n2}")]
    UnsupportedConfig { n1: usize, n2: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Distribution strategy for a KeySwitch across chiplets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Technique {
    /// One chiplet per function (INTT, NTT, MAS, ModDown).
    A,
    /// One chiplet per limb, INTT results broadcast to every chiplet.
    B,
    /// One chiplet per limb with duplicated inputs.
    C,
    /// Interleaved limbs on a unidirectional ring.
    Ours,
    /// One digit per chiplet.
    Digitwise,
    /// Limbs interleaved over the ring with several limbs per digit; every
    /// INTT result visits the other `r-1` chiplets.
    Alternate,
}

impl std::str::FromStr for Technique {
    type Err = AnalyticError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "a" => Technique::A,
            "b" => Technique::B,
            "c" => Technique::C,
            "ours" | "ring" => Technique::Ours,
            "digitwise" => Technique::Digitwise,
            "alternate" => Technique::Alternate,
            other => return Err(AnalyticError::Invalid(format!("unknown technique {other:?}"))),
        })
    }
}

/// KeySwitch throughput for `dnum = L+1` on one chiplet, in operations per
/// second. `shadowed` hides the key MACs under the transforms.
pub fn keyswitch_throughput(l_max: usize, n1: usize, f_hz: f64, shadowed: bool) -> f64 {
    f_hz / (keyswitch_cycles(l_max, n1, shadowed) as f64)
}

/// Cycles of ModUp plus key multiplication on one chiplet.
pub fn keyswitch_cycles(l_max: usize, n1: usize, shadowed: bool) -> u64 {
    let (l, n1) = (l_max as u64, n1 as u64);
    if shadowed {
        (l + 1) * (l + 3) * n1
    } else {
        (l + 1) * (1 + 3 * (l + 2)) * n1
    }
}

/// Fractional cycle reduction of the shadowed schedule over the serialized one.
pub fn shadow_improvement(l_max: usize) -> Q {
    let l = l_max as u64;
    Q::from_integer(1) - Q::new(l + 3, 1 + 3 * (l + 2))
}

/// Polynomials crossing chiplet boundaries for one KeySwitch at level `l`.
///
/// `Ours` and `Alternate` are totals over all links; `Digitwise` is a
/// per-chiplet average.
pub fn comm_polynomials(tech: Technique, l: usize, dnum: usize, k: usize, r: usize) -> Q {
    let (l, dnum, k, r) = (l as u64, dnum as u64, k as u64, r as u64);
    match tech {
        Technique::A => Q::from_integer((l + 3) * (l + 2)),
        Technique::B | Technique::C => Q::from_integer((l + 1) * (l + 4)),
        Technique::Ours => Q::from_integer(r * (l + 1 + 2 * k)),
        Technique::Digitwise => Q::new(2 * (dnum - 1) * (l + 1), dnum) + Q::from_integer(2 * k),
        Technique::Alternate => Q::from_integer(r.saturating_sub(1) * (l + 1 + 2 * k)),
    }
}

/// Variant of the digit-wise count in which limbs are distributed before
/// ModUp, so the special limbs also travel: `2(dnum-1)(l+K+1)/dnum + 2K`.
pub fn comm_polynomials_early(l: usize, dnum: usize, k: usize) -> Q {
    let (l, dnum, k) = (l as u64, dnum as u64, k as u64);
    Q::new(2 * (dnum - 1) * (l + k + 1), dnum) + Q::from_integer(2 * k)
}

/// NTT-equivalent transforms per chiplet for the alternate digit flow.
pub fn census_digits(l: usize, dnum: usize, k: usize, r: usize) -> Q {
    let (l, dnum, k, r) = (l as i64, dnum as i64, k as i64, r as i64);
    let num = 2 * (l + 1 + k) + (dnum + 1) * (l + 1) + (r - 3) * k;
    assert!(num >= 0 && r > 0, "census numerator must be non-negative");
    Q::new(num as u64, r as u64)
}

/// Largest chiplet count that keeps the ring ahead of HBM traffic:
/// `floor((L+2)/(u·k))`, clamped to `1..=L+2`.
pub fn chiplet_bound(l_max: usize, k_ratio: f64, u: f64) -> usize {
    let cap = l_max + 2;
    if k_ratio <= 0.0 || u <= 0.0 {
        return cap;
    }
    let b = ((l_max as f64 + 2.0) / (u * k_ratio)).floor();
    if !b.is_finite() || b >= cap as f64 {
        cap
    } else {
        (b as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyStorage {
    /// Both halves of every digit stored.
    pub expanded: u64,
    /// `ksk0` stored, `ksk1` replaced by one 8-byte seed per limb.
    pub seeded: u64,
    /// One limb pair of one digit, `2·N·w/8`.
    pub per_digit_limb: u64,
}

/// Bytes of one switching key with `dnum` digits over `L+K+1` limbs.
pub fn key_storage(l_max: usize, dnum: usize, n: usize, w: u32) -> KeyStorage {
    let k = (l_max + 1).div_ceil(dnum) as u64;
    let limb = (n as u64 * w as u64).div_ceil(8);
    let limbs = dnum as u64 * (l_max as u64 + k + 1);
    let expanded = 2 * limbs * limb;
    KeyStorage { expanded, seeded: expanded / 2 + 8 * limbs, per_digit_limb: 2 * limb }
}

/// One column of the twiddle-generation trade-off table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwiddleRow {
    pub n1: usize,
    pub n2: usize,
    pub total_multipliers: u32,
    pub tfg_multipliers: u32,
    pub tfg_memory_words: u64,
    pub stored_memory_words: u64,
    /// Multiplier increase with on-the-fly generation, percent.
    pub multiplier_increase_pct: u32,
    /// Memory reduction with on-the-fly generation, percent.
    pub memory_reduction_pct: u32,
}

const TWIDDLE_TABLE: [TwiddleRow; 6] = [
    row(2048, 32, 432, 68, 222_912, 4_260_320, 16, 95),
    row(1024, 64, 832, 131, 310_624, 4_228_064, 16, 93),
    row(512, 128, 1_600, 258, 486_400, 4_212_704, 16, 88),
    row(256, 256, 3_072, 513, 707_232, 4_206_560, 17, 83),
    row(128, 512, 5_888, 1_024, 1_149_248, 4_206_560, 17, 73),
    row(64, 1024, 11_264, 2_047, 1_771_488, 4_212_704, 18, 58),
];

#[allow(clippy::too_many_arguments)]
const fn row(n1: usize, n2: usize, tm: u32, fm: u32, fw: u64, sw: u64, inc: u32, red: u32) -> TwiddleRow {
    TwiddleRow {
        n1,
        n2,
        total_multipliers: tm,
        tfg_multipliers: fm,
        tfg_memory_words: fw,
        stored_memory_words: sw,
        multiplier_increase_pct: inc,
        memory_reduction_pct: red,
    }
}

pub fn twiddle_rows() -> &'static [TwiddleRow] {
    &TWIDDLE_TABLE
}

/// `(extra multipliers, memory words)` for one configuration.
pub fn twiddle_tradeoff(n1: usize, n2: usize, tfg: bool) -> Result<(u32, u64), AnalyticError> {
    let row = TWIDDLE_TABLE
        .iter()
        .find(|r| r.n1 == n1 && r.n2 == n2)
        .ok_or(AnalyticError::UnsupportedConfig { n1, n2 })?;
    Ok(if tfg { (row.tfg_multipliers, row.tfg_memory_words) } else { (0, row.stored_memory_words) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn throughput_at_main_parameters() {
        let t = keyswitch_throughput(30, 1024, 1.5e9, true);
        assert!((t - 1431.9).abs() < 0.1, "{t}");
        assert_eq!(keyswitch_cycles(30, 1024, true), 1_047_552);
        assert_eq!(keyswitch_throughput(4, 1, 1.0, true), 1.0 / 35.0);
    }

    #[test]
    fn improvement_tends_to_two_thirds() {
        assert_eq!(shadow_improvement(30), Q::new(64, 97));
        let big = shadow_improvement(1_000_000);
        assert!((*big.numer() as f64 / *big.denom() as f64 - 2.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn bound_limits() {
        assert_eq!(chiplet_bound(30, 1200.0 / 630.0, 4.0), 4);
        assert_eq!(chiplet_bound(30, 0.0, 4.0), 32);
        let k = 1.9;
        assert_eq!(chiplet_bound(30, k, 32.0 / k), 1);
    }

    #[test]
    fn unsupported_twiddle_config() {
        assert_eq!(twiddle_tradeoff(32, 2048, true), Err(AnalyticError::UnsupportedConfig { n1: 32, n2: 2048 }));
    }
}
