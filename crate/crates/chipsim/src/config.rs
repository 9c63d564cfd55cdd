//! Hardware description of a ring of identical chiplets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("{path}: {msg}")]
pub struct ConfigError {
    pub path: String,
    pub msg: String,
}

fn err(path: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError { path: path.to_string(), msg: msg.into() }
}

/// How long a chiplet-to-chiplet transfer of one limb takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommRule {
    /// `ceil(bytes / link bytes-per-cycle)`.
    #[default]
    Bandwidth,
    /// Twice the time of one linear operation on the same data (`2·N1`).
    TwiceLinear,
}

/// One chiplet configuration. Bandwidths are in GB/s (10^9 bytes/s), the
/// clock in GHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChipletConfig {
    pub n1: usize,
    pub n2: usize,
    pub f_ghz: f64,
    pub r: usize,
    pub hbm_gbps: f64,
    pub c2c_gbps: f64,
    #[serde(default = "default_ingress")]
    pub ingress_gbps: f64,
    #[serde(default = "default_word_bits")]
    pub word_bits: u32,
    /// Pipeline latency added on every edge leaving a transform. `None` means
    /// `log2(N)`.
    #[serde(default)]
    pub fill_cycles: Option<u64>,
    /// Zero the fill latency so cycle counts match closed forms exactly.
    #[serde(default)]
    pub exact: bool,
    /// Run key multiply-accumulates in the shadow of the transform unit.
    #[serde(default = "yes")]
    pub shadow_mas: bool,
    #[serde(default)]
    pub comm_rule: CommRule,
}

fn default_ingress() -> f64 {
    128.0
}

fn default_word_bits() -> u32 {
    54
}

fn yes() -> bool {
    true
}

impl ChipletConfig {
    /// 1024×64 at 1.5 GHz, four chiplets, HBM3 at 1.2 TB/s, UCIe at 0.63 TB/s.
    pub fn preset_1024x64() -> Self {
        Self {
            n1: 1024,
            n2: 64,
            f_ghz: 1.5,
            r: 4,
            hbm_gbps: 1200.0,
            c2c_gbps: 630.0,
            ingress_gbps: 128.0,
            word_bits: 54,
            fill_cycles: None,
            exact: false,
            shadow_mas: true,
            comm_rule: CommRule::Bandwidth,
        }
    }

    /// 512×128 with the doubled HBM interface that keeps memory throughput
    /// level with the halved transform time.
    pub fn preset_512x128() -> Self {
        Self { n1: 512, n2: 128, hbm_gbps: 2400.0, ..Self::preset_1024x64() }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "1024x64" => Some(Self::preset_1024x64()),
            "512x128" => Some(Self::preset_512x128()),
            _ => None,
        }
    }

    pub fn n(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.n1.is_power_of_two() || self.n1 < 2 {
            return Err(err("n1", "must be a power of two >= 2"));
        }
        if !self.n2.is_power_of_two() {
            return Err(err("n2", "must be a power of two"));
        }
        if self.r == 0 {
            return Err(err("r", "need at least one chiplet"));
        }
        for (path, v) in [("f_ghz", self.f_ghz), ("hbm_gbps", self.hbm_gbps), ("c2c_gbps", self.c2c_gbps)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(err(path, "must be positive"));
            }
        }
        if self.word_bits == 0 || self.word_bits > 64 {
            return Err(err("word_bits", "must be in 1..=64"));
        }
        Ok(())
    }

    /// Bytes of one residue polynomial, `ceil(N·w/8)`.
    pub fn poly_bytes(&self) -> u64 {
        (self.n() as u64 * self.word_bits as u64).div_ceil(8)
    }

    fn bytes_per_cycle(&self, gbps: f64) -> f64 {
        gbps / self.f_ghz
    }

    /// Cycles to move one limb over a chiplet-to-chiplet link.
    pub fn c2c_cycles(&self) -> u64 {
        match self.comm_rule {
            CommRule::Bandwidth => (self.poly_bytes() as f64 / self.bytes_per_cycle(self.c2c_gbps)).ceil() as u64,
            CommRule::TwiceLinear => 2 * self.n1 as u64,
        }
    }

    /// Cycles to stream one limb from HBM.
    pub fn hbm_cycles(&self) -> u64 {
        (self.poly_bytes() as f64 / self.bytes_per_cycle(self.hbm_gbps)).ceil() as u64
    }

    pub fn fill(&self) -> u64 {
        if self.exact {
            0
        } else {
            self.fill_cycles.unwrap_or(self.n().trailing_zeros() as u64)
        }
    }

    /// HBM-to-link bandwidth ratio `k`.
    pub fn k_ratio(&self) -> f64 {
        self.hbm_gbps / self.c2c_gbps
    }

    /// Warning text when `r` exceeds the decoupling bound for a chain of
    /// `l_max + 1` limbs.
    pub fn bound_warning(&self, l_max: usize) -> Option<String> {
        let bound = crate::analytic::chiplet_bound(l_max, self.k_ratio(), 4.0);
        (self.r > bound).then(|| format!("r = {} exceeds the decoupling bound {bound} for L = {l_max}", self.r))
    }

    pub fn cycles_to_ms(&self, cycles: u64) -> f64 {
        cycles as f64 / (self.f_ghz * 1e6)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_link_moves_a_limb_in_about_n1_cycles() {
        let c = ChipletConfig::preset_1024x64();
        assert_eq!(c.poly_bytes(), 442_368);
        assert_eq!(c.c2c_cycles(), 1054);
        assert_eq!(c.hbm_cycles(), 553);
        assert_eq!(c.fill(), 16);
    }

    #[test]
    fn json_uses_defaults() {
        let c: ChipletConfig =
            serde_json::from_str(r#"{"n1":1024,"n2":64,"f_ghz":1.5,"r":4,"hbm_gbps":1200,"c2c_gbps":630}"#).unwrap();
        assert_eq!(c, ChipletConfig::preset_1024x64());
        assert!(serde_json::from_str::<ChipletConfig>(r#"{"n1":1}"#).is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let c = ChipletConfig { c2c_gbps: 0.0, ..ChipletConfig::preset_1024x64() };
        assert_eq!(c.validate().unwrap_err().path, "c2c_gbps");
    }
}
