use serde::{Deserialize, Serialize};

use super::ModelError;

const MIB: f64 = 1024.0 * 1024.0;
const KIB: f64 = 1024.0;

/// Hardware constants consumed by the cycle model.
///
/// L2 size, clock, DRAM bandwidth and peak INT32 throughput come from the
/// vendor tables. SM counts, subcores, NoC bandwidth, L1 size and residency
/// limits are external datasheet values and can be overridden in config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpuSpec {
    pub name: String,
    pub sm_count: u32,
    pub subcores_per_sm: u32,
    /// Warp instructions issued per cycle per subcore.
    pub issue_rate: f64,
    pub freq_hz: f64,
    pub l1_bytes: f64,
    pub l2_bytes: f64,
    pub dram_bw_bytes_per_s: f64,
    pub noc_bw_bytes_per_s: f64,
    pub block_size_bytes: f64,
    pub max_resident_warps_per_sm: u32,
    pub launch_overhead_seconds: f64,
    /// Listed for completeness; the cycle model does not read it.
    pub peak_int32_tops: f64,
}

impl GpuSpec {
    pub fn rtx_6000_ada() -> Self {
        Self {
            name: "RTX6000Ada".into(),
            sm_count: 142,
            subcores_per_sm: 4,
            issue_rate: 1.0,
            freq_hz: 2.505e9,
            l1_bytes: 128.0 * KIB,
            l2_bytes: 96.0 * MIB,
            dram_bw_bytes_per_s: 960e9,
            noc_bw_bytes_per_s: 5.0e12,
            block_size_bytes: 32.0,
            max_resident_warps_per_sm: 48,
            launch_overhead_seconds: 3e-6,
            peak_int32_tops: 44.5,
        }
    }

    pub fn rtx_4090() -> Self {
        Self {
            name: "RTX4090".into(),
            sm_count: 128,
            subcores_per_sm: 4,
            issue_rate: 1.0,
            freq_hz: 2.52e9,
            l1_bytes: 128.0 * KIB,
            l2_bytes: 72.0 * MIB,
            dram_bw_bytes_per_s: 1008e9,
            noc_bw_bytes_per_s: 5.5e12,
            block_size_bytes: 32.0,
            max_resident_warps_per_sm: 48,
            launch_overhead_seconds: 3e-6,
            peak_int32_tops: 41.3,
        }
    }

    pub fn a100() -> Self {
        Self {
            name: "A100".into(),
            sm_count: 108,
            subcores_per_sm: 4,
            issue_rate: 1.0,
            freq_hz: 1.41e9,
            l1_bytes: 192.0 * KIB,
            l2_bytes: 40.0 * MIB,
            dram_bw_bytes_per_s: 1555e9,
            noc_bw_bytes_per_s: 4.8e12,
            block_size_bytes: 32.0,
            max_resident_warps_per_sm: 64,
            launch_overhead_seconds: 3e-6,
            peak_int32_tops: 19.5,
        }
    }

    pub fn rtx_2080_ti() -> Self {
        Self {
            name: "RTX2080Ti".into(),
            sm_count: 68,
            subcores_per_sm: 4,
            issue_rate: 1.0,
            freq_hz: 1.665e9,
            l1_bytes: 96.0 * KIB,
            l2_bytes: 5.5 * MIB,
            dram_bw_bytes_per_s: 616e9,
            noc_bw_bytes_per_s: 2.0e12,
            block_size_bytes: 32.0,
            max_resident_warps_per_sm: 32,
            launch_overhead_seconds: 3e-6,
            peak_int32_tops: 13.4,
        }
    }

    pub fn presets() -> Vec<Self> {
        vec![Self::rtx_6000_ada(), Self::rtx_4090(), Self::a100(), Self::rtx_2080_ti()]
    }

    /// Looks a preset up by name, ignoring case and punctuation.
    pub fn preset(name: &str) -> Result<Self, ModelError> {
        let key = normalize(name);
        Self::presets()
            .into_iter()
            .find(|g| normalize(&g.name) == key)
            .ok_or_else(|| ModelError::UnknownPreset(name.to_string()))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("issue_rate", self.issue_rate),
            ("freq_hz", self.freq_hz),
            ("l1_bytes", self.l1_bytes),
            ("l2_bytes", self.l2_bytes),
            ("dram_bw_bytes_per_s", self.dram_bw_bytes_per_s),
            ("noc_bw_bytes_per_s", self.noc_bw_bytes_per_s),
            ("block_size_bytes", self.block_size_bytes),
        ];
        for (field, v) in positive {
            if v.is_nan() || v <= 0.0 {
                return Err(ModelError::InvalidSpec(format!("{}: {field} must be positive, got {v}", self.name)));
            }
        }
        if self.sm_count == 0 || self.subcores_per_sm == 0 || self.max_resident_warps_per_sm == 0 {
            return Err(ModelError::InvalidSpec(format!("{}: unit counts must be positive", self.name)));
        }
        if !(self.launch_overhead_seconds >= 0.0) || !self.launch_overhead_seconds.is_finite() {
            return Err(ModelError::InvalidSpec(format!("{}: launch overhead must be >= 0", self.name)));
        }
        if self.l1_bytes >= self.l2_bytes {
            return Err(ModelError::InvalidSpec(format!("{}: l1_bytes must be below l2_bytes", self.name)));
        }
        Ok(())
    }

    /// Cycles per memory block through DRAM: `f · BlockSize / Bandwidth`.
    pub fn l_dram(&self) -> f64 {
        self.freq_hz * self.block_size_bytes / self.dram_bw_bytes_per_s
    }

    pub fn l_noc(&self) -> f64 {
        self.freq_hz * self.block_size_bytes / self.noc_bw_bytes_per_s
    }

    pub fn subcores(&self) -> f64 {
        f64::from(self.sm_count) * f64::from(self.subcores_per_sm)
    }
}

fn normalize(s: &str) -> String {
    s.chars().filter(char::is_ascii_alphanumeric).map(|c| c.to_ascii_lowercase()).collect()
}
