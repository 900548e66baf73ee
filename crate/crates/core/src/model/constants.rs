use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::dataflow::KernelKind;

/// L1 hit rate per kernel family. Schedules do not change the per-warp
/// access pattern, so these are schedule independent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct L1Hits {
    pub ntt: f64,
    pub bconv: f64,
    pub mulacc: f64,
}

impl L1Hits {
    pub fn get(&self, kind: KernelKind) -> f64 {
        match kind {
            KernelKind::Intt1 | KernelKind::NTT1 | KernelKind::Intt2 | KernelKind::NTT2 => self.ntt,
            KernelKind::BConv1 | KernelKind::BConv2 => self.bconv,
            KernelKind::MulAcc => self.mulacc,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConstants {
    /// Probability that another resident warp can issue while one stalls.
    pub p_warp: f64,
    pub l1_hit: L1Hits,
    pub l2_hit_cap: f64,
    pub l2_hit_floor: f64,
    /// Load-to-use latencies in cycles.
    pub l1_latency: f64,
    pub l2_latency: f64,
    pub dram_latency: f64,
    /// Dependent ALU latency closing a compute interval.
    pub alu_latency: f64,
    /// Warp instructions per cycle per subcore for each functional-unit class.
    pub alu_throughput: f64,
    pub lsu_throughput: f64,
}

impl Default for ModelConstants {
    fn default() -> Self {
        Self {
            p_warp: 0.5,
            l1_hit: L1Hits { ntt: 0.5, bconv: 0.6, mulacc: 0.1 },
            l2_hit_cap: 0.95,
            l2_hit_floor: 0.10,
            l1_latency: 30.0,
            l2_latency: 200.0,
            dram_latency: 500.0,
            alu_latency: 20.0,
            alu_throughput: 1.0,
            lsu_throughput: 0.25,
        }
    }
}

impl ModelConstants {
    pub fn validate(&self) -> Result<(), ModelError> {
        let probs = [
            ("p_warp", self.p_warp),
            ("l1_hit.ntt", self.l1_hit.ntt),
            ("l1_hit.bconv", self.l1_hit.bconv),
            ("l1_hit.mulacc", self.l1_hit.mulacc),
            ("l2_hit_cap", self.l2_hit_cap),
            ("l2_hit_floor", self.l2_hit_floor),
        ];
        for (field, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(ModelError::InvalidConstants(format!("{field} = {p} is not a probability")));
            }
        }
        if self.l2_hit_floor > self.l2_hit_cap {
            return Err(ModelError::InvalidConstants("l2_hit_floor exceeds l2_hit_cap".into()));
        }
        let nonneg = [
            ("l1_latency", self.l1_latency),
            ("l2_latency", self.l2_latency),
            ("dram_latency", self.dram_latency),
            ("alu_latency", self.alu_latency),
        ];
        for (field, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(ModelError::InvalidConstants(format!("{field} must be a finite value >= 0")));
            }
        }
        if !(self.alu_throughput > 0.0) || !(self.lsu_throughput > 0.0) {
            return Err(ModelError::InvalidConstants("unit throughputs must be positive".into()));
        }
        Ok(())
    }
}
