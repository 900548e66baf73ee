//! Interval-analysis cycle model for one kernel launch.

use serde::{Deserialize, Serialize};

use super::{GpuSpec, ModelConstants, ModelError};
use crate::ckks::ParamShape;
use crate::dataflow::{KernelCosts, KernelKind, KernelLaunch, StallKind, WORD_BYTES};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheEstimate {
    pub l1_hit: f64,
    pub l2_hit: f64,
}

/// Working-set cache model: L1 by kernel family, L2 from the footprint-to-capacity ratio.
pub fn estimate_cache(footprint_bytes: u64, kind: KernelKind, spec: &GpuSpec, c: &ModelConstants) -> CacheEstimate {
    let fp = footprint_bytes as f64;
    let l2_hit = if fp <= spec.l2_bytes { c.l2_hit_cap } else { (c.l2_hit_cap * spec.l2_bytes / fp).max(c.l2_hit_floor) };
    CacheEstimate { l1_hit: c.l1_hit.get(kind), l2_hit }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub issue_insts: u64,
    pub alu_insts: u64,
    pub mem_insts: u64,
    pub stall_kind: StallKind,
    pub stall_cycles: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    pub kind: KernelKind,
    pub warps: u64,
    pub insts_per_warp: u64,
    pub intervals: Vec<Interval>,
    /// Memory blocks read and written per warp.
    pub mem_reads_per_warp: f64,
    pub mem_writes_per_warp: f64,
    pub avg_interval_insts: f64,
    pub cache: CacheEstimate,
}

/// Builds the workload profile of a launch from the kernel template.
pub fn synthesize_profile(
    launch: &KernelLaunch,
    shape: &ParamShape,
    costs: &KernelCosts,
    spec: &GpuSpec,
    c: &ModelConstants,
) -> Result<KernelProfile, ModelError> {
    if launch.warps == 0 {
        return Err(ModelError::EmptyLaunch(launch.kind));
    }
    let tpl = costs.template(launch.kind, shape);
    let cache = estimate_cache(launch.footprint_bytes, launch.kind, spec, c);
    let mem_latency = cache.l1_hit * c.l1_latency
        + (1.0 - cache.l1_hit) * (cache.l2_hit * c.l2_latency + (1.0 - cache.l2_hit) * c.dram_latency);
    let intervals: Vec<Interval> = tpl
        .intervals
        .iter()
        .map(|t| Interval {
            issue_insts: t.issue_insts(),
            alu_insts: t.alu_insts,
            mem_insts: t.mem_insts,
            stall_kind: t.stall,
            stall_cycles: match t.stall {
                StallKind::ComData => c.alu_latency,
                StallKind::MemData => mem_latency,
            },
        })
        .collect();
    let insts_per_warp = tpl.insts_per_warp();
    debug_assert_eq!(insts_per_warp, launch.insts_per_warp);
    let blocks = |words: u64| (words * WORD_BYTES) as f64 / spec.block_size_bytes;
    Ok(KernelProfile {
        kind: launch.kind,
        warps: launch.warps,
        insts_per_warp,
        avg_interval_insts: insts_per_warp as f64 / intervals.len() as f64,
        intervals,
        mem_reads_per_warp: blocks(tpl.words_read),
        mem_writes_per_warp: blocks(tpl.words_written),
        cache,
    })
}

/// Predicted cycles of one launch (or a sum of launches), by component.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CycleBreakdown {
    pub c_base: f64,
    pub s_com_data: f64,
    pub s_mem_data: f64,
    pub c_idle: f64,
    pub s_com_struct: f64,
    pub s_mem_struct: f64,
    pub s_noc: f64,
    pub s_dram: f64,
    /// Cycles per block over DRAM and the NoC; rates, not summed into the total.
    pub l_dram: f64,
    pub l_noc: f64,
    pub c_kernel: f64,
    pub launch_overhead_cycles: f64,
}

impl CycleBreakdown {
    /// The summed components in their fixed order.
    pub fn components(&self) -> [f64; 8] {
        [
            self.c_base,
            self.s_com_data,
            self.s_mem_data,
            self.c_idle,
            self.s_com_struct,
            self.s_mem_struct,
            self.s_noc,
            self.s_dram,
        ]
    }

    pub fn component_sum(&self) -> f64 {
        self.components().iter().sum()
    }

    /// Adds every component of `other`; `c_kernel` is recomputed from the sum.
    pub fn accumulate(&mut self, other: &CycleBreakdown) {
        self.c_base += other.c_base;
        self.s_com_data += other.s_com_data;
        self.s_mem_data += other.s_mem_data;
        self.c_idle += other.c_idle;
        self.s_com_struct += other.s_com_struct;
        self.s_mem_struct += other.s_mem_struct;
        self.s_noc += other.s_noc;
        self.s_dram += other.s_dram;
        self.l_dram = other.l_dram;
        self.l_noc = other.l_noc;
        self.launch_overhead_cycles += other.launch_overhead_cycles;
        self.c_kernel = self.component_sum();
    }
}

/// Ideal issue cycles, `Warps × InstsPerWarp / IssueRate`.
pub fn base_cycles(warps: f64, insts_per_warp: u64, issue_rate: f64) -> Result<f64, ModelError> {
    if !(issue_rate > 0.0) {
        return Err(ModelError::ZeroIssueRate);
    }
    Ok(warps * insts_per_warp as f64 / issue_rate)
}

/// `max(S − P_warp·(warps − 1)·AvgIntrvInsts, 0)` for one interval.
pub fn interval_stall(stall: f64, p_warp: f64, warps: f64, avg_interval_insts: f64) -> f64 {
    let other = p_warp * (warps - 1.0).max(0.0) * avg_interval_insts;
    (stall - other).max(0.0)
}

/// Exposed dependency stalls for one round of `warps` co-resident warps,
/// split into compute and memory buckets.
pub fn data_hazard_stalls(profile: &KernelProfile, warps: f64, c: &ModelConstants) -> (f64, f64) {
    let mut out = (0.0, 0.0);
    for iv in &profile.intervals {
        let s = interval_stall(iv.stall_cycles, c.p_warp, warps, profile.avg_interval_insts);
        match iv.stall_kind {
            StallKind::ComData => out.0 += s,
            StallKind::MemData => out.1 += s,
        }
    }
    out
}

/// Functional-unit contention for one round of `warps` co-resident warps on a subcore.
///
/// Per interval the busiest unit needs `(warps − 1)·insts/throughput` cycles
/// beyond the first warp, against `(warps − 1)·issue/issue_rate` ideal issue
/// cycles; any excess goes to the bucket of the busiest unit. A lone warp
/// sees no interference.
pub fn structural_stalls(profile: &KernelProfile, warps: f64, spec: &GpuSpec, c: &ModelConstants) -> (f64, f64) {
    let others = (warps - 1.0).max(0.0);
    let mut out = (0.0, 0.0);
    if others == 0.0 {
        return out;
    }
    for iv in &profile.intervals {
        let alu = others * iv.alu_insts as f64 / c.alu_throughput;
        let mem = others * iv.mem_insts as f64 / c.lsu_throughput;
        let ideal = others * iv.issue_insts as f64 / spec.issue_rate;
        let excess = (alu.max(mem) - ideal).max(0.0);
        if mem > alu {
            out.1 += excess;
        } else {
            out.0 += excess;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contention {
    pub s_noc: f64,
    pub s_dram: f64,
    pub l_noc: f64,
    pub l_dram: f64,
    /// Memory blocks per SM that leave L1.
    pub m: f64,
}

/// Queueing delay on the NoC and DRAM for the blocks one SM sends.
pub fn contention_stalls(profile: &KernelProfile, spec: &GpuSpec) -> Result<Contention, ModelError> {
    if !(spec.dram_bw_bytes_per_s > 0.0) || !(spec.noc_bw_bytes_per_s > 0.0) {
        return Err(ModelError::ZeroBandwidth);
    }
    let sm = f64::from(spec.sm_count);
    let warps_per_sm = profile.warps as f64 / sm;
    let m = (profile.mem_reads_per_warp * (1.0 - profile.cache.l1_hit) + profile.mem_writes_per_warp) * warps_per_sm;
    let (l_noc, l_dram) = (spec.l_noc(), spec.l_dram());
    Ok(Contention {
        s_noc: 0.5 * sm * m * l_noc,
        s_dram: 0.5 * sm * m * (1.0 - profile.cache.l2_hit) * l_dram,
        l_noc,
        l_dram,
        m,
    })
}

/// Full breakdown of one launch with warps spread round-robin over every subcore.
pub fn kernel_cycles(profile: &KernelProfile, spec: &GpuSpec, c: &ModelConstants) -> Result<CycleBreakdown, ModelError> {
    let w_sub = profile.warps as f64 / spec.subcores();
    let max_resident = f64::from(spec.max_resident_warps_per_sm) / f64::from(spec.subcores_per_sm);
    let resident = w_sub.min(max_resident);
    let rounds = w_sub / resident;
    let c_base = base_cycles(w_sub, profile.insts_per_warp, spec.issue_rate)?;
    let (com, mem) = data_hazard_stalls(profile, resident, c);
    let (scom, smem) = structural_stalls(profile, resident, spec, c);
    let net = contention_stalls(profile, spec)?;
    let mut b = CycleBreakdown {
        c_base,
        s_com_data: com * rounds,
        s_mem_data: mem * rounds,
        // Symmetric subcores finish together.
        c_idle: 0.0,
        s_com_struct: scom * rounds,
        s_mem_struct: smem * rounds,
        s_noc: net.s_noc,
        s_dram: net.s_dram,
        l_dram: net.l_dram,
        l_noc: net.l_noc,
        c_kernel: 0.0,
        launch_overhead_cycles: spec.launch_overhead_seconds * spec.freq_hz,
    };
    b.c_kernel = b.component_sum();
    Ok(b)
}
