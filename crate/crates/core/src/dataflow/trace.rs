use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::cost::KernelCosts;
use super::plan::{plan_tasks, KernelKind, KernelTask};
use super::schedule::{DataflowKind, ScheduleSpec};
use crate::ckks::ParamShape;

pub const WORD_BYTES: u64 = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelLaunch {
    pub kind: KernelKind,
    pub digits: Vec<usize>,
    pub chunk: Option<usize>,
    pub warps: u64,
    pub insts_per_warp: u64,
    pub bytes_read: u64,
    pub bytes_written: u64,
    pub footprint_bytes: u64,
}

impl KernelLaunch {
    pub fn warp_insts(&self) -> u64 {
        self.warps * self.insts_per_warp
    }
}

/// The ordered launches of one KeySwitch plus what produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub shape: ParamShape,
    pub level: usize,
    pub schedule: ScheduleSpec,
    pub costs: KernelCosts,
    pub launches: Vec<KernelLaunch>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStats {
    pub launch_count: usize,
    pub mean_warps_per_kernel: f64,
    pub total_warp_insts: u64,
    pub peak_footprint: u64,
    pub launches_per_kind: BTreeMap<KernelKind, usize>,
}

/// Live working set in bytes: the active ciphertext slice `N·l` words, times
/// `dnum` when digits run in parallel, divided by `chunks` when the output is
/// chunked (rounded up to a whole word).
pub fn footprint(shape: &ParamShape, schedule: ScheduleSpec, level: usize) -> u64 {
    let slice = shape.n as u64 * level as u64 * WORD_BYTES;
    let total = if schedule.kind().is_digit_parallel() { slice * shape.dnum as u64 } else { slice };
    let per_chunk = total.div_ceil(schedule.chunks() as u64);
    per_chunk.div_ceil(WORD_BYTES) * WORD_BYTES
}

pub(crate) fn launches_for(
    shape: &ParamShape,
    level: usize,
    schedule: ScheduleSpec,
    costs: &KernelCosts,
    tasks: &[KernelTask],
) -> Vec<KernelLaunch> {
    let e = costs.elements_per_warp(shape.n);
    let fp = footprint(shape, schedule, level);
    let templates: BTreeMap<KernelKind, _> = KernelKind::ALL.iter().map(|&k| (k, costs.template(k, shape))).collect();
    tasks
        .iter()
        .map(|t| {
            let tpl = &templates[&t.kind];
            let elements = t.rows() as u64 * shape.n as u64 * t.kind.components();
            let warps = elements / e;
            KernelLaunch {
                kind: t.kind,
                digits: t.digits.clone(),
                chunk: t.chunk,
                warps,
                insts_per_warp: tpl.insts_per_warp(),
                bytes_read: warps * tpl.words_read * WORD_BYTES,
                bytes_written: warps * tpl.words_written * WORD_BYTES,
                footprint_bytes: fp,
            }
        })
        .collect()
}

impl ExecutionTrace {
    /// The trace a schedule produces, without running any arithmetic.
    pub fn symbolic(shape: &ParamShape, level: usize, schedule: ScheduleSpec, costs: &KernelCosts) -> Self {
        let tasks = plan_tasks(shape, level, schedule);
        let launches = launches_for(shape, level, schedule, costs, &tasks);
        Self { shape: *shape, level, schedule, costs: *costs, launches }
    }

    pub fn stats(&self) -> TraceStats {
        trace_stats(self)
    }

    /// One line per launch.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in &self.launches {
            let digits: Vec<String> = l.digits.iter().map(usize::to_string).collect();
            let chunk = l.chunk.map_or_else(|| "-".to_string(), |c| c.to_string());
            writeln!(
                out,
                "kind={} digits={} chunk={} warps={} insts={} bytes_r={} bytes_w={} footprint={}",
                l.kind,
                digits.join(","),
                chunk,
                l.warps,
                l.insts_per_warp,
                l.bytes_read,
                l.bytes_written,
                l.footprint_bytes
            )
            .expect("writing to a String");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

pub fn trace_stats(trace: &ExecutionTrace) -> TraceStats {
    let launch_count = trace.launches.len();
    let total_warps: u64 = trace.launches.iter().map(|l| l.warps).sum();
    let mut launches_per_kind = BTreeMap::new();
    for l in &trace.launches {
        *launches_per_kind.entry(l.kind).or_insert(0) += 1;
    }
    TraceStats {
        launch_count,
        mean_warps_per_kernel: if launch_count == 0 { 0.0 } else { total_warps as f64 / launch_count as f64 },
        total_warp_insts: trace.launches.iter().map(KernelLaunch::warp_insts).sum(),
        peak_footprint: trace.launches.iter().map(|l| l.footprint_bytes).max().unwrap_or(0),
        launches_per_kind,
    }
}

/// Footprints of every strategy at one chunk count, in [`DataflowKind::ALL`] order.
pub fn footprints(shape: &ParamShape, level: usize, chunks: usize) -> [u64; 4] {
    DataflowKind::ALL.map(|kind| {
        let c = if kind.is_chunked() { chunks } else { 1 };
        footprint(shape, ScheduleSpec::new(kind, c).expect("valid chunk count"), level)
    })
}
