use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cycles::{estimate_cache, kernel_cycles, synthesize_profile, CycleBreakdown};
use super::{GpuSpec, ModelConstants, ModelError};
use crate::ckks::ParamShape;
use crate::dataflow::{DataflowKind, ExecutionTrace, KernelCosts, KernelKind, ScheduleSpec};

/// Everything the model needs besides the workload.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelInputs {
    pub gpu: GpuSpec,
    pub constants: ModelConstants,
    pub costs: KernelCosts,
}

impl ModelInputs {
    pub fn new(gpu: GpuSpec) -> Self {
        Self { gpu, constants: ModelConstants::default(), costs: KernelCosts::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub schedule: ScheduleSpec,
    pub per_kind: BTreeMap<KernelKind, CycleBreakdown>,
    pub total: CycleBreakdown,
    pub launch_count: usize,
    pub footprint_bytes: u64,
    pub l2_hit: f64,
    pub kernel_seconds: f64,
    pub launch_overhead_seconds: f64,
    pub total_seconds: f64,
}

/// Predicts one KeySwitch at the top level from its symbolic trace.
pub fn predict_time(shape: &ParamShape, schedule: ScheduleSpec, inputs: &ModelInputs) -> Result<Prediction, ModelError> {
    let trace = ExecutionTrace::symbolic(shape, shape.max_level, schedule, &inputs.costs);
    predict_trace(&trace, inputs)
}

pub fn predict_trace(trace: &ExecutionTrace, inputs: &ModelInputs) -> Result<Prediction, ModelError> {
    let (gpu, c) = (&inputs.gpu, &inputs.constants);
    gpu.validate()?;
    c.validate()?;
    if trace.launches.is_empty() {
        return Err(ModelError::EmptyTrace);
    }
    let mut per_kind: BTreeMap<KernelKind, CycleBreakdown> = BTreeMap::new();
    let mut warp_insts: BTreeMap<KernelKind, u64> = BTreeMap::new();
    for launch in &trace.launches {
        let profile = synthesize_profile(launch, &trace.shape, &trace.costs, gpu, c)?;
        let b = kernel_cycles(&profile, gpu, c)?;
        per_kind.entry(launch.kind).or_default().accumulate(&b);
        *warp_insts.entry(launch.kind).or_default() += launch.warp_insts();
    }
    // Base cycles come from exact integer instruction totals so that they do
    // not depend on how the work was split into launches.
    let denom = gpu.subcores() * gpu.issue_rate;
    let mut total = CycleBreakdown::default();
    for (kind, b) in per_kind.iter_mut() {
        b.c_base = warp_insts[kind] as f64 / denom;
        b.c_kernel = b.component_sum();
        total.accumulate(b);
    }
    total.c_base = warp_insts.values().sum::<u64>() as f64 / denom;
    total.c_kernel = total.component_sum();
    let footprint_bytes = trace.launches[0].footprint_bytes;
    let launch_count = trace.launches.len();
    let kernel_seconds = total.c_kernel / gpu.freq_hz;
    let launch_overhead_seconds = launch_count as f64 * gpu.launch_overhead_seconds;
    Ok(Prediction {
        schedule: trace.schedule,
        per_kind,
        total,
        launch_count,
        footprint_bytes,
        l2_hit: estimate_cache(footprint_bytes, KernelKind::MulAcc, gpu, c).l2_hit,
        kernel_seconds,
        launch_overhead_seconds,
        total_seconds: kernel_seconds + launch_overhead_seconds,
    })
}

/// Candidates whose times differ by less than this fraction are ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub best: Prediction,
    /// Best chunk count of each strategy, in [`DataflowKind::ALL`] order.
    pub per_strategy: Vec<Prediction>,
    /// Second-best strategy time over the best.
    pub ratio_second_best: f64,
    /// Worst strategy time over the best.
    pub ratio_worst: f64,
}

/// Ordering used everywhere a winner is chosen: time, then footprint, then launches.
fn better(a: &Prediction, b: &Prediction) -> bool {
    let (ta, tb) = (a.total_seconds, b.total_seconds);
    if (ta - tb).abs() > TIE_TOLERANCE * ta.max(tb) {
        return ta < tb;
    }
    (a.footprint_bytes, a.launch_count) < (b.footprint_bytes, b.launch_count)
}

pub fn pick_best(candidates: &[Prediction]) -> Option<&Prediction> {
    candidates.iter().fold(None, |acc, p| match acc {
        Some(b) if !better(p, b) => Some(b),
        _ => Some(p),
    })
}

/// Evaluates every strategy (chunked ones for c = 2..=10) and picks the winner.
pub fn select_best(shape: &ParamShape, inputs: &ModelInputs) -> Result<Selection, ModelError> {
    let all: Vec<Prediction> =
        ScheduleSpec::all().into_iter().map(|s| predict_time(shape, s, inputs)).collect::<Result<_, _>>()?;
    select_from(all)
}

/// Reduces a full candidate list to a [`Selection`].
pub fn select_from(all: Vec<Prediction>) -> Result<Selection, ModelError> {
    let per_strategy: Vec<Prediction> = DataflowKind::ALL
        .iter()
        .map(|&k| {
            let of_kind: Vec<Prediction> = all.iter().filter(|p| p.schedule.kind() == k).cloned().collect();
            pick_best(&of_kind).cloned().ok_or(ModelError::EmptyTrace)
        })
        .collect::<Result<_, _>>()?;
    let best = pick_best(&per_strategy).cloned().ok_or(ModelError::EmptyTrace)?;
    let mut times: Vec<f64> = per_strategy.iter().map(|p| p.total_seconds).collect();
    times.sort_by(f64::total_cmp);
    Ok(Selection {
        ratio_second_best: times[1] / best.total_seconds,
        ratio_worst: times[times.len() - 1] / best.total_seconds,
        best,
        per_strategy,
    })
}
