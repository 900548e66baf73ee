//! Analytical GPU cycle model: per-launch interval analysis, a working-set
//! cache estimate, and strategy selection.

mod constants;
mod cycles;
mod gpu;
mod predict;

pub use constants::{L1Hits, ModelConstants};
pub use cycles::{
    base_cycles, contention_stalls, data_hazard_stalls, estimate_cache, interval_stall, kernel_cycles,
    structural_stalls, synthesize_profile, CacheEstimate, Contention, CycleBreakdown, Interval, KernelProfile,
};
pub use gpu::GpuSpec;
pub use predict::{
    pick_best, predict_time, predict_trace, select_best, select_from, ModelInputs, Prediction, Selection,
    TIE_TOLERANCE,
};

use crate::dataflow::KernelKind;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("{0} launch has no warps")]
    EmptyLaunch(KernelKind),
    #[error("trace has no launches")]
    EmptyTrace,
    #[error("issue rate must be positive")]
    ZeroIssueRate,
    #[error("bandwidths must be positive")]
    ZeroBandwidth,
    #[error("invalid GPU spec: {0}")]
    InvalidSpec(String),
    #[error("invalid model constants: {0}")]
    InvalidConstants(String),
    #[error("unknown GPU preset `{0}`")]
    UnknownPreset(String),
}
