//! The four KeySwitch dataflows as kernel-task orderings, their launch
//! traces, and the harness that checks they agree.

mod cost;
mod equivalence;
mod exec;
mod plan;
mod schedule;
mod trace;

pub use cost::{IntervalTemplate, KernelCosts, KernelTemplate, StallKind};
pub use equivalence::{
    equivalence_schedules, verify_equivalence, verify_equivalence_on, EquivalenceReport, FaultInjection, Mismatch,
    EQUIVALENCE_CHUNKS,
};
pub use exec::{run_scheduled_keyswitch, run_scheduled_keyswitch_with};
pub use plan::{expected_launches, plan_tasks, DigitRows, KernelKind, KernelTask, Layout};
pub use schedule::{DataflowKind, ScheduleError, ScheduleSpec, MAX_CHUNKS, MIN_CHUNKS};
pub use trace::{footprint, footprints, trace_stats, ExecutionTrace, KernelLaunch, TraceStats, WORD_BYTES};
