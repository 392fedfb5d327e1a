//! Deterministic simulated arm and full performance runs.

mod force;
mod robot;
mod session;

pub use force::{
    force_trace_from_csv, force_trace_to_csv, read_force, ForceNoise, ForceScript, ForceSegment, FORCE_SCRIPT_HEADER,
    FORCE_TRACE_HEADER,
};
pub use robot::{Push, SimConfig, SimRobot, StepOutcome};
pub use session::{
    default_time_limit, run_performance, CueTiming, ForceScripts, RunOptions, RunReport, SimSession, StepResult,
    StopRecord,
};
