//! Teach/replay, the compliant mode machine and the force-tap trigger.

mod mode;
mod recording;
mod trigger;

pub use mode::{mode_step, ControlMode, ModeEvent, DEFAULT_FORCE_EXIT_THRESHOLD, EXIT_DAMPING};
pub use recording::{record_step, recording_from_trajectory, replay, Recording, DEFAULT_RECORD_RATE};
pub use trigger::{constant_reading_latency, trigger_update, ForceTriggerState, DEFAULT_TAP_THRESHOLD, WINDOW_LEN};
