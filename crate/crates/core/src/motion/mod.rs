//! Sinusoidal motifs, sampled trajectories and safe transitions.

mod motif;
mod sinusoid;
mod trajectory;
mod transition;

pub use motif::{sample_motif, MotifSpec};
pub use motif::parse_angle;
pub use sinusoid::{eval_joint, facing_gamma, Envelope, Facing, SinusoidSpec};
pub use trajectory::{Sample, Trajectory, TrajectorySource, CSV_HEADER};
pub use transition::{
    make_transition, min_jerk, min_jerk_rate, peak_fd_velocity, plan_safe_transition, PlannedTransition,
    TransitionRoute,
};
