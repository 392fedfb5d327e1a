//! Motion engine for a 6-joint performance arm.
//!
//! The crate covers the offline and live halves of a robot choreography
//! workflow:
//!
//! * [`robot_model`]: kinematic profile, forward kinematics, limit and
//!   self-collision checks.
//! * [`motion`]: sinusoidal motifs, sampled trajectories and minimum-jerk
//!   transitions.
//! * [`pose_pipeline`]: OpenPose keypoint JSON to robot trajectory.
//! * [`interaction`]: teach-mode recording/replay, the compliant mode machine
//!   and the force-tap trigger.
//! * [`sequencer`]: cue sheets, cue cards, playlist validation and the live
//!   performance state machine.
//! * [`sim`]: deterministic simulated robot backend and full performance runs.

pub mod error;
pub mod fixtures;
pub mod fmt;
pub mod interaction;
pub mod motion;
pub mod pose_pipeline;
pub mod robot_model;
pub mod sequencer;
pub mod sim;

pub use error::{Error, Result};
pub use motion::{Trajectory, TrajectorySource};
pub use robot_model::{JointVector, RobotProfile};
