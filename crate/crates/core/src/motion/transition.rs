use serde::{Deserialize, Serialize};

use super::trajectory::{Trajectory, TrajectorySource};
use crate::error::{Error, Result};
use crate::robot_model::{validate_trajectory, JointVector, RobotProfile, ValidationReport, DOF};

/// Minimum-jerk blend `s(tau) = 10 tau^3 - 15 tau^4 + 6 tau^5` on `[0, 1]`.
pub fn min_jerk(tau: f64) -> f64 {
    let t = tau.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

/// `ds/dtau`; peaks at 15/8 for `tau = 1/2`.
pub fn min_jerk_rate(tau: f64) -> f64 {
    let t = tau.clamp(0.0, 1.0);
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

/// Per-joint quintic from `q_from` to `q_to` with zero boundary velocity and
/// acceleration.
///
/// The step count is `ceil(duration * rate)`, so the last sample lands on
/// `q_to` exactly even when `duration` is not a whole number of periods.
pub fn make_transition(q_from: &JointVector, q_to: &JointVector, duration: f64, rate: f64) -> Result<Trajectory> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::input(format!("transition duration must be positive, got {duration}")));
    }
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::input(format!("sample rate must be positive, got {rate}")));
    }
    q_from.ensure_finite()?;
    q_to.ensure_finite()?;
    let steps = ((duration * rate - 1e-9).ceil() as usize).max(1);
    let positions = (0..=steps).map(|k| {
        if k == steps {
            return *q_to;
        }
        let s = min_jerk(k as f64 / steps as f64);
        JointVector(std::array::from_fn(|j| q_from[j] + (q_to[j] - q_from[j]) * s))
    });
    Trajectory::from_positions(rate, positions.collect::<Vec<_>>(), TrajectorySource::Transition)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionRoute {
    Direct,
    ViaNeutral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedTransition {
    pub route: TransitionRoute,
    pub trajectory: Trajectory,
    /// Why the direct plan was refused, when it was.
    pub direct_report: Option<ValidationReport>,
}

impl PlannedTransition {
    pub fn segments(&self) -> usize {
        match self.route {
            TransitionRoute::Direct => 1,
            TransitionRoute::ViaNeutral => 2,
        }
    }
}

/// Direct quintic if it validates, otherwise two chained quintics through the
/// profile's neutral pose (each leg taking `duration`).
pub fn plan_safe_transition(
    profile: &RobotProfile,
    q_from: &JointVector,
    q_to: &JointVector,
    duration: f64,
    rate: f64,
) -> Result<PlannedTransition> {
    let direct = make_transition(q_from, q_to, duration, rate)?;
    let direct_report = validate_trajectory(profile, &direct)?;
    if direct_report.is_safe() {
        return Ok(PlannedTransition { route: TransitionRoute::Direct, trajectory: direct, direct_report: None });
    }

    let neutral = profile.neutral();
    let first = make_transition(q_from, &neutral, duration, rate)?;
    let second = make_transition(&neutral, q_to, duration, rate)?;
    let positions: Vec<JointVector> = first.positions().chain(second.positions().skip(1)).collect();
    let via = Trajectory::from_positions(rate, positions, TrajectorySource::Transition)?;
    let via_report = validate_trajectory(profile, &via)?;
    if via_report.is_safe() {
        Ok(PlannedTransition { route: TransitionRoute::ViaNeutral, trajectory: via, direct_report: Some(direct_report) })
    } else {
        Err(Error::Planning { direct: Box::new(direct_report), via_neutral: Box::new(via_report) })
    }
}

/// Largest per-joint central-difference speed over the trajectory.
pub fn peak_fd_velocity(traj: &Trajectory) -> [f64; DOF] {
    let dt = 1.0 / traj.rate();
    let s = traj.samples();
    let mut peak = [0.0f64; DOF];
    for i in 1..s.len().saturating_sub(1) {
        for j in 0..DOF {
            let v = ((s[i + 1].q[j] - s[i - 1].q[j]) / (2.0 * dt)).abs();
            peak[j] = peak[j].max(v);
        }
    }
    peak
}
