use serde::{Deserialize, Serialize};

use super::collision::chain_distance;
use super::kinematics::forward_kinematics;
use super::{RobotProfile, DOF};
use crate::error::{Error, Result};
use crate::motion::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    Position { joint: usize, value: f64, lo: f64, hi: f64 },
    Velocity { joint: usize, value: f64, limit: f64 },
    Acceleration { joint: usize, value: f64, limit: f64 },
    Collision { min_distance: f64, clearance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_safe(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_velocity_violation(&self) -> bool {
        self.violations
            .iter()
            .any(|v| matches!(v.kind, ViolationKind::Velocity { .. }))
    }

    pub fn has_collision(&self) -> bool {
        self.violations
            .iter()
            .any(|v| matches!(v.kind, ViolationKind::Collision { .. }))
    }

    /// Sorted, de-duplicated sample indices with at least one violation.
    pub fn indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self.violations.iter().map(|v| v.index).collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }
}

/// Checks position limits, finite-difference velocity and acceleration, and
/// the self-collision heuristic at every sample.
///
/// Interior samples use central differences, the two endpoints one-sided
/// differences.
pub fn validate_trajectory(profile: &RobotProfile, traj: &Trajectory) -> Result<ValidationReport> {
    let n = traj.len();
    if n < 2 {
        return Err(Error::input(format!(
            "trajectory needs at least 2 samples to validate, got {n}"
        )));
    }
    let dt = 1.0 / traj.rate();
    let q = |i: usize| traj.samples()[i].q;
    let mut violations = Vec::new();

    for i in 0..n {
        let qi = q(i);
        for j in 0..DOF {
            let def = &profile.joints[j];
            if qi[j] < def.lower() || qi[j] > def.upper() {
                violations.push(Violation {
                    index: i,
                    kind: ViolationKind::Position { joint: j, value: qi[j], lo: def.lower(), hi: def.upper() },
                });
            }
        }

        for j in 0..DOF {
            let vel = if i == 0 {
                (q(1)[j] - q(0)[j]) / dt
            } else if i == n - 1 {
                (q(n - 1)[j] - q(n - 2)[j]) / dt
            } else {
                (q(i + 1)[j] - q(i - 1)[j]) / (2.0 * dt)
            };
            let limit = profile.joints[j].velocity_limit_rad_s;
            if vel.abs() > limit {
                violations.push(Violation {
                    index: i,
                    kind: ViolationKind::Velocity { joint: j, value: vel, limit },
                });
            }
        }

        if n >= 3 {
            let c = i.clamp(1, n - 2);
            for j in 0..DOF {
                let acc = (q(c + 1)[j] - 2.0 * q(c)[j] + q(c - 1)[j]) / (dt * dt);
                let limit = profile.joints[j].acceleration_limit_rad_s2;
                if acc.abs() > limit {
                    violations.push(Violation {
                        index: i,
                        kind: ViolationKind::Acceleration { joint: j, value: acc, limit },
                    });
                }
            }
        }

        let points = forward_kinematics(profile, &qi)?;
        let d = chain_distance(&points);
        if d < profile.collision_clearance_m {
            violations.push(Violation {
                index: i,
                kind: ViolationKind::Collision { min_distance: d, clearance: profile.collision_clearance_m },
            });
        }
    }
    Ok(ValidationReport { violations })
}
