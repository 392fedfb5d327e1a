//! Kinematic model of a 6-joint serial arm.
//!
//! Geometry lives in a profile file (see `profiles/ur5e.profile`), never in
//! code. Each joint rotates about its axis at the current chain point and is
//! followed by a fixed link transform, so the link length between consecutive
//! chain points is the norm of that joint's link translation.

mod collision;
mod kinematics;
mod validate;

use std::fmt;
use std::ops::{Index, IndexMut};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use collision::{segment_distance, self_collision_risk, CollisionRisk};
pub use kinematics::{forward_kinematics, LinkPoints};
pub use validate::{validate_trajectory, ValidationReport, Violation, ViolationKind};

/// Number of actuated joints.
pub const DOF: usize = 6;

/// Joint names in chain order.
pub const JOINT_NAMES: [&str; DOF] = [
    "shoulder_pan",
    "shoulder_lift",
    "elbow",
    "wrist_1",
    "wrist_2",
    "wrist_3",
];

const UR5E_PROFILE: &str = include_str!("../../profiles/ur5e.profile");

/// Six joint angles in radians, ordered as [`JOINT_NAMES`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointVector(pub [f64; DOF]);

impl JointVector {
    pub const ZERO: JointVector = JointVector([0.0; DOF]);

    pub fn new(q: [f64; DOF]) -> Self {
        JointVector(q)
    }

    pub fn splat(v: f64) -> Self {
        JointVector([v; DOF])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &JointVector) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter()
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::input(format!("joint vector has non-finite entries: {self}")))
        }
    }
}

impl From<[f64; DOF]> for JointVector {
    fn from(q: [f64; DOF]) -> Self {
        JointVector(q)
    }
}

impl Index<usize> for JointVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for JointVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl fmt::Display for JointVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v:.4}")?;
        }
        write!(f, "]")
    }
}

/// One revolute joint followed by its fixed link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDef {
    pub name: String,
    /// Rotation axis, expressed in the frame reached after the previous link.
    pub axis: [f64; 3],
    /// Link translation applied after the joint rotation (meters).
    pub link_xyz_m: [f64; 3],
    /// Fixed roll/pitch/yaw applied after the link translation (radians).
    #[serde(default)]
    pub link_rpy_rad: [f64; 3],
    pub limits_rad: [f64; 2],
    pub velocity_limit_rad_s: f64,
    pub acceleration_limit_rad_s2: f64,
}

impl JointDef {
    pub fn lower(&self) -> f64 {
        self.limits_rad[0]
    }

    pub fn upper(&self) -> f64 {
        self.limits_rad[1]
    }

    pub fn link_length(&self) -> f64 {
        let [x, y, z] = self.link_xyz_m;
        (x * x + y * y + z * z).sqrt()
    }
}

fn default_control_rate() -> f64 {
    500.0
}

fn default_clearance() -> f64 {
    0.10
}

/// Everything needed for forward kinematics and the safety checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotProfile {
    pub name: String,
    #[serde(default = "default_control_rate")]
    pub control_rate_hz: f64,
    #[serde(default = "default_clearance")]
    pub collision_clearance_m: f64,
    pub joints: Vec<JointDef>,
}

impl RobotProfile {
    /// The bundled UR5e-shaped profile.
    pub fn ur5e() -> Self {
        Self::from_toml_str(UR5E_PROFILE).expect("bundled ur5e profile is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let profile: RobotProfile =
            toml::from_str(text).map_err(|e| Error::input(format!("robot profile: {e}")))?;
        profile.check()?;
        Ok(profile)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading profile {}", path.display()), e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Input(reason) => Error::Ingest {
                file: path.to_path_buf(),
                reason,
            },
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("profile serializes")
    }

    fn check(&self) -> Result<()> {
        if self.joints.len() != DOF {
            return Err(Error::input(format!(
                "profile `{}` has {} joints, expected {DOF}",
                self.name,
                self.joints.len()
            )));
        }
        for (joint, expected) in self.joints.iter().zip(JOINT_NAMES) {
            if joint.name != expected {
                return Err(Error::input(format!(
                    "joint `{}` out of order, expected `{expected}`",
                    joint.name
                )));
            }
            let axis_norm = joint.axis.iter().map(|a| a * a).sum::<f64>().sqrt();
            if !(axis_norm > 1e-9) {
                return Err(Error::input(format!("joint `{}` has a zero axis", joint.name)));
            }
            if !(joint.lower() < joint.upper()) {
                return Err(Error::input(format!(
                    "joint `{}` limits must satisfy lo < hi",
                    joint.name
                )));
            }
            if !(joint.velocity_limit_rad_s > 0.0) || !(joint.acceleration_limit_rad_s2 > 0.0) {
                return Err(Error::input(format!(
                    "joint `{}` velocity and acceleration limits must be positive",
                    joint.name
                )));
            }
        }
        if !(self.control_rate_hz > 0.0) {
            return Err(Error::input("control_rate_hz must be positive"));
        }
        if !(self.collision_clearance_m > 0.0) {
            return Err(Error::input("collision_clearance_m must be positive"));
        }
        Ok(())
    }

    /// All joints at the midpoint of their position limits.
    pub fn neutral(&self) -> JointVector {
        let mut q = JointVector::ZERO;
        for (i, j) in self.joints.iter().enumerate() {
            q[i] = 0.5 * (j.lower() + j.upper());
        }
        q
    }

    pub fn within_limits(&self, q: &JointVector) -> bool {
        self.joints
            .iter()
            .zip(q.iter())
            .all(|(j, &v)| v >= j.lower() && v <= j.upper())
    }

    pub fn velocity_limits(&self) -> [f64; DOF] {
        std::array::from_fn(|i| self.joints[i].velocity_limit_rad_s)
    }

    pub fn control_period(&self) -> f64 {
        1.0 / self.control_rate_hz
    }
}
