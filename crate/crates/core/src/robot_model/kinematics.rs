use nalgebra::{Isometry3, Point3, Translation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::{JointVector, RobotProfile, DOF};
use crate::error::Result;

/// Chain points in meters: base origin, the end of each of the six links.
/// The last point is the tool point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkPoints(pub [[f64; 3]; DOF + 1]);

impl LinkPoints {
    pub fn base(&self) -> [f64; 3] {
        self.0[0]
    }

    pub fn tool(&self) -> [f64; 3] {
        self.0[DOF]
    }

    pub fn point(&self, i: usize) -> Point3<f64> {
        let [x, y, z] = self.0[i];
        Point3::new(x, y, z)
    }
}

/// Composes each joint's rotation with its fixed link transform.
pub fn forward_kinematics(profile: &RobotProfile, q: &JointVector) -> Result<LinkPoints> {
    q.ensure_finite()?;
    let mut frame = Isometry3::identity();
    let mut points = [[0.0; 3]; DOF + 1];
    for (i, joint) in profile.joints.iter().enumerate() {
        let axis = Unit::new_normalize(Vector3::from(joint.axis));
        let rotation = UnitQuaternion::from_axis_angle(&axis, q[i]);
        let [x, y, z] = joint.link_xyz_m;
        let [roll, pitch, yaw] = joint.link_rpy_rad;
        let link = Isometry3::from_parts(
            Translation3::new(x, y, z),
            UnitQuaternion::from_euler_angles(roll, pitch, yaw),
        );
        frame = frame * Isometry3::from_parts(Translation3::identity(), rotation) * link;
        let t = frame.translation.vector;
        points[i + 1] = [t.x, t.y, t.z];
    }
    Ok(LinkPoints(points))
}
