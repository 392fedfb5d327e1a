use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use super::kinematics::{forward_kinematics, LinkPoints};
use super::{JointVector, RobotProfile};
use crate::error::Result;

/// Wrist chain: wrist links and tool (points 4 -> 5 -> 6).
const WRIST_SEGMENTS: [(usize, usize); 2] = [(4, 5), (5, 6)];
/// Proximal chain: pedestal and upper arm (points 0 -> 1 -> 2).
const PROXIMAL_SEGMENTS: [(usize, usize); 2] = [(0, 1), (1, 2)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionRisk {
    pub risk: bool,
    pub min_distance: f64,
}

/// Minimum distance between the wrist chain and the proximal chain.
pub fn self_collision_risk(profile: &RobotProfile, q: &JointVector) -> Result<CollisionRisk> {
    let points = forward_kinematics(profile, q)?;
    let min_distance = chain_distance(&points);
    Ok(CollisionRisk {
        risk: min_distance < profile.collision_clearance_m,
        min_distance,
    })
}

pub(crate) fn chain_distance(points: &LinkPoints) -> f64 {
    let mut best = f64::INFINITY;
    for &(a0, a1) in &WRIST_SEGMENTS {
        for &(b0, b1) in &PROXIMAL_SEGMENTS {
            let d = segment_distance(
                points.point(a0),
                points.point(a1),
                points.point(b0),
                points.point(b1),
            );
            best = best.min(d);
        }
    }
    best
}

/// Closest distance between segments `p0-p1` and `q0-q1`.
pub fn segment_distance(p0: Point3<f64>, p1: Point3<f64>, q0: Point3<f64>, q1: Point3<f64>) -> f64 {
    const EPS: f64 = 1e-15;
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);

    let (s, t) = if a <= EPS && e <= EPS {
        (0.0, 0.0)
    } else if a <= EPS {
        (0.0, (f / e).clamp(0.0, 1.0))
    } else {
        let c = d1.dot(&r);
        if e <= EPS {
            ((-c / a).clamp(0.0, 1.0), 0.0)
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s = if denom > EPS {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
            (s, t)
        }
    };
    let c1 = p0 + d1 * s;
    let c2 = q0 + d2 * t;
    (c1 - c2).norm()
}
