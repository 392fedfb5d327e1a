//! Synthetic OpenPose output for tests and demos.
//!
//! Frames are built from arm angles in math convention (y up) and written with
//! image convention (y down), the way OpenPose reports pixels.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pose_pipeline::{Keypoint, KeypointFrame, LandmarkMap, OpenPoseFile, OpenPosePerson};

const CHEST: [f64; 2] = [320.0, -200.0];
/// chest->shoulder, upper arm, forearm, hand, thumb (pixels).
const SEGMENTS: [f64; 5] = [40.0, 80.0, 70.0, 20.0, 15.0];
const CONFIDENCE: f64 = 0.9;

/// Relative chain angles `H0..H3` plus the absolute thumb direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmAngles {
    pub relative: [f64; 4],
    pub thumb: f64,
}

impl ArmAngles {
    pub fn left_rest() -> Self {
        ArmAngles { relative: [0.0, -1.1, 0.45, 0.2], thumb: -0.6 }
    }

    pub fn right_rest() -> Self {
        ArmAngles { relative: [PI, 1.0, -0.4, -0.15], thumb: -2.4 }
    }
}

/// Chest, shoulder, elbow, wrist, hand and thumb in math convention.
pub fn arm_chain(angles: &ArmAngles) -> [[f64; 2]; 6] {
    let mut pts = [[0.0; 2]; 6];
    pts[0] = CHEST;
    let mut heading = 0.0;
    for j in 0..4 {
        heading += angles.relative[j];
        let prev = pts[j];
        pts[j + 1] = [prev[0] + SEGMENTS[j] * heading.cos(), prev[1] + SEGMENTS[j] * heading.sin()];
    }
    let wrist = pts[3];
    pts[5] = [wrist[0] + SEGMENTS[4] * angles.thumb.cos(), wrist[1] + SEGMENTS[4] * angles.thumb.sin()];
    pts
}

fn image(p: [f64; 2]) -> Keypoint {
    Keypoint { x: p[0], y: -p[1], c: CONFIDENCE }
}

fn hand(chain: &[[f64; 2]; 6], map: &LandmarkMap) -> Vec<Keypoint> {
    let mut pts = vec![Keypoint { x: 0.0, y: 0.0, c: 0.0 }; 21];
    pts[0] = image(chain[3]);
    let offsets = [0.5, -0.5, 1.0, -1.0];
    for (&tip, off) in map.hand_fingertips.iter().zip(offsets) {
        pts[tip] = image([chain[4][0], chain[4][1] + off]);
    }
    pts[map.thumb_tip] = image(chain[5]);
    pts
}

pub fn synth_frame(frame_index: usize, left: &ArmAngles, right: &ArmAngles) -> KeypointFrame {
    let map = LandmarkMap::default();
    let l = arm_chain(left);
    let r = arm_chain(right);
    let mut body = vec![Keypoint { x: 0.0, y: 0.0, c: 0.0 }; 25];
    body[0] = image([CHEST[0], CHEST[1] + 50.0]);
    body[map.chest] = image(CHEST);
    body[map.left_shoulder] = image(l[1]);
    body[map.left_elbow] = image(l[2]);
    body[map.left_wrist] = image(l[3]);
    body[map.right_shoulder] = image(r[1]);
    body[map.right_elbow] = image(r[2]);
    body[map.right_wrist] = image(r[3]);
    KeypointFrame { frame_index, body, left_hand: hand(&l, &map), right_hand: hand(&r, &map) }
}

/// Both arms held still for `n` frames.
pub fn stationary_frames(n: usize) -> Vec<KeypointFrame> {
    (0..n).map(|i| synth_frame(i, &ArmAngles::left_rest(), &ArmAngles::right_rest())).collect()
}

/// The left upper arm swings about the shoulder at `freq_hz` with the given
/// amplitude (radians) while the rest of the chain stays rigid. The right
/// arm is still, so automatic arm selection picks the left.
pub fn elbow_oscillation_frames(n: usize, fps: f64, freq_hz: f64, amplitude: f64) -> Vec<KeypointFrame> {
    (0..n)
        .map(|i| {
            let t = i as f64 / fps;
            let mut left = ArmAngles::left_rest();
            left.relative[1] += amplitude * (TAU * freq_hz * t).sin();
            synth_frame(i, &left, &ArmAngles::right_rest())
        })
        .collect()
}

fn flat(points: &[Keypoint]) -> Vec<f64> {
    points.iter().flat_map(|k| [k.x, k.y, k.c]).collect()
}

/// One frame in OpenPose's per-frame JSON layout.
pub fn openpose_json(frame: &KeypointFrame) -> String {
    let people = if frame.is_empty() {
        vec![]
    } else {
        vec![OpenPosePerson {
            pose_keypoints_2d: flat(&frame.body),
            hand_left_keypoints_2d: flat(&frame.left_hand),
            hand_right_keypoints_2d: flat(&frame.right_hand),
        }]
    };
    serde_json::to_string(&OpenPoseFile { version: Some(1.3), people }).expect("frame serializes")
}

/// Writes `frame_000000_keypoints.json`, ... into `dir`.
pub fn write_frames(dir: impl AsRef<Path>, frames: &[KeypointFrame]) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    for (i, frame) in frames.iter().enumerate() {
        let path = dir.join(format!("frame_{i:06}_keypoints.json"));
        std::fs::write(&path, openpose_json(frame)).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    }
    Ok(())
}
