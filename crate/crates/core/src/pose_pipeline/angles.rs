use serde::{Deserialize, Serialize};

use super::openpose::{Keypoint, KeypointFrame};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Keypoint indices of the tracked landmarks. Defaults follow the OpenPose
/// BODY_25 and 21-point hand models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkMap {
    pub chest: usize,
    pub right_shoulder: usize,
    pub right_elbow: usize,
    pub right_wrist: usize,
    pub left_shoulder: usize,
    pub left_elbow: usize,
    pub left_wrist: usize,
    /// Hand-model fingertips averaged into the hand point.
    pub hand_fingertips: Vec<usize>,
    pub thumb_tip: usize,
}

impl Default for LandmarkMap {
    fn default() -> Self {
        LandmarkMap {
            chest: 1,
            right_shoulder: 2,
            right_elbow: 3,
            right_wrist: 4,
            left_shoulder: 5,
            left_elbow: 6,
            left_wrist: 7,
            hand_fingertips: vec![8, 12, 16, 20],
            thumb_tip: 4,
        }
    }
}

/// Chain landmarks of one arm, image y already negated (y up):
/// chest, shoulder, elbow, wrist, hand, thumb.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmPoints(pub [[f64; 2]; 6]);

pub const CHAIN_NAMES: [&str; 6] = ["chest", "shoulder", "elbow", "wrist", "hand", "thumb"];

fn detected(points: &[Keypoint], i: usize) -> Option<[f64; 2]> {
    points.get(i).filter(|k| k.detected()).map(|k| [k.x, -k.y])
}

fn raw_arm(frame: &KeypointFrame, side: Side, map: &LandmarkMap) -> [Option<[f64; 2]>; 6] {
    let (shoulder, elbow, wrist, hand) = match side {
        Side::Left => (map.left_shoulder, map.left_elbow, map.left_wrist, &frame.left_hand),
        Side::Right => (map.right_shoulder, map.right_elbow, map.right_wrist, &frame.right_hand),
    };
    let tips: Vec<[f64; 2]> = map.hand_fingertips.iter().filter_map(|&i| detected(hand, i)).collect();
    let hand_point = (!tips.is_empty()).then(|| {
        let n = tips.len() as f64;
        let sx: f64 = tips.iter().map(|p| p[0]).sum();
        let sy: f64 = tips.iter().map(|p| p[1]).sum();
        [sx / n, sy / n]
    });
    [
        detected(&frame.body, map.chest),
        detected(&frame.body, shoulder),
        detected(&frame.body, elbow),
        detected(&frame.body, wrist),
        hand_point,
        detected(hand, map.thumb_tip),
    ]
}

/// Collects one arm's landmarks for every frame and fills detection gaps:
/// a missing landmark holds its last detected value, and a leading gap takes
/// the first detected value.
pub fn arm_landmarks(frames: &[KeypointFrame], side: Side, map: &LandmarkMap) -> Result<Vec<ArmPoints>> {
    let raw: Vec<[Option<[f64; 2]>; 6]> = frames.iter().map(|f| raw_arm(f, side, map)).collect();
    let mut filled = vec![ArmPoints([[0.0; 2]; 6]); raw.len()];
    for landmark in 0..6 {
        let first = raw.iter().find_map(|r| r[landmark]).ok_or_else(|| {
            Error::input(format!("{side:?} {} is never detected", CHAIN_NAMES[landmark]).to_lowercase())
        })?;
        let mut last = first;
        for (i, r) in raw.iter().enumerate() {
            if let Some(p) = r[landmark] {
                last = p;
            }
            filled[i].0[landmark] = last;
        }
    }
    Ok(filled)
}

/// Per-frame human arm angles `H0..H4` in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanAngleTrack {
    pub side: Side,
    pub angles: Vec<[f64; 5]>,
    pub frame_rate: f64,
}

impl HumanAngleTrack {
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn channel(&self, j: usize) -> Vec<f64> {
        self.angles.iter().map(|a| a[j]).collect()
    }

    pub fn set_channel(&mut self, j: usize, values: &[f64]) {
        for (a, v) in self.angles.iter_mut().zip(values) {
            a[j] = *v;
        }
    }
}

/// Absolute segment angles along chest -> shoulder -> elbow -> wrist -> hand,
/// turned into relative angles for j = 3, 2, 1 (in that order), plus the
/// thumb direction from the wrist.
pub fn frame_angles(p: &ArmPoints) -> [f64; 5] {
    let p = &p.0;
    let mut h = [0.0; 5];
    for j in 0..4 {
        h[j] = (p[j + 1][1] - p[j][1]).atan2(p[j + 1][0] - p[j][0]);
    }
    for j in [3, 2, 1] {
        h[j] -= h[j - 1];
    }
    h[4] = (p[5][1] - p[3][1]).atan2(p[5][0] - p[3][0]);
    h
}

pub fn extract_arm_angles(points: &[ArmPoints], side: Side, frame_rate: f64) -> HumanAngleTrack {
    HumanAngleTrack { side, angles: points.iter().map(frame_angles).collect(), frame_rate }
}

/// Net frame-to-frame change summed over all five angles.
pub fn motion_score(track: &HumanAngleTrack) -> f64 {
    let mut s = 0.0;
    for pair in track.angles.windows(2) {
        for j in 0..5 {
            s += (pair[0][j] - pair[1][j]).abs();
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmSelection {
    pub track: HumanAngleTrack,
    pub score_left: f64,
    pub score_right: f64,
}

/// Keeps the arm that moves more; ties go to the left arm.
pub fn select_arm(left: &HumanAngleTrack, right: &HumanAngleTrack) -> Result<ArmSelection> {
    if left.len() != right.len() {
        return Err(Error::input(format!(
            "arm tracks differ in length: left {} vs right {}",
            left.len(),
            right.len()
        )));
    }
    let score_left = motion_score(left);
    let score_right = motion_score(right);
    let track = if score_left >= score_right { left.clone() } else { right.clone() };
    Ok(ArmSelection { track, score_left, score_right })
}
