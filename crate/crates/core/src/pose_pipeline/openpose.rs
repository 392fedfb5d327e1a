use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub c: f64,
}

impl Keypoint {
    pub fn detected(&self) -> bool {
        self.c > 0.0
    }
}

/// First detected person of one OpenPose output file. A frame with no person
/// has empty keypoint lists.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KeypointFrame {
    pub frame_index: usize,
    pub body: Vec<Keypoint>,
    pub left_hand: Vec<Keypoint>,
    pub right_hand: Vec<Keypoint>,
}

impl KeypointFrame {
    pub fn is_empty(&self) -> bool {
        self.body.is_empty() && self.left_hand.is_empty() && self.right_hand.is_empty()
    }
}

#[derive(Debug, Deserialize, Serialize)]
pub(crate) struct OpenPoseFile {
    #[serde(default)]
    pub(crate) version: Option<f64>,
    pub(crate) people: Vec<OpenPosePerson>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
pub(crate) struct OpenPosePerson {
    #[serde(default)]
    pub(crate) pose_keypoints_2d: Vec<f64>,
    #[serde(default)]
    pub(crate) hand_left_keypoints_2d: Vec<f64>,
    #[serde(default)]
    pub(crate) hand_right_keypoints_2d: Vec<f64>,
}

fn triples(flat: &[f64], field: &str) -> std::result::Result<Vec<Keypoint>, String> {
    if flat.len() % 3 != 0 {
        return Err(format!("`{field}` has {} values, not a multiple of 3", flat.len()));
    }
    let points: Vec<Keypoint> = flat.chunks_exact(3).map(|c| Keypoint { x: c[0], y: c[1], c: c[2] }).collect();
    if let Some(i) = points.iter().position(|p| p.detected() && !(p.x.is_finite() && p.y.is_finite())) {
        return Err(format!("`{field}` keypoint {i} is detected but not finite"));
    }
    if let Some(i) = points.iter().position(|p| !(0.0..=1.0).contains(&p.c)) {
        return Err(format!("`{field}` keypoint {i} confidence outside [0, 1]"));
    }
    Ok(points)
}

/// Parses one OpenPose JSON document.
pub fn parse_openpose_json(text: &str, frame_index: usize) -> std::result::Result<KeypointFrame, String> {
    let file: OpenPoseFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let Some(person) = file.people.first() else {
        return Ok(KeypointFrame { frame_index, ..Default::default() });
    };
    Ok(KeypointFrame {
        frame_index,
        body: triples(&person.pose_keypoints_2d, "pose_keypoints_2d")?,
        left_hand: triples(&person.hand_left_keypoints_2d, "hand_left_keypoints_2d")?,
        right_hand: triples(&person.hand_right_keypoints_2d, "hand_right_keypoints_2d")?,
    })
}

/// The `*.json` files of `dir` in lexicographic filename order.
pub fn frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(format!("listing {}", dir.display()), e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(format!("listing {}", dir.display()), e))?;
        let path = entry.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Loads every per-frame OpenPose file in `dir`, in filename order.
pub fn load_openpose_frames(dir: impl AsRef<Path>) -> Result<Vec<KeypointFrame>> {
    let dir = dir.as_ref();
    let files = frame_files(dir)?;
    if files.is_empty() {
        return Err(Error::input(format!("no OpenPose JSON files in {}", dir.display())));
    }
    files
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Ingest { file: path.clone(), reason: e.to_string() })?;
            parse_openpose_json(&text, i).map_err(|reason| Error::Ingest { file: path.clone(), reason })
        })
        .collect()
}
