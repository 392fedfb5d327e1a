use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::angles::{arm_landmarks, extract_arm_angles, select_arm, HumanAngleTrack, LandmarkMap, Side};
use super::openpose::{load_openpose_frames, KeypointFrame};
use super::signal::{box_blur, frequency_filter, FilterConfig};
use crate::error::{Error, Result};
use crate::motion::{SinusoidSpec, Trajectory, TrajectorySource};
use crate::robot_model::JointVector;

/// Builds robot joint vectors from a filtered human track: shoulder pan and
/// wrist 2 follow their sinusoids, the other four joints take `H0..H3`.
pub fn map_to_robot(
    track: &HumanAngleTrack,
    pan: &SinusoidSpec,
    wrist2: &SinusoidSpec,
    frame_rate: f64,
) -> Result<Trajectory> {
    let positions = track.angles.iter().enumerate().map(|(i, h)| {
        let t = i as f64 / frame_rate;
        JointVector([pan.eval(t), h[0], h[1], h[2], wrist2.eval(t), h[3]])
    });
    Trajectory::from_positions(frame_rate, positions.collect::<Vec<_>>(), TrajectorySource::Pose)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SidePolicy {
    Auto,
    Left,
    Right,
}

impl std::str::FromStr for SidePolicy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "auto" => Ok(SidePolicy::Auto),
            "left" => Ok(SidePolicy::Left),
            "right" => Ok(SidePolicy::Right),
            other => Err(format!("unknown side `{other}` (auto | left | right)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportOptions {
    pub side: SidePolicy,
    pub filter: FilterConfig,
    pub pan: SinusoidSpec,
    pub wrist2: SinusoidSpec,
    pub frame_rate: f64,
    pub landmarks: LandmarkMap,
}

impl Default for ImportOptions {
    fn default() -> Self {
        ImportOptions {
            side: SidePolicy::Auto,
            filter: FilterConfig::default(),
            pan: SinusoidSpec::with_frequency(0.25, 0.05, 0.0, FRAC_PI_2),
            wrist2: SinusoidSpec::with_frequency(0.3, 0.1, 0.0, 0.0),
            frame_rate: 30.0,
            landmarks: LandmarkMap::default(),
        }
    }
}

/// Sidecar written next to an imported trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseImportMeta {
    pub frame_count: usize,
    pub empty_frames: usize,
    pub side_policy: SidePolicy,
    pub side_selected: Side,
    pub score_left: Option<f64>,
    pub score_right: Option<f64>,
    pub filter: FilterConfig,
    pub frame_rate: f64,
    pub pan: SinusoidSpec,
    pub wrist2: SinusoidSpec,
    pub landmarks: LandmarkMap,
}

impl PoseImportMeta {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metadata serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseImport {
    pub trajectory: Trajectory,
    pub track: HumanAngleTrack,
    pub meta: PoseImportMeta,
}

impl PoseImport {
    /// Writes the trajectory CSV and its `.meta.json` sidecar.
    pub fn write(&self, csv: impl AsRef<Path>) -> Result<()> {
        let csv = csv.as_ref();
        self.trajectory.write_csv(csv)?;
        let meta = sidecar_path(csv);
        std::fs::write(&meta, self.meta.to_json()).map_err(|e| Error::io(format!("writing {}", meta.display()), e))
    }
}

/// Blur then frequency-filter every angle channel.
pub fn smooth_track(track: &HumanAngleTrack, config: &FilterConfig) -> Result<HumanAngleTrack> {
    config.check()?;
    let mut out = track.clone();
    for j in 0..5 {
        let blurred = box_blur(&track.channel(j), config.blur_size)?;
        let filtered = frequency_filter(&blurred, config)?;
        out.set_channel(j, &filtered);
    }
    Ok(out)
}

/// Runs the whole keypoint-to-trajectory pipeline on already loaded frames.
pub fn import_frames(frames: &[KeypointFrame], options: &ImportOptions) -> Result<PoseImport> {
    if frames.is_empty() {
        return Err(Error::input("no frames to import"));
    }
    if !(options.frame_rate > 0.0) {
        return Err(Error::input(format!("frame rate must be positive, got {}", options.frame_rate)));
    }
    options.filter.check()?;
    let track_for = |side| -> Result<HumanAngleTrack> {
        let points = arm_landmarks(frames, side, &options.landmarks)?;
        Ok(extract_arm_angles(&points, side, options.frame_rate))
    };
    let (raw, score_left, score_right) = match options.side {
        SidePolicy::Left => (track_for(Side::Left)?, None, None),
        SidePolicy::Right => (track_for(Side::Right)?, None, None),
        SidePolicy::Auto => {
            let sel = select_arm(&track_for(Side::Left)?, &track_for(Side::Right)?)?;
            (sel.track, Some(sel.score_left), Some(sel.score_right))
        }
    };
    let track = smooth_track(&raw, &options.filter)?;
    let trajectory = map_to_robot(&track, &options.pan, &options.wrist2, options.frame_rate)?;
    let meta = PoseImportMeta {
        frame_count: frames.len(),
        empty_frames: frames.iter().filter(|f| f.is_empty()).count(),
        side_policy: options.side,
        side_selected: track.side,
        score_left,
        score_right,
        filter: options.filter,
        frame_rate: options.frame_rate,
        pan: options.pan,
        wrist2: options.wrist2,
        landmarks: options.landmarks.clone(),
    };
    Ok(PoseImport { trajectory, track, meta })
}

/// Load, gap-fill, extract, select, blur, filter and map a directory of
/// OpenPose frames.
pub fn import_pose_video(dir: impl AsRef<Path>, options: &ImportOptions) -> Result<PoseImport> {
    let frames = load_openpose_frames(dir)?;
    import_frames(&frames, options)
}

/// Path of the metadata sidecar for a trajectory CSV.
pub fn sidecar_path(csv: &Path) -> std::path::PathBuf {
    let mut name = csv.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    csv.with_file_name(name)
}
