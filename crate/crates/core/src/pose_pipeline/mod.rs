//! OpenPose keypoints to robot trajectory.
//!
//! Stages: load per-frame JSON, fill detection gaps, compute arm angles,
//! pick the busier arm, box-blur and Fourier-filter each angle, then map the
//! angles onto robot joints with sinusoids for the two unmapped joints.

mod angles;
mod openpose;
mod pipeline;
mod signal;

pub use angles::{
    arm_landmarks, extract_arm_angles, frame_angles, motion_score, select_arm, ArmPoints, ArmSelection,
    HumanAngleTrack, LandmarkMap, Side, CHAIN_NAMES,
};
pub use openpose::{frame_files, load_openpose_frames, parse_openpose_json, Keypoint, KeypointFrame};
pub(crate) use openpose::{OpenPoseFile, OpenPosePerson};
pub use pipeline::{
    import_frames, import_pose_video, map_to_robot, sidecar_path, smooth_track, ImportOptions, PoseImport,
    PoseImportMeta, SidePolicy,
};
pub use signal::{
    box_blur, dft, frequency_filter, idft, idft_complex, FilterConfig, FilterMode, Spectrum, REAL_RESIDUE_TOLERANCE,
};
