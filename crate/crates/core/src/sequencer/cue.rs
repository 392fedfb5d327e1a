use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::motion::{sample_motif, MotifSpec, Trajectory, TrajectorySource};
use crate::pose_pipeline::sidecar_path;
use crate::robot_model::RobotProfile;

pub const CUE_SHEET_HEADER: &str = "index,kind,ref,music_track,transition_s,notes";
pub const DEFAULT_TRANSITION_S: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CueKind {
    /// Stream a stored trajectory.
    Prerecorded { trajectory: String },
    /// Record by hand for `duration` seconds, then replay the recording.
    Teach { duration: f64 },
    /// Hold until a firm push, then stream `then`.
    WaitForce { then: String },
}

impl CueKind {
    pub fn name(&self) -> &'static str {
        match self {
            CueKind::Prerecorded { .. } => "prerecorded",
            CueKind::Teach { .. } => "teach",
            CueKind::WaitForce { .. } => "wait_force",
        }
    }

    /// Trajectory reference as written in the sheet, if the cue streams one.
    pub fn trajectory_ref(&self) -> Option<&str> {
        match self {
            CueKind::Prerecorded { trajectory } => Some(trajectory),
            CueKind::WaitForce { then } => Some(then),
            CueKind::Teach { .. } => None,
        }
    }

    /// The `ref` column value.
    pub fn ref_text(&self) -> String {
        match self {
            CueKind::Teach { duration } => crate::fmt::sig(*duration, 9),
            other => other.trajectory_ref().unwrap_or_default().to_string(),
        }
    }
}

impl fmt::Display for CueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cue {
    pub index: usize,
    pub kind: CueKind,
    pub music_track: String,
    pub notes: String,
    /// Length of the lead-in transition into this cue.
    pub transition_duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueSheet {
    pub title: String,
    /// First 12 hex digits of the SHA-256 of the sheet text.
    pub version: String,
    pub cues: Vec<Cue>,
    /// Directory that relative trajectory refs resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct Row {
    index: String,
    kind: String,
    #[serde(rename = "ref")]
    reference: String,
    #[serde(default)]
    music_track: String,
    #[serde(default)]
    transition_s: String,
    #[serde(default)]
    notes: String,
}

pub fn version_stamp(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(&digest[..6])
}

impl CueSheet {
    /// Parses and validates a cue sheet. Row numbers in errors count the
    /// header as row 1.
    pub fn from_csv_str(text: &str, title: impl Into<String>) -> Result<CueSheet> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| Error::Parse { row: 1, reason: e.to_string() })?;
        let expected: Vec<&str> = CUE_SHEET_HEADER.split(',').collect();
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Parse { row: 1, reason: format!("expected header `{CUE_SHEET_HEADER}`") });
        }

        let mut cues: Vec<Cue> = Vec::new();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let row_no = i + 2;
            let bad = |reason: String| Error::Parse { row: row_no, reason };
            let row = row.map_err(|e| bad(e.to_string()))?;
            let index: usize = row.index.parse().map_err(|_| bad(format!("index `{}` is not a positive integer", row.index)))?;
            if cues.iter().any(|c| c.index == index) {
                return Err(bad(format!("duplicate index {index}")));
            }
            if index != cues.len() + 1 {
                return Err(bad(format!("expected index {}, found {index}", cues.len() + 1)));
            }
            let kind = match row.kind.as_str() {
                "prerecorded" | "wait_force" if row.reference.is_empty() => {
                    return Err(bad(format!("{} cue needs a trajectory ref", row.kind)));
                }
                "prerecorded" => CueKind::Prerecorded { trajectory: row.reference.clone() },
                "wait_force" => CueKind::WaitForce { then: row.reference.clone() },
                "teach" => {
                    let duration: f64 = row
                        .reference
                        .parse()
                        .map_err(|_| bad(format!("teach cue ref must be a duration in seconds, got `{}`", row.reference)))?;
                    if !(duration > 0.0) || !duration.is_finite() {
                        return Err(bad(format!("teach duration must be positive, got {duration}")));
                    }
                    CueKind::Teach { duration }
                }
                other => return Err(bad(format!("unknown cue kind `{other}`"))),
            };
            let transition_duration = if row.transition_s.is_empty() {
                DEFAULT_TRANSITION_S
            } else {
                row.transition_s.parse().map_err(|_| bad(format!("transition_s `{}` is not a number", row.transition_s)))?
            };
            if !(transition_duration > 0.0) || !transition_duration.is_finite() {
                return Err(bad(format!("transition_s must be positive, got {transition_duration}")));
            }
            cues.push(Cue { index, kind, music_track: row.music_track, notes: row.notes, transition_duration });
        }
        if cues.is_empty() {
            return Err(Error::Parse { row: 2, reason: "cue sheet has no cues".into() });
        }
        Ok(CueSheet { title: title.into(), version: version_stamp(text), cues, base_dir: None })
    }

    /// Reads a sheet from disk and checks that every trajectory ref exists
    /// relative to the sheet's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<CueSheet> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let title = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut sheet = CueSheet::from_csv_str(&text, title)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        for cue in &sheet.cues {
            if let Some(r) = cue.kind.trajectory_ref() {
                if !base.join(r).is_file() {
                    return Err(Error::Parse { row: cue.index + 1, reason: format!("dangling ref `{r}`") });
                }
            }
        }
        sheet.base_dir = Some(base);
        Ok(sheet)
    }

    pub fn len(&self) -> usize {
        self.cues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cues.is_empty()
    }

    pub fn cue(&self, index: usize) -> Option<&Cue> {
        self.cues.get(index.checked_sub(1)?)
    }

    pub fn resolve(&self, reference: &str) -> PathBuf {
        match &self.base_dir {
            Some(base) => base.join(reference),
            None => PathBuf::from(reference),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(CUE_SHEET_HEADER.split(',')).expect("in-memory write");
        for c in &self.cues {
            w.write_record([
                c.index.to_string(),
                c.kind.name().to_string(),
                c.kind.ref_text(),
                c.music_track.clone(),
                crate::fmt::sig(c.transition_duration, 9),
                c.notes.clone(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }
}

/// Loads a parsed sheet from a file path.
pub fn load_cue_sheet(path: impl AsRef<Path>) -> Result<CueSheet> {
    CueSheet::load(path)
}

/// Stored trajectories, all at the profile's control rate, keyed by the ref
/// string used in the sheet.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryStore {
    entries: BTreeMap<String, Arc<Trajectory>>,
}

impl TrajectoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, traj: Trajectory) -> Arc<Trajectory> {
        let traj = Arc::new(traj);
        self.entries.insert(id.into(), Arc::clone(&traj));
        traj
    }

    pub fn get(&self, id: &str) -> Option<&Arc<Trajectory>> {
        self.entries.get(id)
    }

    pub fn require(&self, id: &str) -> Result<&Arc<Trajectory>> {
        self.get(id).ok_or_else(|| Error::input(format!("no trajectory `{id}` in store")))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Loads every ref in `sheet`. `.motif` files are sampled at the control
    /// rate; CSV trajectories are resampled to it when their rate differs.
    pub fn load_for(sheet: &CueSheet, profile: &RobotProfile) -> Result<TrajectoryStore> {
        let mut store = TrajectoryStore::new();
        for cue in &sheet.cues {
            let Some(r) = cue.kind.trajectory_ref() else { continue };
            if store.get(r).is_some() {
                continue;
            }
            let traj = load_trajectory_file(&sheet.resolve(r), profile.control_rate_hz)?;
            store.insert(r, traj);
        }
        Ok(store)
    }
}

pub fn load_trajectory_file(path: &Path, rate: f64) -> Result<Trajectory> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or_default();
    match ext {
        "motif" => sample_motif(&MotifSpec::load(path)?, rate),
        "csv" => {
            let source = if sidecar_path(path).is_file() { TrajectorySource::Pose } else { TrajectorySource::Recording };
            let traj = Trajectory::load_csv(path, source)?;
            if traj.rate() == rate {
                Ok(traj)
            } else {
                traj.resample(rate)
            }
        }
        _ => Err(Error::Ingest { file: path.to_path_buf(), reason: "expected a .motif or .csv trajectory".into() }),
    }
}
