use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::robot::Push;
use crate::error::{Error, Result};
use crate::robot_model::DOF;

pub const FORCE_SCRIPT_HEADER: &str = "t_start,t_end,force_n,j0,j1,j2,j3,j4,j5";
pub const FORCE_TRACE_HEADER: &str = "t,force_n";

/// Piecewise-constant push over `[t_start, t_end)`, seconds relative to the
/// start of the cue's section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceSegment {
    pub t_start: f64,
    pub t_end: f64,
    pub force_n: f64,
    pub direction: [f64; DOF],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ForceScript {
    pub segments: Vec<ForceSegment>,
}

impl ForceScript {
    pub fn constant(force_n: f64, t_end: f64, direction: [f64; DOF]) -> Self {
        ForceScript { segments: vec![ForceSegment { t_start: 0.0, t_end, force_n, direction }] }
    }

    pub fn from_csv_str(text: &str) -> Result<ForceScript> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| Error::Parse { row: 1, reason: e.to_string() })?;
        if headers.iter().collect::<Vec<_>>() != FORCE_SCRIPT_HEADER.split(',').collect::<Vec<_>>() {
            return Err(Error::Parse { row: 1, reason: format!("expected header `{FORCE_SCRIPT_HEADER}`") });
        }
        let mut segments = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let row = i + 2;
            let rec = rec.map_err(|e| Error::Parse { row, reason: e.to_string() })?;
            let mut v = [0.0; DOF + 3];
            for (k, slot) in v.iter_mut().enumerate() {
                let field = rec.get(k).unwrap_or_default();
                *slot = field.parse().map_err(|_| Error::Parse { row, reason: format!("not a number: `{field}`") })?;
            }
            let seg = ForceSegment { t_start: v[0], t_end: v[1], force_n: v[2], direction: std::array::from_fn(|j| v[j + 3]) };
            if !(seg.t_end > seg.t_start) {
                return Err(Error::Parse { row, reason: "t_end must exceed t_start".into() });
            }
            if !(seg.force_n >= 0.0) || !seg.force_n.is_finite() {
                return Err(Error::Parse { row, reason: "force_n must be a finite magnitude >= 0".into() });
            }
            segments.push(seg);
        }
        Ok(ForceScript { segments })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ForceScript> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        ForceScript::from_csv_str(&text).map_err(|e| Error::Ingest { file: path.to_path_buf(), reason: e.to_string() })
    }

    /// First segment covering `t`.
    pub fn segment_at(&self, t: f64) -> Option<&ForceSegment> {
        self.segments.iter().find(|s| s.t_start <= t && t < s.t_end)
    }

    pub fn force_at(&self, t: f64) -> f64 {
        self.segment_at(t).map_or(0.0, |s| s.force_n)
    }

    pub fn push_at(&self, t: f64) -> Option<Push> {
        self.segment_at(t).map(|s| Push { force: s.force_n, direction: s.direction })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ForceNoise {
    pub std_n: f64,
    pub seed: u64,
}

impl ForceNoise {
    /// Gaussian sample for control tick `tick`; a pure function of
    /// `(seed, tick)`.
    pub fn sample(&self, tick: u64) -> f64 {
        if self.std_n <= 0.0 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(tick);
        Normal::new(0.0, self.std_n).expect("std is positive").sample(&mut rng)
    }
}

/// Sensed force magnitude: `|scripted + noise|`. With no script or no
/// active section only the noise remains.
pub fn read_force(script: Option<&ForceScript>, t: Option<f64>, noise: &ForceNoise, tick: u64) -> f64 {
    let scripted = match (script, t) {
        (Some(s), Some(t)) => s.force_at(t),
        _ => 0.0,
    };
    (scripted + noise.sample(tick)).abs()
}

/// `t,force_n` trace used as trigger fixture input.
pub fn force_trace_to_csv(trace: &[(f64, f64)]) -> String {
    let mut out = String::from(FORCE_TRACE_HEADER);
    out.push('\n');
    for (t, f) in trace {
        out.push_str(&format!("{},{}\n", crate::fmt::sig(*t, 9), crate::fmt::sig(*f, 9)));
    }
    out
}

pub fn force_trace_from_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse { row: 1, reason: e.to_string() })?;
    if headers.iter().collect::<Vec<_>>() != FORCE_TRACE_HEADER.split(',').collect::<Vec<_>>() {
        return Err(Error::Parse { row: 1, reason: format!("expected header `{FORCE_TRACE_HEADER}`") });
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<(f64, f64)>().enumerate() {
        rows.push(rec.map_err(|e| Error::Parse { row: i + 2, reason: e.to_string() })?);
    }
    Ok(rows)
}
