use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sig;
use crate::robot_model::{JointVector, DOF};

/// CSV header shared by every trajectory export.
pub const CSV_HEADER: &str = "t,q0,q1,q2,q3,q4,q5";
const RATE_PREFIX: &str = "# rate_hz=";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectorySource {
    Motif,
    Pose,
    Recording,
    Transition,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub q: JointVector,
}

/// Uniformly sampled joint-space trajectory. Sample `k` sits at `k / rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    rate: f64,
    samples: Vec<Sample>,
    source: TrajectorySource,
}

impl Trajectory {
    pub fn from_positions(
        rate: f64,
        positions: impl IntoIterator<Item = JointVector>,
        source: TrajectorySource,
    ) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::input(format!("sample rate must be positive, got {rate}")));
        }
        let samples: Vec<Sample> = positions
            .into_iter()
            .enumerate()
            .map(|(k, q)| Sample { t: k as f64 / rate, q })
            .collect();
        if samples.is_empty() {
            return Err(Error::input("trajectory has no samples"));
        }
        if let Some(bad) = samples.iter().position(|s| !s.q.is_finite()) {
            return Err(Error::input(format!("trajectory sample {bad} is not finite")));
        }
        Ok(Trajectory { rate, samples, source })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn source(&self) -> TrajectorySource {
        self.source
    }

    pub fn with_source(mut self, source: TrajectorySource) -> Self {
        self.source = source;
        self
    }

    pub fn first(&self) -> JointVector {
        self.samples[0].q
    }

    pub fn last(&self) -> JointVector {
        self.samples[self.samples.len() - 1].q
    }

    pub fn duration(&self) -> f64 {
        (self.samples.len() - 1) as f64 / self.rate
    }

    pub fn positions(&self) -> impl Iterator<Item = JointVector> + '_ {
        self.samples.iter().map(|s| s.q)
    }

    pub fn channel(&self, joint: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.q[joint]).collect()
    }

    /// Re-samples onto `rate` with piecewise-cubic Hermite (Catmull-Rom)
    /// interpolation, which passes through every original sample and keeps
    /// the velocity continuous.
    pub fn resample(&self, rate: f64) -> Result<Trajectory> {
        if !(rate > 0.0) {
            return Err(Error::input(format!("sample rate must be positive, got {rate}")));
        }
        if rate == self.rate || self.len() == 1 {
            let mut out = self.clone();
            if out.rate != rate {
                out.rate = rate;
            }
            return Ok(out);
        }
        let n = self.len();
        let count = (self.duration() * rate + 1e-9).floor() as usize + 1;
        let p = |i: isize| self.samples[i.clamp(0, n as isize - 1) as usize].q;
        let positions = (0..count).map(|k| {
            let u = k as f64 / rate * self.rate;
            let i = (u.floor() as isize).min(n as isize - 2);
            let s = u - i as f64;
            let (p0, p1, p2, p3) = (p(i - 1), p(i), p(i + 1), p(i + 2));
            let (h00, h10, h01, h11) = (
                2.0 * s * s * s - 3.0 * s * s + 1.0,
                s * s * s - 2.0 * s * s + s,
                -2.0 * s * s * s + 3.0 * s * s,
                s * s * s - s * s,
            );
            let mut q = JointVector::ZERO;
            for j in 0..DOF {
                let m1 = if i == 0 { p2[j] - p1[j] } else { 0.5 * (p2[j] - p0[j]) };
                let m2 = if i + 2 >= n as isize { p2[j] - p1[j] } else { 0.5 * (p3[j] - p1[j]) };
                q[j] = h00 * p1[j] + h10 * m1 + h01 * p2[j] + h11 * m2;
            }
            q
        });
        Trajectory::from_positions(rate, positions.collect::<Vec<_>>(), self.source)
    }

    /// `t,q0..q5` CSV, nine significant digits.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.len() * 80);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            out.push_str(&sig(s.t, 9));
            for v in s.q.iter() {
                out.push(',');
                out.push_str(&sig(*v, 9));
            }
            out.push('\n');
        }
        out
    }

    /// CSV preceded by a `# rate_hz=` line, used for teach recordings.
    pub fn to_csv_with_rate(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{RATE_PREFIX}{}", self.rate);
        out.push_str(&self.to_csv_string());
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string())
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    /// Parses a trajectory CSV. The rate comes from a `# rate_hz=` line when
    /// present, otherwise from the timestamp spacing.
    pub fn from_csv_str(text: &str, source: TrajectorySource) -> Result<Trajectory> {
        let mut rate_hint = None;
        let mut body = String::with_capacity(text.len());
        for line in text.lines() {
            if let Some(rest) = line.trim().strip_prefix(RATE_PREFIX) {
                let r: f64 = rest
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse { row: 0, reason: format!("bad rate line `{line}`") })?;
                rate_hint = Some(r);
            } else if !line.trim().starts_with('#') {
                body.push_str(line);
                body.push('\n');
            }
        }
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Parse { row: 1, reason: e.to_string() })?
            .clone();
        let expected: Vec<&str> = CSV_HEADER.split(',').collect();
        if headers.iter().map(str::trim).collect::<Vec<_>>() != expected {
            return Err(Error::Parse { row: 1, reason: format!("expected header `{CSV_HEADER}`") });
        }
        let mut times = Vec::new();
        let mut positions = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let row = i + 2;
            let record = record.map_err(|e| Error::Parse { row, reason: e.to_string() })?;
            let mut vals = [0.0; DOF + 1];
            for (k, v) in vals.iter_mut().enumerate() {
                let field = record.get(k).ok_or_else(|| Error::Parse { row, reason: "missing column".into() })?;
                *v = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse { row, reason: format!("not a number: `{field}`") })?;
            }
            times.push(vals[0]);
            positions.push(JointVector(std::array::from_fn(|j| vals[j + 1])));
        }
        if positions.is_empty() {
            return Err(Error::Parse { row: 2, reason: "no samples".into() });
        }
        let rate = match rate_hint {
            Some(r) => r,
            None if times.len() >= 2 => {
                let est = (times.len() - 1) as f64 / (times[times.len() - 1] - times[0]);
                let rounded = est.round();
                if (est - rounded).abs() <= 1e-6 * rounded.max(1.0) {
                    rounded
                } else {
                    est
                }
            }
            None => {
                return Err(Error::Parse { row: 2, reason: "single-sample trajectory needs a rate line".into() })
            }
        };
        let t0 = times[0];
        for (k, &t) in times.iter().enumerate() {
            let expected = t0 + k as f64 / rate;
            if (t - expected).abs() > 1e-6 * expected.abs().max(1.0) {
                return Err(Error::Parse { row: k + 2, reason: format!("timestamp {t} breaks uniform spacing 1/{rate}") });
            }
        }
        Trajectory::from_positions(rate, positions, source)
    }

    pub fn load_csv(path: impl AsRef<Path>, source: TrajectorySource) -> Result<Trajectory> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Trajectory::from_csv_str(&text, source).map_err(|e| Error::Ingest {
            file: path.to_path_buf(),
            reason: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize, rate: f64) -> Trajectory {
        Trajectory::from_positions(
            rate,
            (0..n).map(|k| JointVector::splat(k as f64 * 0.01)),
            TrajectorySource::Motif,
        )
        .unwrap()
    }

    #[test]
    fn timestamps_are_uniform() {
        let t = ramp(500, 500.0);
        assert_eq!(t.samples()[499].t, 0.998);
        for (k, s) in t.samples().iter().enumerate() {
            assert!((s.t - k as f64 / 500.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_empty_and_bad_rate() {
        assert!(Trajectory::from_positions(500.0, vec![], TrajectorySource::Motif).is_err());
        assert!(Trajectory::from_positions(0.0, vec![JointVector::ZERO], TrajectorySource::Motif).is_err());
    }

    #[test]
    fn csv_roundtrip_header_and_rate() {
        let t = ramp(11, 30.0);
        let csv = t.to_csv_string();
        assert!(csv.starts_with("t,q0,q1,q2,q3,q4,q5\n"));
        let back = Trajectory::from_csv_str(&csv, TrajectorySource::Pose).unwrap();
        assert_eq!(back.rate(), 30.0);
        assert_eq!(back.len(), 11);
        assert!(back.last().max_abs_diff(&t.last()) < 1e-9);

        let one = Trajectory::from_positions(500.0, vec![JointVector::splat(0.5)], TrajectorySource::Recording).unwrap();
        let back = Trajectory::from_csv_str(&one.to_csv_with_rate(), TrajectorySource::Recording).unwrap();
        assert_eq!(back.rate(), 500.0);
        assert_eq!(back.len(), 1);
    }

    #[test]
    fn csv_errors_carry_rows() {
        let err = Trajectory::from_csv_str("t,q0,q1,q2,q3,q4,q5\n0,0,0,0,0,0,0\n0.1,0,x,0,0,0,0\n", TrajectorySource::Pose)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }), "{err}");
        assert!(Trajectory::from_csv_str("a,b\n1,2\n", TrajectorySource::Pose).is_err());
    }

    #[test]
    fn resample_hits_knots_and_linear_data_exactly() {
        let t = ramp(31, 30.0);
        let r = t.resample(300.0).unwrap();
        assert_eq!(r.len(), 301);
        for (k, s) in r.samples().iter().enumerate() {
            let expected = s.t * 30.0 * 0.01;
            assert!((s.q[0] - expected).abs() < 1e-12, "k={k}");
        }
    }
}
