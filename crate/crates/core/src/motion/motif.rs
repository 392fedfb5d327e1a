use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sinusoid::{Envelope, SinusoidSpec};
use super::trajectory::{Trajectory, TrajectorySource};
use crate::error::{Error, Result};
use crate::robot_model::{JointVector, DOF, JOINT_NAMES};

/// A reusable motion phrase: one sinusoid per joint over a fixed duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotifSpec {
    pub id: String,
    pub label: String,
    pub duration: f64,
    pub joints: [SinusoidSpec; DOF],
}

impl MotifSpec {
    pub fn new(id: impl Into<String>, label: impl Into<String>, duration: f64, joints: [SinusoidSpec; DOF]) -> Result<Self> {
        let motif = MotifSpec { id: id.into(), label: label.into(), duration, joints };
        motif.check()?;
        Ok(motif)
    }

    fn check(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::input(format!("motif `{}`: duration must be positive", self.id)));
        }
        for (j, spec) in self.joints.iter().enumerate() {
            if !spec.is_finite() {
                return Err(Error::input(format!("motif `{}`: joint {} has non-finite parameters", self.id, JOINT_NAMES[j])));
            }
            if spec.amplitude < 0.0 {
                return Err(Error::input(format!("motif `{}`: joint {} amplitude must be >= 0", self.id, JOINT_NAMES[j])));
            }
            if let Envelope::ExpDecay { b } = spec.envelope {
                if b < 0.0 {
                    return Err(Error::input(format!("motif `{}`: joint {} decay B must be >= 0", self.id, JOINT_NAMES[j])));
                }
            }
        }
        Ok(())
    }

    /// Soft policy notes; none of these block rendering.
    pub fn warnings(&self) -> Vec<String> {
        self.joints
            .iter()
            .enumerate()
            .filter(|(_, s)| s.amplitude > FRAC_PI_2)
            .map(|(j, s)| {
                format!("{}: amplitude {:.4} rad exceeds the customary pi/2", JOINT_NAMES[j], s.amplitude)
            })
            .collect()
    }

    pub fn eval(&self, t: f64) -> JointVector {
        JointVector(std::array::from_fn(|j| self.joints[j].eval(t)))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: MotifFile = toml::from_str(text).map_err(|e| Error::input(format!("motif file: {e}")))?;
        file.into_spec()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Ingest { file: path.to_path_buf(), reason: e.to_string() })
    }

    pub fn to_toml_string(&self) -> String {
        let file = MotifFile {
            id: self.id.clone(),
            label: self.label.clone(),
            duration_s: self.duration,
            joints: self
                .joints
                .iter()
                .enumerate()
                .map(|(j, s)| JointBlock {
                    name: Some(JOINT_NAMES[j].to_string()),
                    a_rad: Angle::Num(s.amplitude),
                    freq_hz: None,
                    omega_rad_s: Some(s.omega),
                    phi_rad: Angle::Num(s.phase),
                    gamma_rad: Angle::Num(s.offset),
                    envelope: s.envelope,
                })
                .collect(),
        };
        toml::to_string(&file).expect("motif serializes")
    }
}

/// Samples every joint at `t = k / rate` for `k = 0..=floor(duration * rate)`.
pub fn sample_motif(motif: &MotifSpec, rate: f64) -> Result<Trajectory> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::input(format!("sample rate must be positive, got {rate}")));
    }
    let last = (motif.duration * rate + 1e-9).floor() as usize;
    let positions = (0..=last).map(|k| motif.eval(k as f64 / rate));
    Trajectory::from_positions(rate, positions.collect::<Vec<_>>(), TrajectorySource::Motif)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MotifFile {
    id: String,
    #[serde(default)]
    label: String,
    duration_s: f64,
    joints: Vec<JointBlock>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(rename = "A_rad")]
    a_rad: Angle,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    freq_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega_rad_s: Option<f64>,
    #[serde(default)]
    phi_rad: Angle,
    #[serde(default)]
    gamma_rad: Angle,
    #[serde(default)]
    envelope: Envelope,
}

/// A number, or a multiple of pi written as text (`"pi/2"`, `"-3*pi/4"`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Angle {
    Num(f64),
    Expr(String),
}

impl Default for Angle {
    fn default() -> Self {
        Angle::Num(0.0)
    }
}

impl Angle {
    fn value(&self) -> Result<f64> {
        match self {
            Angle::Num(v) => Ok(*v),
            Angle::Expr(s) => parse_angle(s),
        }
    }
}

/// Reads a plain number or a multiple of pi such as `"3pi/2"` or `"-0.25*pi"`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::input(format!("cannot read angle `{text}`"));
    let Some(pos) = s.find("pi") else {
        return s.parse().map_err(|_| bad());
    };
    let (head, tail) = (&s[..pos], &s[pos + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coeff = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| bad())?,
    };
    let divisor = match tail {
        "" => 1.0,
        t => t.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
    };
    if divisor == 0.0 {
        return Err(bad());
    }
    Ok(coeff * PI / divisor)
}

impl MotifFile {
    fn into_spec(self) -> Result<MotifSpec> {
        if self.joints.len() != DOF {
            return Err(Error::input(format!("motif `{}` has {} joint blocks, expected {DOF}", self.id, self.joints.len())));
        }
        let mut joints = [SinusoidSpec::constant(0.0); DOF];
        for (j, block) in self.joints.into_iter().enumerate() {
            if let Some(name) = &block.name {
                if name != JOINT_NAMES[j] {
                    return Err(Error::input(format!("joint block {j} is `{name}`, expected `{}`", JOINT_NAMES[j])));
                }
            }
            let omega = match (block.freq_hz, block.omega_rad_s) {
                (Some(f), None) => TAU * f,
                (None, Some(w)) => w,
                _ => {
                    return Err(Error::input(format!(
                        "joint {}: exactly one of freq_hz / omega_rad_s is required",
                        JOINT_NAMES[j]
                    )))
                }
            };
            joints[j] = SinusoidSpec {
                amplitude: block.a_rad.value()?,
                omega,
                phase: block.phi_rad.value()?,
                offset: block.gamma_rad.value()?,
                envelope: block.envelope,
            };
        }
        MotifSpec::new(self.id, self.label, self.duration_s, joints)
    }
}
