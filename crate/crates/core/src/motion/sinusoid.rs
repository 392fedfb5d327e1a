use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

/// Amplitude multiplier applied on the motif-local time base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    Constant,
    ExpDecay {
        #[serde(rename = "B_per_s")]
        b: f64,
    },
}

impl Default for Envelope {
    fn default() -> Self {
        Envelope::Constant
    }
}

impl Envelope {
    pub fn multiplier(&self, t: f64) -> f64 {
        match *self {
            Envelope::Constant => 1.0,
            Envelope::ExpDecay { b } => (-b * t).exp(),
        }
    }
}

/// One joint's motion: `env(t) * A * cos(omega * t + phi) + gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidSpec {
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
    pub offset: f64,
    pub envelope: Envelope,
}

impl SinusoidSpec {
    pub fn constant(offset: f64) -> Self {
        SinusoidSpec {
            amplitude: 0.0,
            omega: 0.0,
            phase: 0.0,
            offset,
            envelope: Envelope::Constant,
        }
    }

    pub fn with_frequency(amplitude: f64, freq_hz: f64, phase: f64, offset: f64) -> Self {
        SinusoidSpec {
            amplitude,
            omega: TAU * freq_hz,
            phase,
            offset,
            envelope: Envelope::Constant,
        }
    }

    pub fn frequency_hz(&self) -> f64 {
        self.omega / TAU
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.envelope.multiplier(t) * self.amplitude * (self.omega * t + self.phase).cos() + self.offset
    }

    /// Closed-form bound on |d/dt| for a constant envelope; an upper bound
    /// for a decaying one: `A * (omega + B)`.
    pub fn peak_velocity(&self) -> f64 {
        let decay = match self.envelope {
            Envelope::Constant => 0.0,
            Envelope::ExpDecay { b } => b.abs(),
        };
        self.amplitude * (self.omega.abs() + decay)
    }

    pub fn is_finite(&self) -> bool {
        let env_ok = match self.envelope {
            Envelope::Constant => true,
            Envelope::ExpDecay { b } => b.is_finite(),
        };
        env_ok
            && self.amplitude.is_finite()
            && self.omega.is_finite()
            && self.phase.is_finite()
            && self.offset.is_finite()
    }
}

/// Evaluates a joint sinusoid at motif-local time `t`.
pub fn eval_joint(spec: &SinusoidSpec, t: f64) -> f64 {
    spec.eval(t)
}

/// Stage direction a motif addresses, relative to the arm on its stand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Facing {
    Upstage,
    Dancer,
    Audience,
    StageLeft,
}

impl std::str::FromStr for Facing {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "upstage" => Ok(Facing::Upstage),
            "dancer" => Ok(Facing::Dancer),
            "audience" => Ok(Facing::Audience),
            "stage_left" => Ok(Facing::StageLeft),
            other => Err(format!("unknown facing `{other}`")),
        }
    }
}

/// The shoulder-pan offset that centers a motif on `direction`.
pub fn facing_gamma(direction: Facing) -> f64 {
    match direction {
        Facing::Upstage => 0.0,
        Facing::Dancer => FRAC_PI_2,
        Facing::Audience => PI,
        Facing::StageLeft => 3.0 * FRAC_PI_2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_returns_offset() {
        let s = SinusoidSpec::constant(FRAC_PI_2);
        for t in [0.0, 0.3, 17.0] {
            assert_eq!(eval_joint(&s, t), FRAC_PI_2);
        }
    }

    #[test]
    fn unit_cosine_at_zero() {
        let s = SinusoidSpec { amplitude: 1.0, omega: 3.7, phase: 0.0, offset: 0.0, envelope: Envelope::Constant };
        assert_eq!(eval_joint(&s, 0.0), 1.0);
    }

    #[test]
    fn decay_of_ln2_halves_after_one_second() {
        let s = SinusoidSpec {
            amplitude: 1.0,
            omega: TAU,
            phase: 0.0,
            offset: 0.0,
            envelope: Envelope::ExpDecay { b: std::f64::consts::LN_2 },
        };
        assert!((eval_joint(&s, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn facing_constants() {
        assert_eq!(facing_gamma(Facing::Upstage), 0.0);
        assert_eq!(facing_gamma(Facing::Dancer), PI / 2.0);
        assert_eq!(facing_gamma(Facing::Audience), PI);
        assert_eq!(facing_gamma(Facing::StageLeft), 3.0 * PI / 2.0);
    }
}
