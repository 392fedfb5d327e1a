use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::{Sample, Trajectory, TrajectorySource};
use crate::robot_model::JointVector;

pub const DEFAULT_RECORD_RATE: f64 = 500.0;

/// Joint angles captured while the arm is moved by hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recording {
    rate: f64,
    samples: Vec<Sample>,
}

impl Default for Recording {
    fn default() -> Self {
        Recording::new(DEFAULT_RECORD_RATE)
    }
}

impl Recording {
    pub fn new(rate: f64) -> Self {
        Recording { rate, samples: Vec::new() }
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

    /// Appends `q` at the next uniform timestamp.
    pub fn push(&mut self, q: JointVector) {
        let t = self.samples.len() as f64 / self.rate;
        self.samples.push(Sample { t, q });
    }
}

/// Functional form of [`Recording::push`].
pub fn record_step(rec: Recording, q: JointVector) -> Recording {
    let mut rec = rec;
    rec.push(q);
    rec
}

/// The recorded samples as a command stream, unchanged.
pub fn replay(rec: &Recording) -> Result<Trajectory> {
    if rec.is_empty() {
        return Err(Error::input("cannot replay an empty recording"));
    }
    Trajectory::from_positions(rec.rate, rec.samples.iter().map(|s| s.q).collect::<Vec<_>>(), TrajectorySource::Recording)
}

/// Treats a replayed stream as a fresh recording.
pub fn recording_from_trajectory(traj: &Trajectory) -> Recording {
    Recording { rate: traj.rate(), samples: traj.samples().to_vec() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_sample_at_zero() {
        let rec = record_step(Recording::default(), JointVector::splat(0.3));
        assert_eq!(rec.len(), 1);
        assert_eq!(rec.samples()[0].t, 0.0);
        assert_eq!(replay(&rec).unwrap().len(), 1);
    }

    #[test]
    fn five_hundred_samples_end_just_before_one_second() {
        let mut rec = Recording::new(500.0);
        for i in 0..500 {
            rec.push(JointVector::splat(i as f64));
        }
        assert_eq!(rec.samples().last().unwrap().t, 0.998);
    }

    #[test]
    fn empty_recording_cannot_replay() {
        assert!(replay(&Recording::default()).is_err());
    }

    #[test]
    fn replay_of_replay_is_identical() {
        let mut rec = Recording::default();
        for i in 0..20 {
            rec.push(JointVector::splat((i as f64).sin()));
        }
        let once = replay(&rec).unwrap();
        let twice = replay(&recording_from_trajectory(&once)).unwrap();
        assert_eq!(once, twice);
    }
}
