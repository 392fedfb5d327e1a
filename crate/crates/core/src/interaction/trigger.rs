use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WINDOW_LEN: usize = 10;
pub const DEFAULT_TAP_THRESHOLD: f64 = 20.0;

/// Moving average over the last ten force readings. The window starts empty
/// and unfilled slots count as zero, so the average always divides by ten.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceTriggerState {
    window: VecDeque<f64>,
    running_average: f64,
    threshold: f64,
    triggered: bool,
    updates: usize,
    triggered_at: Option<usize>,
}

impl Default for ForceTriggerState {
    fn default() -> Self {
        Self::new(DEFAULT_TAP_THRESHOLD)
    }
}

impl ForceTriggerState {
    pub fn new(threshold: f64) -> Self {
        ForceTriggerState {
            window: VecDeque::with_capacity(WINDOW_LEN),
            running_average: 0.0,
            threshold,
            triggered: false,
            updates: 0,
            triggered_at: None,
        }
    }

    pub fn running_average(&self) -> f64 {
        self.running_average
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn triggered(&self) -> bool {
        self.triggered
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    /// 1-based update count at which the average first exceeded the threshold.
    pub fn triggered_at(&self) -> Option<usize> {
        self.triggered_at
    }

    pub fn window(&self) -> impl Iterator<Item = &f64> {
        self.window.iter()
    }

    pub fn reset(&mut self) {
        *self = Self::new(self.threshold);
    }

    /// Pushes a force magnitude and re-evaluates the trigger.
    pub fn update(&mut self, reading: f64) -> Result<()> {
        if !(reading >= 0.0) || !reading.is_finite() {
            return Err(Error::input(format!("force reading must be a finite magnitude >= 0, got {reading}")));
        }
        if self.window.len() == WINDOW_LEN {
            self.window.pop_front();
        }
        self.window.push_back(reading);
        self.updates += 1;
        self.running_average = self.window.iter().sum::<f64>() / WINDOW_LEN as f64;
        if self.running_average > self.threshold && !self.triggered {
            self.triggered = true;
            self.triggered_at = Some(self.updates);
        }
        Ok(())
    }
}

/// Functional form of [`ForceTriggerState::update`].
pub fn trigger_update(state: &ForceTriggerState, reading: f64) -> Result<ForceTriggerState> {
    let mut next = state.clone();
    next.update(reading)?;
    Ok(next)
}

/// Number of updates a constant reading `v` needs to lift a zero window above
/// `threshold`: the smallest `k` with `k * v / 10 > threshold`, if `k <= 10`.
pub fn constant_reading_latency(v: f64, threshold: f64) -> Option<usize> {
    (1..=WINDOW_LEN).find(|&k| k as f64 * v / WINDOW_LEN as f64 > threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_never_trigger() {
        let mut s = ForceTriggerState::default();
        for _ in 0..100 {
            s.update(0.0).unwrap();
        }
        assert!(!s.triggered());
        assert_eq!(s.running_average(), 0.0);
    }

    #[test]
    fn constant_25_newtons_triggers_on_ninth_update() {
        let mut s = ForceTriggerState::default();
        for k in 1..=12 {
            s.update(25.0).unwrap();
            let expected = 2.5 * k.min(10) as f64;
            assert!((s.running_average() - expected).abs() < 1e-12);
            assert_eq!(s.triggered(), k >= 9, "k={k}");
        }
        assert_eq!(s.triggered_at(), Some(9));
        assert_eq!(constant_reading_latency(25.0, 20.0), Some(9));
    }

    #[test]
    fn constant_20_newtons_saturates_without_triggering() {
        let mut s = ForceTriggerState::default();
        for _ in 0..50 {
            s.update(20.0).unwrap();
        }
        assert_eq!(s.running_average(), 20.0);
        assert!(!s.triggered());
        assert_eq!(constant_reading_latency(20.0, 20.0), None);
    }

    #[test]
    fn negative_or_nan_readings_are_rejected() {
        let s = ForceTriggerState::default();
        assert!(trigger_update(&s, -1.0).is_err());
        assert!(trigger_update(&s, f64::NAN).is_err());
    }

    #[test]
    fn window_is_capped() {
        let mut s = ForceTriggerState::default();
        for i in 0..25 {
            s.update(i as f64).unwrap();
        }
        assert_eq!(s.window().count(), WINDOW_LEN);
        assert_eq!(*s.window().next().unwrap(), 15.0);
    }
}
