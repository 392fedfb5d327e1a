use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::ControlMode;
use crate::robot_model::{JointVector, RobotProfile, DOF};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Joint speed per newton of push when undamped, rad/s/N.
    pub push_gain: f64,
    /// Optional first-order servo lag, seconds. `None` tracks commands exactly.
    pub lag_tau: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { push_gain: 0.01, lag_tau: None }
    }
}

/// External push in joint space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Push {
    pub force: f64,
    /// Normalized to unit length before use.
    pub direction: [f64; DOF],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum StepOutcome {
    Moved,
    Held,
    /// A command implied more than the joint's velocity limit.
    Stopped { joint: usize, velocity: f64, limit: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRobot {
    profile: RobotProfile,
    config: SimConfig,
    pub q: JointVector,
    pub qd: JointVector,
    pub mode: ControlMode,
    clock: f64,
    ticks: u64,
    stop_latched: bool,
}

impl SimRobot {
    pub fn new(profile: RobotProfile, q: JointVector, config: SimConfig) -> Self {
        SimRobot {
            profile,
            config,
            q,
            qd: JointVector::ZERO,
            mode: ControlMode::Position,
            clock: 0.0,
            ticks: 0,
            stop_latched: false,
        }
    }

    pub fn profile(&self) -> &RobotProfile {
        &self.profile
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    pub fn dt(&self) -> f64 {
        self.profile.control_period()
    }

    pub fn stop_latched(&self) -> bool {
        self.stop_latched
    }

    pub fn reset_stop(&mut self) {
        self.stop_latched = false;
    }

    /// Advances one control period.
    ///
    /// Position mode follows `command` (ideally, or through the configured
    /// lag); compliant modes integrate `push` scaled by `1 - damping`;
    /// waiting holds. While a stop is latched the pose is frozen and commands
    /// are refused.
    pub fn step(&mut self, command: Option<JointVector>, push: Option<Push>) -> Result<StepOutcome> {
        if self.stop_latched && command.is_some() {
            return Err(Error::input("protective stop latched; command refused until reset"));
        }
        let dt = self.dt();
        let before = self.q;
        let mut outcome = StepOutcome::Held;
        if !self.stop_latched {
            match self.mode {
                ControlMode::Position => {
                    if let Some(cmd) = command {
                        cmd.ensure_finite()?;
                        let target = match self.config.lag_tau {
                            Some(tau) if tau > 0.0 => {
                                let a = 1.0 - (-dt / tau).exp();
                                JointVector(std::array::from_fn(|j| self.q[j] + a * (cmd[j] - self.q[j])))
                            }
                            _ => cmd,
                        };
                        outcome = self.move_to(target, dt);
                    }
                }
                ControlMode::Teach | ControlMode::ForceDamped { .. } => {
                    let damping = self.mode.compliance_damping().unwrap_or(1.0);
                    if let Some(p) = push.filter(|p| p.force != 0.0) {
                        let norm = p.direction.iter().map(|d| d * d).sum::<f64>().sqrt();
                        if norm > 0.0 {
                            let speed = self.config.push_gain * p.force * (1.0 - damping);
                            let target = JointVector(std::array::from_fn(|j| {
                                let v = self.q[j] + speed * p.direction[j] / norm * dt;
                                v.clamp(self.profile.joints[j].lower(), self.profile.joints[j].upper())
                            }));
                            outcome = self.move_to(target, dt);
                        }
                    }
                }
                ControlMode::WaitingForTap => {}
            }
        }
        if self.q == before {
            self.qd = JointVector::ZERO;
        }
        self.clock = (self.ticks + 1) as f64 * dt;
        self.ticks += 1;
        Ok(outcome)
    }

    fn move_to(&mut self, target: JointVector, dt: f64) -> StepOutcome {
        for j in 0..DOF {
            let v = (target[j] - self.q[j]) / dt;
            let limit = self.profile.joints[j].velocity_limit_rad_s;
            if v.abs() > limit * (1.0 + 1e-9) {
                self.stop_latched = true;
                self.qd = JointVector::ZERO;
                return StepOutcome::Stopped { joint: j, velocity: v, limit };
            }
        }
        self.qd = JointVector(std::array::from_fn(|j| (target[j] - self.q[j]) / dt));
        self.q = target;
        if self.qd == JointVector::ZERO {
            StepOutcome::Held
        } else {
            StepOutcome::Moved
        }
    }
}
