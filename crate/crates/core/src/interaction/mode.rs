use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Damping used for the buffer section between teach and position control.
pub const EXIT_DAMPING: f64 = 0.2;
/// Default force below which the damped section may hand back to position control.
pub const DEFAULT_FORCE_EXIT_THRESHOLD: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ControlMode {
    Position,
    /// Fully compliant.
    Teach,
    /// Partially compliant; 1 is full damping, 0 none.
    ForceDamped { damping: f64 },
    WaitingForTap,
}

impl ControlMode {
    pub fn name(&self) -> &'static str {
        match self {
            ControlMode::Position => "position",
            ControlMode::Teach => "teach",
            ControlMode::ForceDamped { .. } => "force_damped",
            ControlMode::WaitingForTap => "waiting_for_tap",
        }
    }

    /// Damping applied to external pushes, `None` when the arm is rigid.
    pub fn compliance_damping(&self) -> Option<f64> {
        match *self {
            ControlMode::Teach => Some(0.0),
            ControlMode::ForceDamped { damping } => Some(damping),
            ControlMode::Position | ControlMode::WaitingForTap => None,
        }
    }

    pub fn is_compliant(&self) -> bool {
        self.compliance_damping().is_some()
    }
}

impl fmt::Display for ControlMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlMode::ForceDamped { damping } => write!(f, "force_damped({damping})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ModeEvent {
    EnterTeach,
    BeginExit,
    /// Measured external force magnitude, newtons.
    Settle { force: f64 },
    Abort,
    ArmTap,
    Tapped,
}

impl ModeEvent {
    pub fn name(&self) -> &'static str {
        match self {
            ModeEvent::EnterTeach => "enter_teach",
            ModeEvent::BeginExit => "begin_exit",
            ModeEvent::Settle { .. } => "settle",
            ModeEvent::Abort => "abort",
            ModeEvent::ArmTap => "arm_tap",
            ModeEvent::Tapped => "tapped",
        }
    }
}

/// Control-mode transition function.
///
/// ```text
/// position      --enter_teach--> teach
/// teach         --begin_exit---> force_damped(0.2)
/// teach         --abort--------> force_damped(0.2)
/// force_damped  --settle(F)----> position if F < threshold, else unchanged
/// force_damped  --abort--------> position
/// position      --arm_tap------> waiting_for_tap
/// waiting       --tapped|abort-> position
/// position      --abort--------> position
/// ```
///
/// Teach never reaches position without the damped section in between.
pub fn mode_step(current: ControlMode, event: ModeEvent, force_exit_threshold: f64) -> Result<ControlMode> {
    use ControlMode::*;
    use ModeEvent::*;
    let next = match (current, event) {
        (Position, EnterTeach) => Some(Teach),
        (Teach, BeginExit) | (Teach, Abort) => Some(ForceDamped { damping: EXIT_DAMPING }),
        (ForceDamped { .. }, Settle { force }) if force.is_finite() => {
            Some(if force < force_exit_threshold { Position } else { current })
        }
        (ForceDamped { .. }, Abort) => Some(Position),
        (Position, ArmTap) => Some(WaitingForTap),
        (WaitingForTap, Tapped) | (WaitingForTap, Abort) => Some(Position),
        (Position, Abort) => Some(Position),
        _ => None,
    };
    next.ok_or_else(|| Error::Transition { mode: current.to_string(), event: event.name().to_string() })
}
