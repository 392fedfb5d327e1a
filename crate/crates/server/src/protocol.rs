//! Messages exchanged over `/ws`. Every frame is one JSON text message with a
//! `type` field; see `docs/protocol.md` for the field-by-field reference.

use serde::{Deserialize, Serialize};

use choreo_core::JointVector;

/// Read-only view of the control loop, published after a tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    /// Publication counter, starting at 0.
    pub seq: u64,
    /// Control-loop clock, seconds.
    pub timestamp: f64,
    pub q: JointVector,
    /// Base, the six joint frames, tool; metres.
    pub link_points: [[f64; 3]; 7],
    pub mode: String,
    /// Damping of the current mode when compliant.
    pub damping: Option<f64>,
    pub phase: String,
    pub paused: bool,
    pub finished: bool,
    /// 1-based cue index.
    pub cue: Option<usize>,
    /// Latest force magnitude, newtons.
    pub force: f64,
    pub force_avg: f64,
    pub force_threshold: f64,
    pub triggered: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Start,
    Pause,
    Next,
    ResetStop,
    EnterTeach,
    ExitTeach,
    SimulateTap,
}

impl CommandKind {
    pub const ALL: [CommandKind; 7] = [
        CommandKind::Start,
        CommandKind::Pause,
        CommandKind::Next,
        CommandKind::ResetStop,
        CommandKind::EnterTeach,
        CommandKind::ExitTeach,
        CommandKind::SimulateTap,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorCommand {
    /// Unique per issuer; a repeated `(issuer, id)` is applied once.
    pub id: String,
    pub issuer: String,
    pub command: CommandKind,
    /// Sender's clock, informational only.
    #[serde(default)]
    pub client_ts: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    pub id: String,
    pub issuer: String,
    pub command: CommandKind,
    /// False for a nack.
    pub ok: bool,
    /// Phase after the command was handled.
    pub phase: String,
    pub reason: Option<String>,
    /// True when this `(issuer, id)` had already been applied.
    pub duplicate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Command(OperatorCommand),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Snapshot(StateSnapshot),
    Ack(Ack),
    Error { reason: String },
}

impl ServerMessage {
    pub fn to_text(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

impl ClientMessage {
    pub fn to_text(&self) -> String {
        serde_json::to_string(self).expect("client messages serialize")
    }
}
