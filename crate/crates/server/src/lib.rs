//! Live performance service.
//!
//! One thread runs the control loop (sequencer, interaction and simulated
//! arm at the control rate). HTTP and WebSocket sessions run on tokio and
//! reach the loop only through its command queue and the snapshot hub.

pub mod app;
pub mod config;
pub mod control;
pub mod hub;
pub mod protocol;

use std::sync::Arc;

use choreo_core::sequencer::Show;
use choreo_core::sim::{ForceNoise, ForceScript, ForceScripts, SimConfig};
use choreo_core::RobotProfile;

pub use app::{router, AppState, JobStatus, PoseImportRequest};
pub use config::{ConfigError, ServerConfig};
pub use control::{ControlCore, ControlHandle, ControlLoop, LoopStats};
pub use hub::SnapshotHub;
pub use protocol::{Ack, ClientMessage, CommandKind, OperatorCommand, ServerMessage, StateSnapshot};

/// A running control loop and the router serving it.
pub struct Service {
    pub router: axum::Router,
    pub control: ControlLoop,
}

impl Service {
    pub fn start(show: Arc<Show>, scripts: ForceScripts, token: &str, snapshot_hz: f64, backlog: usize) -> Service {
        let hub = Arc::new(SnapshotHub::new(backlog));
        let core = ControlCore::new(show.clone(), scripts, SimConfig::default());
        let control = ControlLoop::spawn(core, hub, snapshot_hz);
        let router = router(AppState::new(control.handle(), show, token));
        Service { router, control }
    }

    pub fn from_config(cfg: &ServerConfig) -> anyhow::Result<Service> {
        cfg.check()?;
        let profile = match &cfg.profile {
            Some(p) => RobotProfile::load(p)?,
            None => RobotProfile::ur5e(),
        };
        let sheet = cfg.cue_sheet.as_ref().expect("checked");
        let show = Show::load(sheet, profile)?;
        let mut scripts = ForceScripts { noise: ForceNoise { std_n: cfg.noise_std_n, seed: cfg.seed }, ..Default::default() };
        for (cue, path) in &cfg.force_scripts {
            scripts = scripts.with(cue.parse()?, ForceScript::load(path)?);
        }
        let token = cfg.token.as_deref().expect("checked");
        Ok(Service::start(Arc::new(show), scripts, token, cfg.snapshot_hz, cfg.backlog))
    }
}
