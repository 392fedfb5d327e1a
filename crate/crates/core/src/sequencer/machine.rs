use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::cue::{CueKind, CueSheet, TrajectoryStore};
use crate::error::Result;
use crate::interaction::{
    mode_step, replay, ControlMode, ForceTriggerState, ModeEvent, Recording, DEFAULT_FORCE_EXIT_THRESHOLD,
    DEFAULT_TAP_THRESHOLD,
};
use crate::motion::{plan_safe_transition, Trajectory, TransitionRoute};
use crate::robot_model::{JointVector, RobotProfile};

/// Poses closer than this (max per-joint difference, rad) need no lead-in.
pub const SAME_POSE_TOL: f64 = 1e-9;
pub const STOPPED_REASON: &str = "stopped; reset required";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShowSettings {
    /// Force below which the damped section may return to position control.
    pub force_exit_threshold: f64,
    pub tap_threshold: f64,
    /// Minimum time spent force-damped after a teach section, seconds.
    pub min_damped_s: f64,
}

impl Default for ShowSettings {
    fn default() -> Self {
        ShowSettings {
            force_exit_threshold: DEFAULT_FORCE_EXIT_THRESHOLD,
            tap_threshold: DEFAULT_TAP_THRESHOLD,
            min_damped_s: 1.0,
        }
    }
}

/// Everything `advance` reads but never changes.
#[derive(Debug, Clone, PartialEq)]
pub struct Show {
    pub sheet: CueSheet,
    pub store: TrajectoryStore,
    pub profile: RobotProfile,
    pub settings: ShowSettings,
}

impl Show {
    pub fn new(sheet: CueSheet, store: TrajectoryStore, profile: RobotProfile) -> Self {
        Show { sheet, store, profile, settings: ShowSettings::default() }
    }

    pub fn load(sheet_path: impl AsRef<Path>, profile: RobotProfile) -> Result<Show> {
        let sheet = CueSheet::load(sheet_path)?;
        let store = TrajectoryStore::load_for(&sheet, &profile)?;
        Ok(Show::new(sheet, store, profile))
    }

    pub fn rate(&self) -> f64 {
        self.profile.control_rate_hz
    }

    /// Start pose for a run: the first streamed trajectory's first sample.
    pub fn initial_pose(&self) -> JointVector {
        self.sheet
            .cues
            .iter()
            .find_map(|c| c.kind.trajectory_ref().and_then(|r| self.store.get(r)))
            .map(|t| t.first())
            .unwrap_or_else(|| self.profile.neutral())
    }

    pub fn initial_state(&self) -> PerformanceState {
        PerformanceState::new(self.initial_pose(), self.settings.tap_threshold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Idle,
    Running,
    Transitioning,
    InTeach,
    AwaitingTap,
    ProtectiveStop,
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Idle => "idle",
            Phase::Running => "running",
            Phase::Transitioning => "transitioning",
            Phase::InTeach => "in_teach",
            Phase::AwaitingTap => "awaiting_tap",
            Phase::ProtectiveStop => "protective_stop",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SeqEvent {
    /// One control period. `q` is the measured pose, `force` the sensed
    /// external force magnitude in newtons.
    Tick { dt: f64, q: JointVector, force: f64 },
    Start,
    Next,
    Pause,
    TapDetected,
    Stop,
    Reset,
    EnterTeach,
    ExitTeach,
}

impl SeqEvent {
    pub fn name(&self) -> &'static str {
        match self {
            SeqEvent::Tick { .. } => "tick",
            SeqEvent::Start => "start",
            SeqEvent::Next => "next",
            SeqEvent::Pause => "pause",
            SeqEvent::TapDetected => "tap_detected",
            SeqEvent::Stop => "stop",
            SeqEvent::Reset => "reset",
            SeqEvent::EnterTeach => "enter_teach",
            SeqEvent::ExitTeach => "exit_teach",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Output {
    /// Joint commands to send this tick, oldest first.
    pub commands: Vec<JointVector>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    /// Set when the event was illegal in the current phase.
    pub rejected: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TapRecord {
    pub cue: usize,
    /// Trigger updates until the average crossed the threshold; `None` for an
    /// operator-simulated tap.
    pub updates: Option<usize>,
    pub elapsed: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Stream {
    traj: Arc<Trajectory>,
    next: usize,
    end: usize,
}

impl Stream {
    fn full(traj: Arc<Trajectory>) -> Self {
        let end = traj.len();
        Stream { traj, next: 0, end }
    }

    /// Skips both endpoints, which coincide with poses already held.
    fn interior(traj: Arc<Trajectory>) -> Self {
        let end = traj.len().saturating_sub(1);
        Stream { traj, next: 1.min(end), end }
    }

    fn pop(&mut self) -> Option<JointVector> {
        if self.next >= self.end {
            return None;
        }
        let q = self.traj.samples()[self.next].q;
        self.next += 1;
        Some(q)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum After {
    Stream(Arc<Trajectory>),
    AwaitTap(Arc<Trajectory>),
}

#[derive(Debug, Clone, PartialEq)]
enum Stage {
    Idle,
    LeadIn { stream: Stream, then: After },
    Streaming { stream: Stream },
    /// `target` is the sample count to record; `None` for an operator-entered
    /// teach section outside the sheet.
    Teach { recording: Recording, target: Option<usize> },
    Damped { recording: Recording, elapsed: f64, adhoc: bool },
    AwaitTap { then: Arc<Trajectory> },
    Stopped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceState {
    cursor: usize,
    stage: Stage,
    mode: ControlMode,
    paused: bool,
    finished: bool,
    elapsed: f64,
    cue_clock: f64,
    section_start: Option<f64>,
    measured: JointVector,
    commanded: Option<JointVector>,
    trigger: ForceTriggerState,
    taps: Vec<TapRecord>,
    last_recording: Option<Recording>,
}

impl PerformanceState {
    pub fn new(q: JointVector, tap_threshold: f64) -> Self {
        PerformanceState {
            cursor: 0,
            stage: Stage::Idle,
            mode: ControlMode::Position,
            paused: false,
            finished: false,
            elapsed: 0.0,
            cue_clock: 0.0,
            section_start: None,
            measured: q,
            commanded: None,
            trigger: ForceTriggerState::new(tap_threshold),
            taps: Vec::new(),
            last_recording: None,
        }
    }

    pub fn phase(&self) -> Phase {
        match self.stage {
            Stage::Idle => Phase::Idle,
            Stage::LeadIn { .. } => Phase::Transitioning,
            Stage::Streaming { .. } => Phase::Running,
            Stage::Teach { .. } | Stage::Damped { .. } => Phase::InTeach,
            Stage::AwaitTap { .. } => Phase::AwaitingTap,
            Stage::Stopped => Phase::ProtectiveStop,
        }
    }

    pub fn mode(&self) -> ControlMode {
        self.mode
    }

    /// 1-based index of the current (or next to start) cue.
    pub fn current_cue(&self, show: &Show) -> Option<usize> {
        show.sheet.cues.get(self.cursor).map(|c| c.index)
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn paused(&self) -> bool {
        self.paused
    }

    /// True once the last cue has finished.
    pub fn finished(&self) -> bool {
        self.finished
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    /// Seconds since the current cue began, lead-in included.
    pub fn cue_clock(&self) -> f64 {
        self.cue_clock
    }

    /// Seconds since the current cue's own section began, excluding its
    /// lead-in transition. `None` while no section is active.
    pub fn section_clock(&self) -> Option<f64> {
        match self.stage {
            Stage::Idle | Stage::Stopped => None,
            Stage::LeadIn { .. } if self.section_start.is_none() => None,
            _ => self.section_start.map(|s| self.cue_clock - s),
        }
    }

    pub fn measured(&self) -> JointVector {
        self.measured
    }

    pub fn last_command(&self) -> Option<JointVector> {
        self.commanded
    }

    pub fn trigger(&self) -> &ForceTriggerState {
        &self.trigger
    }

    pub fn taps(&self) -> &[TapRecord] {
        &self.taps
    }

    pub fn last_recording(&self) -> Option<&Recording> {
        self.last_recording.as_ref()
    }

    /// Pose the next plan starts from: the last command while the arm is
    /// rigid, the measured pose otherwise.
    fn pose(&self) -> JointVector {
        match (self.mode.is_compliant(), self.commanded) {
            (false, Some(q)) => q,
            _ => self.measured,
        }
    }

    fn emit(&mut self, q: JointVector, out: &mut Output) {
        self.commanded = Some(q);
        out.commands.push(q);
    }

    fn protective_stop(&mut self, reason: Option<String>, out: &mut Output) {
        while self.mode != ControlMode::Position {
            self.mode = mode_step(self.mode, ModeEvent::Abort, f64::INFINITY).unwrap_or(ControlMode::Position);
        }
        self.stage = Stage::Stopped;
        self.paused = false;
        self.commanded = None;
        if let Some(r) = reason {
            out.warnings.push(r);
        }
    }

    fn begin_cue(&mut self, pos: usize, show: &Show, out: &mut Output) {
        self.cursor = pos;
        self.cue_clock = 0.0;
        self.section_start = None;
        self.paused = false;
        let Some(cue) = show.sheet.cues.get(pos) else {
            self.finished = true;
            self.stage = Stage::Idle;
            return;
        };
        match &cue.kind {
            CueKind::Prerecorded { trajectory } | CueKind::WaitForce { then: trajectory } => {
                let Some(traj) = show.store.get(trajectory).cloned() else {
                    self.protective_stop(Some(format!("cue {}: no trajectory `{trajectory}`", cue.index)), out);
                    return;
                };
                let then = match cue.kind {
                    CueKind::WaitForce { .. } => After::AwaitTap(traj),
                    _ => After::Stream(traj),
                };
                self.lead_into(then, cue.transition_duration, cue.index, show, out);
            }
            CueKind::Teach { duration } => {
                self.mode = mode_step(self.mode, ModeEvent::EnterTeach, show.settings.force_exit_threshold)
                    .unwrap_or(ControlMode::Teach);
                let target = (duration * show.rate() + 1e-9).floor() as usize + 1;
                self.stage = Stage::Teach { recording: Recording::new(show.rate()), target: Some(target) };
                self.section_start = Some(self.cue_clock);
                self.commanded = None;
            }
        }
    }

    fn lead_into(&mut self, then: After, duration: f64, cue: usize, show: &Show, out: &mut Output) {
        let target = match &then {
            After::Stream(t) | After::AwaitTap(t) => t.first(),
        };
        let from = self.pose();
        if from.max_abs_diff(&target) <= SAME_POSE_TOL {
            self.enter(then, show);
            return;
        }
        match plan_safe_transition(&show.profile, &from, &target, duration, show.rate()) {
            Ok(plan) => {
                if plan.route == TransitionRoute::ViaNeutral {
                    out.notes.push(format!("cue {cue}: lead-in rerouted via neutral pose"));
                }
                self.stage = Stage::LeadIn { stream: Stream::interior(Arc::new(plan.trajectory)), then };
            }
            Err(e) => self.protective_stop(Some(format!("cue {cue}: {e}")), out),
        }
    }

    fn enter(&mut self, then: After, show: &Show) {
        if self.section_start.is_none() {
            self.section_start = Some(self.cue_clock);
        }
        match then {
            After::Stream(traj) => self.stage = Stage::Streaming { stream: Stream::full(traj) },
            After::AwaitTap(traj) => {
                self.mode = mode_step(self.mode, ModeEvent::ArmTap, show.settings.force_exit_threshold)
                    .unwrap_or(ControlMode::WaitingForTap);
                self.trigger.reset();
                self.stage = Stage::AwaitTap { then: traj };
            }
        }
    }

    fn tap(&mut self, then: Arc<Trajectory>, updates: Option<usize>, show: &Show) {
        self.taps.push(TapRecord {
            cue: show.sheet.cues.get(self.cursor).map_or(0, |c| c.index),
            updates,
            elapsed: self.elapsed,
        });
        self.mode = ControlMode::Position;
        self.stage = Stage::Streaming { stream: Stream::full(then) };
    }

    fn finish_teach(&mut self, recording: Recording, adhoc: bool, show: &Show, out: &mut Output) {
        if adhoc || recording.is_empty() {
            self.last_recording = Some(recording);
            self.stage = Stage::Idle;
            return;
        }
        let traj = match replay(&recording) {
            Ok(t) => Arc::new(t),
            Err(e) => {
                self.protective_stop(Some(e.to_string()), out);
                return;
            }
        };
        self.last_recording = Some(recording);
        let (duration, index) = show.sheet.cues.get(self.cursor).map_or((2.0, 0), |c| (c.transition_duration, c.index));
        self.lead_into(After::Stream(traj), duration, index, show, out);
    }

    fn tick(&mut self, show: &Show, dt: f64, force: f64, out: &mut Output) {
        let force_ok = force.is_finite() && force >= 0.0;
        if !force_ok {
            out.warnings.push(format!("ignoring invalid force reading {force}"));
        }
        // A tick finishes at most a few zero-length stages before emitting.
        for _ in 0..8 {
            match &mut self.stage {
                Stage::Idle | Stage::Stopped => return,
                Stage::LeadIn { stream, then } => {
                    if let Some(q) = stream.pop() {
                        self.emit(q, out);
                        return;
                    }
                    let then = then.clone();
                    let waits = matches!(then, After::AwaitTap(_));
                    self.enter(then, show);
                    if waits {
                        return;
                    }
                }
                Stage::Streaming { stream } => {
                    if let Some(q) = stream.pop() {
                        self.emit(q, out);
                        return;
                    }
                    self.begin_cue(self.cursor + 1, show, out);
                    if !matches!(self.stage, Stage::LeadIn { .. } | Stage::Streaming { .. }) {
                        return;
                    }
                }
                Stage::Teach { recording, target } => {
                    recording.push(self.measured);
                    if target.is_some_and(|n| recording.len() >= n) {
                        let recording = std::mem::take(recording);
                        self.mode = mode_step(self.mode, ModeEvent::BeginExit, show.settings.force_exit_threshold)
                            .unwrap_or(ControlMode::ForceDamped { damping: crate::interaction::EXIT_DAMPING });
                        self.stage = Stage::Damped { recording, elapsed: 0.0, adhoc: false };
                    }
                    return;
                }
                Stage::Damped { recording, elapsed, adhoc } => {
                    *elapsed += dt;
                    if *elapsed + 1e-12 < show.settings.min_damped_s || !force_ok {
                        return;
                    }
                    let next = mode_step(self.mode, ModeEvent::Settle { force }, show.settings.force_exit_threshold)
                        .unwrap_or(self.mode);
                    if next != ControlMode::Position {
                        return;
                    }
                    self.mode = next;
                    let (recording, adhoc) = (std::mem::take(recording), *adhoc);
                    self.finish_teach(recording, adhoc, show, out);
                    if !matches!(self.stage, Stage::LeadIn { .. } | Stage::Streaming { .. }) {
                        return;
                    }
                }
                Stage::AwaitTap { then } => {
                    if !force_ok || self.trigger.update(force).is_err() || !self.trigger.triggered() {
                        return;
                    }
                    let then = Arc::clone(then);
                    let updates = self.trigger.triggered_at();
                    self.tap(then, updates, show);
                }
            }
        }
    }

    /// Applies `event` in place. Illegal events return the rejection reason
    /// before anything is modified.
    fn apply(&mut self, show: &Show, event: &SeqEvent, out: &mut Output) -> Result<(), String> {
        let phase = self.phase();
        let stopped = phase == Phase::ProtectiveStop;
        let illegal = || format!("`{}` is not allowed in phase {}", event.name(), phase.name());
        match event {
            SeqEvent::Tick { dt, q, force } => {
                if stopped {
                    return Ok(());
                }
                self.measured = *q;
                self.elapsed += dt;
                if self.paused {
                    return Ok(());
                }
                self.cue_clock += dt;
                self.tick(show, *dt, *force, out);
            }
            SeqEvent::Stop => {
                if !stopped {
                    self.protective_stop(None, out);
                }
            }
            _ if stopped && *event != SeqEvent::Reset => return Err(STOPPED_REASON.to_string()),
            SeqEvent::Reset => {
                if !stopped {
                    return Err(illegal());
                }
                self.stage = Stage::Idle;
            }
            SeqEvent::Start => match phase {
                _ if self.paused => self.paused = false,
                Phase::Idle if !self.finished => self.begin_cue(self.cursor, show, out),
                Phase::Idle => return Err("show complete".into()),
                _ => return Err(illegal()),
            },
            SeqEvent::Next => match phase {
                Phase::Idle if !self.finished => self.begin_cue(self.cursor, show, out),
                Phase::Running | Phase::Transitioning | Phase::AwaitingTap => {
                    if self.mode == ControlMode::WaitingForTap {
                        self.mode = ControlMode::Position;
                    }
                    self.begin_cue(self.cursor + 1, show, out);
                }
                _ => return Err(illegal()),
            },
            SeqEvent::Pause => match phase {
                Phase::Running | Phase::Transitioning | Phase::AwaitingTap if !self.paused => self.paused = true,
                _ => return Err(illegal()),
            },
            SeqEvent::TapDetected => match &self.stage {
                Stage::AwaitTap { then } if !self.paused => {
                    let then = Arc::clone(then);
                    self.tap(then, None, show);
                }
                _ => return Err(illegal()),
            },
            SeqEvent::EnterTeach => match phase {
                Phase::Idle => {
                    self.mode = mode_step(self.mode, ModeEvent::EnterTeach, show.settings.force_exit_threshold)
                        .map_err(|e| e.to_string())?;
                    self.stage = Stage::Teach { recording: Recording::new(show.rate()), target: None };
                    self.commanded = None;
                }
                _ => return Err(illegal()),
            },
            SeqEvent::ExitTeach => {
                let Stage::Teach { target, .. } = &self.stage else { return Err(illegal()) };
                let adhoc = target.is_none();
                let mode = mode_step(self.mode, ModeEvent::BeginExit, show.settings.force_exit_threshold)
                    .map_err(|e| e.to_string())?;
                let Stage::Teach { recording, .. } = std::mem::replace(&mut self.stage, Stage::Idle) else {
                    unreachable!()
                };
                self.mode = mode;
                self.stage = Stage::Damped { recording, elapsed: 0.0, adhoc };
            }
        }
        Ok(())
    }
}

/// Applies one event in place. Rejected events leave `state` untouched.
pub fn advance_in_place(state: &mut PerformanceState, show: &Show, event: &SeqEvent) -> Output {
    let mut out = Output::default();
    if let Err(reason) = state.apply(show, event, &mut out) {
        out.warnings.push(format!("rejected {}: {reason}", event.name()));
        out.rejected = Some(reason);
    }
    out
}

/// Pure transition function of the performance machine.
pub fn advance(state: &PerformanceState, show: &Show, event: &SeqEvent) -> (PerformanceState, Output) {
    let mut next = state.clone();
    let out = advance_in_place(&mut next, show, event);
    (next, out)
}
