use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::force::{read_force, ForceNoise, ForceScript};
use super::robot::{SimConfig, SimRobot, StepOutcome};
use crate::error::{Error, Result};
use crate::robot_model::JointVector;
use crate::sequencer::{
    advance_in_place, validate_playlist, CueKind, EventLog, Output, PerformanceState, Phase, SeqEvent, Show,
    TapRecord,
};

/// Force scripts keyed by 1-based cue index, plus sensor noise.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ForceScripts {
    pub per_cue: BTreeMap<usize, ForceScript>,
    pub noise: ForceNoise,
}

impl ForceScripts {
    pub fn with(mut self, cue: usize, script: ForceScript) -> Self {
        self.per_cue.insert(cue, script);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueTiming {
    pub index: usize,
    pub kind: String,
    pub started_s: f64,
    pub ended_s: Option<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopRecord {
    pub t: f64,
    pub cue: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub title: String,
    pub sheet_version: String,
    pub seed: u64,
    pub noise_std_n: f64,
    pub ticks: u64,
    pub duration_s: f64,
    pub emitted_samples: usize,
    pub stop_count: usize,
    pub stops: Vec<StopRecord>,
    pub taps: Vec<TapRecord>,
    pub cues: Vec<CueTiming>,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
    pub completed: bool,
    /// SHA-256 over every emitted command, little-endian f64s.
    pub command_digest: String,
    pub final_q: JointVector,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepResult {
    pub output: Output,
    pub command: Option<JointVector>,
    pub outcome: Option<StepOutcome>,
    pub force: f64,
}

/// The sequencer driving a simulated arm, one control tick at a time.
pub struct SimSession {
    show: Arc<Show>,
    state: PerformanceState,
    robot: SimRobot,
    scripts: ForceScripts,
    log: EventLog,
    digest: Sha256,
    emitted: usize,
    stops: Vec<StopRecord>,
    cues: Vec<CueTiming>,
    notes: Vec<String>,
    warnings: Vec<String>,
    last_force: f64,
    started: bool,
    open: Option<usize>,
}

impl SimSession {
    pub fn new(show: Arc<Show>, scripts: ForceScripts, config: SimConfig) -> Self {
        let state = show.initial_state();
        let robot = SimRobot::new(show.profile.clone(), state.measured(), config);
        let log = EventLog::for_state(&state);
        SimSession {
            show,
            state,
            robot,
            scripts,
            log,
            digest: Sha256::new(),
            emitted: 0,
            stops: Vec::new(),
            cues: Vec::new(),
            notes: Vec::new(),
            warnings: Vec::new(),
            last_force: 0.0,
            started: false,
            open: None,
        }
    }

    pub fn show(&self) -> &Arc<Show> {
        &self.show
    }

    pub fn state(&self) -> &PerformanceState {
        &self.state
    }

    pub fn robot(&self) -> &SimRobot {
        &self.robot
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn last_force(&self) -> f64 {
        self.last_force
    }

    /// Applies an operator event between ticks.
    pub fn apply(&mut self, event: SeqEvent) -> Output {
        let out = self.feed(event.clone());
        if out.rejected.is_none() && event == SeqEvent::Reset {
            self.robot.reset_stop();
        }
        out
    }

    fn feed(&mut self, event: SeqEvent) -> Output {
        let starts = matches!(event, SeqEvent::Start | SeqEvent::Next);
        let out = advance_in_place(&mut self.state, &self.show, &event);
        self.started |= starts && out.rejected.is_none();
        self.log.push(self.state.elapsed(), event);
        self.notes.extend(out.notes.iter().cloned());
        self.warnings.extend(out.warnings.iter().cloned());
        self.track_cue();
        for q in &out.commands {
            for v in q.iter() {
                self.digest.update(v.to_le_bytes());
            }
        }
        self.emitted += out.commands.len();
        if let Some(t) = self.cues.last_mut() {
            t.samples += out.commands.len();
        }
        out
    }

    fn track_cue(&mut self) {
        let current = (self.started && !self.state.finished()).then(|| self.state.cursor());
        if current == self.open {
            return;
        }
        let t = self.state.elapsed();
        if let Some(last) = self.cues.last_mut() {
            last.ended_s.get_or_insert(t);
        }
        self.open = current;
        if let Some(cue) = current.and_then(|i| self.show.sheet.cues.get(i)) {
            self.cues.push(CueTiming { index: cue.index, kind: cue.kind.name().into(), started_s: t, ended_s: None, samples: 0 });
        }
    }

    /// One control period: sense, advance the sequencer, actuate.
    pub fn step(&mut self) -> StepResult {
        let cue = self.state.current_cue(&self.show);
        let script = cue.and_then(|c| self.scripts.per_cue.get(&c));
        let section_t = self.state.section_clock();
        let force = read_force(script, section_t, &self.scripts.noise, self.robot.ticks());
        let push = match (script, section_t) {
            (Some(s), Some(t)) => s.push_at(t),
            _ => None,
        };
        self.last_force = force;
        let output = self.feed(SeqEvent::Tick { dt: self.robot.dt(), q: self.robot.q, force });
        let command = output.commands.last().copied();
        self.robot.mode = self.state.mode();
        let outcome = match self.robot.step(command, push) {
            Ok(o) => Some(o),
            Err(e) => {
                self.warnings.push(e.to_string());
                None
            }
        };
        if let Some(StepOutcome::Stopped { joint, velocity, limit }) = outcome {
            let reason = format!("joint {joint} commanded at {velocity:.4} rad/s exceeds limit {limit:.4}");
            self.stops.push(StopRecord { t: self.state.elapsed(), cue, reason });
            self.feed(SeqEvent::Stop);
        }
        StepResult { output, command, outcome, force }
    }

    pub fn report(&self) -> RunReport {
        RunReport {
            title: self.show.sheet.title.clone(),
            sheet_version: self.show.sheet.version.clone(),
            seed: self.scripts.noise.seed,
            noise_std_n: self.scripts.noise.std_n,
            ticks: self.robot.ticks(),
            duration_s: self.robot.clock(),
            emitted_samples: self.emitted,
            stop_count: self.stops.len(),
            stops: self.stops.clone(),
            taps: self.state.taps().to_vec(),
            cues: self.cues.clone(),
            notes: self.notes.clone(),
            warnings: self.warnings.clone(),
            completed: self.state.finished(),
            command_digest: hex::encode(self.digest.clone().finalize()),
            final_q: self.robot.q,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub sim: SimConfig,
    /// Simulated-time cap; `None` derives one from the sheet.
    pub time_limit_s: Option<f64>,
    /// Reset and restart the current cue after a protective stop.
    pub auto_reset: bool,
    pub max_stops: usize,
    pub validate: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { sim: SimConfig::default(), time_limit_s: None, auto_reset: true, max_stops: 5, validate: true }
    }
}

/// Generous cap: every cue's own length plus slack for lead-ins and waits.
pub fn default_time_limit(show: &Show) -> f64 {
    show.sheet
        .cues
        .iter()
        .map(|c| {
            let body = match &c.kind {
                CueKind::Teach { duration } => 2.0 * duration + show.settings.min_damped_s + 10.0,
                other => other.trajectory_ref().and_then(|r| show.store.get(r)).map_or(0.0, |t| t.duration()) + 10.0,
            };
            body + 2.0 * c.transition_duration
        })
        .sum::<f64>()
        + 10.0
}

/// Runs the whole sheet against the simulator and returns the report and
/// the event log that reproduces it.
pub fn run_performance(show: &Show, scripts: &ForceScripts, options: &RunOptions) -> Result<(RunReport, EventLog)> {
    if options.validate {
        let report = validate_playlist(&show.sheet, &show.profile, &show.store)?;
        if !report.passed() {
            let reasons: Vec<&str> = report.failures.iter().map(|f| f.reason.as_str()).collect();
            return Err(Error::Validation(reasons.join("; ")));
        }
    }
    let limit = options.time_limit_s.unwrap_or_else(|| default_time_limit(show));
    let mut session = SimSession::new(Arc::new(show.clone()), scripts.clone(), options.sim.clone());
    session.apply(SeqEvent::Start);
    while !session.state().finished() && session.robot().clock() < limit {
        session.step();
        if session.state().phase() == Phase::ProtectiveStop {
            if !options.auto_reset || session.stops.len() > options.max_stops {
                break;
            }
            session.apply(SeqEvent::Reset);
            session.apply(SeqEvent::Start);
        }
    }
    Ok((session.report(), session.log().clone()))
}
