use serde::{Deserialize, Serialize};

use super::cue::{CueSheet, TrajectoryStore};
use crate::error::{Error, Result};
use crate::motion::{plan_safe_transition, TransitionRoute};
use crate::robot_model::{validate_trajectory, RobotProfile, Violation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaylistFailure {
    pub cue: usize,
    /// First offending sample, when the failure is tied to one.
    pub sample: Option<usize>,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionCheck {
    pub from_cue: usize,
    pub to_cue: usize,
    pub route: Option<TransitionRoute>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlaylistReport {
    pub failures: Vec<PlaylistFailure>,
    pub transitions: Vec<TransitionCheck>,
    pub notes: Vec<String>,
}

impl PlaylistReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Validates every streamed trajectory and the lead-in between each pair of
/// consecutive streamed cues. Lead-ins after a teach cue depend on what is
/// taught and are planned live.
pub fn validate_playlist(sheet: &CueSheet, profile: &RobotProfile, store: &TrajectoryStore) -> Result<PlaylistReport> {
    let rate = profile.control_rate_hz;
    let mut report = PlaylistReport::default();
    let mut resolved = Vec::with_capacity(sheet.len());
    for cue in &sheet.cues {
        let traj = match cue.kind.trajectory_ref() {
            Some(r) => Some(store.get(r).ok_or_else(|| Error::input(format!("cue {}: dangling ref `{r}`", cue.index)))?),
            None => None,
        };
        resolved.push(traj);
    }

    for (cue, traj) in sheet.cues.iter().zip(&resolved) {
        let Some(traj) = traj else { continue };
        if traj.len() < 2 {
            report.failures.push(PlaylistFailure {
                cue: cue.index,
                sample: None,
                reason: "trajectory has fewer than 2 samples".into(),
                violations: vec![],
            });
            continue;
        }
        let v = validate_trajectory(profile, traj)?;
        if !v.is_safe() {
            let first = v.indices()[0];
            report.failures.push(PlaylistFailure {
                cue: cue.index,
                sample: Some(first),
                reason: format!("cue {}: {} violation(s), first at sample {first}", cue.index, v.violations.len()),
                violations: v.violations,
            });
        }
    }

    for (i, pair) in resolved.windows(2).enumerate() {
        let (prev, next) = (&sheet.cues[i], &sheet.cues[i + 1]);
        let (Some(a), Some(b)) = (pair[0], pair[1]) else {
            if matches!(prev.kind, super::CueKind::Teach { .. }) && pair[1].is_some() {
                report.notes.push(format!("cue {} -> {}: lead-in after teach is planned live", prev.index, next.index));
            }
            continue;
        };
        let (from, to) = (a.last(), b.first());
        if from.max_abs_diff(&to) <= super::machine::SAME_POSE_TOL {
            report.transitions.push(TransitionCheck { from_cue: prev.index, to_cue: next.index, route: None });
            continue;
        }
        match plan_safe_transition(profile, &from, &to, next.transition_duration, rate) {
            Ok(plan) => {
                if plan.route == TransitionRoute::ViaNeutral {
                    report.notes.push(format!("cue {} -> {}: rerouted via neutral pose", prev.index, next.index));
                }
                report.transitions.push(TransitionCheck { from_cue: prev.index, to_cue: next.index, route: Some(plan.route) });
            }
            Err(Error::Planning { direct, via_neutral }) => {
                report.failures.push(PlaylistFailure {
                    cue: next.index,
                    sample: None,
                    reason: format!(
                        "cue {} -> {}: no safe transition ({} direct, {} via-neutral violations)",
                        prev.index,
                        next.index,
                        direct.violations.len(),
                        via_neutral.violations.len()
                    ),
                    violations: vec![],
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}
