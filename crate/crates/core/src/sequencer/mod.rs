//! Cue sheets, cue cards, playlist validation and the performance machine.

mod cards;
mod cue;
mod log;
mod machine;
mod playlist;

pub use cards::{render_cue_cards, CardDeck, CueCard};
pub use cue::{
    load_cue_sheet, load_trajectory_file, version_stamp, Cue, CueKind, CueSheet, TrajectoryStore, CUE_SHEET_HEADER,
    DEFAULT_TRANSITION_S,
};
pub use log::{EventLog, LogEntry};
pub use machine::{
    advance, advance_in_place, Output, PerformanceState, Phase, SeqEvent, Show, ShowSettings, TapRecord,
    SAME_POSE_TOL, STOPPED_REASON,
};
pub use playlist::{validate_playlist, PlaylistFailure, PlaylistReport, TransitionCheck};
