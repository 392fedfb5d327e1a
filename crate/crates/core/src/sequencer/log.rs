use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::machine::{advance_in_place, PerformanceState, SeqEvent, Show};
use crate::error::{Error, Result};
use crate::robot_model::JointVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    /// Show time when the event was applied, seconds.
    pub t: f64,
    pub event: SeqEvent,
}

#[derive(Debug, Serialize, Deserialize)]
struct LogHeader {
    initial_q: JointVector,
    tap_threshold: f64,
}

/// Append-only record of every event fed to the machine. One JSON object
/// per line; the first line holds the initial pose.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub initial_q: JointVector,
    pub tap_threshold: f64,
    pub entries: Vec<LogEntry>,
}

impl EventLog {
    pub fn new(initial_q: JointVector, tap_threshold: f64) -> Self {
        EventLog { initial_q, tap_threshold, entries: Vec::new() }
    }

    pub fn for_state(state: &PerformanceState) -> Self {
        EventLog::new(state.measured(), state.trigger().threshold())
    }

    pub fn push(&mut self, t: f64, event: SeqEvent) -> &LogEntry {
        let seq = self.entries.len() as u64;
        self.entries.push(LogEntry { seq, t, event });
        self.entries.last().expect("just pushed")
    }

    pub fn header_line(&self) -> String {
        serde_json::to_string(&LogHeader { initial_q: self.initial_q, tap_threshold: self.tap_threshold })
            .expect("log header serializes")
    }

    pub fn entry_line(entry: &LogEntry) -> String {
        serde_json::to_string(entry).expect("log entry serializes")
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", self.header_line())?;
        for e in &self.entries {
            writeln!(w, "{}", Self::entry_line(e))?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<EventLog> {
        let mut lines = r.lines().enumerate();
        let parse_err = |row: usize, e: &dyn std::fmt::Display| Error::Parse { row, reason: e.to_string() };
        let (_, first) = lines.next().ok_or_else(|| Error::Parse { row: 1, reason: "empty event log".into() })?;
        let first = first.map_err(|e| parse_err(1, &e))?;
        let header: LogHeader = serde_json::from_str(&first).map_err(|e| parse_err(1, &e))?;
        let mut log = EventLog::new(header.initial_q, header.tap_threshold);
        for (i, line) in lines {
            let line = line.map_err(|e| parse_err(i + 1, &e))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: LogEntry = serde_json::from_str(&line).map_err(|e| parse_err(i + 1, &e))?;
            log.entries.push(entry);
        }
        Ok(log)
    }

    pub fn from_jsonl(text: &str) -> Result<EventLog> {
        Self::read_jsonl(text.as_bytes())
    }

    /// Re-applies every logged event from the logged initial state.
    pub fn replay(&self, show: &Show) -> PerformanceState {
        let mut state = PerformanceState::new(self.initial_q, self.tap_threshold);
        for e in &self.entries {
            advance_in_place(&mut state, show, &e.event);
        }
        state
    }
}
