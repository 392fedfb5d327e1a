use serde::{Deserialize, Serialize};

use super::cue::CueSheet;

/// One operator card per cue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueCard {
    pub index: usize,
    pub kind: String,
    #[serde(rename = "ref")]
    pub reference: String,
    pub music_track: String,
    /// Always present, possibly empty.
    pub notes: String,
    pub transition_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardDeck {
    pub title: String,
    pub version: String,
    pub cards: Vec<CueCard>,
}

impl CardDeck {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("card deck serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<CardDeck> {
        serde_json::from_str(text)
    }
}

pub fn render_cue_cards(sheet: &CueSheet) -> CardDeck {
    let cards = sheet
        .cues
        .iter()
        .map(|c| CueCard {
            index: c.index,
            kind: c.kind.name().to_string(),
            reference: c.kind.ref_text(),
            music_track: c.music_track.clone(),
            notes: c.notes.clone(),
            transition_s: c.transition_duration,
        })
        .collect();
    CardDeck { title: sheet.title.clone(), version: sheet.version.clone(), cards }
}
