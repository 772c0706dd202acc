//! Standard MIDI File decoding into note events, and pianoroll export.

mod reader;
mod writer;

pub use reader::{parse_midi, ParseWarning, ParsedSong};
pub use writer::{export_midi, ExportOptions};

use serde::{Deserialize, Serialize};

/// MIDI channel index reserved for percussion (channel 10 in 1-based numbering).
pub const DRUM_CHANNEL: u8 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoteEvent {
    pub tick: u64,
    pub pitch: u8,
    pub duration: u64,
}

impl NoteEvent {
    pub fn end(&self) -> u64 {
        self.tick + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SongTrack {
    pub channel: u8,
    pub program: u8,
    /// Sorted by tick, then pitch.
    pub events: Vec<NoteEvent>,
}

impl SongTrack {
    pub fn is_drums(&self) -> bool {
        self.channel == DRUM_CHANNEL
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSignature {
    pub tick: u64,
    pub numerator: u8,
    pub denominator: u8,
}

/// Decoded song: note events per (chunk, channel) plus meter information.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Song {
    pub tracks: Vec<SongTrack>,
    pub time_signatures: Vec<TimeSignature>,
    pub ticks_per_quarter: u32,
    pub song_id: String,
    pub genre_tags: Vec<String>,
}

impl Song {
    /// Tick at which the last note ends.
    pub fn end_tick(&self) -> u64 {
        self.tracks.iter().flat_map(|t| t.events.iter().map(NoteEvent::end)).max().unwrap_or(0)
    }
}
