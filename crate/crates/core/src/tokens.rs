//! Token alphabet and the multitrack pianoroll grid.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::TokenError;

/// Number of categorical states per cell: 128 pitches, hold, silence.
pub const N_TOKENS: usize = 130;
pub const HOLD: u8 = 128;
pub const SILENCE: u8 = 129;
pub const N_TRACKS: usize = 4;
pub const STEPS_PER_QUARTER: usize = 4;
pub const STEPS_PER_BAR: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Track {
    Drums,
    Bass,
    Guitar,
    Strings,
}

impl Track {
    pub const ALL: [Track; N_TRACKS] = [Track::Drums, Track::Bass, Track::Guitar, Track::Strings];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Track::Drums => "drums",
            Track::Bass => "bass",
            Track::Guitar => "guitar",
            Track::Strings => "strings",
        }
    }

    pub fn is_melodic(self) -> bool {
        self != Track::Drums
    }
}

impl fmt::Display for Track {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[inline]
pub fn is_pitch(token: u8) -> bool {
    token < HOLD
}

/// A `timesteps x 4` grid of tokens stored time-major.
///
/// Decoder output may contain holds that do not continue a note; use
/// [`PianoRoll::validate`] to check the well-formedness rules and
/// [`PianoRoll::sanitized`] to repair such grids.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PianoRoll {
    timesteps: usize,
    cells: Vec<u8>,
}

impl PianoRoll {
    pub fn new(timesteps: usize, cells: Vec<u8>) -> Result<Self, TokenError> {
        if timesteps == 0 {
            return Err(TokenError::Empty);
        }
        if cells.len() != timesteps * N_TRACKS {
            return Err(TokenError::Shape { expected: timesteps * N_TRACKS, got: cells.len() });
        }
        if let Some(pos) = cells.iter().position(|&c| c as usize >= N_TOKENS) {
            return Err(TokenError::OutOfRange {
                timestep: pos / N_TRACKS,
                track: pos % N_TRACKS,
                token: cells[pos] as u32,
            });
        }
        Ok(Self { timesteps, cells })
    }

    pub fn silent(timesteps: usize) -> Self {
        Self { timesteps, cells: vec![SILENCE; timesteps * N_TRACKS] }
    }

    /// Builds a grid from four per-track token sequences of equal length.
    pub fn from_tracks(tracks: [&[u8]; N_TRACKS]) -> Result<Self, TokenError> {
        let t = tracks[0].len();
        for tr in &tracks[1..] {
            if tr.len() != t {
                return Err(TokenError::Shape { expected: t, got: tr.len() });
            }
        }
        let mut cells = Vec::with_capacity(t * N_TRACKS);
        for step in 0..t {
            for tr in &tracks {
                cells.push(tr[step]);
            }
        }
        Self::new(t, cells)
    }

    /// Time-major rows `[[drums, bass, guitar, strings]; T]`, the wire format.
    pub fn from_rows(rows: &[[u8; N_TRACKS]]) -> Result<Self, TokenError> {
        Self::new(rows.len(), rows.iter().flatten().copied().collect())
    }

    pub fn rows(&self) -> Vec<[u8; N_TRACKS]> {
        self.cells.chunks_exact(N_TRACKS).map(|c| [c[0], c[1], c[2], c[3]]).collect()
    }

    #[inline]
    pub fn timesteps(&self) -> usize {
        self.timesteps
    }

    #[inline]
    pub fn get(&self, t: usize, track: Track) -> u8 {
        self.cells[t * N_TRACKS + track.index()]
    }

    #[inline]
    pub fn set(&mut self, t: usize, track: Track, token: u8) {
        debug_assert!((token as usize) < N_TOKENS);
        self.cells[t * N_TRACKS + track.index()] = token;
    }

    pub fn track(&self, track: Track) -> Vec<u8> {
        (0..self.timesteps).map(|t| self.get(t, track)).collect()
    }

    pub fn set_track(&mut self, track: Track, tokens: &[u8]) {
        assert_eq!(tokens.len(), self.timesteps);
        for (t, &tok) in tokens.iter().enumerate() {
            self.set(t, track, tok);
        }
    }

    /// Raw time-major cells, one byte per cell.
    pub fn as_bytes(&self) -> &[u8] {
        &self.cells
    }

    /// Copy of timesteps `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> PianoRoll {
        let cells = self.cells[start * N_TRACKS..(start + len) * N_TRACKS].to_vec();
        PianoRoll { timesteps: len, cells }
    }

    /// Checks that every hold continues a sounding note.
    pub fn validate(&self) -> Result<(), TokenError> {
        for track in Track::ALL {
            let mut prev = SILENCE;
            for t in 0..self.timesteps {
                let tok = self.get(t, track);
                if tok == HOLD && prev == SILENCE {
                    return Err(TokenError::OrphanHold { timestep: t, track });
                }
                prev = tok;
            }
        }
        Ok(())
    }

    /// Replaces holds that do not continue a note with silence.
    pub fn sanitized(&self) -> PianoRoll {
        let mut out = self.clone();
        for track in Track::ALL {
            let mut prev = SILENCE;
            for t in 0..out.timesteps {
                let mut tok = out.get(t, track);
                if tok == HOLD && prev == SILENCE {
                    tok = SILENCE;
                    out.set(t, track, tok);
                }
                prev = tok;
            }
        }
        out
    }
}

impl fmt::Debug for PianoRoll {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PianoRoll").field("timesteps", &self.timesteps).field("rows", &self.rows()).finish()
    }
}

/// A dataset sample: a fixed-length grid plus provenance and genre labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub roll: PianoRoll,
    pub song_id: String,
    pub genre_ids: Vec<u16>,
}
