use super::classify::TrackAssignment;
use crate::midi::{NoteEvent, Song};
use crate::tokens::{PianoRoll, Track, HOLD, SILENCE, STEPS_PER_BAR, STEPS_PER_QUARTER};

fn cell_floor(tick: u64, tpq: u32) -> u64 {
    tick * STEPS_PER_QUARTER as u64 / tpq as u64
}

fn cell_ceil(tick: u64, tpq: u32) -> u64 {
    (tick * STEPS_PER_QUARTER as u64).div_ceil(tpq as u64)
}

/// Quantizes note events onto a grid of 16 steps per bar.
///
/// Each note starts in the cell containing its onset tick and lasts until
/// the cell containing its end (at least one cell). A cell with onsets emits
/// the lowest onset pitch, which then defines the sustained extent; cells
/// inside that extent emit hold, everything else is silence.
pub fn quantize_track(events: &[NoteEvent], ticks_per_quarter: u32, n_bars: usize) -> Vec<u8> {
    let n = n_bars * STEPS_PER_BAR;
    // per cell: lowest onset pitch and its end cell
    let mut onsets: Vec<Option<(u8, u64)>> = vec![None; n];
    for e in events {
        let start = cell_floor(e.tick, ticks_per_quarter);
        if start >= n as u64 {
            continue;
        }
        let end = cell_ceil(e.end(), ticks_per_quarter).max(start + 1);
        let slot = &mut onsets[start as usize];
        match slot {
            Some((p, end0)) if *p < e.pitch || (*p == e.pitch && *end0 >= end) => {}
            _ => *slot = Some((e.pitch, end)),
        }
    }
    let mut out = vec![SILENCE; n];
    let mut sustain_until = 0u64;
    for (t, cell) in out.iter_mut().enumerate() {
        if let Some((pitch, end)) = onsets[t] {
            *cell = pitch;
            sustain_until = end;
        } else if (t as u64) < sustain_until {
            *cell = HOLD;
        }
    }
    out
}

/// Number of whole bars covering every note of the song.
pub fn song_bars(song: &Song) -> usize {
    let cells = cell_ceil(song.end_tick(), song.ticks_per_quarter) as usize;
    cells.div_ceil(STEPS_PER_BAR)
}

/// Full-length pianoroll of one track assignment.
pub fn song_roll(song: &Song, assignment: &TrackAssignment, n_bars: usize) -> PianoRoll {
    let tpq = song.ticks_per_quarter;
    let drums = quantize_track(&song.tracks[assignment.drums].events, tpq, n_bars);
    let bass = quantize_track(&song.tracks[assignment.bass].events, tpq, n_bars);
    let guitar = quantize_track(&song.tracks[assignment.guitar].events, tpq, n_bars);
    let mut merged: Vec<NoteEvent> =
        assignment.strings.iter().flat_map(|&i| song.tracks[i].events.iter().copied()).collect();
    merged.sort_by_key(|e| (e.tick, e.pitch, e.duration));
    let strings = quantize_track(&merged, tpq, n_bars);
    let mut roll = PianoRoll::silent(n_bars * STEPS_PER_BAR);
    for (track, tokens) in Track::ALL.into_iter().zip([drums, bass, guitar, strings]) {
        roll.set_track(track, &tokens);
    }
    roll
}
