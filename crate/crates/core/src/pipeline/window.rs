use std::collections::HashSet;

use crate::tokens::{is_pitch, PianoRoll, Track, HOLD, SILENCE, STEPS_PER_BAR};

/// Longest admissible run of silence per track: one bar.
pub const MAX_SILENCE_RUN: usize = STEPS_PER_BAR;

/// Sliding windows over a full-song pianoroll, de-duplicated by exact
/// token equality. A window starting inside a sustained note re-articulates
/// that note's pitch so every window is self-contained.
pub fn extract_windows(roll: &PianoRoll, window_bars: usize, stride_bars: usize) -> Vec<PianoRoll> {
    let len = window_bars * STEPS_PER_BAR;
    let stride = stride_bars.max(1) * STEPS_PER_BAR;
    if len == 0 || roll.timesteps() < len {
        return Vec::new();
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut start = 0;
    while start + len <= roll.timesteps() {
        let mut w = roll.slice(start, len);
        if start > 0 {
            for track in Track::ALL {
                if w.get(0, track) == HOLD {
                    let pitch = (0..start).rev().map(|t| roll.get(t, track)).find(|&tok| tok != HOLD);
                    match pitch {
                        Some(p) if is_pitch(p) => w.set(0, track, p),
                        _ => w.set(0, track, SILENCE),
                    }
                }
            }
        }
        if seen.insert(w.clone()) {
            out.push(w);
        }
        start += stride;
    }
    out
}

/// True iff no track has more than one bar of consecutive silence.
pub fn silence_admissible(roll: &PianoRoll) -> bool {
    Track::ALL.into_iter().all(|track| {
        let mut run = 0;
        for t in 0..roll.timesteps() {
            if roll.get(t, track) == SILENCE {
                run += 1;
                if run > MAX_SILENCE_RUN {
                    return false;
                }
            } else {
                run = 0;
            }
        }
        true
    })
}
