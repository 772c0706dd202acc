//! Fixtures shared by the integration test targets.
#![allow(dead_code)]

use std::collections::BTreeMap;

use musae_core::midi::{export_midi, ExportOptions};
use musae_core::tokens::{HOLD, SILENCE};
use musae_core::{PianoRoll, Segment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plausible two-bar band segments: a drum groove, a walking bass line,
/// held guitar chords' lowest notes and long string pads.
pub fn band_segments(n: usize, seed: u64) -> Vec<Segment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let t = 32;
            let root: u8 = rng.random_range(36..48);
            let kick_every = [4usize, 8][rng.random_range(0..2)];
            let drums: Vec<u8> = (0..t)
                .map(|s| match s % kick_every {
                    0 => 36,
                    x if x == kick_every / 2 => 38,
                    _ if s % 2 == 0 && rng.random_bool(0.5) => 42,
                    _ => SILENCE,
                })
                .collect();
            let mut bass = Vec::with_capacity(t);
            for s in 0..t {
                bass.push(if s % 4 == 0 {
                    root + [0u8, 7, 5, 3][(s / 4) % 4]
                } else if s % 4 == 1 {
                    HOLD
                } else {
                    SILENCE
                });
            }
            let mut guitar = Vec::with_capacity(t);
            for s in 0..t {
                guitar.push(if s % 8 == 0 {
                    root + 12 + [0u8, 4, 7, 5][(s / 8) % 4]
                } else if s % 8 < 6 {
                    HOLD
                } else {
                    SILENCE
                });
            }
            let strings: Vec<u8> = (0..t)
                .map(|s| match s {
                    0 | 16 => root + 24 + if s == 0 { 0 } else { 5 },
                    _ if rng.random_bool(0.1) => SILENCE,
                    _ => HOLD,
                })
                .collect();
            let roll = PianoRoll::from_tracks([&drums, &bass, &guitar, &strings]).unwrap().sanitized();
            Segment { roll, song_id: format!("band{i:03}"), genre_ids: vec![(i % 32) as u16] }
        })
        .collect()
}

pub fn random_roll(rng: &mut ChaCha8Rng, t: usize) -> PianoRoll {
    let cells = (0..t * 4).map(|_| rng.random_range(0..130u8)).collect();
    PianoRoll::new(t, cells).unwrap().sanitized()
}

pub type Corpus = (Vec<(String, Result<Vec<u8>, String>)>, BTreeMap<String, Vec<String>>);

/// Songs of `bars` bars stitched from band segments, so every window is
/// distinct and admissible. Tags cycle through 40 names.
pub fn midi_corpus(n: usize, bars: usize) -> Corpus {
    let per_song = bars / 2;
    let segs = band_segments(n * per_song, 21);
    let mut songs = Vec::new();
    let mut meta = BTreeMap::new();
    for (i, chunk) in segs.chunks(per_song).enumerate() {
        let rows: Vec<[u8; 4]> = chunk.iter().flat_map(|s| s.roll.rows()).collect();
        let roll = PianoRoll::from_rows(&rows).unwrap();
        let id = format!("song{i:02}");
        songs.push((id.clone(), Ok(export_midi(&roll, &ExportOptions::default()))));
        meta.insert(id, (0..8).map(|j| format!("tag{:02}", (i * 6 + j) % 40)).collect());
    }
    (songs, meta)
}
