//! Fixtures shared by the acceptance suite and the detailed test targets:
//! a minimal SMF writer for crafted MIDI files, golden corpora with their
//! expected token grids, hand-computed metric tracks, and a finite
//! difference gradient checker.

pub mod golden;
pub mod gradcheck;
pub mod metrics;

use musae_core::tokens::{HOLD, SILENCE};
use musae_core::{PianoRoll, Segment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform random tokens, repaired so every hold continues a note.
pub fn random_roll(rng: &mut ChaCha8Rng, t: usize) -> PianoRoll {
    let cells = (0..t * 4).map(|_| rng.random_range(0..130u8)).collect();
    PianoRoll::new(t, cells).unwrap().sanitized()
}

/// Random rolls with musically plausible run lengths: each cell continues
/// the previous note with probability 0.5, otherwise a fresh onset or rest.
pub fn random_sparse_roll(rng: &mut ChaCha8Rng, t: usize) -> PianoRoll {
    let cells = (0..t * 4)
        .map(|_| match rng.random_range(0..4) {
            0 | 1 => HOLD,
            2 => SILENCE,
            _ => rng.random_range(24..100u8),
        })
        .collect();
    PianoRoll::new(t, cells).unwrap().sanitized()
}

/// Plausible two-bar band segments: a drum groove, a walking bass line,
/// held guitar notes and long string pads, all keyed off a random root.
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
            let bass: Vec<u8> = (0..t)
                .map(|s| match s % 4 {
                    0 => root + [0u8, 7, 5, 3][(s / 4) % 4],
                    1 => HOLD,
                    _ => SILENCE,
                })
                .collect();
            let guitar: Vec<u8> = (0..t)
                .map(|s| match s % 8 {
                    0 => root + 12 + [0u8, 4, 7, 5][(s / 8) % 4],
                    1..=5 => HOLD,
                    _ => SILENCE,
                })
                .collect();
            let strings: Vec<u8> = (0..t)
                .map(|s| match s {
                    0 => root + 24,
                    16 => root + 29,
                    _ if rng.random_bool(0.1) => SILENCE,
                    _ => HOLD,
                })
                .collect();
            let roll = PianoRoll::from_tracks([&drums, &bass, &guitar, &strings]).unwrap().sanitized();
            Segment { roll, song_id: format!("band{i:03}"), genre_ids: vec![(i % 32) as u16] }
        })
        .collect()
}
