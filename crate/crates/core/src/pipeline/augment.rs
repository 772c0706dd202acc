use rand::Rng;

use crate::tokens::{is_pitch, PianoRoll, Track};

pub const MIN_SHIFT: i8 = -5;
pub const MAX_SHIFT: i8 = 6;
const MAX_ATTEMPTS: usize = 12;

/// Shifts every melodic pitch by `semitones`; drums, hold and silence are
/// untouched. Returns `None` if a pitch would leave 0..=127.
pub fn transpose(roll: &PianoRoll, semitones: i8) -> Option<PianoRoll> {
    let mut out = roll.clone();
    for track in Track::ALL.into_iter().filter(|t| t.is_melodic()) {
        for t in 0..roll.timesteps() {
            let tok = roll.get(t, track);
            if is_pitch(tok) {
                let p = tok as i16 + semitones as i16;
                if !(0..=127).contains(&p) {
                    return None;
                }
                out.set(t, track, p as u8);
            }
        }
    }
    Some(out)
}

/// Random transposition drawn uniformly from [-5, 6], redrawn while it would
/// push a pitch out of range; falls back to the identity after 12 attempts.
pub fn augment_transpose<R: Rng + ?Sized>(roll: &PianoRoll, rng: &mut R) -> (PianoRoll, i8) {
    for _ in 0..MAX_ATTEMPTS {
        let k = rng.random_range(MIN_SHIFT..=MAX_SHIFT);
        if let Some(out) = transpose(roll, k) {
            return (out, k);
        }
    }
    (roll.clone(), 0)
}
