use serde::{Deserialize, Serialize};
use std::fmt;

use crate::midi::Song;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NoTimeSignature,
    MultipleTimeSignatures,
    NotFourFour,
    NoDrums,
    NoBass,
    NoGuitar,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::NoTimeSignature => "no time signature",
            RejectReason::MultipleTimeSignatures => "multiple time signatures",
            RejectReason::NotFourFour => "time signature is not 4/4",
            RejectReason::NoDrums => "no drums",
            RejectReason::NoBass => "no bass",
            RejectReason::NoGuitar => "no guitar or piano",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterOutcome {
    pub accepted: bool,
    pub reason: Option<RejectReason>,
}

pub(crate) fn is_bass_program(program: u8) -> bool {
    (32..=39).contains(&program)
}

pub(crate) fn is_guitar_program(program: u8) -> bool {
    program <= 31
}

/// Keeps songs with a single 4/4 time signature and at least one non-empty
/// drums, bass and guitar/piano track.
pub fn filter_song(song: &Song) -> FilterOutcome {
    let reject = |r| FilterOutcome { accepted: false, reason: Some(r) };
    match song.time_signatures.as_slice() {
        [] => return reject(RejectReason::NoTimeSignature),
        [ts] if ts.numerator == 4 && ts.denominator == 4 => {}
        [_] => return reject(RejectReason::NotFourFour),
        _ => return reject(RejectReason::MultipleTimeSignatures),
    }
    let tracks = song.tracks.iter().filter(|t| !t.is_empty());
    let (mut drums, mut bass, mut guitar) = (false, false, false);
    for t in tracks {
        if t.is_drums() {
            drums = true;
        } else if is_bass_program(t.program) {
            bass = true;
        } else if is_guitar_program(t.program) {
            guitar = true;
        }
    }
    if !drums {
        reject(RejectReason::NoDrums)
    } else if !bass {
        reject(RejectReason::NoBass)
    } else if !guitar {
        reject(RejectReason::NoGuitar)
    } else {
        FilterOutcome { accepted: true, reason: None }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn accepts_complete_band() {
        let out = filter_song(&song(band(), &[(0, 4, 4)]));
        assert_eq!(out, FilterOutcome { accepted: true, reason: None });
    }

    #[test]
    fn rejects_meter_changes() {
        let out = filter_song(&song(band(), &[(0, 4, 4), (64, 3, 4)]));
        assert_eq!(out.reason, Some(RejectReason::MultipleTimeSignatures));
        assert_eq!(out.reason.unwrap().to_string(), "multiple time signatures");
        assert_eq!(filter_song(&song(band(), &[(0, 3, 4)])).reason, Some(RejectReason::NotFourFour));
        assert_eq!(filter_song(&song(band(), &[])).reason, Some(RejectReason::NoTimeSignature));
    }

    #[test]
    fn rejects_missing_instruments() {
        let mut t = band();
        t.remove(0);
        let out = filter_song(&song(t, &[(0, 4, 4)]));
        assert_eq!(out.reason, Some(RejectReason::NoDrums));
        assert_eq!(out.reason.unwrap().to_string(), "no drums");

        let mut t = band();
        t[1].events.clear();
        assert_eq!(filter_song(&song(t, &[(0, 4, 4)])).reason, Some(RejectReason::NoBass));

        let mut t = band();
        t[2].program = 48;
        assert_eq!(filter_song(&song(t, &[(0, 4, 4)])).reason, Some(RejectReason::NoGuitar));
    }

    #[test]
    fn drum_channel_with_bass_program_is_not_bass() {
        let t = vec![track(9, 33, &[(0, 36, 1)]), track(1, 0, &[(0, 60, 4)])];
        assert_eq!(filter_song(&song(t, &[(0, 4, 4)])).reason, Some(RejectReason::NoBass));
    }
}
