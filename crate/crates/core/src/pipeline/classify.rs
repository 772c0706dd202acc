use serde::{Deserialize, Serialize};

use super::filter::{is_bass_program, is_guitar_program};
use crate::midi::Song;

/// Indices into `Song::tracks` for one drums/bass/guitar combination; every
/// other melodic track is merged into `strings`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackAssignment {
    pub drums: usize,
    pub bass: usize,
    pub guitar: usize,
    pub strings: Vec<usize>,
}

/// Cross product of all non-empty drums, bass and guitar/piano tracks.
///
/// Melodic tracks whose program is neither bass nor guitar/piano form the
/// merged strings track, identical across assignments.
pub fn classify_tracks(song: &Song) -> Vec<TrackAssignment> {
    let mut drums = Vec::new();
    let mut bass = Vec::new();
    let mut guitar = Vec::new();
    let mut strings = Vec::new();
    for (i, t) in song.tracks.iter().enumerate().filter(|(_, t)| !t.is_empty()) {
        if t.is_drums() {
            drums.push(i);
        } else if is_bass_program(t.program) {
            bass.push(i);
        } else if is_guitar_program(t.program) {
            guitar.push(i);
        } else {
            strings.push(i);
        }
    }
    let mut out = Vec::with_capacity(drums.len() * bass.len() * guitar.len());
    for &d in &drums {
        for &b in &bass {
            for &g in &guitar {
                out.push(TrackAssignment { drums: d, bass: b, guitar: g, strings: strings.clone() });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::filter::fixtures::{song, track};

    fn n(ch: u8, prog: u8) -> crate::midi::SongTrack {
        track(ch, prog, &[(0, 50, 1)])
    }

    #[test]
    fn cross_product_counts() {
        let s = song(vec![n(9, 0), n(9, 0), n(0, 33), n(1, 0)], &[(0, 4, 4)]);
        assert_eq!(classify_tracks(&s).len(), 2);

        let s = song(vec![n(9, 0), n(9, 0), n(0, 33), n(2, 34), n(1, 0), n(3, 25)], &[(0, 4, 4)]);
        let a = classify_tracks(&s);
        assert_eq!(a.len(), 8);
        let mut combos: Vec<_> = a.iter().map(|x| (x.drums, x.bass, x.guitar)).collect();
        combos.dedup();
        assert_eq!(combos.len(), 8);
    }

    #[test]
    fn remaining_tracks_merge_into_strings() {
        let s = song(vec![n(9, 0), n(0, 33), n(1, 0), n(2, 48), n(3, 56), n(4, 80)], &[(0, 4, 4)]);
        let a = classify_tracks(&s);
        assert_eq!(a, vec![TrackAssignment { drums: 0, bass: 1, guitar: 2, strings: vec![3, 4, 5] }]);
    }

    #[test]
    fn empty_tracks_ignored() {
        let s = song(vec![n(9, 0), track(9, 0, &[]), n(0, 33), n(1, 0)], &[(0, 4, 4)]);
        let a = classify_tracks(&s);
        assert_eq!(a.len(), 1);
        assert!(a[0].strings.is_empty());
    }
}
