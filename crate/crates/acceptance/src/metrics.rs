//! Sixteen-cell tracks with metric values worked out by hand.

use musae_core::eval::TrackMetrics;
use musae_core::tokens::{HOLD as H, SILENCE as S};

pub struct HandTrack {
    pub name: &'static str,
    pub tokens: [u8; 16],
    pub expected: TrackMetrics,
}

#[allow(clippy::too_many_arguments)]
fn m(
    notes_count: usize,
    avg_note_length: Option<f64>,
    avg_pitch: Option<f64>,
    pitch_range: Option<u32>,
    avg_pitch_step: Option<f64>,
    silence_ratio: f64,
    hold_ratio: f64,
    unique_pitches: usize,
) -> TrackMetrics {
    TrackMetrics {
        cells: 16,
        notes_count,
        avg_note_length,
        avg_pitch,
        pitch_range,
        avg_pitch_step,
        silence_ratio,
        hold_ratio,
        unique_pitches,
    }
}

pub fn hand_tracks() -> Vec<HandTrack> {
    let rising: [u8; 16] = std::array::from_fn(|i| 60 + 2 * i as u8);
    vec![
        HandTrack { name: "all silence", tokens: [S; 16], expected: m(0, None, None, None, None, 1.0, 0.0, 0) },
        HandTrack {
            name: "one three-cell note",
            tokens: [60, H, H, S, S, S, S, S, S, S, S, S, S, S, S, S],
            expected: m(1, Some(3.0), Some(60.0), Some(0), None, 13.0 / 16.0, 2.0 / 16.0, 1),
        },
        HandTrack {
            name: "repeated dotted eighths",
            tokens: [60, H, H, S, 60, H, H, S, 60, H, H, S, 60, H, H, S],
            expected: m(4, Some(3.0), Some(60.0), Some(0), Some(0.0), 0.25, 0.5, 1),
        },
        HandTrack {
            name: "whole-tone run",
            tokens: rising,
            expected: m(16, Some(1.0), Some(75.0), Some(30), Some(2.0), 0.0, 0.0, 16),
        },
        HandTrack {
            name: "kick and hat",
            tokens: [36, S, 42, S, 36, S, 42, S, 36, S, 42, S, 36, S, 42, S],
            expected: m(8, Some(1.0), Some(39.0), Some(6), Some(6.0), 0.5, 0.0, 2),
        },
        HandTrack {
            name: "one bar pad",
            tokens: [48, H, H, H, H, H, H, H, H, H, H, H, H, H, H, H],
            expected: m(1, Some(16.0), Some(48.0), Some(0), None, 0.0, 15.0 / 16.0, 1),
        },
        HandTrack {
            name: "mixed lengths",
            tokens: [40, H, S, S, 45, H, H, H, S, S, S, S, 38, S, S, S],
            expected: m(3, Some(7.0 / 3.0), Some(41.0), Some(7), Some(6.0), 9.0 / 16.0, 4.0 / 16.0, 3),
        },
        HandTrack {
            name: "extreme pitches",
            tokens: [127, 0, 127, 0, S, S, S, S, S, S, S, S, S, S, S, S],
            expected: m(4, Some(1.0), Some(63.5), Some(127), Some(127.0), 0.75, 0.0, 2),
        },
        HandTrack {
            name: "quarter notes with a leap",
            tokens: [60, H, H, H, 60, H, H, H, 64, H, H, H, 60, H, H, H],
            expected: m(4, Some(4.0), Some(61.0), Some(4), Some(8.0 / 3.0), 0.0, 0.75, 2),
        },
        HandTrack {
            name: "re-struck sixteenths",
            tokens: [S, S, S, S, S, S, S, S, 72, 72, 72, 72, S, S, S, S],
            expected: m(4, Some(1.0), Some(72.0), Some(0), Some(0.0), 0.75, 0.0, 1),
        },
    ]
}
