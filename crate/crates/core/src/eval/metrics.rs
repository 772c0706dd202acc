//! Low-level musical descriptors of a pianoroll segment.

use serde::{Deserialize, Serialize};

use crate::tokens::{is_pitch, PianoRoll, Track, HOLD, N_TRACKS, SILENCE};

/// Bumped whenever a definition below changes, so stored profiles stay
/// comparable.
pub const METRICS_VERSION: u32 = 1;

/// Metric names in the order [`TrackMetrics::values`] reports them.
pub const METRIC_NAMES: [&str; 8] = [
    "notes_count",
    "avg_note_length",
    "avg_pitch",
    "pitch_range",
    "avg_pitch_step",
    "silence_ratio",
    "hold_ratio",
    "unique_pitches",
];

/// Descriptors of one track, or of all four pooled. Pitch statistics are
/// `None` when there is nothing to average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackMetrics {
    /// Number of cells the statistics were computed over.
    pub cells: usize,
    /// Onset tokens.
    pub notes_count: usize,
    /// Mean of (onset + following holds), in timesteps.
    pub avg_note_length: Option<f64>,
    pub avg_pitch: Option<f64>,
    pub pitch_range: Option<u32>,
    /// Mean `|Δpitch|` between consecutive onsets of the same track.
    pub avg_pitch_step: Option<f64>,
    pub silence_ratio: f64,
    pub hold_ratio: f64,
    pub unique_pitches: usize,
}

impl TrackMetrics {
    pub fn values(&self) -> [Option<f64>; 8] {
        [
            Some(self.notes_count as f64),
            self.avg_note_length,
            self.avg_pitch,
            self.pitch_range.map(f64::from),
            self.avg_pitch_step,
            Some(self.silence_ratio),
            Some(self.hold_ratio),
            Some(self.unique_pitches as f64),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub version: u32,
    /// Drums, bass, guitar, strings.
    pub tracks: Vec<TrackMetrics>,
    /// All tracks pooled: counts summed, means taken over the pooled notes,
    /// ratios over all `4T` cells.
    pub aggregate: TrackMetrics,
}

#[derive(Default)]
struct Tally {
    cells: usize,
    holds: usize,
    silences: usize,
    lengths: Vec<usize>,
    pitches: Vec<u8>,
    steps: Vec<u32>,
}

impl Tally {
    fn add(&mut self, tokens: &[u8]) {
        self.cells += tokens.len();
        let mut prev: Option<u8> = None;
        let mut current: Option<usize> = None;
        for &tok in tokens {
            if is_pitch(tok) {
                if let Some(p) = prev {
                    self.steps.push(u32::from(p.abs_diff(tok)));
                }
                prev = Some(tok);
                self.pitches.push(tok);
                self.lengths.push(1);
                current = Some(self.lengths.len() - 1);
            } else if tok == HOLD {
                self.holds += 1;
                if let Some(i) = current {
                    self.lengths[i] += 1;
                }
            } else {
                debug_assert_eq!(tok, SILENCE);
                self.silences += 1;
                current = None;
            }
        }
    }

    fn finish(self) -> TrackMetrics {
        let mean = |xs: &mut dyn Iterator<Item = f64>, n: usize| (n > 0).then(|| xs.sum::<f64>() / n as f64);
        let n = self.pitches.len();
        let mut unique = self.pitches.clone();
        unique.sort_unstable();
        unique.dedup();
        let cells = self.cells.max(1) as f64;
        TrackMetrics {
            cells: self.cells,
            notes_count: n,
            avg_note_length: mean(&mut self.lengths.iter().map(|&l| l as f64), n),
            avg_pitch: mean(&mut self.pitches.iter().map(|&p| f64::from(p)), n),
            pitch_range: (n > 0).then(|| u32::from(unique[unique.len() - 1] - unique[0])),
            avg_pitch_step: mean(&mut self.steps.iter().map(|&s| f64::from(s)), self.steps.len()),
            silence_ratio: self.silences as f64 / cells,
            hold_ratio: self.holds as f64 / cells,
            unique_pitches: unique.len(),
        }
    }
}

/// Metrics of a single token sequence.
pub fn track_metrics(tokens: &[u8]) -> TrackMetrics {
    let mut t = Tally::default();
    t.add(tokens);
    t.finish()
}

pub fn compute_metrics(roll: &PianoRoll) -> MetricVector {
    let mut pooled = Tally::default();
    let mut tracks = Vec::with_capacity(N_TRACKS);
    for track in Track::ALL {
        let tokens = roll.track(track);
        tracks.push(track_metrics(&tokens));
        pooled.add(&tokens);
    }
    MetricVector { version: METRICS_VERSION, tracks, aggregate: pooled.finish() }
}
