use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::nn::Model;
use crate::scalar::Scalar;
use crate::tokens::{PianoRoll, Segment, N_TRACKS};

/// Per-track argmax reconstruction accuracy with the two averages reported
/// alongside it: `dbg` over drums, bass and guitar, `dbgs` over all four.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub drums: f64,
    pub bass: f64,
    pub guitar: f64,
    pub strings: f64,
    pub dbg: f64,
    pub dbgs: f64,
    pub segments: usize,
}

impl AccuracyTable {
    fn from_counts(correct: [usize; N_TRACKS], cells_per_track: usize, segments: usize) -> Self {
        let a = correct.map(|c| c as f64 / cells_per_track as f64);
        Self {
            drums: a[0],
            bass: a[1],
            guitar: a[2],
            strings: a[3],
            dbg: (a[0] + a[1] + a[2]) / 3.0,
            dbgs: (a[0] + a[1] + a[2] + a[3]) / 4.0,
            segments,
        }
    }

    pub fn per_track(&self) -> [f64; N_TRACKS] {
        [self.drums, self.bass, self.guitar, self.strings]
    }
}

/// Accuracy of `predicted` against `targets`, cell by cell.
pub fn accuracy_table(targets: &[PianoRoll], predicted: &[PianoRoll]) -> Result<AccuracyTable, EvalError> {
    if targets.is_empty() {
        return Err(EvalError::EmptySplit);
    }
    if targets.len() != predicted.len() {
        return Err(EvalError::Shape(format!("{} targets but {} predictions", targets.len(), predicted.len())));
    }
    let steps = targets[0].timesteps();
    let mut correct = [0usize; N_TRACKS];
    for (x, y) in targets.iter().zip(predicted) {
        if x.timesteps() != steps || y.timesteps() != steps {
            return Err(EvalError::Shape(format!("expected {steps} timesteps")));
        }
        for (cx, cy) in x.as_bytes().chunks_exact(N_TRACKS).zip(y.as_bytes().chunks_exact(N_TRACKS)) {
            for k in 0..N_TRACKS {
                correct[k] += usize::from(cx[k] == cy[k]);
            }
        }
    }
    Ok(AccuracyTable::from_counts(correct, steps * targets.len(), targets.len()))
}

/// Eval-mode (`z = μ`) argmax reconstruction accuracy over `segments`.
/// Counts are integers, so the result does not depend on `batch_size`.
pub fn reconstruction_accuracy<S: Scalar>(
    model: &Model<S>,
    segments: &[Segment],
    batch_size: usize,
) -> Result<AccuracyTable, EvalError> {
    if segments.is_empty() {
        return Err(EvalError::EmptySplit);
    }
    let rolls: Vec<PianoRoll> = segments.iter().map(|s| s.roll.clone()).collect();
    let predicted: Vec<Vec<PianoRoll>> =
        rolls.par_chunks(batch_size.max(1)).map(|chunk| model.reconstruct(chunk)).collect::<Result<_, _>>()?;
    accuracy_table(&rolls, &predicted.concat())
}
