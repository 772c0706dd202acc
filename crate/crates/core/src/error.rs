use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::tokens::Track;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TokenError {
    #[error("pianoroll must have at least one timestep")]
    Empty,
    #[error("expected {expected} cells, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("token {token} at timestep {timestep}, track {track} is outside 0..=129")]
    OutOfRange { timestep: usize, track: usize, token: u32 },
    #[error("hold token at timestep {timestep} on {track} does not continue a note")]
    OrphanHold { timestep: usize, track: Track },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed MIDI at byte {offset}: {reason}")]
pub struct MidiError {
    pub offset: usize,
    pub reason: String,
}

impl MidiError {
    pub(crate) fn new(offset: usize, reason: impl Into<String>) -> Self {
        Self { offset, reason: reason.into() }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("no MIDI files found in {0}")]
    EmptyCorpus(PathBuf),
    #[error("no segments survived preprocessing")]
    NoSegments,
    #[error("dataset shard is corrupt: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Token(#[from] TokenError),
}

impl PipelineError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PriorError {
    #[error("component {index} out of range for {n} components")]
    ComponentOutOfRange { index: usize, n: usize },
    #[error("latent dimension must be at least 2, got {0}")]
    LatentDim(usize),
    #[error("variances must be positive (radial {radial}, tangential {tangential})")]
    NonPositiveVariance { radial: f64, tangential: f64 },
    #[error("unknown genre id {0}")]
    UnknownGenre(u16),
    #[error("sample {0} carries no genre id")]
    MissingGenre(usize),
    #[error("at least one draw is required")]
    ZeroCount,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("latent batch has dimension {got}, model expects {expected}")]
    LatentDim { expected: usize, got: usize },
    #[error("all segments in a batch must have {expected} timesteps, got {got}")]
    Timesteps { expected: usize, got: usize },
    #[error("empty batch")]
    EmptyBatch,
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("checkpoint manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("checkpoint truncated: {0}")]
    Truncated(String),
    #[error("tensor {name}: {reason}")]
    Tensor { name: String, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("non-finite {which} loss at step {step}")]
    NonFinite { which: &'static str, step: u64, dump: Box<crate::train::BatchDump> },
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("training split is empty")]
    EmptyData,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Prior(#[from] PriorError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("split is empty")]
    EmptySplit,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("alpha {0} outside [0, 1]")]
    Alpha(f64),
    #[error("not enough exclusive segments: {genre_a} has {count_a}, {genre_b} has {count_b}, need {needed} each")]
    InsufficientSegments { genre_a: String, genre_b: String, count_a: usize, count_b: usize, needed: usize },
    #[error("unknown genre {0}")]
    UnknownGenre(String),
    #[error("genre metric profile requires a flower prior")]
    NotFlower,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Prior(#[from] PriorError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("plot rendering: {0}")]
    Plot(String),
}
