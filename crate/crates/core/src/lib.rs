//! Adversarial autoencoder for four-track symbolic music.
//!
//! Songs are quantized into a 130-token pianoroll per track, encoded by a
//! bidirectional LSTM into a latent code, and decoded by one LSTM per track.
//! A WGAN-GP critic pulls the encoder's codes toward either an isotropic
//! Gaussian or a genre-conditioned mixture laid out on a circle.
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix the
//! common choices.

pub mod error;
pub mod eval;
pub mod midi;
pub mod nn;
pub mod pipeline;
pub mod prior;
mod scalar;
pub mod tokens;
pub mod train;

pub use error::{CheckpointError, EvalError, MidiError, ModelError, PipelineError, PriorError, TokenError, TrainError};
pub use nn::{Checkpoint, Model, ModelConfig, SigmaMode};
pub use prior::{FlowerPrior, Prior};
pub use scalar::Scalar;
pub use tokens::{PianoRoll, Segment, Track};

/// Single-precision model, used for training, checkpoints and serving.
pub type Model32 = nn::Model<f32>;
/// Double-precision model, used for gradient checks.
pub type Model64 = nn::Model<f64>;
pub type Trainer32 = train::Trainer<f32>;
pub type Trainer64 = train::Trainer<f64>;
