//! Encoder, per-track decoders and latent critic.

mod checkpoint;
mod critic;
mod decoder;
mod encoder;
mod lstm;
mod model;
mod params;

pub use checkpoint::{Checkpoint, NamedTensor, CHECKPOINT_VERSION};
pub use critic::{Critic, CriticParams, LinearCritic};
pub use decoder::{DecoderOutput, DecoderParams};
pub use encoder::{EncoderOutput, EncoderParams};
pub use lstm::LstmParams;
pub use model::{Autoencoder, Model};
pub use params::{Affine, ParamTree};

#[cfg(test)]
pub(crate) use decoder::assemble_output;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// How the encoder's second head maps to a standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// `σ = exp(2 σ_pre)`.
    #[default]
    Exp2,
    /// `σ² = exp(2 σ_pre)`, i.e. `σ = exp(σ_pre)`.
    LogVariance,
}

impl SigmaMode {
    pub(crate) fn factor(self) -> f64 {
        match self {
            SigmaMode::Exp2 => 2.0,
            SigmaMode::LogVariance => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub latent_dim: usize,
    pub hidden: usize,
    pub layers: usize,
    pub timesteps: usize,
    pub sigma_mode: SigmaMode,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::full()
    }
}

impl ModelConfig {
    /// Laptop-sized profile used for tests and the overfit experiment.
    pub fn desk() -> Self {
        Self { latent_dim: 32, hidden: 128, layers: 1, timesteps: 32, sigma_mode: SigmaMode::Exp2 }
    }

    pub fn full() -> Self {
        Self { latent_dim: 512, hidden: 1024, layers: 3, timesteps: 32, sigma_mode: SigmaMode::Exp2 }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.latent_dim == 0 || self.hidden == 0 || self.layers == 0 || self.timesteps == 0 {
            return Err(ModelError::Config(format!(
                "all dimensions must be positive (latent {}, hidden {}, layers {}, timesteps {})",
                self.latent_dim, self.hidden, self.layers, self.timesteps
            )));
        }
        Ok(())
    }
}
