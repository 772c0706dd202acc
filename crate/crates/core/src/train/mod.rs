//! Two-phase adversarial autoencoder optimisation.

mod adam;
mod config;
mod loss;
mod objective;
mod schedule;
mod trainer;

pub use adam::Adam;
pub use config::{LrSchedule, PriorConfig, PriorKind, RunConfig, TrainConfig};
pub use loss::{
    critic_loss, critic_loss_with_alpha, generator_loss, gradient_penalty, gradient_penalty_with_alpha,
    reconstruction_loss, reconstruction_loss_from_logits,
};
pub use objective::{autoencoder_objective, critic_objective, AutoencoderLosses, CriticLosses};
pub use schedule::{anneal_beta, decay_lr};
pub use trainer::{BatchDump, MetricsRecord, StepLosses, Trainer, ValidationStats};
