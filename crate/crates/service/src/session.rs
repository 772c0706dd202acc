use std::path::Path;

use musae_core::midi::ExportOptions;
use musae_core::pipeline::{Dataset, GenreVocabulary};
use musae_core::{Checkpoint, CheckpointError, Model32, PipelineError, Prior, Segment};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("loading checkpoint: {0}")]
    Checkpoint(#[from] CheckpointError),
    #[error("loading dataset: {0}")]
    Data(#[from] PipelineError),
    #[error("checkpoint metadata: {0}")]
    Meta(#[from] serde_json::Error),
    #[error("{0}")]
    Mismatch(String),
}

/// Everything a request may read. Never mutated after construction.
pub struct Session {
    pub model: Model32,
    pub prior: Prior,
    pub vocabulary: GenreVocabulary,
    pub exemplars: Vec<Segment>,
    pub checkpoint_id: String,
    pub export: ExportOptions,
}

impl Session {
    pub fn new(
        model: Model32,
        prior: Prior,
        vocabulary: GenreVocabulary,
        exemplars: Vec<Segment>,
        checkpoint_id: impl Into<String>,
    ) -> Result<Self, SessionError> {
        if prior.latent_dim() != model.latent_dim() {
            return Err(SessionError::Mismatch(format!(
                "prior has latent dimension {}, model {}",
                prior.latent_dim(),
                model.latent_dim()
            )));
        }
        if let Some(s) = exemplars.iter().find(|s| s.roll.timesteps() != model.timesteps()) {
            return Err(SessionError::Mismatch(format!(
                "exemplar {} has {} timesteps, model expects {}",
                s.song_id,
                s.roll.timesteps(),
                model.timesteps()
            )));
        }
        Ok(Self {
            model,
            prior,
            vocabulary,
            exemplars,
            checkpoint_id: checkpoint_id.into(),
            export: ExportOptions::default(),
        })
    }

    /// Loads the checkpoint and takes exemplars from the dataset's
    /// validation split (the training split if validation is empty).
    pub fn load(checkpoint: &Path, data_dir: &Path) -> Result<Self, SessionError> {
        let ck = Checkpoint::read(checkpoint)?;
        let model: Model32 = ck.load_model()?;
        let prior = match ck.meta.get("prior") {
            Some(v) => serde_json::from_value(v.clone())?,
            None => Prior::Isotropic { latent_dim: model.latent_dim() },
        };
        let dataset = Dataset::load(data_dir)?;
        let exemplars = if dataset.validation.is_empty() { dataset.train.clone() } else { dataset.validation.clone() };
        let id = checkpoint.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        Self::new(model, prior, dataset.vocabulary().clone(), exemplars, id)
    }

    pub fn prior_kind(&self) -> &'static str {
        match self.prior {
            Prior::Isotropic { .. } => "isotropic",
            Prior::Flower { .. } => "flower",
        }
    }
}
