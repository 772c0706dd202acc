use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::TrainError;
use crate::nn::ModelConfig;
use crate::pipeline::GenreVocabulary;
use crate::prior::{FlowerPrior, Prior, DEFAULT_COMPONENTS, DEFAULT_RADIAL_VARIANCE, DEFAULT_TANGENTIAL_VARIANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrSchedule {
    /// `lr0 · (1 − rate)^step`
    #[default]
    Exponential,
    /// `lr0 / (1 + rate · step)`
    InverseTime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub lr0: f64,
    pub lr_decay: f64,
    pub lr_schedule: LrSchedule,
    pub beta_step: f64,
    pub beta_interval: u64,
    pub gp_lambda: f64,
    pub n_critic: usize,
    pub max_updates: u64,
    pub seed: u64,
    /// Steps between metrics records.
    pub log_interval: u64,
    /// Steps between validation passes; 0 disables them.
    pub eval_interval: u64,
    /// Steps between checkpoints; 0 keeps only the final one.
    pub checkpoint_interval: u64,
    /// Upper bound on validation segments per pass.
    pub eval_samples: usize,
    /// Draw a fresh transposition for every segment each epoch.
    pub augment_per_epoch: bool,
    /// Let segments without genre ids draw from a random flower component.
    pub allow_untagged: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 256,
            lr0: 1e-4,
            lr_decay: 1e-4,
            lr_schedule: LrSchedule::Exponential,
            beta_step: 0.1,
            beta_interval: 10_000,
            gp_lambda: 10.0,
            n_critic: 5,
            max_updates: 100_000,
            seed: 0,
            log_interval: 100,
            eval_interval: 1_000,
            checkpoint_interval: 10_000,
            eval_samples: 1_024,
            augment_per_epoch: false,
            allow_untagged: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: &str| Err(TrainError::Config(msg.to_string()));
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return bad("lr0 must be positive");
        }
        if !(0.0..1.0).contains(&self.lr_decay) {
            return bad("lr_decay must lie in [0, 1)");
        }
        if !(self.beta_step >= 0.0 && self.beta_step.is_finite()) {
            return bad("beta_step must be non-negative");
        }
        if self.beta_interval == 0 {
            return bad("beta_interval must be positive");
        }
        if !(self.gp_lambda >= 0.0 && self.gp_lambda.is_finite()) {
            return bad("gp_lambda must be non-negative");
        }
        if self.log_interval == 0 {
            return bad("log_interval must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    Isotropic,
    #[default]
    Flower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub kind: PriorKind,
    pub n_components: usize,
    pub radial_variance: f64,
    pub tangential_variance: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            kind: PriorKind::Flower,
            n_components: DEFAULT_COMPONENTS,
            radial_variance: DEFAULT_RADIAL_VARIANCE,
            tangential_variance: DEFAULT_TANGENTIAL_VARIANCE,
        }
    }
}

impl PriorConfig {
    /// The flower prior maps genre ids onto components through the
    /// vocabulary's circle order.
    pub fn build(&self, latent_dim: usize, vocab: &GenreVocabulary) -> Result<Prior, TrainError> {
        match self.kind {
            PriorKind::Isotropic => Ok(Prior::Isotropic { latent_dim }),
            PriorKind::Flower => {
                let spec =
                    FlowerPrior::new(self.n_components, latent_dim, self.radial_variance, self.tangential_variance)?;
                if let Some(&c) = vocab.circle_order.iter().find(|&&c| c >= self.n_components) {
                    return Err(TrainError::Config(format!(
                        "vocabulary places a genre on component {c}, but the prior has {} components",
                        self.n_components
                    )));
                }
                Ok(Prior::Flower { spec, genre_map: vocab.circle_order.clone() })
            }
        }
    }
}

/// Everything a `train` run reads from its TOML file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub prior: PriorConfig,
    pub train: TrainConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, TrainError> {
        let cfg: Self = toml::from_str(text).map_err(|e| TrainError::Config(e.to_string()))?;
        cfg.model.validate()?;
        cfg.train.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, TrainError> {
        let text = fs::read_to_string(path).map_err(|source| TrainError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }
}
