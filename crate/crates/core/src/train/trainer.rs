use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use log::{info, warn};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::config::{RunConfig, TrainConfig};
use super::loss::cross_entropy_rows;
use super::objective::{autoencoder_objective, critic_objective};
use super::schedule::{anneal_beta, decay_lr};
use crate::error::{CheckpointError, ModelError, TrainError};
use crate::nn::{Autoencoder, Checkpoint, CriticParams, Model, ParamTree};
use crate::pipeline::{augment_transpose, Dataset, GenreVocabulary};
use crate::prior::Prior;
use crate::scalar::Scalar;
use crate::tokens::{PianoRoll, Segment, N_TRACKS};

// Separate seed domains so data order never shares a stream with noise draws.
const ORDER_DOMAIN: u64 = 0x6f72_6465_7200_0000;
const AUGMENT_DOMAIN: u64 = 0x6175_676d_0000_0000;

/// Losses and schedule values of one `train_step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLosses {
    /// Step index the update was computed at (before incrementing).
    pub step: u64,
    pub beta: f64,
    pub lr: f64,
    pub reconstruction: f64,
    pub accuracy: f64,
    pub generator: f64,
    /// Last critic update's total loss.
    pub critic: f64,
    pub wasserstein: f64,
    pub penalty: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationStats {
    pub segments: usize,
    pub reconstruction: f64,
    pub accuracy: f64,
}

/// One line of `metrics.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    #[serde(flatten)]
    pub train: StepLosses,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub validation: Option<ValidationStats>,
}

/// The batch that produced a non-finite loss, kept for post-mortem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchDump {
    pub step: u64,
    pub song_ids: Vec<String>,
    pub genre_ids: Vec<Vec<u16>>,
    /// Time-major token rows per segment.
    pub rolls: Vec<Vec<[u8; N_TRACKS]>>,
    pub reconstruction: f64,
    pub generator: f64,
    pub critic: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TrainState {
    step: u64,
    adam_ae_t: u64,
    adam_critic_t: u64,
    // u128 does not survive JSON round trips everywhere
    rng_word_pos: String,
}

pub struct Trainer<S: Scalar> {
    pub model: Model<S>,
    pub prior: Prior,
    pub config: TrainConfig,
    ae_opt: Adam<S, Autoencoder<S>>,
    critic_opt: Adam<S, CriticParams<S>>,
    step: u64,
    rng: ChaCha8Rng,
}

impl<S: Scalar> Trainer<S> {
    pub fn new(model: Model<S>, prior: Prior, config: TrainConfig) -> Result<Self, TrainError> {
        config.validate()?;
        if prior.latent_dim() != model.latent_dim() {
            return Err(ModelError::LatentDim { expected: model.latent_dim(), got: prior.latent_dim() }.into());
        }
        let ae_opt = Adam::new(&model.autoencoder);
        let critic_opt = Adam::new(&model.critic);
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Self { model, prior, config, ae_opt, critic_opt, step: 0, rng })
    }

    /// Fresh model initialised from the run's seed.
    pub fn from_run_config(run: &RunConfig, vocab: &GenreVocabulary) -> Result<Self, TrainError> {
        let model = Model::init(run.model.clone(), run.train.seed)?;
        let prior = run.prior.build(run.model.latent_dim, vocab)?;
        Self::new(model, prior, run.train.clone())
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn beta(&self) -> f64 {
        anneal_beta(self.step, self.config.beta_step, self.config.beta_interval)
    }

    pub fn lr(&self) -> f64 {
        decay_lr(self.step, self.config.lr0, self.config.lr_decay, self.config.lr_schedule)
    }

    /// `n_critic` critic updates followed by one joint encoder/decoder update.
    pub fn train_step(&mut self, batch: &[Segment]) -> Result<StepLosses, TrainError> {
        if batch.is_empty() {
            return Err(ModelError::EmptyBatch.into());
        }
        let rolls: Vec<PianoRoll> = batch.iter().map(|s| s.roll.clone()).collect();
        self.model.check_batch(&rolls)?;
        let genre_ids: Vec<Vec<u16>> = batch.iter().map(|s| s.genre_ids.clone()).collect();
        let (lr, beta) = (self.lr(), self.beta());
        let n = rolls.len();

        // The encoder is frozen during the critic phase, so μ and σ are
        // computed once and only the noise is redrawn.
        let posterior = self.model.encode_with_noise(&rolls, None)?;
        let (mut critic, mut wasserstein, mut penalty) = (0.0, 0.0, 0.0);
        for _ in 0..self.config.n_critic {
            let eps: Array2<S> = self.model.sample_noise(n, &mut self.rng);
            let fake = &posterior.mu + &(&posterior.sigma * &eps);
            let (real, _) =
                self.prior.sample_for_batch::<S, _>(&genre_ids, self.config.allow_untagged, &mut self.rng)?;
            let alphas: Vec<S> = (0..n).map(|_| S::of(self.rng.random::<f64>())).collect();
            let (losses, grads) =
                critic_objective(&self.model.critic, &real, &fake, &alphas, S::of(self.config.gp_lambda));
            critic = losses.total.f64();
            wasserstein = losses.wasserstein.f64();
            penalty = losses.penalty.f64();
            if !critic.is_finite() || !grads.all_finite() {
                return Err(self.non_finite("critic", batch, f64::NAN, f64::NAN, critic));
            }
            self.critic_opt.step(&mut self.model.critic, &grads, lr);
        }

        let eps = self.model.sample_noise(n, &mut self.rng);
        let (ae, grads) = autoencoder_objective(&self.model, &rolls, Some(eps), S::of(beta));
        let (reconstruction, generator) = (ae.reconstruction.f64(), ae.generator.f64());
        if !reconstruction.is_finite() || !generator.is_finite() || !grads.all_finite() {
            return Err(self.non_finite("autoencoder", batch, reconstruction, generator, critic));
        }
        self.ae_opt.step(&mut self.model.autoencoder, &grads, lr);

        let losses = StepLosses {
            step: self.step,
            beta,
            lr,
            reconstruction,
            accuracy: ae.accuracy,
            generator,
            critic,
            wasserstein,
            penalty,
        };
        self.step += 1;
        Ok(losses)
    }

    fn non_finite(
        &self,
        which: &'static str,
        batch: &[Segment],
        reconstruction: f64,
        generator: f64,
        critic: f64,
    ) -> TrainError {
        let dump = BatchDump {
            step: self.step,
            song_ids: batch.iter().map(|s| s.song_id.clone()).collect(),
            genre_ids: batch.iter().map(|s| s.genre_ids.clone()).collect(),
            rolls: batch.iter().map(|s| s.roll.rows()).collect(),
            reconstruction,
            generator,
            critic,
        };
        TrainError::NonFinite { which, step: self.step, dump: Box::new(dump) }
    }

    /// Indices of the batch used at `step`. Each epoch is a fresh permutation
    /// that depends only on the seed and the epoch number, so a resumed run
    /// sees the same order as an uninterrupted one.
    pub fn batch_indices(&self, step: u64, n: usize) -> Vec<usize> {
        let b = self.config.batch_size.min(n);
        let per_epoch = n.div_ceil(b) as u64;
        let epoch = step / per_epoch;
        let j = (step % per_epoch) as usize;
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ ORDER_DOMAIN);
        rng.set_stream(epoch);
        order.shuffle(&mut rng);
        order[j * b..((j + 1) * b).min(n)].to_vec()
    }

    fn batch_at(&self, step: u64, segments: &[Segment]) -> Vec<Segment> {
        let idx = self.batch_indices(step, segments.len());
        let mut batch: Vec<Segment> = idx.iter().map(|&i| segments[i].clone()).collect();
        if self.config.augment_per_epoch {
            let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ AUGMENT_DOMAIN);
            rng.set_stream(step);
            for s in &mut batch {
                s.roll = augment_transpose(&s.roll, &mut rng).0;
            }
        }
        batch
    }

    /// Eval-mode reconstruction loss and accuracy (`z = μ`).
    pub fn validate(&self, segments: &[Segment]) -> Result<ValidationStats, TrainError> {
        let segments = &segments[..segments.len().min(self.config.eval_samples.max(1))];
        if segments.is_empty() {
            return Err(TrainError::EmptyData);
        }
        let steps = self.model.timesteps();
        let (mut loss, mut correct) = (0.0, 0usize);
        for chunk in segments.chunks(self.config.batch_size) {
            let rolls: Vec<PianoRoll> = chunk.iter().map(|s| s.roll.clone()).collect();
            let z = self.model.encode_mean(&rolls)?;
            for (k, cache) in self.model.decode_logits(&z).iter().enumerate() {
                let y: Vec<usize> = (0..steps)
                    .flat_map(|t| rolls.iter().map(move |r| r.as_bytes()[t * N_TRACKS + k] as usize))
                    .collect();
                let (l, _, c) = cross_entropy_rows(&cache.logits, &y);
                loss += l.f64();
                correct += c;
            }
        }
        let cells = (segments.len() * steps * N_TRACKS) as f64;
        Ok(ValidationStats { segments: segments.len(), reconstruction: loss / cells, accuracy: correct as f64 / cells })
    }

    /// Serialises the model together with optimiser moments, step and RNG
    /// position.
    pub fn checkpoint(&self) -> Checkpoint {
        let mut ck = Checkpoint::from_model(&self.model);
        ck.push_tree("adam_ae_m", &self.ae_opt.m);
        ck.push_tree("adam_ae_v", &self.ae_opt.v);
        ck.push_tree("adam_critic_m", &self.critic_opt.m);
        ck.push_tree("adam_critic_v", &self.critic_opt.v);
        let state = TrainState {
            step: self.step,
            adam_ae_t: self.ae_opt.t,
            adam_critic_t: self.critic_opt.t,
            rng_word_pos: self.rng.get_word_pos().to_string(),
        };
        let to_json = |v: serde_json::Result<serde_json::Value>| v.expect("plain data serializes");
        ck.meta.insert("prior".into(), to_json(serde_json::to_value(&self.prior)));
        ck.meta.insert("train".into(), to_json(serde_json::to_value(&self.config)));
        ck.meta.insert("train_state".into(), to_json(serde_json::to_value(&state)));
        ck
    }

    /// Restores a trainer written by [`Trainer::checkpoint`]. `config`
    /// overrides the stored training configuration (e.g. a longer
    /// `max_updates`); the seed must match for the RNG to line up.
    pub fn resume(ck: &Checkpoint, config: Option<TrainConfig>) -> Result<Self, TrainError> {
        let meta = |key: &str| {
            ck.meta.get(key).cloned().ok_or_else(|| CheckpointError::Tensor {
                name: key.to_string(),
                reason: "missing from checkpoint metadata".into(),
            })
        };
        let parse = |key: &str| -> Result<serde_json::Value, TrainError> { Ok(meta(key)?) };
        let prior: Prior = serde_json::from_value(parse("prior")?).map_err(CheckpointError::from)?;
        let stored: TrainConfig = serde_json::from_value(parse("train")?).map_err(CheckpointError::from)?;
        let state: TrainState = serde_json::from_value(parse("train_state")?).map_err(CheckpointError::from)?;
        let config = config.unwrap_or(stored);
        let mut trainer = Self::new(ck.load_model()?, prior, config)?;
        ck.load_tree("adam_ae_m", &mut trainer.ae_opt.m)?;
        ck.load_tree("adam_ae_v", &mut trainer.ae_opt.v)?;
        ck.load_tree("adam_critic_m", &mut trainer.critic_opt.m)?;
        ck.load_tree("adam_critic_v", &mut trainer.critic_opt.v)?;
        trainer.ae_opt.t = state.adam_ae_t;
        trainer.critic_opt.t = state.adam_critic_t;
        trainer.step = state.step;
        let pos: u128 = state.rng_word_pos.parse().map_err(|_| CheckpointError::Tensor {
            name: "train_state".into(),
            reason: format!("bad rng position {:?}", state.rng_word_pos),
        })?;
        trainer.rng.set_word_pos(pos);
        Ok(trainer)
    }

    fn save(&self, path: &Path, vocab: &GenreVocabulary) -> Result<(), TrainError> {
        let mut ck = self.checkpoint();
        ck.meta.insert("vocabulary".into(), serde_json::to_value(vocab).expect("vocabulary serializes"));
        ck.write(path)?;
        Ok(())
    }

    /// Runs until `max_updates`, appending to `out_dir/metrics.jsonl` and
    /// writing `step_XXXXXXXX.ckpt` files plus `latest.ckpt`. Returns the
    /// path of the final checkpoint.
    pub fn train(&mut self, dataset: &Dataset, out_dir: &Path) -> Result<PathBuf, TrainError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| TrainError::Io { path, source }
        };
        if dataset.train.is_empty() {
            return Err(TrainError::EmptyData);
        }
        if dataset.timesteps() != self.model.timesteps() {
            return Err(ModelError::Timesteps { expected: self.model.timesteps(), got: dataset.timesteps() }.into());
        }
        fs::create_dir_all(out_dir).map_err(io(out_dir))?;
        let metrics_path = out_dir.join("metrics.jsonl");
        let mut metrics: File =
            OpenOptions::new().create(true).append(true).open(&metrics_path).map_err(io(&metrics_path))?;
        let vocab = dataset.vocabulary();
        let latest = out_dir.join("latest.ckpt");

        while self.step < self.config.max_updates {
            let batch = self.batch_at(self.step, &dataset.train);
            let losses = match self.train_step(&batch) {
                Ok(l) => l,
                Err(TrainError::NonFinite { which, step, dump }) => {
                    let path = out_dir.join(format!("nonfinite_step_{step}.json"));
                    let json = serde_json::to_vec_pretty(&dump).expect("dump serializes");
                    if let Err(e) = fs::write(&path, json) {
                        warn!("could not write batch dump {}: {e}", path.display());
                    }
                    return Err(TrainError::NonFinite { which, step, dump });
                }
                Err(e) => return Err(e),
            };
            let done = self.step;
            let eval_due = self.config.eval_interval > 0 && done.is_multiple_of(self.config.eval_interval);
            let validation = if eval_due && !dataset.validation.is_empty() {
                Some(self.validate(&dataset.validation)?)
            } else {
                None
            };
            if done.is_multiple_of(self.config.log_interval) || validation.is_some() {
                let record = MetricsRecord { train: losses, validation };
                let line = serde_json::to_string(&record).expect("record serializes");
                writeln!(metrics, "{line}").map_err(io(&metrics_path))?;
                info!(
                    "step {done}: recon {:.4} acc {:.4} critic {:.4} beta {:.2} lr {:.3e}",
                    losses.reconstruction, losses.accuracy, losses.critic, losses.beta, losses.lr
                );
            }
            if self.config.checkpoint_interval > 0 && done.is_multiple_of(self.config.checkpoint_interval) {
                self.save(&out_dir.join(format!("step_{done:08}.ckpt")), vocab)?;
                self.save(&latest, vocab)?;
            }
        }
        metrics.flush().map_err(io(&metrics_path))?;
        self.save(&latest, vocab)?;
        Ok(latest)
    }
}
