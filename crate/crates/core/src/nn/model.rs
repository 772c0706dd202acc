use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::critic::CriticParams;
use super::decoder::{assemble_output, DecoderCache, DecoderOutput, DecoderParams};
use super::encoder::{EncoderCache, EncoderOutput, EncoderParams};
use super::params::{join, ParamTree};
use super::ModelConfig;
use crate::error::ModelError;
use crate::scalar::Scalar;
use crate::tokens::{PianoRoll, Track, N_TRACKS};

/// Encoder plus the four track decoders: the parameters optimised by the
/// reconstruction/generator objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Autoencoder<S> {
    pub encoder: EncoderParams<S>,
    /// Indexed by [`Track::index`].
    pub decoders: Vec<DecoderParams<S>>,
}

impl<S: Scalar> ParamTree<S> for Autoencoder<S> {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, S>)>) {
        self.encoder.collect(&join(prefix, "encoder"), out);
        for (d, track) in self.decoders.iter().zip(Track::ALL) {
            d.collect(&join(prefix, &format!("decoder.{track}")), out);
        }
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, S>)>) {
        self.encoder.collect_mut(&join(prefix, "encoder"), out);
        for (d, track) in self.decoders.iter_mut().zip(Track::ALL) {
            d.collect_mut(&join(prefix, &format!("decoder.{track}")), out);
        }
    }
}

/// All trainable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<S> {
    pub config: ModelConfig,
    pub autoencoder: Autoencoder<S>,
    pub critic: CriticParams<S>,
}

impl<S: Scalar> ParamTree<S> for Model<S> {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, S>)>) {
        self.autoencoder.collect(prefix, out);
        self.critic.collect(&join(prefix, "critic"), out);
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, S>)>) {
        self.autoencoder.collect_mut(prefix, out);
        self.critic.collect_mut(&join(prefix, "critic"), out);
    }
}

pub(crate) struct ForwardPass<S> {
    pub encoded: EncoderOutput<S>,
    pub encoder: EncoderCache<S>,
    pub decoders: Vec<DecoderCache<S>>,
}

impl<S: Scalar> Model<S> {
    /// Deterministic initialisation from `seed`.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self, ModelError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let encoder = EncoderParams::init(&config, &mut rng);
        let decoders = (0..N_TRACKS).map(|_| DecoderParams::init(&config, &mut rng)).collect();
        let critic = CriticParams::init(&config, &mut rng);
        Ok(Self { config, autoencoder: Autoencoder { encoder, decoders }, critic })
    }

    pub fn latent_dim(&self) -> usize {
        self.config.latent_dim
    }

    pub fn timesteps(&self) -> usize {
        self.config.timesteps
    }

    pub(crate) fn check_batch(&self, rolls: &[PianoRoll]) -> Result<(), ModelError> {
        if rolls.is_empty() {
            return Err(ModelError::EmptyBatch);
        }
        for r in rolls {
            if r.timesteps() != self.config.timesteps {
                return Err(ModelError::Timesteps { expected: self.config.timesteps, got: r.timesteps() });
            }
        }
        Ok(())
    }

    pub(crate) fn check_latent(&self, z: &Array2<S>) -> Result<(), ModelError> {
        if z.ncols() != self.config.latent_dim {
            return Err(ModelError::LatentDim { expected: self.config.latent_dim, got: z.ncols() });
        }
        if z.nrows() == 0 {
            return Err(ModelError::EmptyBatch);
        }
        Ok(())
    }

    pub fn sample_noise<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Array2<S> {
        Array2::from_shape_simple_fn((batch, self.config.latent_dim), || {
            let v: f64 = StandardNormal.sample(rng);
            S::of(v)
        })
    }

    /// Encodes with explicit reparameterisation noise; `None` gives `z = μ`.
    pub fn encode_with_noise(
        &self,
        rolls: &[PianoRoll],
        eps: Option<Array2<S>>,
    ) -> Result<EncoderOutput<S>, ModelError> {
        self.check_batch(rolls)?;
        if let Some(e) = &eps {
            self.check_latent(e)?;
        }
        Ok(self.autoencoder.encoder.forward(rolls, eps).0)
    }

    pub fn encode<R: Rng + ?Sized>(
        &self,
        rolls: &[PianoRoll],
        rng: &mut R,
        stochastic: bool,
    ) -> Result<EncoderOutput<S>, ModelError> {
        let eps = stochastic.then(|| self.sample_noise(rolls.len(), rng));
        self.encode_with_noise(rolls, eps)
    }

    /// Eval-mode encoding, `z = μ`.
    pub fn encode_mean(&self, rolls: &[PianoRoll]) -> Result<Array2<S>, ModelError> {
        Ok(self.encode_with_noise(rolls, None)?.mu)
    }

    pub(crate) fn decode_logits(&self, z: &Array2<S>) -> Vec<DecoderCache<S>> {
        self.autoencoder.decoders.iter().map(|d| d.forward(z, self.config.timesteps)).collect()
    }

    pub fn decode(&self, z: &Array2<S>) -> Result<DecoderOutput<S>, ModelError> {
        self.check_latent(z)?;
        let caches = self.decode_logits(z);
        let logits: Vec<Array2<S>> = caches.into_iter().map(|c| c.logits).collect();
        Ok(assemble_output(&logits, z.nrows(), self.config.timesteps))
    }

    /// Argmax reconstruction through `z = μ`.
    pub fn reconstruct(&self, rolls: &[PianoRoll]) -> Result<Vec<PianoRoll>, ModelError> {
        let z = self.encode_mean(rolls)?;
        Ok(self.decode(&z)?.tokens)
    }

    pub fn discriminate(&self, z: &Array2<S>) -> Result<Array1<S>, ModelError> {
        self.check_latent(z)?;
        Ok(self.critic.forward(z).scores)
    }

    pub(crate) fn forward_train(&self, rolls: &[PianoRoll], eps: Option<Array2<S>>) -> ForwardPass<S> {
        let (encoded, encoder) = self.autoencoder.encoder.forward(rolls, eps);
        let decoders = self.decode_logits(&encoded.z);
        ForwardPass { encoded, encoder, decoders }
    }

    /// Converts to another scalar type (e.g. `f32` checkpoint into `f64`).
    pub fn cast<T: Scalar>(&self) -> Model<T> {
        let mut out = Model::<T>::init(self.config.clone(), 0).expect("config already validated");
        for ((_, src), (_, mut dst)) in self.tensors().into_iter().zip(out.tensors_mut()) {
            dst.zip_mut_with(&src, |d, &s| *d = T::of(s.f64()));
        }
        out
    }
}
