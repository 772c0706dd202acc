//! Loss values together with analytic parameter gradients.

use ndarray::{Array1, Array2};

use super::loss::cross_entropy_rows;
use crate::nn::{Autoencoder, CriticParams, Model, ParamTree};
use crate::scalar::Scalar;
use crate::tokens::{PianoRoll, N_TRACKS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutoencoderLosses<S> {
    /// Mean per-cell cross entropy.
    pub reconstruction: S,
    /// `−mean d(z)`.
    pub generator: S,
    /// `reconstruction + β · generator`.
    pub total: S,
    /// Argmax accuracy on this batch.
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticLosses<S> {
    /// `mean d(fake) − mean d(real) + λ · penalty`.
    pub total: S,
    pub penalty: S,
    /// `mean d(real) − mean d(fake)`.
    pub wasserstein: S,
}

/// Reconstruction cross entropy plus `beta` times the generator loss, with
/// gradients for the encoder and decoders. The critic is read but never
/// differentiated. `eps = None` encodes deterministically.
pub fn autoencoder_objective<S: Scalar>(
    model: &Model<S>,
    rolls: &[PianoRoll],
    eps: Option<Array2<S>>,
    beta: S,
) -> (AutoencoderLosses<S>, Autoencoder<S>) {
    let fp = model.forward_train(rolls, eps);
    let batch = rolls.len();
    let steps = model.config.timesteps;
    let cells = (batch * steps * N_TRACKS) as f64;
    let norm = S::of(1.0 / cells);
    let z = &fp.encoded.z;
    let mut grads = model.autoencoder.zeroed();
    let mut dz = Array2::<S>::zeros(z.raw_dim());
    let mut recon = S::zero();
    let mut correct = 0usize;
    for (k, (cache, decoder)) in fp.decoders.iter().zip(&model.autoencoder.decoders).enumerate() {
        let y: Vec<usize> =
            (0..steps).flat_map(|t| rolls.iter().map(move |r| r.as_bytes()[t * N_TRACKS + k] as usize)).collect();
        let (loss, mut dlogits, c) = cross_entropy_rows(&cache.logits, &y);
        recon += loss;
        correct += c;
        dlogits *= norm;
        dz += &decoder.backward(z, cache, &dlogits, &mut grads.decoders[k]);
    }
    recon *= norm;

    let critic_cache = model.critic.forward(z);
    let generator = -critic_cache.scores.sum() / S::of(batch as f64);
    if beta != S::zero() {
        let (gz, _, _) = model.critic.input_grads(&critic_cache);
        dz.scaled_add(-beta / S::of(batch as f64), &gz);
    }
    model.autoencoder.encoder.backward(&fp.encoder, &dz, &mut grads.encoder);
    let losses = AutoencoderLosses {
        reconstruction: recon,
        generator,
        total: recon + beta * generator,
        accuracy: correct as f64 / cells,
    };
    (losses, grads)
}

/// WGAN-GP critic objective with gradients for the critic only.
pub fn critic_objective<S: Scalar>(
    critic: &CriticParams<S>,
    real: &Array2<S>,
    fake: &Array2<S>,
    alphas: &[S],
    gp_lambda: S,
) -> (CriticLosses<S>, CriticParams<S>) {
    assert_eq!(real.dim(), fake.dim(), "real and fake batches must match");
    let n = S::of(real.nrows() as f64);
    let mut grads = critic.zeroed();
    let cf = critic.forward(fake);
    let cr = critic.forward(real);
    let wasserstein = cr.scores.sum() / n - cf.scores.sum() / n;
    critic.backward(&cf, &Array1::from_elem(fake.nrows(), S::one() / n), &mut grads);
    critic.backward(&cr, &Array1::from_elem(real.nrows(), -S::one() / n), &mut grads);

    let mut z_hat = real.clone();
    for ((mut row, f), &a) in z_hat.rows_mut().into_iter().zip(fake.rows()).zip(alphas) {
        row.zip_mut_with(&f, |r, &f| *r = a * f + (S::one() - a) * *r);
    }
    let penalty = critic.penalty_backward(&z_hat, gp_lambda, &mut grads);
    (CriticLosses { total: -wasserstein + gp_lambda * penalty, penalty, wasserstein }, grads)
}
