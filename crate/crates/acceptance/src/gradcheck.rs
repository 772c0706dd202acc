//! Finite-difference checks of the analytic gradients in double precision.

use musae_core::nn::{ModelConfig, ParamTree};
use musae_core::train::{autoencoder_objective, critic_objective};
use musae_core::{Model64, PianoRoll, SigmaMode};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::random_roll;

// Five-point stencil: truncation error O(h⁴) lets h stay large enough that
// rounding noise in the loss does not swamp gradients near 1e-7.
const H: f64 = 1e-4;

/// Coordinates sampled per check.
pub const COORDINATES: usize = 100;

fn five_point(mut f: impl FnMut(f64) -> f64) -> f64 {
    (-f(2.0 * H) + 8.0 * f(H) - 8.0 * f(-H) + f(-2.0 * H)) / (12.0 * H)
}

pub fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / (a.abs() + n.abs()).max(1e-8)
}

/// N_z = 8, N_h = 16, T = 8.
pub fn small_model(layers: usize, sigma_mode: SigmaMode) -> Model64 {
    let cfg = ModelConfig { latent_dim: 8, hidden: 16, layers, timesteps: 8, sigma_mode };
    let mut model = Model64::init(cfg, 11).unwrap();
    // sharpen the critic so the generator term carries real signal
    for (_, mut t) in model.critic.tensors_mut() {
        t.mapv_inplace(|x| 3.0 * x);
    }
    model
}

/// Picks `count` (tensor, flat index) coordinates uniformly over all parameters.
fn pick(sizes: &[usize], count: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let total: usize = sizes.iter().sum();
    (0..count)
        .map(|_| {
            let mut k = rng.random_range(0..total);
            let mut i = 0;
            while k >= sizes[i] {
                k -= sizes[i];
                i += 1;
            }
            (i, k)
        })
        .collect()
}

fn flatten<T: ParamTree<f64>>(tree: &T) -> Vec<Vec<f64>> {
    tree.tensors().into_iter().map(|(_, t)| t.iter().copied().collect()).collect()
}

fn nudge<T: ParamTree<f64>>(tree: &mut T, i: usize, k: usize, delta: f64) -> f64 {
    let mut ts = tree.tensors_mut();
    let v = ts[i].1.as_slice_mut().expect("parameters are contiguous");
    let old = v[k];
    v[k] = old + delta;
    old
}

fn restore<T: ParamTree<f64>>(tree: &mut T, i: usize, k: usize, old: f64) {
    tree.tensors_mut()[i].1.as_slice_mut().expect("parameters are contiguous")[k] = old;
}

/// Worst relative error of the encoder/decoder gradient (β = 0.7, so the
/// adversarial term flows through the critic into the encoder).
pub fn autoencoder_worst(layers: usize, sigma_mode: SigmaMode) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut model = small_model(layers, sigma_mode);
    let rolls: Vec<PianoRoll> = (0..3).map(|_| random_roll(&mut rng, 8)).collect();
    let eps = model.sample_noise(3, &mut rng);
    let beta = 0.7;
    let grads = flatten(&autoencoder_objective(&model, &rolls, Some(eps.clone()), beta).1);
    let sizes: Vec<usize> = grads.iter().map(Vec::len).collect();
    let mut worst: f64 = 0.0;
    for (i, k) in pick(&sizes, COORDINATES, &mut rng) {
        let numeric = five_point(|delta| {
            let old = nudge(&mut model.autoencoder, i, k, delta);
            let l = autoencoder_objective(&model, &rolls, Some(eps.clone()), beta).0.total;
            restore(&mut model.autoencoder, i, k, old);
            l
        });
        let analytic = grads[i][k];
        // coordinates whose gradient is exactly zero (untouched one-hot rows)
        if analytic.abs() < 1e-10 && numeric.abs() < 1e-9 {
            continue;
        }
        worst = worst.max(rel_err(analytic, numeric));
    }
    worst
}

/// Worst relative error of the critic gradient, gradient penalty included.
pub fn critic_worst() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut model = small_model(1, SigmaMode::Exp2);
    let real = Array2::from_shape_fn((5, 8), |_| rng.random_range(-1.0..1.0));
    let fake = Array2::from_shape_fn((5, 8), |_| rng.random_range(-1.0..1.0));
    let alphas: Vec<f64> = (0..5).map(|_| rng.random()).collect();
    let grads = flatten(&critic_objective(&model.critic, &real, &fake, &alphas, 10.0).1);
    let sizes: Vec<usize> = grads.iter().map(Vec::len).collect();
    let mut worst: f64 = 0.0;
    for (i, k) in pick(&sizes, COORDINATES, &mut rng) {
        let numeric = five_point(|delta| {
            let old = nudge(&mut model.critic, i, k, delta);
            let l = critic_objective(&model.critic, &real, &fake, &alphas, 10.0).0.total;
            restore(&mut model.critic, i, k, old);
            l
        });
        worst = worst.max(rel_err(grads[i][k], numeric));
    }
    worst
}
