use ndarray::{Array1, Array2, Array4};
use rand::Rng;

use crate::nn::Critic;
use crate::scalar::Scalar;
use crate::tokens::{PianoRoll, N_TRACKS};

/// Mean over batch, timesteps and tracks of `−ln p(true token)` given
/// normalised `(batch, timesteps, track, token)` probabilities.
pub fn reconstruction_loss<S: Scalar>(targets: &[PianoRoll], probs: &Array4<S>) -> S {
    let tiny = S::min_positive_value();
    let mut total = 0.0;
    let mut cells = 0usize;
    for (b, roll) in targets.iter().enumerate() {
        for t in 0..roll.timesteps() {
            for k in 0..N_TRACKS {
                let tok = roll.as_bytes()[t * N_TRACKS + k] as usize;
                total -= probs[[b, t, k, tok]].max(tiny).ln().f64();
                cells += 1;
            }
        }
    }
    S::of(total / cells as f64)
}

/// Cross entropy of one track's logits (`rows = t * B + b`) against integer
/// targets, via log-sum-exp. Returns the summed loss and `softmax − onehot`,
/// both unnormalised.
pub(crate) fn cross_entropy_rows<S: Scalar>(logits: &Array2<S>, targets: &[usize]) -> (S, Array2<S>, usize) {
    let mut grad = logits.clone();
    let mut loss = S::zero();
    let mut correct = 0;
    for ((mut row, lg), &y) in grad.rows_mut().into_iter().zip(logits.rows()).zip(targets) {
        let mut best = 0;
        let mut m = S::neg_infinity();
        for (j, &v) in lg.iter().enumerate() {
            if v > m {
                m = v;
                best = j;
            }
        }
        if best == y {
            correct += 1;
        }
        row.mapv_inplace(|x| (x - m).exp_fast());
        let sum = row.sum();
        loss += sum.ln() + m - lg[y];
        row /= sum;
        row[y] -= S::one();
    }
    (loss, grad, correct)
}

/// Same quantity as [`reconstruction_loss`] computed from per-track logits
/// laid out `(t * B + b, token)`.
pub fn reconstruction_loss_from_logits<S: Scalar>(targets: &[PianoRoll], logits: &[Array2<S>]) -> S {
    let batch = targets.len();
    let steps = targets[0].timesteps();
    let mut total = S::zero();
    for (k, lg) in logits.iter().enumerate() {
        let y: Vec<usize> =
            (0..steps).flat_map(|t| targets.iter().map(move |r| r.as_bytes()[t * N_TRACKS + k] as usize)).collect();
        total += cross_entropy_rows(lg, &y).0;
    }
    total / S::of((batch * steps * N_TRACKS) as f64)
}

fn interpolate<S: Scalar>(real: &Array2<S>, fake: &Array2<S>, alphas: &[S]) -> Array2<S> {
    assert_eq!(real.dim(), fake.dim(), "real and fake batches must match");
    assert_eq!(alphas.len(), real.nrows());
    let mut z = real.clone();
    for ((mut row, f), &a) in z.rows_mut().into_iter().zip(fake.rows()).zip(alphas) {
        row.zip_mut_with(&f, |r, &f| *r = a * f + (S::one() - a) * *r);
    }
    z
}

fn sample_alphas<S: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<S> {
    (0..n).map(|_| S::of(rng.random::<f64>())).collect()
}

/// `mean_b (‖∇ d(ẑ_b)‖₂ − 1)²` at `ẑ = α·fake + (1−α)·real`, without λ.
pub fn gradient_penalty_with_alpha<S: Scalar, C: Critic<S>>(
    real: &Array2<S>,
    fake: &Array2<S>,
    critic: &C,
    alphas: &[S],
) -> S {
    let z_hat = interpolate(real, fake, alphas);
    let g = critic.input_gradient(&z_hat);
    let n = S::of(g.nrows() as f64);
    g.rows()
        .into_iter()
        .map(|r| {
            let d = r.dot(&r).sqrt() - S::one();
            d * d
        })
        .sum::<S>()
        / n
}

pub fn gradient_penalty<S: Scalar, C: Critic<S>, R: Rng + ?Sized>(
    real: &Array2<S>,
    fake: &Array2<S>,
    critic: &C,
    rng: &mut R,
) -> S {
    let alphas = sample_alphas(real.nrows(), rng);
    gradient_penalty_with_alpha(real, fake, critic, &alphas)
}

fn mean<S: Scalar>(x: &Array1<S>) -> S {
    x.sum() / S::of(x.len() as f64)
}

/// `mean d(fake) − mean d(real) + λ · GP`; prior draws are `real`, encoder
/// codes are `fake`.
pub fn critic_loss_with_alpha<S: Scalar, C: Critic<S>>(
    real: &Array2<S>,
    fake: &Array2<S>,
    critic: &C,
    gp_lambda: S,
    alphas: &[S],
) -> S {
    mean(&critic.score(fake)) - mean(&critic.score(real))
        + gp_lambda * gradient_penalty_with_alpha(real, fake, critic, alphas)
}

pub fn critic_loss<S: Scalar, C: Critic<S>, R: Rng + ?Sized>(
    real: &Array2<S>,
    fake: &Array2<S>,
    critic: &C,
    gp_lambda: S,
    rng: &mut R,
) -> S {
    let alphas = sample_alphas(real.nrows(), rng);
    critic_loss_with_alpha(real, fake, critic, gp_lambda, &alphas)
}

/// `−mean d(fake)`.
pub fn generator_loss<S: Scalar, C: Critic<S>>(fake: &Array2<S>, critic: &C) -> S {
    -mean(&critic.score(fake))
}
