use ndarray::{Array1, Array2, ArrayView1};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::nn::Model;
use crate::scalar::Scalar;
use crate::tokens::{PianoRoll, Segment};

fn check_alpha(alpha: f64) -> Result<(), EvalError> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(EvalError::Alpha(alpha))
    }
}

/// `(1 − α) z1 + α z2`: α measures progress away from `z1`.
pub fn interpolate_latent<S: Scalar>(z1: ArrayView1<S>, z2: ArrayView1<S>, alpha: f64) -> Result<Array1<S>, EvalError> {
    check_alpha(alpha)?;
    if z1.len() != z2.len() {
        return Err(EvalError::Shape(format!("latent lengths {} and {}", z1.len(), z2.len())));
    }
    let a = S::of(alpha);
    Ok(&z1 * (S::one() - a) + &z2 * a)
}

/// Fraction of (timestep, track) cells holding different tokens.
pub fn normalized_hamming(a: &PianoRoll, b: &PianoRoll) -> Result<f64, EvalError> {
    if a.timesteps() != b.timesteps() {
        return Err(EvalError::Shape(format!("{} vs {} timesteps", a.timesteps(), b.timesteps())));
    }
    let diff = a.as_bytes().iter().zip(b.as_bytes()).filter(|(x, y)| x != y).count();
    Ok(diff as f64 / a.as_bytes().len() as f64)
}

/// Each cell independently takes `x2`'s token with probability `alpha`,
/// otherwise `x1`'s. The result may contain holds that no longer continue a
/// note; it is a distance baseline, not music.
pub fn bernoulli_baseline<R: Rng + ?Sized>(
    x1: &PianoRoll,
    x2: &PianoRoll,
    alpha: f64,
    rng: &mut R,
) -> Result<PianoRoll, EvalError> {
    check_alpha(alpha)?;
    if x1.timesteps() != x2.timesteps() {
        return Err(EvalError::Shape(format!("{} vs {} timesteps", x1.timesteps(), x2.timesteps())));
    }
    let cells =
        x1.as_bytes().iter().zip(x2.as_bytes()).map(|(&a, &b)| if rng.random_bool(alpha) { b } else { a }).collect();
    Ok(PianoRoll::new(x1.timesteps(), cells).expect("tokens copied from valid rolls"))
}

/// `n` evenly spaced points from 0 to 1 inclusive.
pub fn alpha_grid(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationCurve {
    pub alphas: Vec<f64>,
    /// Mean normalized hamming distance to `x1` per alpha.
    pub mean_hamming: Vec<f64>,
    pub pairs: usize,
}

/// Decodes `(1 − α) μ(x1) + α μ(x2)` on the grid and averages
/// `h(decoded, x1)` over the pairs.
pub fn interpolation_curve<S: Scalar>(
    model: &Model<S>,
    pairs: &[(PianoRoll, PianoRoll)],
    alphas: &[f64],
) -> Result<InterpolationCurve, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptySplit);
    }
    for &a in alphas {
        check_alpha(a)?;
    }
    let x1: Vec<PianoRoll> = pairs.iter().map(|p| p.0.clone()).collect();
    let x2: Vec<PianoRoll> = pairs.iter().map(|p| p.1.clone()).collect();
    let z1 = model.encode_mean(&x1)?;
    let z2 = model.encode_mean(&x2)?;
    let mut mean_hamming = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let a = S::of(alpha);
        let z: Array2<S> = &z1 * (S::one() - a) + &z2 * a;
        let decoded = model.decode(&z)?.tokens;
        let total: f64 = decoded.iter().zip(&x1).map(|(d, x)| normalized_hamming(d, x)).sum::<Result<f64, _>>()?;
        mean_hamming.push(total / pairs.len() as f64);
    }
    Ok(InterpolationCurve { alphas: alphas.to_vec(), mean_hamming, pairs: pairs.len() })
}

/// Mean `h(bernoulli_baseline(x1, x2, α), x1)` per alpha.
pub fn bernoulli_curve<R: Rng + ?Sized>(
    pairs: &[(PianoRoll, PianoRoll)],
    alphas: &[f64],
    rng: &mut R,
) -> Result<InterpolationCurve, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptySplit);
    }
    let mut mean_hamming = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let mut total = 0.0;
        for (x1, x2) in pairs {
            total += normalized_hamming(&bernoulli_baseline(x1, x2, alpha, rng)?, x1)?;
        }
        mean_hamming.push(total / pairs.len() as f64);
    }
    Ok(InterpolationCurve { alphas: alphas.to_vec(), mean_hamming, pairs: pairs.len() })
}

/// `n` pairs of distinct segments drawn uniformly without replacement
/// within each pair.
pub fn sample_pairs<R: Rng + ?Sized>(segments: &[Segment], n: usize, rng: &mut R) -> Vec<(PianoRoll, PianoRoll)> {
    if segments.len() < 2 {
        return Vec::new();
    }
    (0..n)
        .map(|_| {
            let idx = sample(rng, segments.len(), 2);
            (segments[idx.index(0)].roll.clone(), segments[idx.index(1)].roll.clone())
        })
        .collect()
}
