//! Latent priors: the isotropic Gaussian baseline and the genre-conditioned
//! "flower" mixture whose components sit on the unit circle of the first two
//! latent coordinates.
//!
//! Component `i` has mean `[cos θᵢ, sin θᵢ, 0, …]` with `θᵢ = 2πi/n` and
//! covariance `Mᵢ S Mᵢᵀ`, where `S = diag(a₁, a₂, …, a₂)` and `Mᵢ` rotates the
//! leading 2-D block by `θᵢ`. Covariances are kept in this factored form; a
//! dense matrix is only built on request.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::PriorError;
use crate::scalar::Scalar;

pub const DEFAULT_COMPONENTS: usize = 32;
pub const DEFAULT_RADIAL_VARIANCE: f64 = 0.1;
pub const DEFAULT_TANGENTIAL_VARIANCE: f64 = 0.001;

fn angle(i: usize, n: usize) -> f64 {
    2.0 * std::f64::consts::PI * i as f64 / n as f64
}

fn check_component(i: usize, n: usize) -> Result<(), PriorError> {
    if i >= n {
        Err(PriorError::ComponentOutOfRange { index: i, n })
    } else {
        Ok(())
    }
}

/// Mean of mixture component `i` out of `n`.
pub fn flower_mean<S: Scalar>(i: usize, n: usize, latent_dim: usize) -> Result<Array1<S>, PriorError> {
    check_component(i, n)?;
    if latent_dim < 2 {
        return Err(PriorError::LatentDim(latent_dim));
    }
    let th = angle(i, n);
    let mut mu = Array1::zeros(latent_dim);
    mu[0] = S::of(th.cos());
    mu[1] = S::of(th.sin());
    Ok(mu)
}

/// Covariance `M S Mᵀ` stored as the rotation angle and the two variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactoredCovariance {
    pub cos: f64,
    pub sin: f64,
    pub radial: f64,
    pub tangential: f64,
    pub dim: usize,
}

impl FactoredCovariance {
    /// Leading 2x2 block of the rotation, `vᵀ`.
    pub fn rotation_block(&self) -> [[f64; 2]; 2] {
        [[self.cos, -self.sin], [self.sin, self.cos]]
    }

    /// Dense rotation matrix `M`.
    pub fn rotation<S: Scalar>(&self) -> Array2<S> {
        let mut m = Array2::eye(self.dim);
        let r = self.rotation_block();
        for a in 0..2 {
            for b in 0..2 {
                m[[a, b]] = S::of(r[a][b]);
            }
        }
        m
    }

    /// Dense diagonal `S`.
    pub fn scale<S: Scalar>(&self) -> Array2<S> {
        let mut s = Array2::eye(self.dim) * S::of(self.tangential);
        s[[0, 0]] = S::of(self.radial);
        s
    }

    /// Dense `M S M⁻¹`, with `M⁻¹ = Mᵀ`. The leading block is written in
    /// closed form so the result is exactly symmetric.
    pub fn dense<S: Scalar>(&self) -> Array2<S> {
        let (c, s) = (self.cos, self.sin);
        let mut sigma = Array2::eye(self.dim) * S::of(self.tangential);
        sigma[[0, 0]] = S::of(self.radial * c * c + self.tangential * s * s);
        sigma[[1, 1]] = S::of(self.radial * s * s + self.tangential * c * c);
        let off = S::of((self.radial - self.tangential) * c * s);
        sigma[[0, 1]] = off;
        sigma[[1, 0]] = off;
        sigma
    }

    pub fn trace(&self) -> f64 {
        self.radial + self.tangential * (self.dim - 1) as f64
    }

    /// Applies `M (√S ⊙ ε)` in place.
    fn colour<S: Scalar>(&self, eps: &mut [S]) {
        let (sr, st) = (S::of(self.radial.sqrt()), S::of(self.tangential.sqrt()));
        let e0 = eps[0] * sr;
        let e1 = eps[1] * st;
        let (c, s) = (S::of(self.cos), S::of(self.sin));
        eps[0] = c * e0 - s * e1;
        eps[1] = s * e0 + c * e1;
        for e in &mut eps[2..] {
            *e *= st;
        }
    }
}

/// Covariance of mixture component `i`.
pub fn flower_covariance(
    i: usize,
    n: usize,
    latent_dim: usize,
    radial: f64,
    tangential: f64,
) -> Result<FactoredCovariance, PriorError> {
    check_component(i, n)?;
    if latent_dim < 2 {
        return Err(PriorError::LatentDim(latent_dim));
    }
    if !(radial > 0.0 && tangential > 0.0) {
        return Err(PriorError::NonPositiveVariance { radial, tangential });
    }
    let th = angle(i, n);
    Ok(FactoredCovariance { cos: th.cos(), sin: th.sin(), radial, tangential, dim: latent_dim })
}

fn standard_normal<S: Scalar, R: Rng + ?Sized>(rng: &mut R) -> S {
    let v: f64 = StandardNormal.sample(rng);
    S::of(v)
}

/// Parameters of the flower mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowerPrior {
    pub n_components: usize,
    pub latent_dim: usize,
    pub radial_variance: f64,
    pub tangential_variance: f64,
}

impl FlowerPrior {
    pub fn new(
        n_components: usize,
        latent_dim: usize,
        radial_variance: f64,
        tangential_variance: f64,
    ) -> Result<Self, PriorError> {
        let spec = Self { n_components, latent_dim, radial_variance, tangential_variance };
        spec.covariance(0)?;
        Ok(spec)
    }

    pub fn with_dim(latent_dim: usize) -> Result<Self, PriorError> {
        Self::new(DEFAULT_COMPONENTS, latent_dim, DEFAULT_RADIAL_VARIANCE, DEFAULT_TANGENTIAL_VARIANCE)
    }

    pub fn mean<S: Scalar>(&self, i: usize) -> Result<Array1<S>, PriorError> {
        flower_mean(i, self.n_components, self.latent_dim)
    }

    pub fn covariance(&self, i: usize) -> Result<FactoredCovariance, PriorError> {
        flower_covariance(i, self.n_components, self.latent_dim, self.radial_variance, self.tangential_variance)
    }

    fn fill_row<S: Scalar, R: Rng + ?Sized>(&self, i: usize, row: &mut [S], rng: &mut R) -> Result<(), PriorError> {
        let cov = self.covariance(i)?;
        for e in row.iter_mut() {
            *e = standard_normal(rng);
        }
        cov.colour(row);
        row[0] += S::of(cov.cos);
        row[1] += S::of(cov.sin);
        Ok(())
    }

    /// `count` draws from component `i`, one per row.
    pub fn sample<S: Scalar, R: Rng + ?Sized>(
        &self,
        i: usize,
        count: usize,
        rng: &mut R,
    ) -> Result<Array2<S>, PriorError> {
        check_component(i, self.n_components)?;
        if count == 0 {
            return Err(PriorError::ZeroCount);
        }
        let mut z = Array2::zeros((count, self.latent_dim));
        for mut row in z.rows_mut() {
            self.fill_row(i, row.as_slice_mut().expect("standard layout"), rng)?;
        }
        Ok(z)
    }
}

/// Prior used during training: the latent distribution the critic treats as real.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Prior {
    Isotropic {
        latent_dim: usize,
    },
    Flower {
        spec: FlowerPrior,
        /// `genre_map[genre_id]` = component index.
        genre_map: Vec<usize>,
    },
}

impl Prior {
    pub fn latent_dim(&self) -> usize {
        match self {
            Prior::Isotropic { latent_dim } => *latent_dim,
            Prior::Flower { spec, .. } => spec.latent_dim,
        }
    }

    pub fn component_of(&self, genre: u16) -> Result<usize, PriorError> {
        match self {
            Prior::Isotropic { .. } => Ok(0),
            Prior::Flower { genre_map, .. } => {
                genre_map.get(genre as usize).copied().ok_or(PriorError::UnknownGenre(genre))
            }
        }
    }

    /// One draw per sample, returned with the component each row came from
    /// (always 0 for the isotropic prior).
    ///
    /// For the flower prior a single tag is chosen uniformly from each
    /// sample's genre ids and its component is sampled; a sample with no ids
    /// draws from a uniformly chosen component when `allow_untagged`, and is
    /// an error otherwise.
    pub fn sample_for_batch<S: Scalar, R: Rng + ?Sized>(
        &self,
        genre_ids: &[Vec<u16>],
        allow_untagged: bool,
        rng: &mut R,
    ) -> Result<(Array2<S>, Vec<usize>), PriorError> {
        let dim = self.latent_dim();
        let mut z = Array2::zeros((genre_ids.len(), dim));
        let mut components = vec![0; genre_ids.len()];
        match self {
            Prior::Isotropic { .. } => z.mapv_inplace(|_: S| standard_normal(rng)),
            Prior::Flower { spec, .. } => {
                for (b, (ids, mut row)) in genre_ids.iter().zip(z.rows_mut()).enumerate() {
                    let component = if ids.is_empty() {
                        if !allow_untagged {
                            return Err(PriorError::MissingGenre(b));
                        }
                        rng.random_range(0..spec.n_components)
                    } else {
                        self.component_of(ids[rng.random_range(0..ids.len())])?
                    };
                    components[b] = component;
                    spec.fill_row(component, row.as_slice_mut().expect("standard layout"), rng)?;
                }
            }
        }
        Ok((z, components))
    }

    /// Draws from a specific component (flower) or the isotropic Gaussian.
    pub fn sample_component<S: Scalar, R: Rng + ?Sized>(
        &self,
        component: Option<usize>,
        count: usize,
        rng: &mut R,
    ) -> Result<Array2<S>, PriorError> {
        if count == 0 {
            return Err(PriorError::ZeroCount);
        }
        match self {
            Prior::Isotropic { latent_dim } => {
                Ok(Array2::from_shape_simple_fn((count, *latent_dim), || standard_normal(rng)))
            }
            Prior::Flower { spec, .. } => match component {
                Some(i) => spec.sample(i, count, rng),
                None => {
                    let mut z = Array2::zeros((count, spec.latent_dim));
                    for mut row in z.rows_mut() {
                        let i = rng.random_range(0..spec.n_components);
                        spec.fill_row(i, row.as_slice_mut().expect("standard layout"), rng)?;
                    }
                    Ok(z)
                }
            },
        }
    }
}
