use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, Axis};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::nn::Model;
use crate::pipeline::GenreVocabulary;
use crate::scalar::Scalar;
use crate::tokens::{PianoRoll, Segment};

/// Principal axes of a point cloud, strongest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Array1<f64>,
    /// One unit direction per row.
    pub components: Array2<f64>,
    /// Sample variance along each direction.
    pub variances: Array1<f64>,
}

impl Pca {
    pub fn fit(points: &Array2<f64>) -> Result<Self, EvalError> {
        let (n, d) = points.dim();
        if n < 2 {
            return Err(EvalError::Shape(format!("PCA needs at least two points, got {n}")));
        }
        let mean = points.mean_axis(Axis(0)).expect("non-empty");
        let centred = points - &mean;
        let cov = centred.t().dot(&centred) / (n - 1) as f64;
        let eig = SymmetricEigen::new(DMatrix::from_fn(d, d, |i, j| cov[[i, j]]));
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let components = Array2::from_shape_fn((d, d), |(r, c)| eig.eigenvectors[(c, order[r])]);
        let variances = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
        Ok(Self { mean, components, variances })
    }

    /// Coordinates along the first `k` components.
    pub fn project(&self, points: &Array2<f64>, k: usize) -> Array2<f64> {
        (points - &self.mean).dot(&self.components.slice(ndarray::s![..k, ..]).t())
    }

    /// Inverse of [`Pca::project`] for the components used.
    pub fn reconstruct(&self, coords: &Array2<f64>) -> Array2<f64> {
        let k = coords.ncols();
        coords.dot(&self.components.slice(ndarray::s![..k, ..])) + &self.mean
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedPoint {
    pub x: f64,
    pub y: f64,
    pub genre: String,
    pub song_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaProjection {
    pub genre_a: String,
    pub genre_b: String,
    pub points: Vec<ProjectedPoint>,
    /// Variance along the two plotted axes.
    pub explained_variance: [f64; 2],
    pub total_variance: f64,
}

/// Encodes `n` segments tagged with exactly one of the two genres each and
/// projects their codes onto the top two principal directions of the
/// combined set.
pub fn pca_genre_projection<S: Scalar, R: Rng + ?Sized>(
    model: &Model<S>,
    segments: &[Segment],
    vocab: &GenreVocabulary,
    genre_a: &str,
    genre_b: &str,
    n: usize,
    rng: &mut R,
) -> Result<PcaProjection, EvalError> {
    let id = |g: &str| vocab.id_of(g).ok_or_else(|| EvalError::UnknownGenre(g.to_string()));
    let (a, b) = (id(genre_a)?, id(genre_b)?);
    let only = |yes: u16, no: u16| -> Vec<&Segment> {
        segments.iter().filter(|s| s.genre_ids.contains(&yes) && !s.genre_ids.contains(&no)).collect()
    };
    let (pool_a, pool_b) = (only(a, b), only(b, a));
    if pool_a.len() < n || pool_b.len() < n || n == 0 {
        return Err(EvalError::InsufficientSegments {
            genre_a: genre_a.to_string(),
            genre_b: genre_b.to_string(),
            count_a: pool_a.len(),
            count_b: pool_b.len(),
            needed: n.max(1),
        });
    }
    let mut pick = |pool: &[&Segment]| -> Vec<Segment> {
        let mut idx = sample(rng, pool.len(), n).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| pool[i].clone()).collect()
    };
    let chosen: Vec<(Segment, &str)> = pick(&pool_a)
        .into_iter()
        .map(|s| (s, genre_a))
        .chain(pick(&pool_b).into_iter().map(|s| (s, genre_b)))
        .collect();
    let rolls: Vec<PianoRoll> = chosen.iter().map(|(s, _)| s.roll.clone()).collect();
    let z = model.encode_mean(&rolls)?.mapv(|v| v.f64());
    let pca = Pca::fit(&z)?;
    let xy = pca.project(&z, 2.min(z.ncols()));
    let points = chosen
        .iter()
        .zip(xy.rows())
        .map(|((s, g), r)| ProjectedPoint {
            x: r[0],
            y: r.get(1).copied().unwrap_or(0.0),
            genre: g.to_string(),
            song_id: s.song_id.clone(),
        })
        .collect();
    Ok(PcaProjection {
        genre_a: genre_a.to_string(),
        genre_b: genre_b.to_string(),
        points,
        explained_variance: [pca.variances[0], pca.variances.get(1).copied().unwrap_or(0.0)],
        total_variance: pca.variances.sum(),
    })
}
