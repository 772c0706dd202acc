use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::accuracy::{reconstruction_accuracy, AccuracyTable};
use super::interpolation::{alpha_grid, bernoulli_curve, interpolation_curve, sample_pairs, InterpolationCurve};
use super::metrics::METRICS_VERSION;
use super::pca::{pca_genre_projection, PcaProjection};
use super::plot;
use super::profile::{genre_metric_profile, GenreProfile};
use crate::error::EvalError;
use crate::nn::Model;
use crate::pipeline::{Dataset, GenreVocabulary, Split};
use crate::prior::Prior;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub split: Split,
    pub batch_size: usize,
    pub interp_pairs: usize,
    pub interp_steps: usize,
    pub profile_samples: usize,
    /// Genre pair for the PCA projection; skipped when `None`.
    pub genres: Option<(String, String)>,
    pub pca_per_genre: usize,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            split: Split::Validation,
            batch_size: 256,
            interp_pairs: 256,
            interp_steps: 11,
            profile_samples: 256,
            genres: None,
            pca_per_genre: 128,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub model: InterpolationCurve,
    pub bernoulli: InterpolationCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metrics_version: u32,
    pub split: Split,
    pub accuracy: AccuracyTable,
    pub interpolation: Option<InterpolationReport>,
    pub genre_profile: Option<GenreProfile>,
    pub pca: Option<PcaProjection>,
    /// Analyses that were skipped, and why.
    pub skipped: Vec<String>,
}

/// Genre tag sitting on each mixture component.
pub fn component_labels(vocab: &GenreVocabulary, n_components: usize) -> Vec<Option<String>> {
    let mut labels = vec![None; n_components];
    for (id, &c) in vocab.circle_order.iter().enumerate() {
        if let Some(slot) = labels.get_mut(c) {
            *slot = Some(vocab.tags[id].clone());
        }
    }
    labels
}

/// Runs every analysis that applies to this model and dataset.
pub fn evaluate<S: Scalar>(
    model: &Model<S>,
    prior: &Prior,
    dataset: &Dataset,
    options: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    let segments = dataset.split(options.split);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut skipped = Vec::new();
    let accuracy = reconstruction_accuracy(model, segments, options.batch_size)?;

    let pairs = sample_pairs(segments, options.interp_pairs, &mut rng);
    let interpolation = if pairs.is_empty() {
        skipped.push("interpolation: fewer than two segments".into());
        None
    } else {
        let alphas = alpha_grid(options.interp_steps.max(2));
        let model_curve = pairs
            .chunks(options.batch_size.max(1))
            .map(|chunk| interpolation_curve(model, chunk, &alphas))
            .collect::<Result<Vec<_>, _>>()?;
        Some(InterpolationReport {
            model: merge_curves(&model_curve),
            bernoulli: bernoulli_curve(&pairs, &alphas, &mut rng)?,
        })
    };

    let genre_profile = match prior {
        Prior::Flower { spec, .. } => {
            let mut p = genre_metric_profile(model, prior, options.profile_samples, &mut rng)?;
            p.labels = component_labels(dataset.vocabulary(), spec.n_components);
            Some(p)
        }
        Prior::Isotropic { .. } => {
            skipped.push("genre profile: model was trained with the isotropic prior".into());
            None
        }
    };

    let pca = match &options.genres {
        Some((a, b)) => {
            Some(pca_genre_projection(model, segments, dataset.vocabulary(), a, b, options.pca_per_genre, &mut rng)?)
        }
        None => {
            skipped.push("pca: no genre pair requested".into());
            None
        }
    };

    Ok(EvalReport {
        metrics_version: METRICS_VERSION,
        split: options.split,
        accuracy,
        interpolation,
        genre_profile,
        pca,
        skipped,
    })
}

/// Pair-weighted mean of curves computed on disjoint chunks.
fn merge_curves(parts: &[InterpolationCurve]) -> InterpolationCurve {
    let pairs: usize = parts.iter().map(|c| c.pairs).sum();
    let mut mean = vec![0.0; parts[0].alphas.len()];
    for c in parts {
        for (m, v) in mean.iter_mut().zip(&c.mean_hamming) {
            *m += v * c.pairs as f64 / pairs as f64;
        }
    }
    InterpolationCurve { alphas: parts[0].alphas.clone(), mean_hamming: mean, pairs }
}

/// Writes `report.json` and one PNG per analysis present; returns the
/// files written.
pub fn write_report(report: &EvalReport, dir: &Path) -> Result<Vec<PathBuf>, EvalError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| EvalError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    let json_path = dir.join("report.json");
    fs::write(&json_path, serde_json::to_vec_pretty(report).expect("report serializes")).map_err(io(&json_path))?;
    written.push(json_path);

    if let Some(interp) = &report.interpolation {
        let path = dir.join("interpolation.png");
        plot::line_chart(
            &path,
            &[
                (&interp.model.alphas, &interp.model.mean_hamming),
                (&interp.bernoulli.alphas, &interp.bernoulli.mean_hamming),
            ],
        )?;
        written.push(path);
    }
    if let Some(profile) = &report.genre_profile {
        let path = dir.join("genre_profile.png");
        plot::heatmap(&path, &profile.rows)?;
        written.push(path);
    }
    if let Some(pca) = &report.pca {
        let path = dir.join("pca.png");
        let pts: Vec<(f64, f64, usize)> =
            pca.points.iter().map(|p| (p.x, p.y, usize::from(p.genre != pca.genre_a))).collect();
        plot::scatter(&path, &pts)?;
        written.push(path);
    }
    Ok(written)
}
