//! Reconstruction, interpolation, metric-profile and latent-projection
//! analyses of a trained model.

mod accuracy;
mod interpolation;
mod metrics;
mod pca;
pub mod plot;
mod profile;
mod report;

pub use accuracy::{accuracy_table, reconstruction_accuracy, AccuracyTable};
pub use interpolation::{
    alpha_grid, bernoulli_baseline, bernoulli_curve, interpolate_latent, interpolation_curve, normalized_hamming,
    sample_pairs, InterpolationCurve,
};
pub use metrics::{compute_metrics, track_metrics, MetricVector, TrackMetrics, METRICS_VERSION, METRIC_NAMES};
pub use pca::{pca_genre_projection, Pca, PcaProjection, ProjectedPoint};
pub use profile::{genre_metric_profile, relative_change, GenreProfile};
pub use report::{component_labels, evaluate, write_report, EvalOptions, EvalReport, InterpolationReport};
