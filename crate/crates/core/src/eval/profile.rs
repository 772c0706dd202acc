use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, METRICS_VERSION, METRIC_NAMES};
use crate::error::EvalError;
use crate::nn::Model;
use crate::prior::Prior;
use crate::scalar::Scalar;

const DECODE_CHUNK: usize = 256;

/// Relative deviation of each mixture component's decoded metrics from the
/// mean over all components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenreProfile {
    pub metrics_version: u32,
    pub metric_names: Vec<String>,
    pub samples_per_component: usize,
    /// Mean over every decoded sample; `None` if no sample had the metric.
    pub global: Vec<Option<f64>>,
    /// `rows[component][metric] = (local − global) / global`; `None` when
    /// the global mean is zero or the component never produced the metric.
    pub rows: Vec<Vec<Option<f64>>>,
    /// Genre tag placed on each component, when known.
    pub labels: Vec<Option<String>>,
}

#[derive(Clone, Copy, Default)]
struct Mean {
    sum: f64,
    n: usize,
}

impl Mean {
    fn push(&mut self, v: Option<f64>) {
        if let Some(v) = v {
            self.sum += v;
            self.n += 1;
        }
    }

    fn get(self) -> Option<f64> {
        (self.n > 0).then(|| self.sum / self.n as f64)
    }
}

/// Relative change `(local − global) / global` with the absent cases of
/// [`GenreProfile::rows`].
pub fn relative_change(local: Option<f64>, global: Option<f64>) -> Option<f64> {
    match (local, global) {
        (Some(l), Some(g)) if g != 0.0 => Some((l - g) / g),
        _ => None,
    }
}

/// Decodes `samples_per_component` draws from every component of a flower
/// prior and compares pooled-track metrics per component against the global
/// mean.
pub fn genre_metric_profile<S: Scalar, R: Rng + ?Sized>(
    model: &Model<S>,
    prior: &Prior,
    samples_per_component: usize,
    rng: &mut R,
) -> Result<GenreProfile, EvalError> {
    let Prior::Flower { spec, .. } = prior else {
        return Err(EvalError::NotFlower);
    };
    let k = METRIC_NAMES.len();
    let mut local = vec![vec![Mean::default(); k]; spec.n_components];
    let mut global = vec![Mean::default(); k];
    for (i, row) in local.iter_mut().enumerate() {
        let mut remaining = samples_per_component;
        while remaining > 0 {
            let n = remaining.min(DECODE_CHUNK);
            remaining -= n;
            let z: Array2<S> = spec.sample(i, n, rng)?;
            for roll in model.decode(&z)?.tokens {
                let values = compute_metrics(&roll).aggregate.values();
                for (j, v) in values.into_iter().enumerate() {
                    row[j].push(v);
                    global[j].push(v);
                }
            }
        }
    }
    let global: Vec<Option<f64>> = global.into_iter().map(Mean::get).collect();
    let rows = local
        .into_iter()
        .map(|row| row.into_iter().zip(&global).map(|(l, &g)| relative_change(l.get(), g)).collect())
        .collect();
    Ok(GenreProfile {
        metrics_version: METRICS_VERSION,
        metric_names: METRIC_NAMES.iter().map(|s| s.to_string()).collect(),
        samples_per_component,
        global,
        rows,
        labels: vec![None; spec.n_components],
    })
}
