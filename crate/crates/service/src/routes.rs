use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{RawQuery, State};
use axum::http::header;
use axum::response::IntoResponse;
use axum::Json;
use musae_core::eval::{compute_metrics, MetricVector};
use musae_core::midi::export_midi;
use musae_core::tokens::N_TRACKS;
use musae_core::{PianoRoll, Prior};
use ndarray::{Array1, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::ApiError;
use crate::session::Session;
use crate::wire::{rows, Body};

pub const MAX_SAMPLE_COUNT: usize = 256;
pub const DEFAULT_EXEMPLAR_LIMIT: usize = 20;

type Shared = State<Arc<Session>>;
type Grid = Vec<[u8; N_TRACKS]>;

/// Runs model work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::Internal(e.to_string()))?
}

fn internal(e: impl std::fmt::Display) -> ApiError {
    ApiError::Internal(e.to_string())
}

#[derive(Serialize)]
pub struct Health {
    status: &'static str,
    checkpoint: String,
    latent_dim: usize,
    timesteps: usize,
    prior: &'static str,
}

pub async fn health(State(s): Shared) -> Json<Health> {
    Json(Health {
        status: "ok",
        checkpoint: s.checkpoint_id.clone(),
        latent_dim: s.model.latent_dim(),
        timesteps: s.model.timesteps(),
        prior: s.prior_kind(),
    })
}

#[derive(Serialize)]
pub struct Encoded {
    mu: Vec<f32>,
    sigma: Vec<f32>,
    z: Vec<f32>,
}

/// `z` is drawn with the request's `seed` (0 when absent), so identical
/// requests give identical responses.
pub async fn encode(State(s): Shared, body: Bytes) -> Result<Json<Encoded>, ApiError> {
    let body = Body::parse(&body, &["tokens", "seed"])?;
    let roll = body.tokens("tokens", s.model.timesteps())?;
    let seed = body.opt_u64("seed")?.unwrap_or(0);
    blocking(move || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = s.model.encode(&[roll], &mut rng, true).map_err(internal)?;
        let row = |a: &Array2<f32>| a.row(0).to_vec();
        Ok(Json(Encoded { mu: row(&out.mu), sigma: row(&out.sigma), z: row(&out.z) }))
    })
    .await
}

#[derive(Serialize)]
pub struct Decoded {
    tokens: Grid,
}

pub async fn decode(State(s): Shared, body: Bytes) -> Result<Json<Decoded>, ApiError> {
    let body = Body::parse(&body, &["z"])?;
    let z = body.vector("z", s.model.latent_dim())?;
    blocking(move || {
        let z = Array1::from(z).insert_axis(Axis(0));
        let out = s.model.decode(&z).map_err(internal)?;
        Ok(Json(Decoded { tokens: rows(&out.tokens[0]) }))
    })
    .await
}

#[derive(Serialize)]
pub struct Interpolated {
    tokens: Vec<Grid>,
}

/// Decodes `(1 − α) z1 + α z2` for each alpha.
pub async fn interpolate(State(s): Shared, body: Bytes) -> Result<Json<Interpolated>, ApiError> {
    let body = Body::parse(&body, &["z1", "z2", "alphas"])?;
    let dim = s.model.latent_dim();
    let (z1, z2) = (Array1::from(body.vector("z1", dim)?), Array1::from(body.vector("z2", dim)?));
    let alphas = body.alphas("alphas")?;
    if alphas.len() > MAX_SAMPLE_COUNT {
        return Err(ApiError::bad("alphas", format!("at most {MAX_SAMPLE_COUNT} alphas per request")));
    }
    blocking(move || {
        let mut z = Array2::zeros((alphas.len(), dim));
        for (mut row, &a) in z.rows_mut().into_iter().zip(&alphas) {
            let a = a as f32;
            row.assign(&(&z1 * (1.0 - a) + &z2 * a));
        }
        let out = s.model.decode(&z).map_err(internal)?;
        Ok(Json(Interpolated { tokens: out.tokens.iter().map(rows).collect() }))
    })
    .await
}

#[derive(Serialize)]
pub struct Sampled {
    z: Vec<Vec<f32>>,
    tokens: Vec<Grid>,
}

/// Draws from the prior component of `genre_id` (any component when
/// absent). Under the isotropic prior the genre is validated but has no
/// effect on the draw.
pub async fn sample(State(s): Shared, body: Bytes) -> Result<Json<Sampled>, ApiError> {
    let body = Body::parse(&body, &["genre_id", "count", "seed"])?;
    let count = body.opt_u64("count")?.unwrap_or(1) as usize;
    if count == 0 || count > MAX_SAMPLE_COUNT {
        return Err(ApiError::bad("count", format!("must be between 1 and {MAX_SAMPLE_COUNT}")));
    }
    let component = match body.opt_u64("genre_id")? {
        None => None,
        Some(g) if g < s.vocabulary.len() as u64 => match &s.prior {
            Prior::Flower { .. } => Some(s.prior.component_of(g as u16).map_err(internal)?),
            Prior::Isotropic { .. } => None,
        },
        Some(g) => return Err(ApiError::NotFound(format!("unknown genre id {g}; {} genres", s.vocabulary.len()))),
    };
    let seed = body.opt_u64("seed")?.unwrap_or(0);
    blocking(move || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z: Array2<f32> = s.prior.sample_component(component, count, &mut rng).map_err(internal)?;
        let out = s.model.decode(&z).map_err(internal)?;
        Ok(Json(Sampled {
            z: z.rows().into_iter().map(|r| r.to_vec()).collect(),
            tokens: out.tokens.iter().map(rows).collect(),
        }))
    })
    .await
}

#[derive(Serialize)]
pub struct GenreEntry {
    id: usize,
    tag: String,
    component: usize,
}

#[derive(Serialize)]
pub struct Genres {
    prior: &'static str,
    latent_dim: usize,
    timesteps: usize,
    n_components: usize,
    genres: Vec<GenreEntry>,
}

pub async fn genres(State(s): Shared) -> Json<Genres> {
    let n_components = match &s.prior {
        Prior::Flower { spec, .. } => spec.n_components,
        Prior::Isotropic { .. } => 1,
    };
    let genres = s
        .vocabulary
        .tags
        .iter()
        .enumerate()
        .map(|(id, tag)| GenreEntry { id, tag: tag.clone(), component: s.prior.component_of(id as u16).unwrap_or(0) })
        .collect();
    Json(Genres {
        prior: s.prior_kind(),
        latent_dim: s.model.latent_dim(),
        timesteps: s.model.timesteps(),
        n_components,
        genres,
    })
}

#[derive(Serialize)]
pub struct Exemplar {
    id: usize,
    song_id: String,
    genre_ids: Vec<u16>,
    tokens: Grid,
}

#[derive(Serialize)]
pub struct Exemplars {
    total: usize,
    exemplars: Vec<Exemplar>,
}

pub async fn exemplars(State(s): Shared, RawQuery(query): RawQuery) -> Result<Json<Exemplars>, ApiError> {
    let mut limit = DEFAULT_EXEMPLAR_LIMIT;
    for pair in query.as_deref().unwrap_or("").split('&').filter(|p| !p.is_empty()) {
        match pair.split_once('=') {
            Some(("limit", v)) => {
                limit = v.parse().map_err(|_| ApiError::bad("limit", format!("{v:?} is not a non-negative integer")))?
            }
            _ => return Err(ApiError::bad(pair, "unknown query parameter; only `limit` is accepted")),
        }
    }
    let exemplars = s
        .exemplars
        .iter()
        .take(limit)
        .enumerate()
        .map(|(id, seg)| Exemplar {
            id,
            song_id: seg.song_id.clone(),
            genre_ids: seg.genre_ids.clone(),
            tokens: rows(&seg.roll),
        })
        .collect();
    Ok(Json(Exemplars { total: s.exemplars.len(), exemplars }))
}

pub async fn metrics(State(s): Shared, body: Bytes) -> Result<Json<MetricVector>, ApiError> {
    let body = Body::parse(&body, &["tokens"])?;
    let roll = body.tokens("tokens", s.model.timesteps())?;
    Ok(Json(compute_metrics(&roll)))
}

/// Standard MIDI file of the grid. Holds that do not continue a note are
/// dropped, since they cannot be expressed as MIDI events.
pub async fn export(State(s): Shared, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let body = Body::parse(&body, &["tokens", "tempo_bpm"])?;
    let roll: PianoRoll = body.tokens("tokens", s.model.timesteps())?;
    let mut opts = s.export.clone();
    if let Some(bpm) = body.opt_f64("tempo_bpm")? {
        if !(1.0..=1000.0).contains(&bpm) {
            return Err(ApiError::bad("tempo_bpm", format!("{bpm} is outside [1, 1000]")));
        }
        opts.tempo_bpm = bpm;
    }
    let bytes = export_midi(&roll.sanitized(), &opts);
    Ok((
        [(header::CONTENT_TYPE, "audio/midi"), (header::CONTENT_DISPOSITION, "attachment; filename=\"segment.mid\"")],
        bytes,
    ))
}
