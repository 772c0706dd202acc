use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use musae_core::pipeline::GenreVocabulary;
use musae_core::{FlowerPrior, Model32, ModelConfig, PianoRoll, Prior, Segment};
use musae_service::{cors, router, Session};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

const T: usize = 32;
const LATENT: usize = 16;

fn roll(rng: &mut ChaCha8Rng) -> PianoRoll {
    let cells = (0..T * 4).map(|_| rng.random_range(0..130u8)).collect();
    PianoRoll::new(T, cells).unwrap().sanitized()
}

fn session() -> Session {
    let config = ModelConfig { latent_dim: LATENT, hidden: 24, layers: 1, timesteps: T, ..ModelConfig::desk() };
    // Large enough weights that argmax decoding actually depends on z.
    let mut model = Model32::init(config, 5).unwrap();
    for d in &mut model.autoencoder.decoders {
        d.out.w.mapv_inplace(|w| w * 8.0);
    }
    let prior = Prior::Flower { spec: FlowerPrior::with_dim(LATENT).unwrap(), genre_map: (0..32).rev().collect() };
    let vocabulary = GenreVocabulary {
        tags: (0..32).map(|i| format!("genre{i:02}")).collect(),
        circle_order: (0..32).rev().collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let exemplars = (0..60)
        .map(|i| Segment { roll: roll(&mut rng), song_id: format!("song{i:03}"), genre_ids: vec![(i % 32) as u16] })
        .collect();
    Session::new(model, prior, vocabulary, exemplars, "test.ckpt").unwrap()
}

fn app(session: Arc<Session>) -> Router {
    router(session, cors(None).unwrap())
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri).header(header::CONTENT_TYPE, "application/json");
    let req = req.body(body.map_or(Body::empty(), |b| Body::from(b.to_string()))).unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    (status, to_bytes(res.into_body(), usize::MAX).await.unwrap().to_vec())
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    let (status, bytes) = call(app, Method::POST, uri, Some(body)).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn grid(v: &Value) -> Vec<[u8; 4]> {
    serde_json::from_value(v.clone()).unwrap()
}

#[tokio::test]
async fn encode_decode_matches_offline_reconstruction() {
    let session = Arc::new(session());
    let app = app(session.clone());
    let segments: Vec<PianoRoll> = session.exemplars.iter().take(50).map(|s| s.roll.clone()).collect();
    let offline = session.model.reconstruct(&segments).unwrap();
    let mut distinct = std::collections::HashSet::new();
    for (x, expected) in segments.iter().zip(&offline) {
        let (status, enc) = post(&app, "/encode", json!({ "tokens": x.rows() })).await;
        assert_eq!(status, StatusCode::OK, "{enc}");
        for key in ["mu", "sigma", "z"] {
            assert_eq!(enc[key].as_array().unwrap().len(), LATENT);
        }
        let (status, dec) = post(&app, "/decode", json!({ "z": enc["mu"] })).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(grid(&dec["tokens"]), expected.rows());
        distinct.insert(expected.rows());
    }
    assert!(distinct.len() > 1, "decoder ignores z; the comparison would be vacuous");
}

#[tokio::test]
async fn encode_is_deterministic_per_seed() {
    let app = app(Arc::new(session()));
    let tokens = PianoRoll::silent(T).rows();
    let a = post(&app, "/encode", json!({ "tokens": tokens })).await.1;
    let b = post(&app, "/encode", json!({ "tokens": tokens })).await.1;
    let c = post(&app, "/encode", json!({ "tokens": tokens, "seed": 9 })).await.1;
    assert_eq!(a, b);
    assert_eq!(a["mu"], c["mu"]);
    assert_ne!(a["z"], c["z"]);
}

#[tokio::test]
async fn interpolation_endpoints_are_the_decoded_latents() {
    let session = Arc::new(session());
    let app = app(session.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let z1: Vec<f32> = (0..LATENT).map(|_| rng.random_range(-2.0..2.0)).collect();
    let z2: Vec<f32> = (0..LATENT).map(|_| rng.random_range(-2.0..2.0)).collect();
    let (status, out) = post(&app, "/interpolate", json!({ "z1": z1, "z2": z2, "alphas": [0.0, 0.5, 1.0] })).await;
    assert_eq!(status, StatusCode::OK);
    let tokens = out["tokens"].as_array().unwrap();
    assert_eq!(tokens.len(), 3);
    assert_eq!(tokens[0], post(&app, "/decode", json!({ "z": z1 })).await.1["tokens"]);
    assert_eq!(tokens[2], post(&app, "/decode", json!({ "z": z2 })).await.1["tokens"]);
}

#[tokio::test]
async fn sample_is_reproducible_and_uses_the_genre_component() {
    let session = Arc::new(session());
    let app = app(session.clone());
    let (status, a) = post(&app, "/sample", json!({ "genre_id": 0, "count": 64, "seed": 4 })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(a, post(&app, "/sample", json!({ "genre_id": 0, "count": 64, "seed": 4 })).await.1);
    assert_eq!(a["tokens"].as_array().unwrap().len(), 64);
    // Genre 0 maps to component 31; draws cluster around its mean.
    let Prior::Flower { spec, .. } = &session.prior else { unreachable!() };
    let mean = spec.mean::<f64>(31).unwrap();
    let zs: Vec<Vec<f64>> = serde_json::from_value(a["z"].clone()).unwrap();
    let centroid: Vec<f64> = (0..LATENT).map(|j| zs.iter().map(|z| z[j]).sum::<f64>() / zs.len() as f64).collect();
    let dist: f64 = centroid.iter().zip(mean.iter()).map(|(c, m)| (c - m).powi(2)).sum::<f64>().sqrt();
    assert!(dist < 0.2, "centroid {dist} away from component mean");
}

#[tokio::test]
async fn error_statuses() {
    let app = app(Arc::new(session()));
    let silent = PianoRoll::silent(T).rows();
    let short = PianoRoll::silent(T - 1).rows();
    let cases: Vec<(&str, Value, StatusCode, Option<&str>)> = vec![
        ("/decode", json!({ "z": vec![0.0; LATENT + 1] }), StatusCode::UNPROCESSABLE_ENTITY, Some("z")),
        ("/decode", json!({ "z": "zero" }), StatusCode::BAD_REQUEST, Some("z")),
        ("/decode", json!({}), StatusCode::BAD_REQUEST, Some("z")),
        ("/decode", json!({ "z": vec![0.0; LATENT], "extra": 1 }), StatusCode::BAD_REQUEST, Some("extra")),
        (
            "/interpolate",
            json!({ "z1": vec![0.0; LATENT], "z2": vec![0.0; 3], "alphas": [0.5] }),
            StatusCode::UNPROCESSABLE_ENTITY,
            Some("z2"),
        ),
        (
            "/interpolate",
            json!({ "z1": vec![0.0; LATENT], "z2": vec![0.0; LATENT], "alphas": [1.5] }),
            StatusCode::BAD_REQUEST,
            Some("alphas[0]"),
        ),
        ("/encode", json!({ "tokens": short }), StatusCode::UNPROCESSABLE_ENTITY, Some("tokens")),
        ("/encode", json!({ "tokens": [[0, 0, 0, 300]] }), StatusCode::BAD_REQUEST, None),
        ("/encode", json!([1, 2]), StatusCode::BAD_REQUEST, None),
        ("/sample", json!({ "genre_id": 32, "count": 1 }), StatusCode::NOT_FOUND, None),
        ("/sample", json!({ "genre_id": 0, "count": 0 }), StatusCode::BAD_REQUEST, Some("count")),
        ("/sample", json!({ "genre_id": -1 }), StatusCode::BAD_REQUEST, Some("genre_id")),
        ("/metrics", json!({ "tokens": silent }), StatusCode::OK, None),
    ];
    for (uri, body, expected, field) in cases {
        let (status, out) = post(&app, uri, body.clone()).await;
        assert_eq!(status, expected, "{uri} {body} -> {out}");
        if status != StatusCode::OK {
            assert!(out["error"].as_str().is_some_and(|e| !e.is_empty()));
        }
        if let Some(f) = field {
            assert_eq!(out["field"], f, "{uri} {body}");
        }
    }
    let (status, _) = call(&app, Method::POST, "/encode", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, Method::GET, "/exemplars?limit=lots", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, Method::GET, "/nowhere", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn read_endpoints() {
    let app = app(Arc::new(session()));
    let (status, body) = call(&app, Method::GET, "/health", None).await;
    assert_eq!(status, StatusCode::OK);
    let health: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(health["prior"], "flower");
    assert_eq!(health["latent_dim"], LATENT);

    let genres: Value = serde_json::from_slice(&call(&app, Method::GET, "/genres", None).await.1).unwrap();
    let list = genres["genres"].as_array().unwrap();
    assert_eq!(list.len(), 32);
    assert_eq!(list[0]["tag"], "genre00");
    assert_eq!(list[0]["component"], 31);

    let ex: Value = serde_json::from_slice(&call(&app, Method::GET, "/exemplars?limit=5", None).await.1).unwrap();
    assert_eq!(ex["total"], 60);
    assert_eq!(ex["exemplars"].as_array().unwrap().len(), 5);
    assert_eq!(ex["exemplars"][2]["song_id"], "song002");
    assert_eq!(grid(&ex["exemplars"][0]["tokens"]).len(), T);
}

#[tokio::test]
async fn export_returns_midi() {
    let app = app(Arc::new(session()));
    let mut roll = PianoRoll::silent(T);
    roll.set_track(musae_core::Track::Bass, &[vec![60, 128, 128], vec![129; T - 3]].concat());
    let req = Request::builder()
        .method(Method::POST)
        .uri("/export")
        .body(Body::from(json!({ "tokens": roll.rows(), "tempo_bpm": 90 }).to_string()))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    assert_eq!(res.headers()[header::CONTENT_TYPE], "audio/midi");
    let bytes = to_bytes(res.into_body(), usize::MAX).await.unwrap();
    assert_eq!(&bytes[..4], b"MThd");
    let parsed = musae_core::midi::parse_midi(&bytes, "export").unwrap().song;
    assert_eq!(parsed.tracks.iter().map(|t| t.events.len()).sum::<usize>(), 1);
}

#[tokio::test]
async fn cors_preflight_is_answered() {
    let app = app(Arc::new(session()));
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/decode")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .header(header::ACCESS_CONTROL_REQUEST_HEADERS, "content-type")
        .body(Body::empty())
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    assert!(res.status().is_success());
    assert_eq!(res.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "*");

    let pinned = router(Arc::new(session()), cors(Some("http://ui.local")).unwrap());
    let req = Request::builder().uri("/health").header(header::ORIGIN, "http://ui.local").body(Body::empty()).unwrap();
    let res = pinned.oneshot(req).await.unwrap();
    assert_eq!(res.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "http://ui.local");
}

fn mixed_request(i: usize, session: &Session) -> (&'static str, Value) {
    let ex = &session.exemplars[i % session.exemplars.len()].roll;
    let z: Vec<f32> = (0..LATENT).map(|j| ((i * 7 + j) % 11) as f32 / 5.0 - 1.0).collect();
    match i % 6 {
        0 => ("/encode", json!({ "tokens": ex.rows(), "seed": i })),
        1 => ("/decode", json!({ "z": z })),
        2 => ("/interpolate", json!({ "z1": z, "z2": vec![0.5; LATENT], "alphas": [0.0, 0.25, 1.0] })),
        3 => ("/sample", json!({ "genre_id": i % 32, "count": 4, "seed": i })),
        4 => ("/metrics", json!({ "tokens": ex.rows() })),
        _ => ("/decode", json!({ "z": vec![0.0; LATENT + 1] })),
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_soak_matches_serial() {
    let session = Arc::new(session());
    let app = app(session.clone());
    let requests: Vec<_> = (0..100).map(|i| mixed_request(i, &session)).collect();

    let mut serial = Vec::new();
    for (uri, body) in &requests {
        serial.push(post(&app, uri, body.clone()).await);
    }
    let handles: Vec<_> = requests
        .into_iter()
        .map(|(uri, body)| {
            let app = app.clone();
            tokio::spawn(async move { post(&app, uri, body).await })
        })
        .collect();
    for (i, h) in handles.into_iter().enumerate() {
        assert_eq!(h.await.unwrap(), serial[i], "request {i}");
    }
    assert!(serial.iter().any(|(s, _)| *s == StatusCode::UNPROCESSABLE_ENTITY));
}
