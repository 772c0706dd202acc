mod common;

use musae_core::nn::ModelConfig;
use musae_core::train::{autoencoder_objective, critic_objective, Adam, RunConfig, TrainConfig};
use musae_core::{Checkpoint, FlowerPrior, Model32, PianoRoll, Prior, Trainer32};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tiny() -> ModelConfig {
    ModelConfig { latent_dim: 8, hidden: 12, layers: 1, timesteps: 32, ..ModelConfig::desk() }
}

fn flower() -> Prior {
    Prior::Flower { spec: FlowerPrior::with_dim(8).unwrap(), genre_map: (0..32).collect() }
}

fn trainer(seed: u64) -> Trainer32 {
    let config = TrainConfig { batch_size: 6, seed, beta_interval: 2, beta_step: 0.25, ..Default::default() };
    Trainer32::new(Model32::init(tiny(), seed).unwrap(), flower(), config).unwrap()
}

#[test]
fn identical_seeds_give_identical_runs() {
    let data = common::band_segments(20, 4);
    let (mut a, mut b) = (trainer(1), trainer(1));
    for _ in 0..5 {
        let batch: Vec<_> = a.batch_indices(a.step(), data.len()).into_iter().map(|i| data[i].clone()).collect();
        assert_eq!(a.train_step(&batch).unwrap(), b.train_step(&batch).unwrap());
    }
    assert_eq!(a.model, b.model);
    let mut c = trainer(2);
    c.train_step(&data[..6]).unwrap();
    assert_ne!(c.model, a.model);
}

#[test]
fn resumed_run_matches_uninterrupted() {
    let data = common::band_segments(20, 5);
    let batch = |t: &Trainer32| -> Vec<_> {
        t.batch_indices(t.step(), data.len()).into_iter().map(|i| data[i].clone()).collect()
    };
    let mut straight = trainer(3);
    let mut first = trainer(3);
    for _ in 0..3 {
        let b = batch(&straight);
        straight.train_step(&b).unwrap();
        first.train_step(&b).unwrap();
    }
    let bytes = first.checkpoint().to_bytes();
    drop(first);
    let mut resumed = Trainer32::resume(&Checkpoint::from_bytes(&bytes).unwrap(), None).unwrap();
    assert_eq!(resumed.step(), 3);
    for _ in 0..4 {
        let b = batch(&straight);
        assert_eq!(resumed.train_step(&b).unwrap(), straight.train_step(&b).unwrap());
    }
    assert_eq!(resumed.model, straight.model);
    assert_eq!(resumed.checkpoint(), straight.checkpoint());
}

#[test]
fn epochs_visit_every_segment_once() {
    let t = trainer(0);
    let n = 20;
    for epoch in 0..3u64 {
        let mut seen: Vec<usize> = (0..4).flat_map(|j| t.batch_indices(epoch * 4 + j, n)).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..n).collect::<Vec<_>>(), "epoch {epoch}");
    }
    assert_ne!(t.batch_indices(0, n), t.batch_indices(4, n));
}

#[test]
fn updates_touch_only_their_own_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let model = Model32::init(tiny(), 9).unwrap();
    let rolls: Vec<PianoRoll> = common::band_segments(4, 1).into_iter().map(|s| s.roll).collect();

    let real = Array2::from_shape_fn((4, 8), |_| rng.random_range(-1.0f32..1.0));
    let fake = Array2::from_shape_fn((4, 8), |_| rng.random_range(-1.0f32..1.0));
    let (_, grads) = critic_objective(&model.critic, &real, &fake, &[0.2, 0.4, 0.6, 0.8], 10.0);
    let mut after_critic = model.clone();
    Adam::new(&after_critic.critic).step(&mut after_critic.critic, &grads, 1e-2);
    assert_eq!(after_critic.autoencoder, model.autoencoder);
    assert_ne!(after_critic.critic, model.critic);

    let (_, grads) = autoencoder_objective(&model, &rolls, None, 1.0);
    let mut after_ae = model.clone();
    Adam::new(&after_ae.autoencoder).step(&mut after_ae.autoencoder, &grads, 1e-2);
    assert_eq!(after_ae.critic, model.critic);
    assert_ne!(after_ae.autoencoder, model.autoencoder);

    // with β = 0 the critic has no influence on the autoencoder update
    let base = autoencoder_objective(&model, &rolls, None, 0.0).1;
    assert_eq!(autoencoder_objective(&after_critic, &rolls, None, 0.0).1, base);
}

#[test]
fn beta_follows_the_configured_schedule() {
    let data = common::band_segments(6, 2);
    let mut t = trainer(0);
    let betas: Vec<f64> = (0..6).map(|_| t.train_step(&data).unwrap().beta).collect();
    assert_eq!(betas, [0.0, 0.0, 0.25, 0.25, 0.5, 0.5]);
}

#[test]
fn untagged_segments_follow_the_configuration() {
    let mut data = common::band_segments(4, 2);
    for s in &mut data {
        s.genre_ids.clear();
    }
    let mut t = trainer(0);
    assert!(t.train_step(&data).is_ok());
    let config = TrainConfig { allow_untagged: false, ..t.config.clone() };
    let mut strict = Trainer32::new(t.model.clone(), flower(), config).unwrap();
    assert!(strict.train_step(&data).is_err());
}

#[test]
fn run_config_builds_a_flower_trainer() {
    let text = r#"
[model]
latent_dim = 8
hidden = 12
timesteps = 32

[prior]
kind = "flower"

[train]
batch_size = 4
max_updates = 2
lr_schedule = "inverse_time"
"#;
    let run = RunConfig::from_toml(text).unwrap();
    let vocab = musae_core::pipeline::GenreVocabulary {
        tags: (0..32).map(|i| format!("g{i}")).collect(),
        circle_order: (0..32).rev().collect(),
    };
    let t = Trainer32::from_run_config(&run, &vocab).unwrap();
    assert_eq!(t.prior.component_of(0).unwrap(), 31);
    assert_eq!(t.model.latent_dim(), 8);
    let small = RunConfig::from_toml("[prior]\nn_components = 16\n").unwrap();
    assert!(Trainer32::from_run_config(&small, &vocab).is_err(), "genre on component 31 of 16 must be rejected");
}
