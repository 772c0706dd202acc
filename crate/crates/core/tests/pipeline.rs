mod common;

use musae_core::pipeline::{
    build_dataset, build_dataset_from_songs, Dataset, PreprocessConfig, Split, MAX_SHIFT, MIN_SHIFT,
};
use musae_core::{PipelineError, Track};

fn corpus(n: usize) -> common::Corpus {
    common::midi_corpus(n, 8)
}

#[test]
fn build_is_deterministic_and_seed_dependent() {
    let (songs, meta) = corpus(12);
    let config = PreprocessConfig { seed: 7, ..Default::default() };
    let (a, ra) = build_dataset_from_songs(songs.clone(), &meta, &config).unwrap();
    let (b, rb) = build_dataset_from_songs(songs.clone(), &meta, &config).unwrap();
    assert_eq!(a.train, b.train);
    assert_eq!(a.validation, b.validation);
    assert_eq!(ra, rb);
    let (c, _) = build_dataset_from_songs(songs, &meta, &PreprocessConfig { seed: 8, ..config }).unwrap();
    assert_ne!(a.manifest.train.song_ids, c.manifest.train.song_ids);
}

#[test]
fn report_accounts_for_every_window() {
    let (mut songs, meta) = corpus(12);
    songs.push(("broken".into(), Ok(b"MThd garbage".to_vec())));
    songs.push(("missing".into(), Err("permission denied".into())));
    let config = PreprocessConfig { augment: false, ..Default::default() };
    let (ds, report) = build_dataset_from_songs(songs, &meta, &config).unwrap();
    assert_eq!(report.files_found, 14);
    assert_eq!(report.songs_accepted, 12);
    assert_eq!(report.unreadable.len(), 2);
    // eight bars, two-bar windows, stride one
    assert_eq!(report.windows_extracted, 12 * 7);
    assert_eq!(report.segments, report.windows_extracted - report.windows_rejected_silence);
    assert_eq!(report.segments, ds.train.len() + ds.validation.len());
    let expected_val = (report.segments as f64 * 0.2).round() as usize;
    assert_eq!(ds.validation.len(), expected_val);
    assert!(ds.train.iter().chain(&ds.validation).all(|s| s.roll.timesteps() == 32 && !s.genre_ids.is_empty()));
    let m = &ds.manifest;
    assert!(m.train.transpositions.iter().chain(&m.validation.transpositions).all(|&t| t == 0));
}

#[test]
fn augmentation_shifts_melodic_tracks_within_range() {
    let (songs, meta) = corpus(6);
    let plain =
        build_dataset_from_songs(songs.clone(), &meta, &PreprocessConfig { augment: false, ..Default::default() })
            .unwrap()
            .0;
    let shifted = build_dataset_from_songs(songs, &meta, &PreprocessConfig::default()).unwrap().0;
    let shifts = &shifted.manifest.train.transpositions;
    assert!(shifts.iter().all(|s| (MIN_SHIFT..=MAX_SHIFT).contains(s)));
    assert!(shifts.iter().any(|&s| s != 0));
    // same split (same seed), so segments pair up
    for ((p, s), &k) in plain.train.iter().zip(&shifted.train).zip(shifts) {
        assert_eq!(p.roll.track(Track::Drums), s.roll.track(Track::Drums));
        let moved: Vec<u8> =
            p.roll.track(Track::Bass).iter().map(|&t| if t < 128 { (t as i16 + k as i16) as u8 } else { t }).collect();
        assert_eq!(moved, s.roll.track(Track::Bass));
    }
}

#[test]
fn sixteen_bar_windows() {
    let config = PreprocessConfig { window_bars: 16, augment: false, validation_fraction: 0.0, ..Default::default() };
    let (short, meta) = corpus(8);
    assert!(matches!(build_dataset_from_songs(short, &meta, &config), Err(PipelineError::NoSegments)));
    let (long, meta) = common::midi_corpus(6, 20);
    let (ds, report) = build_dataset_from_songs(long, &meta, &config).unwrap();
    assert_eq!(report.windows_extracted, 6 * 5);
    assert_eq!(ds.timesteps(), 256);
    assert!(ds.train.iter().all(|s| s.roll.timesteps() == 256));
}

#[test]
fn dataset_roundtrips_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_dir = dir.path().join("midi");
    std::fs::create_dir_all(corpus_dir.join("nested")).unwrap();
    let (songs, meta) = corpus(10);
    for (i, (id, bytes)) in songs.iter().enumerate() {
        let sub = if i % 2 == 0 { corpus_dir.clone() } else { corpus_dir.join("nested") };
        std::fs::write(sub.join(format!("{id}.mid")), bytes.as_ref().unwrap()).unwrap();
    }
    let meta_path = dir.path().join("meta.json");
    std::fs::write(&meta_path, serde_json::to_string(&meta).unwrap()).unwrap();

    let (built, report) = build_dataset(&corpus_dir, &meta_path, &PreprocessConfig::default()).unwrap();
    assert_eq!(report.songs_accepted, 10);
    let out = dir.path().join("data");
    built.write(&out, Some(&report)).unwrap();
    let loaded = Dataset::load(&out).unwrap();
    assert_eq!(loaded.manifest, built.manifest);
    assert_eq!(loaded.split(Split::Train), built.split(Split::Train));
    assert_eq!(loaded.split(Split::Validation), built.split(Split::Validation));
    assert_eq!(loaded.vocabulary().len(), 32);

    std::fs::write(out.join("manifest.json"), "{}").unwrap();
    assert!(Dataset::load(&out).is_err());
}
