//! Drives the `musae` binary through preprocess, train, evaluate on a
//! small synthetic corpus.

use std::fs;
use std::path::Path;
use std::process::Command;

use musae_core::midi::{export_midi, ExportOptions};
use musae_core::tokens::{HOLD, SILENCE};
use musae_core::PianoRoll;

fn musae(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_musae")).args(args).output().unwrap();
    assert!(out.status.success(), "musae {args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
}

/// Four-bar song whose bars all differ, so every two-bar window is unique.
fn song(k: u8) -> Vec<u8> {
    let t = 64;
    let track = |base: u8, period: usize| -> Vec<u8> {
        (0..t)
            .map(|s| match s % period {
                0 => base + ((s / period) as u8 * 3 + k) % 12,
                1 => HOLD,
                _ => SILENCE,
            })
            .collect()
    };
    let drums: Vec<u8> = (0..t)
        .map(|s| {
            if s % 4 == 0 {
                36
            } else if s % 4 == 2 {
                42
            } else {
                SILENCE
            }
        })
        .collect();
    let roll = PianoRoll::from_tracks([&drums, &track(36, 4), &track(55, 8), &track(67, 16)]).unwrap();
    export_midi(&roll, &ExportOptions::default())
}

fn write_corpus(dir: &Path) -> std::path::PathBuf {
    let corpus = dir.join("corpus");
    fs::create_dir_all(&corpus).unwrap();
    let mut meta = serde_json::Map::new();
    for k in 0..12u8 {
        fs::write(corpus.join(format!("song{k:02}.mid")), song(k)).unwrap();
        let tags: Vec<String> = (0..4).map(|j| format!("tag{:02}", (k as usize * 3 + j) % 36)).collect();
        meta.insert(format!("song{k:02}"), tags.into());
    }
    let metadata = dir.join("meta.json");
    fs::write(&metadata, serde_json::Value::Object(meta).to_string()).unwrap();
    metadata
}

#[test]
fn preprocess_train_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let metadata = write_corpus(dir);
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let (corpus, data, run, report) = (dir.join("corpus"), dir.join("data"), dir.join("run"), dir.join("report"));

    musae(&[
        "preprocess",
        "--corpus",
        &s(&corpus),
        "--metadata",
        &s(&metadata),
        "--bars",
        "2",
        "--out",
        &s(&data),
        "--seed",
        "1",
    ]);
    assert!(data.join("manifest.json").exists());

    let config = dir.join("run.toml");
    fs::write(
        &config,
        "[model]\nlatent_dim = 8\nhidden = 8\nlayers = 1\ntimesteps = 32\n\n\
         [train]\nbatch_size = 4\nmax_updates = 4\nlog_interval = 1\neval_interval = 2\ncheckpoint_interval = 2\n",
    )
    .unwrap();
    musae(&["train", "--data", &s(&data), "--config", &s(&config), "--out", &s(&run)]);
    let metrics = fs::read_to_string(run.join("metrics.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = metrics.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[3]["step"], 3, "records carry the index the update was computed at");
    assert!(lines[1]["validation"].is_object());
    assert!(run.join("step_00000002.ckpt").exists());

    let ckpt = run.join("latest.ckpt");
    musae(&[
        "evaluate",
        "--checkpoint",
        &s(&ckpt),
        "--data",
        &s(&data),
        "--report",
        &s(&report),
        "--interp-pairs",
        "8",
        "--split",
        "train",
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(report.join("report.json")).unwrap()).unwrap();
    let acc = report["accuracy"]["dbgs"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
    assert!(report["interpolation"].is_object());
}

#[test]
fn rejects_unsupported_bar_count() {
    let out = Command::new(env!("CARGO_BIN_EXE_musae"))
        .args(["preprocess", "--corpus", ".", "--metadata", "m.json", "--bars", "4", "--out", "x"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
