use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::augment::augment_transpose;
use super::classify::classify_tracks;
use super::filter::{filter_song, RejectReason};
use super::quantize::{song_bars, song_roll};
use super::vocab::{build_genre_vocabulary, count_tags, GenreVocabulary};
use super::window::{extract_windows, silence_admissible};
use crate::error::PipelineError;
use crate::midi::parse_midi;
use crate::tokens::{is_pitch, PianoRoll, Segment, Track, N_TRACKS, STEPS_PER_BAR};

pub const DATASET_FORMAT_VERSION: u32 = 1;
const MANIFEST_FILE: &str = "manifest.json";
const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub window_bars: usize,
    pub stride_bars: usize,
    pub seed: u64,
    pub validation_fraction: f64,
    /// Apply one random transposition per segment at build time.
    pub augment: bool,
    pub circle_order: Option<Vec<String>>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { window_bars: 2, stride_bars: 1, seed: 0, validation_fraction: 0.2, augment: true, circle_order: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
}

impl Split {
    pub fn file_name(self) -> &'static str {
        match self {
            Split::Train => "train.bin",
            Split::Validation => "validation.bin",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub file: String,
    pub count: usize,
    pub song_ids: Vec<String>,
    pub genre_ids: Vec<Vec<u16>>,
    pub transpositions: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub timesteps: usize,
    pub tracks: Vec<String>,
    pub window_bars: usize,
    pub stride_bars: usize,
    pub seed: u64,
    pub validation_fraction: f64,
    pub augmented: bool,
    pub vocabulary: GenreVocabulary,
    pub train: SplitManifest,
    pub validation: SplitManifest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnreadableSong {
    pub song_id: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub files_found: usize,
    pub unreadable: Vec<UnreadableSong>,
    pub parse_warnings: usize,
    pub songs_accepted: usize,
    pub rejections: BTreeMap<String, usize>,
    pub assignments: usize,
    pub windows_extracted: usize,
    pub windows_rejected_silence: usize,
    pub segments: usize,
    pub train_segments: usize,
    pub validation_segments: usize,
    pub segments_per_genre: BTreeMap<String, usize>,
    pub notes_per_track: BTreeMap<String, usize>,
}

/// Segments of both splits plus their manifest.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub train: Vec<Segment>,
    pub validation: Vec<Segment>,
}

impl Dataset {
    pub fn split(&self, split: Split) -> &[Segment] {
        match split {
            Split::Train => &self.train,
            Split::Validation => &self.validation,
        }
    }

    pub fn timesteps(&self) -> usize {
        self.manifest.timesteps
    }

    pub fn vocabulary(&self) -> &GenreVocabulary {
        &self.manifest.vocabulary
    }

    /// Writes shards, manifest and (optionally) the build report into `dir`.
    pub fn write(&self, dir: &Path, report: Option<&BuildReport>) -> Result<(), PipelineError> {
        fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
        for split in [Split::Train, Split::Validation] {
            let path = dir.join(split.file_name());
            let bytes: Vec<u8> = self.split(split).iter().flat_map(|s| s.roll.as_bytes().iter().copied()).collect();
            fs::write(&path, bytes).map_err(|e| PipelineError::io(&path, e))?;
        }
        write_json(&dir.join(MANIFEST_FILE), &self.manifest)?;
        if let Some(report) = report {
            write_json(&dir.join(REPORT_FILE), report)?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, PipelineError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
        let manifest: DatasetManifest =
            serde_json::from_str(&text).map_err(|source| PipelineError::Json { path: path.clone(), source })?;
        if manifest.format_version != DATASET_FORMAT_VERSION {
            return Err(PipelineError::Corrupt(format!("unsupported format version {}", manifest.format_version)));
        }
        let train = load_split(dir, &manifest.train, manifest.timesteps)?;
        let validation = load_split(dir, &manifest.validation, manifest.timesteps)?;
        Ok(Self { manifest, train, validation })
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let text = serde_json::to_string_pretty(value).expect("manifest serializes");
    fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

fn load_split(dir: &Path, m: &SplitManifest, timesteps: usize) -> Result<Vec<Segment>, PipelineError> {
    let path = dir.join(&m.file);
    let bytes = fs::read(&path).map_err(|e| PipelineError::io(&path, e))?;
    let cell_count = timesteps * N_TRACKS;
    if bytes.len() != m.count * cell_count || m.song_ids.len() != m.count || m.genre_ids.len() != m.count {
        return Err(PipelineError::Corrupt(format!(
            "{}: {} bytes for {} segments of {cell_count} cells",
            m.file,
            bytes.len(),
            m.count
        )));
    }
    bytes
        .chunks_exact(cell_count)
        .zip(&m.song_ids)
        .zip(&m.genre_ids)
        .map(|((cells, id), genres)| {
            Ok(Segment {
                roll: PianoRoll::new(timesteps, cells.to_vec())?,
                song_id: id.clone(),
                genre_ids: genres.clone(),
            })
        })
        .collect()
}

/// Reads the `{song_id: [tag, ...]}` sidecar.
pub fn load_metadata(path: &Path) -> Result<BTreeMap<String, Vec<String>>, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| PipelineError::Json { path: path.to_path_buf(), source })
}

fn collect_midi_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), PipelineError> {
    let entries = fs::read_dir(dir).map_err(|e| PipelineError::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| PipelineError::io(dir, e))?.path();
        if path.is_dir() {
            collect_midi_files(&path, out)?;
        } else if path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("mid") || e.eq_ignore_ascii_case("midi"))
        {
            out.push(path);
        }
    }
    Ok(())
}

/// Runs the whole preprocessing pipeline over a directory of MIDI files.
/// Song ids are file stems.
pub fn build_dataset(
    corpus: &Path,
    metadata: &Path,
    config: &PreprocessConfig,
) -> Result<(Dataset, BuildReport), PipelineError> {
    let meta = load_metadata(metadata)?;
    let mut files = Vec::new();
    collect_midi_files(corpus, &mut files)?;
    if files.is_empty() {
        return Err(PipelineError::EmptyCorpus(corpus.to_path_buf()));
    }
    let songs: Vec<(String, Result<Vec<u8>, String>)> = files
        .iter()
        .map(|p| {
            let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let bytes = fs::read(p).map_err(|e| e.to_string());
            (id, bytes)
        })
        .collect();
    build_dataset_from_songs(songs, &meta, config)
}

enum SongOutcome {
    Unreadable(String),
    Rejected(RejectReason, usize),
    Accepted(AcceptedSong),
}

struct AcceptedSong {
    warnings: usize,
    assignments: usize,
    windows: usize,
    silence_rejected: usize,
    segments: Vec<(PianoRoll, i8)>,
}

fn process_song(bytes: &[u8], id: &str, config: &PreprocessConfig, stream: u64) -> SongOutcome {
    let parsed = match parse_midi(bytes, id) {
        Ok(p) => p,
        Err(e) => return SongOutcome::Unreadable(e.to_string()),
    };
    let warnings = parsed.warnings.len();
    let song = parsed.song;
    if let Some(reason) = filter_song(&song).reason {
        return SongOutcome::Rejected(reason, warnings);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    let assignments = classify_tracks(&song);
    let n_bars = song_bars(&song);
    let mut seen = HashSet::new();
    let mut windows = 0;
    let mut silence_rejected = 0;
    let mut segments = Vec::new();
    for a in &assignments {
        let roll = song_roll(&song, a, n_bars);
        for w in extract_windows(&roll, config.window_bars, config.stride_bars) {
            if !seen.insert(w.clone()) {
                continue;
            }
            windows += 1;
            if !silence_admissible(&w) {
                silence_rejected += 1;
                continue;
            }
            segments.push(if config.augment { augment_transpose(&w, &mut rng) } else { (w, 0) });
        }
    }
    SongOutcome::Accepted(AcceptedSong {
        warnings,
        assignments: assignments.len(),
        windows,
        silence_rejected,
        segments,
    })
}

/// Pipeline over in-memory songs `(song_id, bytes or read error)`.
///
/// Songs are processed in parallel and merged in song-id order, so the
/// result depends only on the inputs and `config.seed`.
pub fn build_dataset_from_songs(
    mut songs: Vec<(String, Result<Vec<u8>, String>)>,
    metadata: &BTreeMap<String, Vec<String>>,
    config: &PreprocessConfig,
) -> Result<(Dataset, BuildReport), PipelineError> {
    if config.window_bars == 0 || config.stride_bars == 0 {
        return Err(PipelineError::Config("window and stride must be at least one bar".into()));
    }
    if !(0.0..1.0).contains(&config.validation_fraction) {
        return Err(PipelineError::Config("validation fraction must lie in [0, 1)".into()));
    }
    let vocabulary = build_genre_vocabulary(&count_tags(metadata.values()), config.circle_order.as_deref())?;
    songs.sort_by(|a, b| a.0.cmp(&b.0));

    let outcomes: Vec<SongOutcome> = songs
        .par_iter()
        .enumerate()
        .map(|(i, (id, bytes))| match bytes {
            Err(e) => SongOutcome::Unreadable(e.clone()),
            Ok(b) => process_song(b, id, config, i as u64 + 1),
        })
        .collect();

    let mut report = BuildReport { files_found: songs.len(), ..Default::default() };
    let mut all: Vec<(Segment, i8)> = Vec::new();
    for ((id, _), outcome) in songs.iter().zip(outcomes) {
        match outcome {
            SongOutcome::Unreadable(error) => {
                log::warn!("skipping {id}: {error}");
                report.unreadable.push(UnreadableSong { song_id: id.clone(), error });
            }
            SongOutcome::Rejected(reason, warnings) => {
                report.parse_warnings += warnings;
                *report.rejections.entry(reason.to_string()).or_insert(0) += 1;
            }
            SongOutcome::Accepted(acc) => {
                report.parse_warnings += acc.warnings;
                report.songs_accepted += 1;
                report.assignments += acc.assignments;
                report.windows_extracted += acc.windows;
                report.windows_rejected_silence += acc.silence_rejected;
                let genre_ids = vocabulary.ids_for(metadata.get(id).map(Vec::as_slice).unwrap_or(&[]));
                for (roll, shift) in acc.segments {
                    all.push((Segment { roll, song_id: id.clone(), genre_ids: genre_ids.clone() }, shift));
                }
            }
        }
    }
    if all.is_empty() {
        return Err(PipelineError::NoSegments);
    }

    let mut order: Vec<usize> = (0..all.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    order.shuffle(&mut rng);
    let n_val = (all.len() as f64 * config.validation_fraction).round() as usize;
    let mut is_val = vec![false; all.len()];
    for &i in &order[..n_val] {
        is_val[i] = true;
    }

    let timesteps = config.window_bars * STEPS_PER_BAR;
    let mut train = (Vec::new(), SplitManifest { file: Split::Train.file_name().into(), ..Default::default() });
    let mut validation =
        (Vec::new(), SplitManifest { file: Split::Validation.file_name().into(), ..Default::default() });
    for ((segment, shift), val) in all.into_iter().zip(is_val) {
        for &g in &segment.genre_ids {
            *report.segments_per_genre.entry(vocabulary.tags[g as usize].clone()).or_insert(0) += 1;
        }
        for track in Track::ALL {
            let notes = segment.roll.track(track).into_iter().filter(|&t| is_pitch(t)).count();
            *report.notes_per_track.entry(track.name().to_string()).or_insert(0) += notes;
        }
        let (segs, m) = if val { &mut validation } else { &mut train };
        m.count += 1;
        m.song_ids.push(segment.song_id.clone());
        m.genre_ids.push(segment.genre_ids.clone());
        m.transpositions.push(shift);
        segs.push(segment);
    }
    report.train_segments = train.0.len();
    report.validation_segments = validation.0.len();
    report.segments = report.train_segments + report.validation_segments;

    let manifest = DatasetManifest {
        format_version: DATASET_FORMAT_VERSION,
        timesteps,
        tracks: Track::ALL.iter().map(|t| t.name().to_string()).collect(),
        window_bars: config.window_bars,
        stride_bars: config.stride_bars,
        seed: config.seed,
        validation_fraction: config.validation_fraction,
        augmented: config.augment,
        vocabulary,
        train: train.1,
        validation: validation.1,
    };
    Ok((Dataset { manifest, train: train.0, validation: validation.0 }, report))
}
