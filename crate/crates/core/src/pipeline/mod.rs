//! MIDI corpus preprocessing: song filtering, track classification,
//! quantization to the 130-token grid, windowing, augmentation, and
//! dataset shard persistence.

mod augment;
mod classify;
mod dataset;
mod filter;
mod quantize;
mod vocab;
mod window;

pub use augment::{augment_transpose, transpose, MAX_SHIFT, MIN_SHIFT};
pub use classify::{classify_tracks, TrackAssignment};
pub use dataset::{
    build_dataset, build_dataset_from_songs, load_metadata, BuildReport, Dataset, DatasetManifest, PreprocessConfig,
    Split, SplitManifest, UnreadableSong, DATASET_FORMAT_VERSION,
};
pub use filter::{filter_song, FilterOutcome, RejectReason};
pub use quantize::{quantize_track, song_bars, song_roll};
pub use vocab::{build_genre_vocabulary, count_tags, GenreVocabulary, N_GENRES};
pub use window::{extract_windows, silence_admissible, MAX_SILENCE_RUN};
