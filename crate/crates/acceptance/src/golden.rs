//! Crafted MIDI songs whose token grids are known in closed form.
//!
//! All songs use 96 ticks per quarter, so one grid cell is 24 ticks, and
//! span four bars (64 cells).

use std::collections::BTreeMap;

use musae_core::tokens::{HOLD, SILENCE};
use musae_core::PianoRoll;

pub const TPQ: u32 = 96;
pub const CELL: u64 = 24;
pub const SONG_CELLS: usize = 64;

/// `(tick, pitch, duration)`.
pub type Note = (u64, u8, u64);

struct SmfTrack {
    channel: u8,
    program: u8,
    notes: Vec<Note>,
}

/// Minimal format-1 SMF writer, independent of the crate's exporter.
pub struct Smf {
    tpq: u16,
    time_signatures: Vec<(u64, u8, u8)>,
    tracks: Vec<SmfTrack>,
}

fn varlen(out: &mut Vec<u8>, mut v: u64) {
    let mut stack = vec![(v & 0x7f) as u8];
    v >>= 7;
    while v > 0 {
        stack.push((v & 0x7f) as u8 | 0x80);
        v >>= 7;
    }
    out.extend(stack.iter().rev());
}

fn chunk(out: &mut Vec<u8>, mut events: Vec<(u64, u8, Vec<u8>)>) {
    // (tick, priority, bytes): note-offs (0) before note-ons (1) at equal ticks
    events.sort_by_key(|e| (e.0, e.1));
    let mut body = Vec::new();
    let mut last = 0;
    for (tick, _, bytes) in events {
        varlen(&mut body, tick - last);
        body.extend(bytes);
        last = tick;
    }
    body.extend([0x00, 0xff, 0x2f, 0x00]);
    out.extend(b"MTrk");
    out.extend((body.len() as u32).to_be_bytes());
    out.extend(body);
}

impl Smf {
    pub fn new(tpq: u16) -> Self {
        Self { tpq, time_signatures: Vec::new(), tracks: Vec::new() }
    }

    pub fn time_signature(mut self, tick: u64, numerator: u8, denominator: u8) -> Self {
        self.time_signatures.push((tick, numerator, denominator));
        self
    }

    pub fn track(mut self, channel: u8, program: u8, notes: &[Note]) -> Self {
        self.tracks.push(SmfTrack { channel, program, notes: notes.to_vec() });
        self
    }

    pub fn bytes(&self) -> Vec<u8> {
        let mut out = b"MThd".to_vec();
        out.extend(6u32.to_be_bytes());
        out.extend(1u16.to_be_bytes());
        out.extend((self.tracks.len() as u16 + 1).to_be_bytes());
        out.extend(self.tpq.to_be_bytes());
        let conductor = self
            .time_signatures
            .iter()
            .map(|&(tick, n, d)| (tick, 0, vec![0xff, 0x58, 0x04, n, d.trailing_zeros() as u8, 24, 8]))
            .collect();
        chunk(&mut out, conductor);
        for t in &self.tracks {
            let mut events = vec![(0, 0, vec![0xc0 | t.channel, t.program])];
            for &(tick, pitch, dur) in &t.notes {
                events.push((tick, 1, vec![0x90 | t.channel, pitch, 100]));
                events.push((tick + dur, 0, vec![0x80 | t.channel, pitch, 0]));
            }
            chunk(&mut out, events);
        }
        out
    }
}

fn cells(f: impl Fn(usize) -> u8) -> Vec<u8> {
    (0..SONG_CELLS).map(f).collect()
}

/// Kick on every beat with a snare doubling it every other beat (the kick
/// is lower, so it wins), short hats on the off-beat eighths.
fn drums() -> (Vec<Note>, Vec<u8>) {
    let mut notes = Vec::new();
    for c in (0..SONG_CELLS as u64).step_by(4) {
        notes.push((c * CELL, 36, CELL / 2));
        if c % 8 == 4 {
            notes.push((c * CELL, 38, CELL));
        }
        notes.push(((c + 2) * CELL, 42, CELL));
    }
    let grid = cells(|c| match c % 4 {
        0 => 36,
        2 => 42,
        _ => SILENCE,
    });
    (notes, grid)
}

/// Three-cell notes every half bar, rising a semitone per bar.
fn bass() -> (Vec<Note>, Vec<u8>) {
    let notes = (0..SONG_CELLS as u64).step_by(8).map(|c| (c * CELL, 40 + (c / 16) as u8, 3 * CELL)).collect();
    let grid = cells(|c| match c % 8 {
        0 => 40 + (c / 16) as u8,
        1 | 2 => HOLD,
        _ => SILENCE,
    });
    (notes, grid)
}

/// A C major triad sustained for half a bar, then at mid-bar the triad again
/// under a one-cell G2: the lowest onset's extent decides what is held.
fn guitar() -> (Vec<Note>, Vec<u8>) {
    let mut notes = Vec::new();
    for bar in 0..4u64 {
        let start = bar * 16 * CELL;
        for p in [60, 64, 67] {
            notes.push((start, p, 8 * CELL));
            notes.push((start + 8 * CELL, p, 8 * CELL));
        }
        notes.push((start + 8 * CELL, 43, CELL));
    }
    let grid = cells(|c| match c % 16 {
        0 => 60,
        1..=7 => HOLD,
        8 => 43,
        _ => SILENCE,
    });
    (notes, grid)
}

/// A pad held through the first `first_len` cells, silence, then a second
/// pad over the last bar.
fn strings(first_len: usize) -> (Vec<Note>, Vec<u8>) {
    let notes = vec![(0, 72, first_len as u64 * CELL), (48 * CELL, 74, 16 * CELL)];
    let grid = cells(|c| match c {
        0 => 72,
        c if c < first_len => HOLD,
        c if c < 48 => SILENCE,
        48 => 74,
        _ => HOLD,
    });
    (notes, grid)
}

pub struct GoldenSong {
    pub id: &'static str,
    pub midi: Vec<u8>,
    pub tags: Vec<String>,
    /// Full-song grid, `None` for songs the filter must reject.
    pub grid: Option<PianoRoll>,
    /// Expected two-bar windows after silence filtering, in order.
    pub windows: Vec<PianoRoll>,
}

fn tags(range: std::ops::Range<usize>) -> Vec<String> {
    range.map(|i| format!("t{i:02}")).collect()
}

/// Two-bar windows starting at the given bars, with a leading hold
/// re-articulated as the pitch it continues.
fn windows(grid: &PianoRoll, starts: &[usize]) -> Vec<PianoRoll> {
    starts
        .iter()
        .map(|&bar| {
            let mut w = grid.slice(bar * 16, 32);
            for track in musae_core::Track::ALL {
                if w.get(0, track) == HOLD {
                    let pitch = (0..bar * 16).rev().map(|t| grid.get(t, track)).find(|&t| t != HOLD).unwrap();
                    w.set(0, track, pitch);
                }
            }
            w
        })
        .collect()
}

fn band(first_strings: usize) -> (Vec<u8>, PianoRoll) {
    let (d, dg) = drums();
    let (b, bg) = bass();
    let (g, gg) = guitar();
    let (s, sg) = strings(first_strings);
    let midi =
        Smf::new(TPQ as u16).time_signature(0, 4, 4).track(9, 0, &d).track(0, 33, &b).track(1, 25, &g).track(2, 48, &s);
    (midi.bytes(), PianoRoll::from_tracks([&dg, &bg, &gg, &sg]).unwrap())
}

/// Three songs:
///
/// * `a_full`: strings rest for exactly one bar (16 cells), so all three
///   windows survive; the bar-1 window re-articulates the held pad.
/// * `b_boundary`: the pad ends one cell earlier, making a 17-cell rest
///   that rejects the bar-1 window; the bar-2 window still sees exactly 16.
/// * `c_waltz`: a complete band in 3/4, rejected outright.
///
/// Tags give 40 distinct names, 11 of them on two songs.
pub fn golden_corpus() -> Vec<GoldenSong> {
    let (a_midi, a_grid) = band(32);
    let (b_midi, b_grid) = band(31);
    let (d, _) = drums();
    let (b, _) = bass();
    let (g, _) = guitar();
    let waltz = Smf::new(TPQ as u16).time_signature(0, 3, 4).track(9, 0, &d).track(0, 33, &b).track(1, 25, &g);
    vec![
        GoldenSong {
            id: "a_full",
            midi: a_midi,
            tags: tags(0..16),
            windows: windows(&a_grid, &[0, 1, 2]),
            grid: Some(a_grid),
        },
        GoldenSong {
            id: "b_boundary",
            midi: b_midi,
            tags: tags(10..30),
            windows: windows(&b_grid, &[0, 2]),
            grid: Some(b_grid),
        },
        GoldenSong { id: "c_waltz", midi: waltz.bytes(), tags: tags(25..40), grid: None, windows: vec![] },
    ]
}

pub fn golden_metadata(songs: &[GoldenSong]) -> BTreeMap<String, Vec<String>> {
    songs.iter().map(|s| (s.id.to_string(), s.tags.clone())).collect()
}

/// Expected vocabulary: the 11 doubly used tags, then 21 single-use tags in
/// lexicographic order.
pub fn golden_vocabulary() -> Vec<String> {
    let mut v = tags(10..16);
    v.extend(tags(25..30));
    v.extend(tags(0..10));
    v.extend(tags(16..25));
    v.extend(tags(30..32));
    v
}
