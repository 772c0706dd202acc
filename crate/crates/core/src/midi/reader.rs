use std::collections::{BTreeMap, VecDeque};

use super::{NoteEvent, Song, SongTrack, TimeSignature};
use crate::error::MidiError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseWarning {
    /// A note-on never received its note-off; it was closed at the end of the chunk.
    DanglingNote { chunk: usize, channel: u8, pitch: u8, tick: u64 },
    /// A note-off with no matching note-on was ignored.
    UnmatchedNoteOff { chunk: usize, channel: u8, pitch: u8, tick: u64 },
    /// Chunk ended without an end-of-track meta event.
    MissingEndOfTrack { chunk: usize },
}

#[derive(Debug, Clone)]
pub struct ParsedSong {
    pub song: Song,
    pub warnings: Vec<ParseWarning>,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    fn bytes(&mut self, n: usize, what: &str) -> Result<&'a [u8], MidiError> {
        if self.remaining() < n {
            return Err(MidiError::new(self.pos, format!("unexpected end of data reading {what}")));
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self, what: &str) -> Result<u8, MidiError> {
        Ok(self.bytes(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16, MidiError> {
        let b = self.bytes(2, what)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self, what: &str) -> Result<u32, MidiError> {
        let b = self.bytes(4, what)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn varlen(&mut self) -> Result<u32, MidiError> {
        let start = self.pos;
        let mut value = 0u32;
        for _ in 0..4 {
            let b = self.u8("variable-length quantity")?;
            value = (value << 7) | (b & 0x7f) as u32;
            if b & 0x80 == 0 {
                return Ok(value);
            }
        }
        Err(MidiError::new(start, "variable-length quantity longer than 4 bytes"))
    }
}

/// Decodes a format 0 or 1 Standard MIDI File.
///
/// Every chunk yields one [`SongTrack`] per channel it plays notes on; a chunk
/// without notes yields a single empty track.
pub fn parse_midi(raw: &[u8], song_id: &str) -> Result<ParsedSong, MidiError> {
    let mut cur = Cursor::new(raw);
    let magic = cur.bytes(4, "header magic")?;
    if magic != b"MThd" {
        return Err(MidiError::new(0, "missing MThd header"));
    }
    let header_len = cur.u32("header length")? as usize;
    if header_len < 6 {
        return Err(MidiError::new(4, format!("header length {header_len} < 6")));
    }
    let format = cur.u16("format")?;
    let n_chunks = cur.u16("track count")?;
    let division_at = cur.pos;
    let division = cur.u16("division")?;
    cur.bytes(header_len - 6, "header padding")?;
    if format > 1 {
        return Err(MidiError::new(8, format!("unsupported SMF format {format}")));
    }
    if division & 0x8000 != 0 {
        return Err(MidiError::new(division_at, "SMPTE time division is not supported"));
    }
    if division == 0 {
        return Err(MidiError::new(division_at, "ticks per quarter must be positive"));
    }

    let mut tracks = Vec::new();
    let mut time_signatures = Vec::new();
    let mut warnings = Vec::new();
    let mut chunk = 0usize;
    while chunk < n_chunks as usize {
        let chunk_at = cur.pos;
        let kind = cur.bytes(4, "chunk type")?;
        let len = cur.u32("chunk length")? as usize;
        let body_at = cur.pos;
        let body = cur.bytes(len, "chunk body").map_err(|_| {
            MidiError::new(chunk_at, format!("chunk declares {len} bytes, only {} remain", raw.len() - body_at))
        })?;
        if kind != b"MTrk" {
            continue;
        }
        parse_track(body, body_at, chunk, &mut tracks, &mut time_signatures, &mut warnings)?;
        chunk += 1;
    }
    time_signatures.sort_by_key(|ts: &TimeSignature| ts.tick);

    Ok(ParsedSong {
        song: Song {
            tracks,
            time_signatures,
            ticks_per_quarter: division as u32,
            song_id: song_id.to_string(),
            genre_tags: Vec::new(),
        },
        warnings,
    })
}

fn parse_track(
    body: &[u8],
    base: usize,
    chunk: usize,
    tracks: &mut Vec<SongTrack>,
    time_signatures: &mut Vec<TimeSignature>,
    warnings: &mut Vec<ParseWarning>,
) -> Result<(), MidiError> {
    let mut cur = Cursor::new(body);
    let err = |pos: usize, reason: String| MidiError::new(base + pos, reason);
    let mut tick = 0u64;
    let mut running: Option<u8> = None;
    let mut programs = [0u8; 16];
    // channel -> (program at first note, events)
    let mut per_channel: BTreeMap<u8, (u8, Vec<NoteEvent>)> = BTreeMap::new();
    let mut channel_order: Vec<u8> = Vec::new();
    let mut first_channel: Option<u8> = None;
    let mut open: BTreeMap<(u8, u8), VecDeque<u64>> = BTreeMap::new();
    let mut ended = false;

    while cur.remaining() > 0 {
        let delta = cur.varlen().map_err(|e| err(e.offset, e.reason))?;
        tick += delta as u64;
        let status_at = cur.pos;
        let mut status = cur.u8("event status").map_err(|e| err(e.offset, e.reason))?;
        let mut first_data = None;
        if status < 0x80 {
            match running {
                Some(rs) => {
                    first_data = Some(status);
                    status = rs;
                }
                None => return Err(err(status_at, "data byte without running status".into())),
            }
        }
        match status {
            0xff => {
                running = None;
                let kind = cur.u8("meta type").map_err(|e| err(e.offset, e.reason))?;
                let len = cur.varlen().map_err(|e| err(e.offset, e.reason))? as usize;
                let data = cur.bytes(len, "meta data").map_err(|e| err(e.offset, e.reason))?;
                match kind {
                    0x58 => {
                        if len < 2 {
                            return Err(err(status_at, "time signature meta event too short".into()));
                        }
                        if data[1] > 7 {
                            return Err(err(status_at, format!("time signature denominator 2^{}", data[1])));
                        }
                        time_signatures.push(TimeSignature { tick, numerator: data[0], denominator: 1 << data[1] });
                    }
                    0x2f => {
                        ended = true;
                        break;
                    }
                    _ => {}
                }
            }
            0xf0 | 0xf7 => {
                running = None;
                let len = cur.varlen().map_err(|e| err(e.offset, e.reason))? as usize;
                cur.bytes(len, "sysex data").map_err(|e| err(e.offset, e.reason))?;
            }
            0xf1..=0xfe => return Err(err(status_at, format!("system message 0x{status:02x} inside track"))),
            _ => {
                running = Some(status);
                let kind = status & 0xf0;
                let channel = status & 0x0f;
                let n_data = if kind == 0xc0 || kind == 0xd0 { 1 } else { 2 };
                let mut data = [0u8; 2];
                for slot in data.iter_mut().take(n_data) {
                    *slot = match first_data.take() {
                        Some(b) => b,
                        None => cur.u8("channel event data").map_err(|e| err(e.offset, e.reason))?,
                    };
                    if *slot > 0x7f {
                        return Err(err(cur.pos - 1, format!("data byte 0x{slot:02x} has high bit set")));
                    }
                }
                first_channel.get_or_insert(channel);
                match kind {
                    0x90 if data[1] > 0 => {
                        open.entry((channel, data[0])).or_default().push_back(tick);
                        per_channel.entry(channel).or_insert_with(|| {
                            channel_order.push(channel);
                            (programs[channel as usize], Vec::new())
                        });
                    }
                    0x80 | 0x90 => {
                        let pitch = data[0];
                        match open.get_mut(&(channel, pitch)).and_then(VecDeque::pop_front) {
                            Some(start) => {
                                let events = &mut per_channel.get_mut(&channel).expect("opened note has channel").1;
                                events.push(NoteEvent { tick: start, pitch, duration: (tick - start).max(1) });
                            }
                            None => warnings.push(ParseWarning::UnmatchedNoteOff { chunk, channel, pitch, tick }),
                        }
                    }
                    0xc0 => programs[channel as usize] = data[0],
                    _ => {}
                }
            }
        }
    }
    if !ended {
        warnings.push(ParseWarning::MissingEndOfTrack { chunk });
    }
    for ((channel, pitch), starts) in open {
        for start in starts {
            warnings.push(ParseWarning::DanglingNote { chunk, channel, pitch, tick: start });
            let events = &mut per_channel.get_mut(&channel).expect("opened note has channel").1;
            events.push(NoteEvent { tick: start, pitch, duration: (tick - start).max(1) });
        }
    }

    if channel_order.is_empty() {
        let channel = first_channel.unwrap_or(0);
        tracks.push(SongTrack { channel, program: programs[channel as usize], events: Vec::new() });
    }
    for channel in channel_order {
        let (program, mut events) = per_channel.remove(&channel).expect("channel recorded");
        events.sort_by_key(|e| (e.tick, e.pitch, e.duration));
        tracks.push(SongTrack { channel, program, events });
    }
    Ok(())
}
