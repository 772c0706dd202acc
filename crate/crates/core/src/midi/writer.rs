use serde::{Deserialize, Serialize};

use super::DRUM_CHANNEL;
use crate::tokens::{is_pitch, PianoRoll, Track, HOLD, STEPS_PER_QUARTER};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExportOptions {
    pub tempo_bpm: f64,
    pub ticks_per_quarter: u16,
    pub bass_program: u8,
    pub guitar_program: u8,
    pub strings_program: u8,
    pub velocity: u8,
}

impl Default for ExportOptions {
    fn default() -> Self {
        Self {
            tempo_bpm: 120.0,
            ticks_per_quarter: 480,
            bass_program: 33,
            guitar_program: 25,
            strings_program: 48,
            velocity: 100,
        }
    }
}

impl ExportOptions {
    fn channel_and_program(&self, track: Track) -> (u8, u8) {
        match track {
            Track::Drums => (DRUM_CHANNEL, 0),
            Track::Bass => (0, self.bass_program),
            Track::Guitar => (1, self.guitar_program),
            Track::Strings => (2, self.strings_program),
        }
    }
}

fn push_varlen(out: &mut Vec<u8>, mut value: u32) {
    let mut buf = [0u8; 4];
    let mut n = 0;
    loop {
        buf[n] = (value & 0x7f) as u8;
        n += 1;
        value >>= 7;
        if value == 0 {
            break;
        }
    }
    for i in (0..n).rev() {
        out.push(if i > 0 { buf[i] | 0x80 } else { buf[i] });
    }
}

fn chunk(out: &mut Vec<u8>, events: &[(u64, Vec<u8>)]) {
    let mut body = Vec::new();
    let mut last = 0u64;
    for (tick, bytes) in events {
        push_varlen(&mut body, (tick - last) as u32);
        body.extend_from_slice(bytes);
        last = *tick;
    }
    push_varlen(&mut body, 0);
    body.extend_from_slice(&[0xff, 0x2f, 0x00]);
    out.extend_from_slice(b"MTrk");
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(&body);
}

/// Renders a pianoroll as a format-1 SMF with a conductor chunk followed by
/// one chunk per track. Each timestep lasts a sixteenth note; hold runs
/// become sustained notes and holds that do not continue a note are dropped.
pub fn export_midi(roll: &PianoRoll, opts: &ExportOptions) -> Vec<u8> {
    let ppq = opts.ticks_per_quarter.max(STEPS_PER_QUARTER as u16);
    let step_ticks = (ppq as usize / STEPS_PER_QUARTER) as u64;
    let mut out = b"MThd".to_vec();
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&1u16.to_be_bytes());
    out.extend_from_slice(&5u16.to_be_bytes());
    out.extend_from_slice(&ppq.to_be_bytes());

    let usec = (60_000_000.0 / opts.tempo_bpm.max(1.0)).round().clamp(1.0, 16_777_215.0) as u32;
    let tempo = usec.to_be_bytes();
    chunk(
        &mut out,
        &[
            (0, vec![0xff, 0x51, 0x03, tempo[1], tempo[2], tempo[3]]),
            (0, vec![0xff, 0x58, 0x04, 0x04, 0x02, 0x18, 0x08]),
        ],
    );

    for track in Track::ALL {
        let (channel, program) = opts.channel_and_program(track);
        let mut events: Vec<(u64, Vec<u8>)> = vec![(0, vec![0xc0 | channel, program])];
        let tokens = roll.track(track);
        let mut t = 0;
        while t < tokens.len() {
            let tok = tokens[t];
            if !is_pitch(tok) {
                t += 1;
                continue;
            }
            let mut len = 1;
            while t + len < tokens.len() && tokens[t + len] == HOLD {
                len += 1;
            }
            let on = t as u64 * step_ticks;
            let off = (t + len) as u64 * step_ticks;
            events.push((on, vec![0x90 | channel, tok, opts.velocity.clamp(1, 127)]));
            events.push((off, vec![0x80 | channel, tok, 0]));
            t += len;
        }
        // note-offs sort before note-ons at the same tick
        events.sort_by_key(|(tick, bytes)| (*tick, bytes[0] & 0xf0 != 0x80));
        chunk(&mut out, &events);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::midi::parse_midi;
    use crate::tokens::SILENCE;

    #[test]
    fn varlen_encoding() {
        for (v, expect) in [
            (0u32, vec![0x00]),
            (0x7f, vec![0x7f]),
            (0x80, vec![0x81, 0x00]),
            (0x3fff, vec![0xff, 0x7f]),
            (0x0fff_ffff, vec![0xff, 0xff, 0xff, 0x7f]),
        ] {
            let mut out = Vec::new();
            push_varlen(&mut out, v);
            assert_eq!(out, expect, "{v:#x}");
        }
    }

    #[test]
    fn hold_run_becomes_one_note() {
        let mut roll = PianoRoll::silent(16);
        roll.set_track(
            Track::Bass,
            &[60, HOLD, HOLD, SILENCE, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0].map(|x| if x == 0 { SILENCE } else { x }),
        );
        let song = parse_midi(&export_midi(&roll, &ExportOptions::default()), "x").unwrap().song;
        let bass = song.tracks.iter().find(|t| t.program == 33).unwrap();
        assert_eq!(bass.events.len(), 1);
        assert_eq!(bass.events[0].pitch, 60);
        assert_eq!(bass.events[0].duration, 3 * 120);
    }

    #[test]
    fn silent_roll_has_no_notes() {
        let song = parse_midi(&export_midi(&PianoRoll::silent(32), &ExportOptions::default()), "x").unwrap().song;
        assert!(song.tracks.iter().all(|t| t.events.is_empty()));
        assert_eq!(song.time_signatures.len(), 1);
    }
}
