//! Minimal RIFF/WAVE reader and writer for PCM16 and IEEE float32.

use std::fs;
use std::path::Path;

use crate::binio::ByteReader;
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

/// Decoded audio; one sample vector per channel, values in [-1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct AudioClip {
    pub sample_rate: u32,
    pub channels: Vec<Vec<f64>>,
}

impl AudioClip {
    pub fn new(sample_rate: u32, channels: Vec<Vec<f64>>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidArgument("sample rate must be positive".into()));
        }
        if channels.is_empty() || channels.len() > 2 {
            return Err(Error::InvalidArgument(format!(
                "expected 1 or 2 channels, got {}",
                channels.len()
            )));
        }
        if channels.iter().any(|c| c.len() != channels[0].len()) {
            return Err(Error::InvalidArgument("channels differ in length".into()));
        }
        Ok(AudioClip {
            sample_rate,
            channels,
        })
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_seconds(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }
}

fn fourcc(r: &mut ByteReader<'_>) -> Result<[u8; 4]> {
    Ok(r.take(4)?.try_into().unwrap())
}

fn bad(detail: impl Into<String>) -> Error {
    Error::Format {
        what: "WAV file",
        detail: detail.into(),
    }
}

pub fn parse_wav(bytes: &[u8]) -> Result<AudioClip> {
    let mut r = ByteReader::new(bytes, "WAV file");
    if &fourcc(&mut r)? != b"RIFF" {
        return Err(bad("missing RIFF tag at byte 0"));
    }
    r.u32()?;
    if &fourcc(&mut r)? != b"WAVE" {
        return Err(bad("missing WAVE tag at byte 8"));
    }
    let mut fmt: Option<(WavEncoding, usize, u32)> = None;
    loop {
        let at = r.position();
        let id = fourcc(&mut r)?;
        let size = r.u32()? as usize;
        match &id {
            b"fmt " => {
                let body = r.take(size)?;
                let mut f = ByteReader::new(body, "WAV fmt chunk");
                let mut tag = f.u16()?;
                let channels = f.u16()? as usize;
                let rate = f.u32()?;
                f.u32()?;
                f.u16()?;
                let bits = f.u16()?;
                if tag == FORMAT_EXTENSIBLE {
                    f.u16()?;
                    f.u16()?;
                    f.u32()?;
                    tag = f.u16()?;
                }
                let enc = match (tag, bits) {
                    (FORMAT_PCM, 16) => WavEncoding::Pcm16,
                    (FORMAT_FLOAT, 32) => WavEncoding::Float32,
                    (FORMAT_PCM, b) => {
                        return Err(Error::UnsupportedEncoding(format!("{b}-bit integer PCM")))
                    }
                    (FORMAT_FLOAT, b) => {
                        return Err(Error::UnsupportedEncoding(format!("{b}-bit float")))
                    }
                    (t, _) => {
                        return Err(Error::UnsupportedEncoding(format!("format tag {t:#06x}")))
                    }
                };
                if channels == 0 || channels > 2 {
                    return Err(Error::UnsupportedEncoding(format!("{channels} channels")));
                }
                if rate == 0 {
                    return Err(bad(format!("zero sample rate in fmt chunk at byte {at}")));
                }
                fmt = Some((enc, channels, rate));
            }
            b"data" => {
                let Some((enc, n_ch, rate)) = fmt else {
                    return Err(bad(format!("data chunk at byte {at} precedes fmt chunk")));
                };
                let width = match enc {
                    WavEncoding::Pcm16 => 2,
                    WavEncoding::Float32 => 4,
                };
                let frame = width * n_ch;
                if !size.is_multiple_of(frame) {
                    return Err(bad(format!(
                        "data chunk at byte {at} holds {size} bytes, not a multiple of {frame}"
                    )));
                }
                let body = r.take(size)?;
                let mut channels = vec![Vec::with_capacity(size / frame); n_ch];
                for (i, s) in body.chunks_exact(width).enumerate() {
                    let v = match enc {
                        WavEncoding::Pcm16 => i16::from_le_bytes([s[0], s[1]]) as f64 / 32768.0,
                        WavEncoding::Float32 => f32::from_le_bytes(s.try_into().unwrap()) as f64,
                    };
                    channels[i % n_ch].push(v);
                }
                return AudioClip::new(rate, channels);
            }
            _ => {
                r.take(size)?;
            }
        }
        if size % 2 == 1 && r.remaining() > 0 {
            r.u8()?;
        }
    }
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_wav(&bytes)
}

pub fn wav_bytes(clip: &AudioClip, encoding: WavEncoding) -> Vec<u8> {
    let n_ch = clip.channels.len();
    let (tag, width) = match encoding {
        WavEncoding::Pcm16 => (FORMAT_PCM, 2usize),
        WavEncoding::Float32 => (FORMAT_FLOAT, 4),
    };
    let data_len = clip.len() * n_ch * width;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&tag.to_le_bytes());
    out.extend_from_slice(&(n_ch as u16).to_le_bytes());
    out.extend_from_slice(&clip.sample_rate.to_le_bytes());
    out.extend_from_slice(&(clip.sample_rate * (n_ch * width) as u32).to_le_bytes());
    out.extend_from_slice(&((n_ch * width) as u16).to_le_bytes());
    out.extend_from_slice(&((width * 8) as u16).to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for i in 0..clip.len() {
        for ch in &clip.channels {
            let x = ch[i];
            match encoding {
                WavEncoding::Pcm16 => {
                    let q = (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                    out.extend_from_slice(&q.to_le_bytes());
                }
                WavEncoding::Float32 => out.extend_from_slice(&(x as f32).to_le_bytes()),
            }
        }
    }
    out
}

pub fn write_wav(clip: &AudioClip, encoding: WavEncoding, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, wav_bytes(clip, encoding)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::SplitRng;

    fn noise(seed: u64, n: usize, ch: usize) -> AudioClip {
        let mut rng = SplitRng::new(seed);
        AudioClip::new(8000, (0..ch).map(|_| rng.uniform_vec(n, 0.9)).collect()).unwrap()
    }

    #[test]
    fn silence_has_exact_sample_count() {
        let clip = AudioClip::new(16000, vec![vec![0.0; 16000]; 2]).unwrap();
        let back = parse_wav(&wav_bytes(&clip, WavEncoding::Pcm16)).unwrap();
        assert_eq!(back.channels.len(), 2);
        assert_eq!(back.len(), 16000);
        assert!(back.channels.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn round_trip_is_bit_exact_after_first_quantization() {
        for enc in [WavEncoding::Pcm16, WavEncoding::Float32] {
            for ch in [1, 2] {
                let once = parse_wav(&wav_bytes(&noise(ch as u64, 777, ch), enc)).unwrap();
                let twice = parse_wav(&wav_bytes(&once, enc)).unwrap();
                assert_eq!(once, twice);
            }
        }
    }

    #[test]
    fn truncation_reports_offset() {
        let bytes = wav_bytes(&noise(1, 100, 2), WavEncoding::Pcm16);
        match parse_wav(&bytes[..200]) {
            Err(Error::Truncated { offset, .. }) => assert_eq!(offset, 44),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_wav(&bytes[..10]), Err(Error::Truncated { .. })));
    }

    #[test]
    fn rejects_non_wav_and_unsupported_encodings() {
        assert!(matches!(parse_wav(b"definitely not a wav file"), Err(Error::Format { .. })));
        let mut bytes = wav_bytes(&noise(2, 10, 1), WavEncoding::Pcm16);
        bytes[34] = 24; // bits per sample
        match parse_wav(&bytes) {
            Err(Error::UnsupportedEncoding(m)) => assert!(m.contains("24-bit")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn skips_unknown_chunks() {
        let plain = wav_bytes(&noise(3, 50, 2), WavEncoding::Float32);
        let mut bytes = plain[..36].to_vec();
        bytes.extend_from_slice(b"LIST");
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(&[1, 2, 3, 0]);
        bytes.extend_from_slice(&plain[36..]);
        assert_eq!(parse_wav(&bytes).unwrap(), parse_wav(&plain).unwrap());
    }
}
