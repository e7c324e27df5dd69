//! Audio front end: per-channel MFCCs averaged per second, both channels
//! concatenated into one row.

mod fft;
mod wav;

pub use fft::{fft, power_spectrum};
pub use wav::{parse_wav, read_wav, wav_bytes, write_wav, AudioClip, WavEncoding};

use std::f64::consts::PI;

use crate::data::{FeatureSequence, Modality};
use crate::error::{Error, Result};
use crate::numcore::Matrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MfccConfig {
    pub window_ms: f64,
    pub hop_ms: f64,
    pub n_mels: usize,
    pub n_ceps: usize,
    pub preemph: f64,
    pub log_floor: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        MfccConfig {
            window_ms: 25.0,
            hop_ms: 10.0,
            n_mels: 26,
            n_ceps: 13,
            preemph: 0.97,
            log_floor: 1e-10,
        }
    }
}

impl MfccConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.hop_ms > 0.0 && self.window_ms >= self.hop_ms) {
            return Err(Error::InvalidArgument(format!(
                "need window ({} ms) >= hop ({} ms) > 0",
                self.window_ms, self.hop_ms
            )));
        }
        if self.n_ceps == 0 || self.n_ceps > self.n_mels {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= n_ceps ({}) <= n_mels ({})",
                self.n_ceps, self.n_mels
            )));
        }
        if !(self.log_floor > 0.0) {
            return Err(Error::InvalidArgument("log floor must be positive".into()));
        }
        Ok(())
    }

    /// `(window, hop)` in samples.
    pub fn frame_geometry(&self, sample_rate: u32) -> (usize, usize) {
        let samples = |ms: f64| ((ms * sample_rate as f64 / 1000.0).round() as usize).max(1);
        (samples(self.window_ms), samples(self.hop_ms))
    }
}

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters on bins `0..=n_fft/2`, centres equally spaced in mel
/// between 0 Hz and Nyquist. Row `m` holds filter `m`'s bin weights.
pub fn mel_filterbank(n_mels: usize, n_fft: usize, sample_rate: u32) -> Matrix {
    let sr = sample_rate as f64;
    let top = hz_to_mel(sr / 2.0);
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(top * i as f64 / (n_mels + 1) as f64))
        .collect();
    let n_bins = n_fft / 2 + 1;
    let mut fb = Matrix::zeros(n_mels, n_bins);
    for m in 0..n_mels {
        let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
        for k in 0..n_bins {
            let f = k as f64 * sr / n_fft as f64;
            let w = if f > lo && f <= mid {
                (f - lo) / (mid - lo)
            } else if f > mid && f < hi {
                (hi - f) / (hi - mid)
            } else {
                0.0
            };
            fb.set(m, k, w);
        }
    }
    fb
}

/// Orthonormal DCT-II basis, `n_out × n_in`.
pub fn dct_matrix(n_out: usize, n_in: usize) -> Matrix {
    let mut d = Matrix::zeros(n_out, n_in);
    for k in 0..n_out {
        let s = if k == 0 { (1.0 / n_in as f64).sqrt() } else { (2.0 / n_in as f64).sqrt() };
        for m in 0..n_in {
            d.set(k, m, s * (PI * k as f64 * (2 * m + 1) as f64 / (2 * n_in) as f64).cos());
        }
    }
    d
}

pub fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// `⌊(n − window)/hop⌋ + 1`, or 0 when shorter than one window.
pub fn frame_count(n: usize, window: usize, hop: usize) -> usize {
    if n < window {
        0
    } else {
        (n - window) / hop + 1
    }
}

/// One row of `n_ceps` coefficients per frame.
pub fn mfcc_channel(samples: &[f64], sample_rate: u32, cfg: &MfccConfig) -> Result<Matrix> {
    cfg.validate()?;
    if sample_rate == 0 {
        return Err(Error::InvalidArgument("sample rate must be positive".into()));
    }
    let (window, hop) = cfg.frame_geometry(sample_rate);
    if samples.len() < window {
        return Err(Error::InvalidArgument(format!(
            "clip of {} samples is shorter than one {window}-sample window",
            samples.len()
        )));
    }
    let n_fft = window.next_power_of_two();
    let fb = mel_filterbank(cfg.n_mels, n_fft, sample_rate);
    let dct = dct_matrix(cfg.n_ceps, cfg.n_mels);
    let win = hamming(window);

    let mut emph = Vec::with_capacity(samples.len());
    emph.push(samples[0]);
    emph.extend(samples.windows(2).map(|w| w[1] - cfg.preemph * w[0]));

    let frames = frame_count(samples.len(), window, hop);
    let mut out = Matrix::zeros(frames, cfg.n_ceps);
    let mut frame = vec![0.0; window];
    for j in 0..frames {
        let start = j * hop;
        for (f, (x, w)) in frame.iter_mut().zip(emph[start..start + window].iter().zip(&win)) {
            *f = x * w;
        }
        let power = power_spectrum(&frame, n_fft);
        let logmel: Vec<f64> = fb
            .matvec(&power)?
            .into_iter()
            .map(|e| e.max(cfg.log_floor).ln())
            .collect();
        out.row_mut(j).copy_from_slice(&dct.matvec(&logmel)?);
    }
    Ok(out)
}

/// Averages the frames whose start sample falls in each whole second.
fn per_second(frames: &Matrix, hop: usize, sample_rate: u32, seconds: usize) -> Matrix {
    let mut sums = Matrix::zeros(seconds, frames.cols());
    let mut counts = vec![0usize; seconds];
    for j in 0..frames.rows() {
        let t = j * hop / sample_rate as usize;
        if t < seconds {
            for (s, v) in sums.row_mut(t).iter_mut().zip(frames.row(j)) {
                *s += v;
            }
            counts[t] += 1;
        }
    }
    for (t, &c) in counts.iter().enumerate() {
        let c = c.max(1) as f64;
        sums.row_mut(t).iter_mut().for_each(|v| *v /= c);
    }
    sums
}

/// `T × 2·n_ceps` audio features, `T = ⌊duration⌋`; mono input is used for
/// both channels.
pub fn extract_audio_features(
    clip: &AudioClip,
    cfg: &MfccConfig,
    episode_id: &str,
) -> Result<FeatureSequence> {
    let sr = clip.sample_rate;
    let seconds = clip.len() / sr as usize;
    if seconds == 0 {
        return Err(Error::InvalidArgument(format!(
            "audio of {:.3} s is shorter than one second",
            clip.duration_seconds()
        )));
    }
    let (_, hop) = cfg.frame_geometry(sr);
    let left = per_second(&mfcc_channel(&clip.channels[0], sr, cfg)?, hop, sr, seconds);
    let right = match clip.channels.get(1) {
        Some(ch) => per_second(&mfcc_channel(ch, sr, cfg)?, hop, sr, seconds),
        None => left.clone(),
    };
    let n = cfg.n_ceps;
    let mut out = Matrix::zeros(seconds, 2 * n);
    for t in 0..seconds {
        let row = out.row_mut(t);
        row[..n].copy_from_slice(left.row(t));
        row[n..].copy_from_slice(right.row(t));
    }
    FeatureSequence::new(episode_id, Modality::Audio, out)
}
