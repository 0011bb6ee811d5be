use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::frames::FrameSpec;
use super::matrix::Matrix;
use crate::error::{Error, Result};

pub const DEFAULT_MEL_BINS: usize = 100;
pub const LOG_FLOOR: f64 = 1e-5;
/// Window length in hops.
pub const WINDOW_HOPS: usize = 4;

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// HTK mel filterbank edges: `bins + 2` points evenly spaced on the mel
/// scale over `[0, nyquist]`, returned in Hz.
pub fn mel_edges(sample_rate: u32, bins: usize) -> Vec<f64> {
    let top = hz_to_mel(f64::from(sample_rate) / 2.0);
    (0..bins + 2)
        .map(|i| mel_to_hz(top * i as f64 / (bins + 1) as f64))
        .collect()
}

/// Center frequency of every mel bin in Hz.
pub fn mel_centers(sample_rate: u32, bins: usize) -> Vec<f64> {
    let edges = mel_edges(sample_rate, bins);
    edges[1..=bins].to_vec()
}

/// Output of [`MelExtractor::extract`].
#[derive(Debug, Clone, PartialEq)]
pub struct MelOutput {
    /// `T × mel_bins` log-mel frames at the token rate.
    pub frames: Matrix,
    /// Samples outside `[−1, 1]` that were clamped.
    pub clamped: usize,
}

/// Log-mel spectrogram with one frame per token.
pub struct MelExtractor {
    spec: FrameSpec,
    bins: usize,
    n_fft: usize,
    window: Vec<f64>,
    // per bin: first FFT bin and its weights
    filters: Vec<(usize, Vec<f64>)>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for MelExtractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MelExtractor")
            .field("spec", &self.spec)
            .field("bins", &self.bins)
            .field("n_fft", &self.n_fft)
            .finish()
    }
}

impl MelExtractor {
    pub fn new(spec: FrameSpec, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Config("mel_bins must be positive".into()));
        }
        let n_fft = WINDOW_HOPS * spec.samples_per_token();
        // periodic Hann
        let window = (0..n_fft)
            .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / n_fft as f64).cos())
            .collect();
        let bin_hz = f64::from(spec.sample_rate) / n_fft as f64;
        let edges = mel_edges(spec.sample_rate, bins);
        let n_freq = n_fft / 2 + 1;
        let filters = (0..bins)
            .map(|m| {
                let (lo, c, hi) = (edges[m], edges[m + 1], edges[m + 2]);
                let weight = |k: usize| {
                    let f = k as f64 * bin_hz;
                    ((f - lo) / (c - lo)).min((hi - f) / (hi - c)).max(0.0)
                };
                let first = (0..n_freq).find(|&k| weight(k) > 0.0).unwrap_or(n_freq);
                let weights = (first..n_freq)
                    .map(weight)
                    .take_while(|w| *w > 0.0)
                    .collect();
                (first, weights)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(n_fft);
        Ok(Self {
            spec,
            bins,
            n_fft,
            window,
            filters,
            fft,
        })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    pub fn spec(&self) -> FrameSpec {
        self.spec
    }

    /// Number of frames produced for `len` samples.
    pub fn frame_count(&self, len: usize) -> usize {
        self.spec.token_count(len)
    }

    pub fn extract(&self, audio: &[f64]) -> Result<MelOutput> {
        if audio.is_empty() {
            return Err(Error::Empty("audio"));
        }
        if let Some(i) = audio.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("audio sample {i}")));
        }
        let mut clamped = 0;
        let samples: Vec<f64> = audio
            .iter()
            .map(|&v| {
                if v.abs() > 1.0 {
                    clamped += 1;
                }
                v.clamp(-1.0, 1.0)
            })
            .collect();

        let hop = self.spec.samples_per_token();
        let pad = self.n_fft / 2;
        let frames = self.frame_count(samples.len());
        let mut out = Matrix::zeros(frames, self.bins);
        let mut buf = vec![Complex::new(0.0, 0.0); self.n_fft];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let mut mag = vec![0.0; self.n_fft / 2 + 1];
        for t in 0..frames {
            for (n, slot) in buf.iter_mut().enumerate() {
                let idx = (t * hop + n) as isize - pad as isize;
                *slot = Complex::new(samples[reflect(idx, samples.len())] * self.window[n], 0.0);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (m, c) in mag.iter_mut().zip(&buf) {
                *m = c.norm();
            }
            for (o, (first, w)) in out.row_mut(t).iter_mut().zip(&self.filters) {
                let energy: f64 = w.iter().zip(&mag[*first..]).map(|(a, b)| a * b).sum();
                *o = energy.max(LOG_FLOOR).ln();
            }
        }
        Ok(MelOutput {
            frames: out,
            clamped,
        })
    }
}

/// Mirror index into `[0, len)` without repeating the edge sample,
/// folding as many times as needed.
fn reflect(idx: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let m = idx.rem_euclid(period);
    if m < len as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

/// Log-mel frames for `audio` with `bins` mel bins.
pub fn mel_extract(audio: &[f64], spec: FrameSpec, bins: usize) -> Result<MelOutput> {
    MelExtractor::new(spec, bins)?.extract(audio)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection() {
        let got: Vec<usize> = (-4..8).map(|i| reflect(i, 4)).collect();
        assert_eq!(got, vec![2, 3, 2, 1, 0, 1, 2, 3, 2, 1, 0, 1]);
        assert_eq!(reflect(-5, 1), 0);
    }

    #[test]
    fn mel_scale_round_trip() {
        for hz in [0.0, 100.0, 440.0, 1000.0, 12_000.0] {
            assert!((mel_to_hz(hz_to_mel(hz)) - hz).abs() < 1e-9);
        }
        assert!((hz_to_mel(700.0) - 2595.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn every_filter_has_support() {
        let ex = MelExtractor::new(FrameSpec::CODEC, DEFAULT_MEL_BINS).unwrap();
        for (m, (_, w)) in ex.filters.iter().enumerate() {
            assert!(!w.is_empty(), "filter {m} is empty");
        }
    }

    #[test]
    fn silence_hits_floor() {
        let out = mel_extract(&vec![0.0; 24_000], FrameSpec::CODEC, DEFAULT_MEL_BINS).unwrap();
        assert_eq!(out.frames.rows(), 25);
        assert!(out.frames.data().iter().all(|v| *v == LOG_FLOOR.ln()));
        assert_eq!(out.clamped, 0);
    }

    #[test]
    fn two_seconds_is_fifty_frames() {
        let audio: Vec<f64> = (0..48_000).map(|i| (i as f64 * 0.01).sin() * 0.3).collect();
        let out = mel_extract(&audio, FrameSpec::CODEC, 80).unwrap();
        assert_eq!(out.frames.rows(), 50);
        assert_eq!(out.frames.cols(), 80);
    }

    #[test]
    fn sine_peaks_at_nearest_center() {
        let sr = 24_000.0;
        let audio: Vec<f64> = (0..48_000)
            .map(|i| (2.0 * std::f64::consts::PI * 440.0 * i as f64 / sr).sin())
            .collect();
        let out = mel_extract(&audio, FrameSpec::CODEC, DEFAULT_MEL_BINS).unwrap();
        let centers = mel_centers(24_000, DEFAULT_MEL_BINS);
        let nearest = (0..centers.len())
            .min_by(|&a, &b| (centers[a] - 440.0).abs().total_cmp(&(centers[b] - 440.0).abs()))
            .unwrap();
        let t = out.frames.rows();
        for f in 2..t - 2 {
            let row = out.frames.row(f);
            let argmax = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            assert_eq!(argmax, nearest, "frame {f}");
        }
    }

    #[test]
    fn clamps_and_counts() {
        let mut audio = vec![0.0; 2000];
        audio[10] = 1.5;
        audio[11] = -3.0;
        let out = mel_extract(&audio, FrameSpec::CODEC, 10).unwrap();
        assert_eq!(out.clamped, 2);
        assert!(out.frames.is_finite());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            mel_extract(&[], FrameSpec::CODEC, 10),
            Err(Error::Empty(_))
        ));
        assert!(mel_extract(&[f64::NAN], FrameSpec::CODEC, 10).is_err());
        assert!(MelExtractor::new(FrameSpec::CODEC, 0).is_err());
    }
}
