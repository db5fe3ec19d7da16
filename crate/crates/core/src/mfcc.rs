//! MFCC front end: WAV input, mel filterbank, orthonormal DCT-II.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feature::{FeatureSequence, Layer, WordSpan};

#[derive(Debug, Error)]
pub enum MfccError {
    #[error("audio file not found: {}", .0.display())]
    NotFound(PathBuf),
    #[error("I/O error reading {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported audio codec in {}: {reason}", path.display())]
    UnsupportedCodec { path: PathBuf, reason: String },
    #[error("malformed WAV header in {}: {reason}", path.display())]
    MalformedHeader { path: PathBuf, reason: String },
    #[error("audio has {samples} samples, need at least {needed} for one window")]
    TooShort { samples: usize, needed: usize },
    #[error("sample rate {found} Hz, expected {expected} Hz (no resampling is done)")]
    SampleRateMismatch { expected: u32, found: u32 },
    #[error("invalid MFCC configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid audio: {0}")]
    InvalidAudio(String),
}

impl MfccError {
    pub fn is_validation(&self) -> bool {
        !matches!(self, MfccError::Io { .. })
    }
}

/// Mono PCM samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f32>,
    pub sample_rate_hz: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f32>, sample_rate_hz: u32) -> Result<Self, MfccError> {
        if sample_rate_hz == 0 {
            return Err(MfccError::InvalidAudio("sample rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(MfccError::InvalidAudio("non-finite sample".into()));
        }
        Ok(AudioBuffer { samples, sample_rate_hz })
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Samples inside `span`, rounded outward to whole samples.
    pub fn slice(&self, span: &WordSpan) -> Result<AudioBuffer, MfccError> {
        let sr = self.sample_rate_hz as f64;
        let start = ((span.start_s * sr).floor().max(0.0) as usize).min(self.samples.len());
        let end = ((span.end_s * sr).ceil().max(0.0) as usize).min(self.samples.len());
        if start >= end {
            return Err(MfccError::InvalidAudio(format!("span {span} is outside the audio")));
        }
        Ok(AudioBuffer {
            samples: self.samples[start..end].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
        })
    }
}

/// Reads 16/24/32-bit integer or 32-bit float PCM WAV; channels are averaged.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer, MfccError> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) if io.kind() == std::io::ErrorKind::NotFound => {
            MfccError::NotFound(path.to_path_buf())
        }
        hound::Error::IoError(source) => MfccError::Io {
            path: path.to_path_buf(),
            source,
        },
        hound::Error::Unsupported => MfccError::UnsupportedCodec {
            path: path.to_path_buf(),
            reason: "only PCM integer and IEEE float are supported".into(),
        },
        other => MfccError::MalformedHeader {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    })?;
    let spec = reader.spec();
    let malformed = |e: hound::Error| MfccError::MalformedHeader {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let interleaved: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f32 / 32768.0))
            .collect::<Result<_, _>>()
            .map_err(malformed)?,
        (hound::SampleFormat::Int, bits @ (24 | 32)) => {
            let scale = (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| (v as f64 / scale) as f32))
                .collect::<Result<_, _>>()
                .map_err(malformed)?
        }
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .collect::<Result<_, _>>()
            .map_err(malformed)?,
        (fmt, bits) => {
            return Err(MfccError::UnsupportedCodec {
                path: path.to_path_buf(),
                reason: format!("{bits}-bit {fmt:?} samples"),
            })
        }
    };
    let channels = spec.channels.max(1) as usize;
    let samples = interleaved
        .chunks_exact(channels)
        .map(|c| c.iter().sum::<f32>() / channels as f32)
        .collect();
    AudioBuffer::new(samples, spec.sample_rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowFunction {
    Hamming,
    Hann,
    Rectangular,
}

impl WindowFunction {
    fn coefficients(self, len: usize) -> Vec<f64> {
        let denom = (len.max(2) - 1) as f64;
        (0..len)
            .map(|n| {
                let x = 2.0 * PI * n as f64 / denom;
                match self {
                    WindowFunction::Hamming => 0.54 - 0.46 * x.cos(),
                    WindowFunction::Hann => 0.5 - 0.5 * x.cos(),
                    WindowFunction::Rectangular => 1.0,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfccConfig {
    pub n_coeffs: usize,
    pub window_s: f64,
    pub hop_s: f64,
    /// FFT size; `None` picks the next power of two above the window.
    pub n_fft: Option<usize>,
    pub n_mel_filters: usize,
    pub pre_emphasis: f64,
    pub window_function: WindowFunction,
    pub log_floor: f64,
    /// Input rate the extractor insists on; `None` accepts any rate.
    pub expected_sample_rate_hz: Option<u32>,
}

impl Default for MfccConfig {
    fn default() -> Self {
        MfccConfig {
            n_coeffs: 13,
            window_s: 0.025,
            hop_s: 0.010,
            n_fft: None,
            n_mel_filters: 26,
            pre_emphasis: 0.97,
            window_function: WindowFunction::Hamming,
            log_floor: 1e-10,
            expected_sample_rate_hz: Some(16_000),
        }
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Orthonormal DCT-II basis, `n x n`, row `k` = coefficient `k`.
pub fn dct_matrix(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|k| {
            let scale = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
            (0..n)
                .map(|i| scale * (PI * k as f64 * (2 * i + 1) as f64 / (2 * n) as f64).cos())
                .collect()
        })
        .collect()
}

/// Triangular filters evenly spaced on the mel scale from 0 Hz to Nyquist.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    /// `weights[f][bin]` over the `n_fft / 2 + 1` spectrum bins.
    weights: Vec<Vec<f64>>,
    centers_hz: Vec<f64>,
}

impl MelFilterbank {
    pub fn new(n_filters: usize, n_fft: usize, sample_rate_hz: u32) -> Result<Self, MfccError> {
        let n_bins = n_fft / 2 + 1;
        let sr = sample_rate_hz as f64;
        let mel_max = hz_to_mel(sr / 2.0);
        let edges: Vec<f64> = (0..n_filters + 2)
            .map(|i| mel_to_hz(mel_max * i as f64 / (n_filters + 1) as f64))
            .collect();
        let mut weights = Vec::with_capacity(n_filters);
        for f in 0..n_filters {
            let (lo, mid, hi) = (edges[f], edges[f + 1], edges[f + 2]);
            let w: Vec<f64> = (0..n_bins)
                .map(|b| {
                    let hz = b as f64 * sr / n_fft as f64;
                    if hz > lo && hz <= mid {
                        (hz - lo) / (mid - lo)
                    } else if hz > mid && hz < hi {
                        (hi - hz) / (hi - mid)
                    } else {
                        0.0
                    }
                })
                .collect();
            if w.iter().all(|&x| x == 0.0) {
                return Err(MfccError::InvalidConfig(format!(
                    "mel filter {f} covers no FFT bin; increase n_fft or reduce n_mel_filters"
                )));
            }
            weights.push(w);
        }
        Ok(MelFilterbank {
            weights,
            centers_hz: edges[1..=n_filters].to_vec(),
        })
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn apply(&self, spectrum: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.iter().zip(spectrum).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Reusable MFCC pipeline for one configuration and sample rate.
pub struct MfccExtractor {
    cfg: MfccConfig,
    sample_rate_hz: u32,
    window_len: usize,
    hop_len: usize,
    n_fft: usize,
    window: Vec<f64>,
    filterbank: MelFilterbank,
    dct: Vec<Vec<f64>>,
    fft: Arc<dyn Fft<f64>>,
}

impl MfccExtractor {
    pub fn new(cfg: MfccConfig, sample_rate_hz: u32) -> Result<Self, MfccError> {
        if let Some(expected) = cfg.expected_sample_rate_hz {
            if expected != sample_rate_hz {
                return Err(MfccError::SampleRateMismatch {
                    expected,
                    found: sample_rate_hz,
                });
            }
        }
        let sr = sample_rate_hz as f64;
        if !(cfg.window_s > 0.0 && cfg.hop_s > 0.0) {
            return Err(MfccError::InvalidConfig("window and hop must be positive".into()));
        }
        let window_len = (cfg.window_s * sr).round() as usize;
        let hop_len = (cfg.hop_s * sr).round() as usize;
        if window_len == 0 || hop_len == 0 {
            return Err(MfccError::InvalidConfig("window or hop shorter than one sample".into()));
        }
        let n_fft = cfg.n_fft.unwrap_or_else(|| window_len.next_power_of_two());
        if !n_fft.is_power_of_two() || n_fft < window_len {
            return Err(MfccError::InvalidConfig(format!(
                "n_fft {n_fft} must be a power of two >= window length {window_len}"
            )));
        }
        if cfg.n_coeffs == 0 || cfg.n_coeffs > cfg.n_mel_filters {
            return Err(MfccError::InvalidConfig(format!(
                "n_coeffs {} must be in 1..={}",
                cfg.n_coeffs, cfg.n_mel_filters
            )));
        }
        if !(cfg.log_floor > 0.0) {
            return Err(MfccError::InvalidConfig("log floor must be positive".into()));
        }
        let filterbank = MelFilterbank::new(cfg.n_mel_filters, n_fft, sample_rate_hz)?;
        let dct = dct_matrix(cfg.n_mel_filters);
        let fft = FftPlanner::new().plan_fft_forward(n_fft);
        Ok(MfccExtractor {
            window: cfg.window_function.coefficients(window_len),
            cfg,
            sample_rate_hz,
            window_len,
            hop_len,
            n_fft,
            filterbank,
            dct,
            fft,
        })
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.filterbank
    }

    pub fn frame_rate_hz(&self) -> f32 {
        (self.sample_rate_hz as f64 / self.hop_len as f64) as f32
    }

    /// `floor((n_samples - window) / hop) + 1`, or 0 when too short.
    pub fn n_frames(&self, n_samples: usize) -> usize {
        if n_samples < self.window_len {
            0
        } else {
            (n_samples - self.window_len) / self.hop_len + 1
        }
    }

    fn check(&self, audio: &AudioBuffer) -> Result<(), MfccError> {
        if audio.sample_rate_hz != self.sample_rate_hz {
            return Err(MfccError::SampleRateMismatch {
                expected: self.sample_rate_hz,
                found: audio.sample_rate_hz,
            });
        }
        if audio.samples.len() < self.window_len {
            return Err(MfccError::TooShort {
                samples: audio.samples.len(),
                needed: self.window_len,
            });
        }
        Ok(())
    }

    /// Mel filter energies per frame, before the log.
    pub fn mel_energies(&self, audio: &AudioBuffer) -> Result<Vec<Vec<f64>>, MfccError> {
        self.check(audio)?;
        let x = &audio.samples;
        let emphasized: Vec<f64> = (0..x.len())
            .map(|n| {
                let cur = x[n] as f64;
                if n == 0 {
                    cur
                } else {
                    cur - self.cfg.pre_emphasis * x[n - 1] as f64
                }
            })
            .collect();

        let n_bins = self.n_fft / 2 + 1;
        let mut buf = vec![Complex::new(0.0, 0.0); self.n_fft];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let mut out = Vec::with_capacity(self.n_frames(x.len()));
        for f in 0..self.n_frames(x.len()) {
            let start = f * self.hop_len;
            for (slot, (s, w)) in buf.iter_mut().zip(emphasized[start..start + self.window_len].iter().zip(&self.window)) {
                *slot = Complex::new(s * w, 0.0);
            }
            for slot in &mut buf[self.window_len..] {
                *slot = Complex::new(0.0, 0.0);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            let magnitude: Vec<f64> = buf[..n_bins].iter().map(|c| c.norm()).collect();
            out.push(self.filterbank.apply(&magnitude));
        }
        Ok(out)
    }

    pub fn extract(&self, audio: &AudioBuffer, source_id: &str) -> Result<FeatureSequence, MfccError> {
        let energies = self.mel_energies(audio)?;
        let mut frames = Vec::with_capacity(energies.len() * self.cfg.n_coeffs);
        for e in &energies {
            let logs: Vec<f64> = e.iter().map(|&v| v.max(self.cfg.log_floor).ln()).collect();
            for row in &self.dct[..self.cfg.n_coeffs] {
                frames.push(row.iter().zip(&logs).map(|(a, b)| a * b).sum::<f64>() as f32);
            }
        }
        FeatureSequence::new(frames, self.cfg.n_coeffs, self.frame_rate_hz(), source_id, Layer::NONE)
            .map_err(|e| MfccError::InvalidAudio(e.to_string()))
    }
}

/// MFCCs of `audio` with the given configuration. The returned sequence has
/// no layer and an empty source id.
pub fn mfcc(audio: &AudioBuffer, cfg: &MfccConfig) -> Result<FeatureSequence, MfccError> {
    MfccExtractor::new(cfg.clone(), audio.sample_rate_hz)?.extract(audio, "")
}
