//! Feature sequences and their on-disk format.
//!
//! A feature file stores one sequence of frame vectors for one recording at
//! one encoder layer. Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      4 bytes   "QBEF"
//! version    u16       1
//! reserved   u16       0
//! frame_rate f32       frames per second
//! n_frames   u32
//! dim        u32
//! source_id  u16 length + UTF-8 bytes
//! layer      i16       -1 = none (MFCC)
//! payload    n_frames * dim f32, frame-major
//! ```

use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"QBEF";
pub const FORMAT_VERSION: u16 = 1;

/// Bytes before the payload, excluding the variable-length source id.
const FIXED_HEADER_LEN: usize = 4 + 2 + 2 + 4 + 4 + 4 + 2 + 2;

/// Times within this distance of a frame boundary snap onto it before the
/// floor/ceil conversion, so that `k / rate * rate` maps back to `k`.
const FRAME_SNAP_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("feature file not found: {}", path.display())]
    NotFound { path: PathBuf },
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("bad magic bytes {found:?}, expected \"QBEF\"")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported feature format version {found} (expected {FORMAT_VERSION})")]
    VersionMismatch { found: u16 },
    #[error("truncated feature file: needed {needed} bytes, found {found}")]
    Truncated { needed: usize, found: usize },
    #[error("non-finite value at frame {frame}, dim {dim}")]
    NonFinite { frame: usize, dim: usize },
    #[error("invalid feature header: {0}")]
    InvalidHeader(String),
    #[error("{extra} unexpected trailing bytes after payload")]
    TrailingBytes { extra: usize },
    #[error("invalid feature sequence: {0}")]
    Invalid(String),
    #[error("invalid word span {0}")]
    InvalidSpan(String),
    #[error("span {span} selects no frames of '{source_id}' at {frame_rate_hz} Hz")]
    EmptySlice {
        span: WordSpan,
        source_id: String,
        frame_rate_hz: f32,
    },
    #[error("span {span} ends past '{source_id}' ({duration_s:.3} s)")]
    SpanOutOfRange {
        span: WordSpan,
        source_id: String,
        duration_s: f64,
    },
}

impl FeatureError {
    pub fn is_validation(&self) -> bool {
        !matches!(self, FeatureError::Io { .. })
    }

    fn io(path: &Path, source: io::Error) -> Self {
        if source.kind() == io::ErrorKind::NotFound {
            FeatureError::NotFound {
                path: path.to_path_buf(),
            }
        } else {
            FeatureError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }
}

/// Encoder layer index; [`Layer::NONE`] marks features without a layer (MFCC).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Layer(i16);

impl Layer {
    pub const NONE: Layer = Layer(-1);

    pub fn new(index: u16) -> Result<Self, FeatureError> {
        i16::try_from(index)
            .map(Layer)
            .map_err(|_| FeatureError::Invalid(format!("layer {index} out of range")))
    }

    pub fn from_raw(raw: i16) -> Result<Self, FeatureError> {
        if raw < -1 {
            return Err(FeatureError::Invalid(format!("layer {raw} out of range")));
        }
        Ok(Layer(raw))
    }

    pub fn raw(self) -> i16 {
        self.0
    }

    pub fn index(self) -> Option<u16> {
        u16::try_from(self.0).ok()
    }

    pub fn is_none(self) -> bool {
        self.0 < 0
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index() {
            Some(i) => write!(f, "{i}"),
            None => f.write_str("none"),
        }
    }
}

impl FromStr for Layer {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(Layer::NONE);
        }
        let raw: i16 = s
            .parse()
            .map_err(|_| FeatureError::Invalid(format!("cannot parse layer '{s}'")))?;
        Layer::from_raw(raw)
    }
}

/// Time span of one aligned word, in seconds from the start of a recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordSpan {
    pub word: String,
    pub start_s: f64,
    pub end_s: f64,
}

impl WordSpan {
    pub fn new(word: impl Into<String>, start_s: f64, end_s: f64) -> Result<Self, FeatureError> {
        let span = WordSpan {
            word: word.into(),
            start_s,
            end_s,
        };
        span.validate()?;
        Ok(span)
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        if !self.start_s.is_finite() || !self.end_s.is_finite() {
            return Err(FeatureError::InvalidSpan(format!("{self}: non-finite bound")));
        }
        if self.start_s < 0.0 {
            return Err(FeatureError::InvalidSpan(format!("{self}: negative start")));
        }
        if self.end_s <= self.start_s {
            return Err(FeatureError::InvalidSpan(format!("{self}: end_s <= start_s")));
        }
        Ok(())
    }

    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

impl fmt::Display for WordSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{}' [{} s, {} s)", self.word, self.start_s, self.end_s)
    }
}

/// One recording (or query) as a time-ordered matrix of frame vectors.
///
/// Frames are stored row-major in a flat buffer. Construction validates
/// shape, frame rate and finiteness; the value is immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    frames: Vec<f32>,
    n_frames: usize,
    dim: usize,
    frame_rate_hz: f32,
    source_id: String,
    layer: Layer,
}

impl FeatureSequence {
    pub fn new(
        frames: Vec<f32>,
        dim: usize,
        frame_rate_hz: f32,
        source_id: impl Into<String>,
        layer: Layer,
    ) -> Result<Self, FeatureError> {
        if dim == 0 {
            return Err(FeatureError::Invalid("dim must be >= 1".into()));
        }
        if frames.is_empty() {
            return Err(FeatureError::Invalid("sequence has no frames".into()));
        }
        if frames.len() % dim != 0 {
            return Err(FeatureError::Invalid(format!(
                "{} values do not divide into frames of dim {dim}",
                frames.len()
            )));
        }
        if !(frame_rate_hz.is_finite() && frame_rate_hz > 0.0) {
            return Err(FeatureError::Invalid(format!(
                "frame rate must be positive, got {frame_rate_hz}"
            )));
        }
        if let Some(pos) = frames.iter().position(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite {
                frame: pos / dim,
                dim: pos % dim,
            });
        }
        Ok(FeatureSequence {
            n_frames: frames.len() / dim,
            frames,
            dim,
            frame_rate_hz,
            source_id: source_id.into(),
            layer,
        })
    }

    /// Builds a sequence from per-frame rows, which must share one length.
    pub fn from_rows(
        rows: &[Vec<f32>],
        frame_rate_hz: f32,
        source_id: impl Into<String>,
        layer: Layer,
    ) -> Result<Self, FeatureError> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(FeatureError::Invalid(format!(
                "row {bad} has length {}, expected {dim}",
                rows[bad].len()
            )));
        }
        Self::new(rows.concat(), dim, frame_rate_hz, source_id, layer)
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frame_rate_hz(&self) -> f32 {
        self.frame_rate_hz
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn layer(&self) -> Layer {
        self.layer
    }

    pub fn duration_s(&self) -> f64 {
        self.n_frames as f64 / self.frame_rate_hz as f64
    }

    pub fn frame(&self, index: usize) -> &[f32] {
        &self.frames[index * self.dim..(index + 1) * self.dim]
    }

    pub fn frames(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.frames.chunks_exact(self.dim)
    }

    /// The flat row-major frame buffer.
    pub fn as_slice(&self) -> &[f32] {
        &self.frames
    }

    pub fn with_source_id(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }

    pub fn with_layer(mut self, layer: Layer) -> Self {
        self.layer = layer;
        self
    }

    /// Frames `[start, end)` as a new sequence with the same rate and identity.
    pub fn sub_frames(&self, start: usize, end: usize) -> Result<Self, FeatureError> {
        if start >= end || end > self.n_frames {
            return Err(FeatureError::Invalid(format!(
                "frame range {start}..{end} invalid for {} frames",
                self.n_frames
            )));
        }
        Ok(FeatureSequence {
            frames: self.frames[start * self.dim..end * self.dim].to_vec(),
            n_frames: end - start,
            dim: self.dim,
            frame_rate_hz: self.frame_rate_hz,
            source_id: self.source_id.clone(),
            layer: self.layer,
        })
    }

    /// Total encoded size in bytes of this sequence as a feature file.
    pub fn encoded_len(&self) -> usize {
        FIXED_HEADER_LEN + self.source_id.len() + self.frames.len() * 4
    }
}

fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < FRAME_SNAP_EPS {
        r
    } else {
        x
    }
}

/// First frame index covering time `t` (floor of `t * rate`).
pub fn start_frame(t: f64, frame_rate_hz: f32) -> usize {
    let x = snap(t * frame_rate_hz as f64).floor();
    if x <= 0.0 {
        0
    } else {
        x as usize
    }
}

/// Exclusive end frame index for time `t` (ceil of `t * rate`), unclamped.
pub fn end_frame(t: f64, frame_rate_hz: f32) -> usize {
    let x = snap(t * frame_rate_hz as f64).ceil();
    if x <= 0.0 {
        0
    } else {
        x as usize
    }
}

/// Extracts the frames covered by `span`.
///
/// Frame indices are `[floor(start_s * rate), min(n_frames, ceil(end_s * rate)))`,
/// so audio inside the span is never dropped.
pub fn slice_by_span(seq: &FeatureSequence, span: &WordSpan) -> Result<FeatureSequence, FeatureError> {
    span.validate()?;
    let rate = seq.frame_rate_hz();
    let frame_s = 1.0 / rate as f64;
    let duration_s = seq.duration_s();
    if span.end_s > duration_s + frame_s + FRAME_SNAP_EPS {
        return Err(FeatureError::SpanOutOfRange {
            span: span.clone(),
            source_id: seq.source_id().to_string(),
            duration_s,
        });
    }
    let start = start_frame(span.start_s, rate);
    let end = end_frame(span.end_s, rate).min(seq.n_frames());
    if start >= end {
        return Err(FeatureError::EmptySlice {
            span: span.clone(),
            source_id: seq.source_id().to_string(),
            frame_rate_hz: rate,
        });
    }
    seq.sub_frames(start, end)
}

/// Serializes `seq` into the feature file byte layout.
pub fn encode(seq: &FeatureSequence) -> Result<Vec<u8>, FeatureError> {
    if let Some(pos) = seq.frames.iter().position(|v| !v.is_finite()) {
        return Err(FeatureError::NonFinite {
            frame: pos / seq.dim,
            dim: pos % seq.dim,
        });
    }
    let id = seq.source_id.as_bytes();
    let id_len = u16::try_from(id.len())
        .map_err(|_| FeatureError::Invalid(format!("source id is {} bytes, max 65535", id.len())))?;
    let n_frames = u32::try_from(seq.n_frames)
        .map_err(|_| FeatureError::Invalid("too many frames for u32 header".into()))?;
    let dim = u32::try_from(seq.dim).map_err(|_| FeatureError::Invalid("dim exceeds u32".into()))?;

    let mut buf = Vec::with_capacity(seq.encoded_len());
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&0u16.to_le_bytes());
    buf.extend_from_slice(&seq.frame_rate_hz.to_le_bytes());
    buf.extend_from_slice(&n_frames.to_le_bytes());
    buf.extend_from_slice(&dim.to_le_bytes());
    buf.extend_from_slice(&id_len.to_le_bytes());
    buf.extend_from_slice(id);
    buf.extend_from_slice(&seq.layer.raw().to_le_bytes());
    for v in &seq.frames {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    Ok(buf)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FeatureError> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(FeatureError::Truncated {
                needed: end,
                found: self.bytes.len(),
            });
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], FeatureError> {
        let mut out = [0u8; N];
        out.copy_from_slice(self.take(N)?);
        Ok(out)
    }
}

/// Parses a feature file image.
pub fn decode(bytes: &[u8]) -> Result<FeatureSequence, FeatureError> {
    let mut r = Reader { bytes, pos: 0 };
    let magic: [u8; 4] = r.array()?;
    if magic != MAGIC {
        return Err(FeatureError::BadMagic { found: magic });
    }
    let version = u16::from_le_bytes(r.array()?);
    if version != FORMAT_VERSION {
        return Err(FeatureError::VersionMismatch { found: version });
    }
    let reserved = u16::from_le_bytes(r.array()?);
    if reserved != 0 {
        return Err(FeatureError::InvalidHeader(format!("reserved field is {reserved}, expected 0")));
    }
    let frame_rate_hz = f32::from_le_bytes(r.array()?);
    if !(frame_rate_hz.is_finite() && frame_rate_hz > 0.0) {
        return Err(FeatureError::InvalidHeader(format!("frame rate {frame_rate_hz}")));
    }
    let n_frames = u32::from_le_bytes(r.array()?) as usize;
    let dim = u32::from_le_bytes(r.array()?) as usize;
    if n_frames == 0 || dim == 0 {
        return Err(FeatureError::InvalidHeader(format!("shape {n_frames} x {dim}")));
    }
    let id_len = u16::from_le_bytes(r.array()?) as usize;
    let source_id = std::str::from_utf8(r.take(id_len)?)
        .map_err(|_| FeatureError::InvalidHeader("source id is not UTF-8".into()))?
        .to_string();
    let layer = Layer::from_raw(i16::from_le_bytes(r.array()?))
        .map_err(|e| FeatureError::InvalidHeader(e.to_string()))?;

    let n_values = n_frames
        .checked_mul(dim)
        .filter(|n| n.checked_mul(4).is_some())
        .ok_or_else(|| FeatureError::InvalidHeader(format!("shape {n_frames} x {dim} overflows")))?;
    let payload = r.take(n_values * 4)?;
    if r.pos != bytes.len() {
        return Err(FeatureError::TrailingBytes {
            extra: bytes.len() - r.pos,
        });
    }
    let frames: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    FeatureSequence::new(frames, dim, frame_rate_hz, source_id, layer)
}

pub fn write_feature_file(seq: &FeatureSequence, path: impl AsRef<Path>) -> Result<(), FeatureError> {
    let path = path.as_ref();
    let bytes = encode(seq)?;
    let file = fs::File::create(path).map_err(|e| FeatureError::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes).map_err(|e| FeatureError::io(path, e))?;
    w.flush().map_err(|e| FeatureError::io(path, e))
}

pub fn read_feature_file(path: impl AsRef<Path>) -> Result<FeatureSequence, FeatureError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| FeatureError::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(rows: &[&[f32]], rate: f32) -> FeatureSequence {
        let rows: Vec<Vec<f32>> = rows.iter().map(|r| r.to_vec()).collect();
        FeatureSequence::from_rows(&rows, rate, "rec", Layer::new(3).unwrap()).unwrap()
    }

    fn ramp(n: usize, dim: usize, rate: f32) -> FeatureSequence {
        let frames = (0..n * dim).map(|v| v as f32).collect();
        FeatureSequence::new(frames, dim, rate, "ramp", Layer::NONE).unwrap()
    }

    #[test]
    fn encoded_size_is_header_plus_payload() {
        let s = seq(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]], 49.0);
        let bytes = encode(&s).unwrap();
        let header = FIXED_HEADER_LEN + "rec".len();
        assert_eq!(bytes.len(), header + 24);
        assert_eq!(&bytes[..4], b"QBEF");
        assert_eq!(decode(&bytes).unwrap(), s);
    }

    #[test]
    fn degenerate_single_value() {
        let s = seq(&[&[0.0]], 100.0);
        let back = decode(&encode(&s).unwrap()).unwrap();
        assert_eq!(back.n_frames(), 1);
        assert_eq!(back.dim(), 1);
        assert_eq!(back.frame(0), &[0.0]);
    }

    #[test]
    fn header_fields_are_little_endian() {
        let s = seq(&[&[1.5]], 49.0);
        let b = encode(&s).unwrap();
        assert_eq!(&b[4..6], &[1, 0]);
        assert_eq!(&b[6..8], &[0, 0]);
        assert_eq!(f32::from_le_bytes(b[8..12].try_into().unwrap()), 49.0);
        assert_eq!(u32::from_le_bytes(b[12..16].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(b[16..20].try_into().unwrap()), 1);
        assert_eq!(u16::from_le_bytes(b[20..22].try_into().unwrap()), 3);
        assert_eq!(&b[22..25], b"rec");
        assert_eq!(i16::from_le_bytes(b[25..27].try_into().unwrap()), 3);
        assert_eq!(f32::from_le_bytes(b[27..31].try_into().unwrap()), 1.5);
    }

    #[test]
    fn corruption_is_classified() {
        let s = seq(&[&[1.0, 2.0], &[3.0, 4.0]], 49.0);
        let good = encode(&s).unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(FeatureError::BadMagic { .. })));

        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(decode(&bad), Err(FeatureError::VersionMismatch { found: 2 })));

        let bad = &good[..good.len() - 1];
        assert!(matches!(decode(bad), Err(FeatureError::Truncated { .. })));

        let mut bad = good.clone();
        let n = bad.len();
        bad[n - 4..].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(decode(&bad), Err(FeatureError::NonFinite { frame: 1, dim: 1 })));

        let mut bad = good.clone();
        bad.push(0);
        assert!(matches!(decode(&bad), Err(FeatureError::TrailingBytes { extra: 1 })));

        assert!(matches!(decode(&good[..3]), Err(FeatureError::Truncated { .. })));
    }

    #[test]
    fn refuses_to_encode_non_finite() {
        let mut s = seq(&[&[1.0]], 49.0);
        s.frames[0] = f32::INFINITY;
        assert!(matches!(encode(&s), Err(FeatureError::NonFinite { .. })));
    }

    #[test]
    fn missing_file_is_not_found() {
        let err = read_feature_file("/nonexistent/definitely/missing.qbef").unwrap_err();
        assert!(matches!(err, FeatureError::NotFound { .. }));
    }

    #[test]
    fn constructor_rejects_bad_shapes() {
        assert!(FeatureSequence::new(vec![], 3, 49.0, "x", Layer::NONE).is_err());
        assert!(FeatureSequence::new(vec![1.0; 4], 3, 49.0, "x", Layer::NONE).is_err());
        assert!(FeatureSequence::new(vec![1.0; 3], 3, 0.0, "x", Layer::NONE).is_err());
        assert!(matches!(
            FeatureSequence::new(vec![1.0, f32::NAN, 0.0], 3, 49.0, "x", Layer::NONE),
            Err(FeatureError::NonFinite { frame: 0, dim: 1 })
        ));
    }

    #[test]
    fn slice_one_second_at_49hz() {
        let s = ramp(98, 2, 49.0);
        let out = slice_by_span(&s, &WordSpan::new("w", 1.0, 2.0).unwrap()).unwrap();
        assert_eq!(out.n_frames(), 49);
        assert_eq!(out.frame(0), s.frame(49));
        assert_eq!(out.frame(48), s.frame(97));
        assert_eq!(out.frame_rate_hz(), 49.0);
    }

    #[test]
    fn slice_mfcc_rate() {
        let s = ramp(100, 1, 100.0);
        let out = slice_by_span(&s, &WordSpan::new("w", 0.25, 0.50).unwrap()).unwrap();
        assert_eq!(out.n_frames(), 25);
        assert_eq!(out.frame(0), &[25.0]);
        assert_eq!(out.frame(24), &[49.0]);
    }

    #[test]
    fn slice_full_span_is_identity() {
        let s = ramp(98, 2, 49.0);
        let out = slice_by_span(&s, &WordSpan::new("w", 0.0, s.duration_s()).unwrap()).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn slice_partial_frames_round_outward() {
        let s = ramp(10, 1, 10.0);
        // [0.15, 0.31) touches frames 1, 2 and 3.
        let out = slice_by_span(&s, &WordSpan::new("w", 0.15, 0.31).unwrap()).unwrap();
        assert_eq!(out.as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn slice_end_clamps_within_one_frame_of_slack() {
        let s = ramp(10, 1, 10.0);
        let out = slice_by_span(&s, &WordSpan::new("w", 0.9, 1.05).unwrap()).unwrap();
        assert_eq!(out.as_slice(), &[9.0]);
        let err = slice_by_span(&s, &WordSpan::new("w", 0.5, 1.2).unwrap()).unwrap_err();
        assert!(matches!(err, FeatureError::SpanOutOfRange { .. }));
    }

    #[test]
    fn slice_past_the_last_frame_is_empty() {
        let s = ramp(10, 1, 10.0);
        let err = slice_by_span(&s, &WordSpan::new("w", 1.0, 1.05).unwrap()).unwrap_err();
        assert!(matches!(err, FeatureError::EmptySlice { .. }));
        assert!(err.to_string().contains("'w'"));
    }

    #[test]
    fn span_validation() {
        assert!(WordSpan::new("w", 1.0, 1.0).is_err());
        assert!(WordSpan::new("w", 2.0, 1.0).is_err());
        assert!(WordSpan::new("w", -0.1, 1.0).is_err());
        assert!(WordSpan::new("w", 0.0, f64::NAN).is_err());
    }

    #[test]
    fn layer_parsing() {
        assert_eq!("none".parse::<Layer>().unwrap(), Layer::NONE);
        assert_eq!("-1".parse::<Layer>().unwrap(), Layer::NONE);
        assert_eq!("12".parse::<Layer>().unwrap().index(), Some(12));
        assert!("-2".parse::<Layer>().is_err());
        assert!("x".parse::<Layer>().is_err());
        assert_eq!(Layer::NONE.to_string(), "none");
        assert_eq!(Layer::new(7).unwrap().to_string(), "7");
    }

    #[test]
    fn frame_boundaries_snap() {
        // 3/49 * 49 is not exactly 3 in floating point.
        let t = 3.0 / 49.0;
        assert_eq!(start_frame(t, 49.0), 3);
        assert_eq!(end_frame(t, 49.0), 3);
        assert_eq!(start_frame(0.29, 100.0), 29);
    }
}
