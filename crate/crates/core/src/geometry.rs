//! Geometry of a representation space: cosine statistics over random frame
//! pairs and per-dimension mean statistics.

use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feature::{FeatureSequence, Layer};

pub const DEFAULT_PAIRS: usize = 1000;
pub const DEFAULT_HISTOGRAM_BINS: usize = 80;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("zero-norm vector{}", location.as_deref().map(|l| format!(" ({l})")).unwrap_or_default())]
    ZeroNorm { location: Option<String> },
    #[error("stratum '{0}' cannot be sampled from this corpus")]
    UnsatisfiableStratum(Stratum),
    #[error("no frames at layer {0}")]
    EmptyCorpus(Layer),
    #[error("rogue-dimension statistics need dim >= 2, got {0}")]
    TooFewDimensions(usize),
    #[error("invalid sampling plan: {0}")]
    InvalidPlan(String),
}

/// Cosine similarity in 64-bit arithmetic, clamped to `[-1, 1]`.
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64, GeometryError> {
    if a.len() != b.len() {
        return Err(GeometryError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(GeometryError::ZeroNorm { location: None });
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Which frame pairs a plan draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    Any,
    SameRecording,
    DifferentRecording,
}

impl Stratum {
    fn stream_code(self) -> u64 {
        match self {
            Stratum::Any => 0,
            Stratum::SameRecording => 1,
            Stratum::DifferentRecording => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stratum::Any => "any",
            Stratum::SameRecording => "same_recording",
            Stratum::DifferentRecording => "different_recording",
        }
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSamplingPlan {
    pub n_pairs: usize,
    pub stratum: Stratum,
    pub rng_seed: u64,
    pub histogram_bins: usize,
}

impl PairSamplingPlan {
    pub fn new(n_pairs: usize, stratum: Stratum, rng_seed: u64) -> Self {
        PairSamplingPlan {
            n_pairs,
            stratum,
            rng_seed,
            histogram_bins: DEFAULT_HISTOGRAM_BINS,
        }
    }

    fn validate(&self) -> Result<(), GeometryError> {
        if self.n_pairs == 0 {
            return Err(GeometryError::InvalidPlan("n_pairs must be >= 1".into()));
        }
        if self.histogram_bins == 0 {
            return Err(GeometryError::InvalidPlan("histogram_bins must be >= 1".into()));
        }
        Ok(())
    }

    /// Independent stream per (layer, stratum) so results never depend on
    /// which other analyses ran or in what order.
    fn rng(&self, layer: Layer) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        let layer_code = (layer.raw() as i64 + 1) as u64;
        rng.set_stream((layer_code << 2) | self.stratum.stream_code());
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_lower: f64,
    pub bin_upper: f64,
    pub count: usize,
}

/// Summary of cosine similarities over sampled frame pairs.
///
/// `expected_cosine` is the mean cosine; `one_minus_expected_cosine` is the
/// mean of `1 - cos`. Near-1 `expected_cosine` means an anisotropic space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnisotropyReport {
    pub layer: Layer,
    pub n_pairs: usize,
    pub expected_cosine: f64,
    pub one_minus_expected_cosine: f64,
    pub median_cos: f64,
    pub iqr_cos: f64,
    pub histogram: Vec<HistogramBin>,
}

/// Flat view of the frames of a corpus: global frame index to (sequence, row).
struct FrameIndex<'a> {
    corpus: &'a [FeatureSequence],
    /// Prefix sums of frame counts, `offsets[r]` = first global index of `r`.
    offsets: Vec<usize>,
    total: usize,
}

impl<'a> FrameIndex<'a> {
    fn new(corpus: &'a [FeatureSequence]) -> Result<Self, GeometryError> {
        let mut offsets = Vec::with_capacity(corpus.len());
        let mut total = 0;
        let dim = corpus.first().map(FeatureSequence::dim);
        for seq in corpus {
            if Some(seq.dim()) != dim {
                return Err(GeometryError::DimensionMismatch {
                    left: dim.unwrap_or(0),
                    right: seq.dim(),
                });
            }
            offsets.push(total);
            total += seq.n_frames();
        }
        Ok(FrameIndex { corpus, offsets, total })
    }

    fn locate(&self, global: usize) -> (usize, usize) {
        let r = self.offsets.partition_point(|&o| o <= global) - 1;
        (r, global - self.offsets[r])
    }

    fn cosine(&self, a: (usize, usize), b: (usize, usize)) -> Result<f64, GeometryError> {
        let fa = self.corpus[a.0].frame(a.1);
        let fb = self.corpus[b.0].frame(b.1);
        cosine(fa, fb).map_err(|e| match e {
            GeometryError::ZeroNorm { .. } => {
                let (r, f) = if fa.iter().all(|&v| v == 0.0) { a } else { b };
                GeometryError::ZeroNorm {
                    location: Some(format!("'{}' frame {f}", self.corpus[r].source_id())),
                }
            }
            other => other,
        })
    }
}

/// Uniform index in `0..n` excluding `skip`.
fn index_excluding<R: Rng>(rng: &mut R, n: usize, skip: usize) -> usize {
    let j = rng.random_range(0..n - 1);
    if j >= skip {
        j + 1
    } else {
        j
    }
}

/// Draws ordered frame pairs `(i, j)`, `i != j`, uniformly from the stratum.
fn sample_pairs(
    index: &FrameIndex<'_>,
    plan: &PairSamplingPlan,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<((usize, usize), (usize, usize))>, GeometryError> {
    let unsat = || GeometryError::UnsatisfiableStratum(plan.stratum);
    let sizes: Vec<usize> = index.corpus.iter().map(FeatureSequence::n_frames).collect();
    let mut pairs = Vec::with_capacity(plan.n_pairs);
    match plan.stratum {
        Stratum::Any => {
            if index.total < 2 {
                return Err(unsat());
            }
            for _ in 0..plan.n_pairs {
                let i = rng.random_range(0..index.total);
                let j = index_excluding(rng, index.total, i);
                pairs.push((index.locate(i), index.locate(j)));
            }
        }
        Stratum::SameRecording => {
            // Recording weight n(n-1) makes every ordered within-recording pair equally likely.
            let weights: Vec<u64> = sizes.iter().map(|&n| (n as u64) * (n as u64).saturating_sub(1)).collect();
            let pick = WeightedIndex::new(&weights).map_err(|_| unsat())?;
            for _ in 0..plan.n_pairs {
                let r = pick.sample(rng);
                let i = rng.random_range(0..sizes[r]);
                let j = index_excluding(rng, sizes[r], i);
                pairs.push(((r, i), (r, j)));
            }
        }
        Stratum::DifferentRecording => {
            let total = index.total as u64;
            let weights: Vec<u64> = sizes.iter().map(|&n| n as u64 * (total - n as u64)).collect();
            let pick = WeightedIndex::new(&weights).map_err(|_| unsat())?;
            for _ in 0..plan.n_pairs {
                let r = pick.sample(rng);
                let i = rng.random_range(0..sizes[r]);
                // Uniform over frames outside recording r.
                let mut g = rng.random_range(0..index.total - sizes[r]);
                if g >= index.offsets[r] {
                    g += sizes[r];
                }
                pairs.push(((r, i), index.locate(g)));
            }
        }
    }
    Ok(pairs)
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    let width = 2.0 / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            bin_lower: -1.0 + b as f64 * width,
            bin_upper: if b + 1 == bins { 1.0 } else { -1.0 + (b + 1) as f64 * width },
            count: 0,
        })
        .collect();
    for &v in values {
        let b = (((v + 1.0) / width).floor() as usize).min(bins - 1);
        out[b].count += 1;
    }
    out
}

fn summarize(layer: Layer, sims: Vec<f64>, bins: usize) -> AnisotropyReport {
    let n = sims.len();
    let expected_cosine = sims.iter().sum::<f64>() / n as f64;
    let histogram = histogram(&sims, bins);
    let mut sorted = sims;
    sorted.sort_by(f64::total_cmp);
    AnisotropyReport {
        layer,
        n_pairs: n,
        expected_cosine,
        one_minus_expected_cosine: 1.0 - expected_cosine,
        median_cos: quantile(&sorted, 0.5),
        iqr_cos: quantile(&sorted, 0.75) - quantile(&sorted, 0.25),
        histogram,
    }
}

/// Mean cosine similarity over `plan.n_pairs` random frame pairs.
///
/// Pairs are drawn with replacement across the sample and never pair a
/// frame with itself. The report's layer is that of the first sequence.
pub fn anisotropy(corpus: &[FeatureSequence], plan: &PairSamplingPlan) -> Result<AnisotropyReport, GeometryError> {
    plan.validate()?;
    let layer = corpus.first().map(FeatureSequence::layer).unwrap_or(Layer::NONE);
    let index = FrameIndex::new(corpus)?;
    let mut rng = plan.rng(layer);
    let pairs = sample_pairs(&index, plan, &mut rng)?;
    let sims = pairs
        .into_iter()
        .map(|(a, b)| index.cosine(a, b))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(summarize(layer, sims, plan.histogram_bins))
}

/// Same-recording and different-recording cosine distributions, on
/// identical histogram bins.
pub fn similarity_distribution(
    corpus: &[FeatureSequence],
    plan_same: &PairSamplingPlan,
    plan_diff: &PairSamplingPlan,
) -> Result<(AnisotropyReport, AnisotropyReport), GeometryError> {
    if plan_same.stratum != Stratum::SameRecording || plan_diff.stratum != Stratum::DifferentRecording {
        return Err(GeometryError::InvalidPlan(
            "expected a same_recording and a different_recording plan".into(),
        ));
    }
    if plan_same.histogram_bins != plan_diff.histogram_bins {
        return Err(GeometryError::InvalidPlan("both plans must use the same histogram bins".into()));
    }
    Ok((anisotropy(corpus, plan_same)?, anisotropy(corpus, plan_diff)?))
}

/// Per-dimension mean statistics of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RogueDimensionReport {
    pub layer: Layer,
    pub max_mean: f64,
    pub argmax_dim: usize,
    pub std_of_max_dim: f64,
    pub second_max_mean: f64,
    pub median_of_means: f64,
}

/// Pools all frames of `layer` across the corpus and reports the largest
/// per-dimension mean, the spread of that dimension, the runner-up mean and
/// the median of all means. Accumulation is in 64 bits.
pub fn rogue_dimensions(corpus: &[FeatureSequence], layer: Layer) -> Result<RogueDimensionReport, GeometryError> {
    let seqs: Vec<&FeatureSequence> = corpus.iter().filter(|s| s.layer() == layer).collect();
    let dim = seqs.first().ok_or(GeometryError::EmptyCorpus(layer))?.dim();
    if let Some(bad) = seqs.iter().find(|s| s.dim() != dim) {
        return Err(GeometryError::DimensionMismatch {
            left: dim,
            right: bad.dim(),
        });
    }
    if dim < 2 {
        return Err(GeometryError::TooFewDimensions(dim));
    }

    let mut sums = vec![0.0f64; dim];
    let mut count = 0usize;
    for s in &seqs {
        for frame in s.frames() {
            for (acc, &v) in sums.iter_mut().zip(frame) {
                *acc += v as f64;
            }
        }
        count += s.n_frames();
    }
    let means: Vec<f64> = sums.iter().map(|s| s / count as f64).collect();

    let mut argmax = 0;
    for (d, &m) in means.iter().enumerate() {
        if m > means[argmax] {
            argmax = d;
        }
    }
    let second = means
        .iter()
        .enumerate()
        .filter(|&(d, _)| d != argmax)
        .map(|(_, &m)| m)
        .fold(f64::NEG_INFINITY, f64::max);

    let mu = means[argmax];
    let var = seqs
        .iter()
        .flat_map(|s| s.frames())
        .map(|f| {
            let d = f[argmax] as f64 - mu;
            d * d
        })
        .sum::<f64>()
        / count as f64;

    let mut sorted = means.clone();
    sorted.sort_by(f64::total_cmp);

    Ok(RogueDimensionReport {
        layer,
        max_mean: mu,
        argmax_dim: argmax,
        std_of_max_dim: var.sqrt(),
        second_max_mean: second,
        median_of_means: quantile(&sorted, 0.5),
    })
}
