//! Subsequence dynamic time warping over cosine costs.
//!
//! The target (a recording, `n` frames) runs along the rows and the query
//! (`m` frames) along the columns. A match may start and end at any target
//! frame but must cover every query frame. Steps are `(1,1)`, `(1,0)` and
//! `(0,1)` with unit weights.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feature::{FeatureSequence, Layer};
use crate::manifest::{CorpusManifest, QuerySet, QuerySpec};

#[derive(Debug, Error)]
pub enum DtwError {
    #[error("dimension mismatch: target dim {target}, query dim {query}")]
    DimensionMismatch { target: usize, query: usize },
    #[error("zero-norm frame {frame} in '{source_id}'")]
    ZeroNormFrame { source_id: String, frame: usize },
    #[error("cost matrix {n} x {m} needs {expected} entries, got {got}")]
    BadShape {
        n: usize,
        m: usize,
        expected: usize,
        got: usize,
    },
    #[error("invalid cost {value} at ({i}, {j})")]
    InvalidCost { i: usize, j: usize, value: f64 },
}

/// Frames scaled to unit length, ready for dot-product cosine costs.
#[derive(Debug, Clone)]
pub struct PreparedSequence {
    id: String,
    unit: Vec<f32>,
    n_frames: usize,
    dim: usize,
    frame_rate_hz: f32,
}

impl PreparedSequence {
    /// Normalizes every frame; zero-norm frames are rejected with their index.
    pub fn new(seq: &FeatureSequence) -> Result<Self, DtwError> {
        let dim = seq.dim();
        let mut unit = Vec::with_capacity(seq.as_slice().len());
        for (i, frame) in seq.frames().enumerate() {
            let norm = frame.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(DtwError::ZeroNormFrame {
                    source_id: seq.source_id().to_string(),
                    frame: i,
                });
            }
            unit.extend(frame.iter().map(|&v| (v as f64 / norm) as f32));
        }
        Ok(PreparedSequence {
            id: seq.source_id().to_string(),
            unit,
            n_frames: seq.n_frames(),
            dim,
            frame_rate_hz: seq.frame_rate_hz(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
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

    fn frame(&self, i: usize) -> &[f32] {
        &self.unit[i * self.dim..(i + 1) * self.dim]
    }
}

#[inline]
fn dot(a: &[f32], b: &[f32]) -> f32 {
    const LANES: usize = 8;
    let mut acc = [0.0f32; LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let tail: f32 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..LANES {
            acc[k] += x[k] * y[k];
        }
    }
    acc.iter().sum::<f32>() + tail
}

/// `1 - cos` between unit frames, clamped to `[0, 2]`.
#[inline]
fn frame_cost(a: &[f32], b: &[f32]) -> f64 {
    (1.0 - dot(a, b) as f64).clamp(0.0, 2.0)
}

fn check_dims(target: &PreparedSequence, query: &PreparedSequence) -> Result<(), DtwError> {
    if target.dim != query.dim {
        return Err(DtwError::DimensionMismatch {
            target: target.dim,
            query: query.dim,
        });
    }
    Ok(())
}

/// Dense `n x m` matrix of `1 - cos(target_i, query_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    m: usize,
    costs: Vec<f64>,
    pub target_id: String,
    pub query_id: String,
    /// Frame rate of the target; 1.0 for matrices built from raw costs.
    pub frame_rate_hz: f32,
}

impl CostMatrix {
    /// Wraps raw row-major costs. Entries must be finite and non-negative.
    pub fn from_raw(n: usize, m: usize, costs: Vec<f64>) -> Result<Self, DtwError> {
        if n == 0 || m == 0 || costs.len() != n * m {
            return Err(DtwError::BadShape {
                n,
                m,
                expected: n * m,
                got: costs.len(),
            });
        }
        if let Some(p) = costs.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(DtwError::InvalidCost {
                i: p / m,
                j: p % m,
                value: costs[p],
            });
        }
        Ok(CostMatrix {
            n,
            m,
            costs,
            target_id: String::new(),
            query_id: String::new(),
            frame_rate_hz: 1.0,
        })
    }

    pub fn from_prepared(target: &PreparedSequence, query: &PreparedSequence) -> Result<Self, DtwError> {
        check_dims(target, query)?;
        let (n, m) = (target.n_frames, query.n_frames);
        let mut costs = Vec::with_capacity(n * m);
        for i in 0..n {
            let t = target.frame(i);
            costs.extend((0..m).map(|j| frame_cost(t, query.frame(j))));
        }
        Ok(CostMatrix {
            n,
            m,
            costs,
            target_id: target.id.clone(),
            query_id: query.id.clone(),
            frame_rate_hz: target.frame_rate_hz,
        })
    }

    /// Target frame count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Query frame count.
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.costs[i * self.m + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.costs
    }
}

/// Builds the cosine cost matrix of `target` (rows) against `query` (columns).
pub fn cost_matrix(target: &FeatureSequence, query: &FeatureSequence) -> Result<CostMatrix, DtwError> {
    let t = PreparedSequence::new(target)?;
    let q = PreparedSequence::new(query)?;
    CostMatrix::from_prepared(&t, &q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub recording_id: String,
    pub query_id: String,
    pub raw_cost: f64,
    /// `raw_cost / m`.
    pub normalized_cost: f64,
    /// Matched target frames `[start, end)`.
    pub match_span: (usize, usize),
    /// Warping path as `(target, query)` index pairs; only materialized
    /// when requested.
    pub path: Option<Vec<(usize, usize)>>,
    pub frame_rate_hz: f32,
}

impl MatchResult {
    pub fn match_seconds(&self) -> (f64, f64) {
        let r = self.frame_rate_hz as f64;
        (self.match_span.0 as f64 / r, self.match_span.1 as f64 / r)
    }
}

/// Picks the smallest predecessor; ties prefer diagonal, then vertical
/// (target advance), then horizontal (query advance).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Diagonal,
    Vertical,
    Horizontal,
}

#[inline]
fn best_step(diag: f64, vert: f64, horiz: f64) -> (f64, Step) {
    if diag <= vert && diag <= horiz {
        (diag, Step::Diagonal)
    } else if vert <= horiz {
        (vert, Step::Vertical)
    } else {
        (horiz, Step::Horizontal)
    }
}

/// Full accumulated-cost DP with path recovery.
///
/// `D(i,0) = c(i,0)`, `D(0,j) = D(0,j-1) + c(0,j)`,
/// `D(i,j) = c(i,j) + min(D(i-1,j-1), D(i-1,j), D(i,j-1))`.
/// The match ends at the first row minimizing `D(i, m-1)`.
pub fn subsequence_dtw(costs: &CostMatrix) -> MatchResult {
    let (n, m) = (costs.n, costs.m);
    let mut acc = vec![0.0f64; n * m];
    for i in 0..n {
        for j in 0..m {
            let c = costs.get(i, j);
            acc[i * m + j] = match (i, j) {
                (_, 0) => c,
                (0, _) => acc[j - 1] + c,
                _ => {
                    let (prev, _) = best_step(acc[(i - 1) * m + j - 1], acc[(i - 1) * m + j], acc[i * m + j - 1]);
                    c + prev
                }
            };
        }
    }

    let mut end = 0;
    for i in 1..n {
        if acc[i * m + m - 1] < acc[end * m + m - 1] {
            end = i;
        }
    }
    let raw_cost = acc[end * m + m - 1];

    let mut path = vec![(end, m - 1)];
    let (mut i, mut j) = (end, m - 1);
    while j > 0 {
        if i == 0 {
            j -= 1;
        } else {
            let (_, step) = best_step(acc[(i - 1) * m + j - 1], acc[(i - 1) * m + j], acc[i * m + j - 1]);
            match step {
                Step::Diagonal => {
                    i -= 1;
                    j -= 1;
                }
                Step::Vertical => i -= 1,
                Step::Horizontal => j -= 1,
            }
        }
        path.push((i, j));
    }
    path.reverse();

    MatchResult {
        recording_id: costs.target_id.clone(),
        query_id: costs.query_id.clone(),
        raw_cost,
        normalized_cost: raw_cost / m as f64,
        match_span: (i, end + 1),
        path: Some(path),
        frame_rate_hz: costs.frame_rate_hz,
    }
}

/// Cost and span of the best match, without a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtwScore {
    pub raw_cost: f64,
    pub start: usize,
    pub end: usize,
}

/// Rolling-row subsequence DTW with `O(m)` memory.
///
/// Costs are computed on the fly from unit frames. The start frame is
/// carried forward through the same predecessor choices that backtracking
/// would make, so the span equals that of [`subsequence_dtw`].
pub fn subsequence_dtw_cost(target: &PreparedSequence, query: &PreparedSequence) -> Result<DtwScore, DtwError> {
    check_dims(target, query)?;
    let (n, m) = (target.n_frames, query.n_frames);
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];
    let mut prev_start = vec![0usize; m];
    let mut cur_start = vec![0usize; m];
    let mut best = DtwScore {
        raw_cost: f64::INFINITY,
        start: 0,
        end: 0,
    };

    for i in 0..n {
        let t = target.frame(i);
        cur[0] = frame_cost(t, query.frame(0));
        cur_start[0] = i;
        for j in 1..m {
            let c = frame_cost(t, query.frame(j));
            if i == 0 {
                cur[j] = cur[j - 1] + c;
                cur_start[j] = 0;
            } else {
                let (d, step) = best_step(prev[j - 1], prev[j], cur[j - 1]);
                cur[j] = c + d;
                cur_start[j] = match step {
                    Step::Diagonal => prev_start[j - 1],
                    Step::Vertical => prev_start[j],
                    Step::Horizontal => cur_start[j - 1],
                };
            }
        }
        if cur[m - 1] < best.raw_cost {
            best = DtwScore {
                raw_cost: cur[m - 1],
                start: cur_start[m - 1],
                end: i + 1,
            };
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut prev_start, &mut cur_start);
    }
    Ok(best)
}

/// All recordings of a corpus at one layer, normalized and sorted by id.
#[derive(Debug, Clone)]
pub struct LayerCorpus {
    layer: Layer,
    recordings: Vec<PreparedSequence>,
}

impl LayerCorpus {
    pub fn from_sequences(layer: Layer, seqs: &[FeatureSequence]) -> Result<Self, DtwError> {
        let mut recordings = seqs
            .par_iter()
            .map(PreparedSequence::new)
            .collect::<Result<Vec<_>, _>>()?;
        recordings.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(LayerCorpus { layer, recordings })
    }

    /// Reads every recording's features at `layer`.
    pub fn load(manifest: &CorpusManifest, layer: Layer) -> crate::Result<Self> {
        manifest.require_layer(layer)?;
        let seqs = manifest
            .entries()
            .par_iter()
            .map(|e| manifest.load_features(&e.id, layer))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_sequences(layer, &seqs)?)
    }

    pub fn layer(&self) -> Layer {
        self.layer
    }

    pub fn recordings(&self) -> &[PreparedSequence] {
        &self.recordings
    }

    pub fn len(&self) -> usize {
        self.recordings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recordings.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Materialize warping paths for this many top-ranked results.
    pub paths_for_top: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { paths_for_top: 0 }
    }
}

fn rank_order(a: &MatchResult, b: &MatchResult) -> Ordering {
    a.normalized_cost
        .total_cmp(&b.normalized_cost)
        .then_with(|| a.recording_id.cmp(&b.recording_id))
}

/// Scores `query` against every recording and ranks by normalized cost,
/// ties broken by recording id. Results do not depend on the thread count.
pub fn search_corpus(
    corpus: &LayerCorpus,
    query: &FeatureSequence,
    query_id: &str,
    opts: SearchOptions,
) -> Result<Vec<MatchResult>, DtwError> {
    let q = PreparedSequence::new(query)?;
    let m = q.n_frames as f64;
    let mut results = corpus
        .recordings
        .par_iter()
        .map(|rec| {
            let score = subsequence_dtw_cost(rec, &q)?;
            Ok(MatchResult {
                recording_id: rec.id.clone(),
                query_id: query_id.to_string(),
                raw_cost: score.raw_cost,
                normalized_cost: score.raw_cost / m,
                match_span: (score.start, score.end),
                path: None,
                frame_rate_hz: rec.frame_rate_hz,
            })
        })
        .collect::<Result<Vec<_>, DtwError>>()?;
    results.sort_by(rank_order);

    let top = opts.paths_for_top.min(results.len());
    if top > 0 {
        let by_id = |id: &str| {
            corpus
                .recordings
                .binary_search_by(|r| r.id.as_str().cmp(id))
                .map(|i| &corpus.recordings[i])
                .expect("ranked id comes from corpus")
        };
        results[..top].par_iter_mut().try_for_each(|r| -> Result<(), DtwError> {
            let costs = CostMatrix::from_prepared(by_id(&r.recording_id), &q)?;
            r.path = subsequence_dtw(&costs).path;
            Ok(())
        })?;
    }
    Ok(results)
}

/// Resolves `query` and ranks every recording of `manifest` at `layer`.
pub fn search(
    manifest: &CorpusManifest,
    queries: &QuerySet,
    query: &QuerySpec,
    layer: Layer,
    opts: SearchOptions,
) -> crate::Result<Vec<MatchResult>> {
    let corpus = LayerCorpus::load(manifest, layer)?;
    let frames = queries.resolve(query, manifest, layer)?;
    Ok(search_corpus(&corpus, &frames, &query.query_id, opts)?)
}

/// Exhaustive reference for the subsequence DTW minimum.
///
/// Enumerates every monotone path with steps `(1,0)`, `(0,1)`, `(1,1)`
/// that starts in query column 0 at any target row and ends in the last
/// query column at any target row. Exponential; meant for small matrices.
pub mod oracle {
    use super::CostMatrix;

    pub fn brute_force_min_cost(costs: &CostMatrix) -> f64 {
        let mut best = f64::INFINITY;
        for start in 0..costs.n() {
            walk(costs, start, 0, costs.get(start, 0), &mut best);
        }
        best
    }

    fn walk(costs: &CostMatrix, i: usize, j: usize, total: f64, best: &mut f64) {
        let (n, m) = (costs.n(), costs.m());
        if j == m - 1 && total < *best {
            *best = total;
        }
        if i + 1 < n {
            walk(costs, i + 1, j, total + costs.get(i + 1, j), best);
        }
        if j + 1 < m {
            walk(costs, i, j + 1, total + costs.get(i, j + 1), best);
        }
        if i + 1 < n && j + 1 < m {
            walk(costs, i + 1, j + 1, total + costs.get(i + 1, j + 1), best);
        }
    }

    /// Number of paths the enumeration visits that end in the last column.
    pub fn count_paths(n: usize, m: usize) -> u64 {
        // ways[i][j]: monotone paths from any start (s, 0) to (i, j).
        let mut ways = vec![vec![0u64; m]; n];
        for i in 0..n {
            for j in 0..m {
                let mut w = if j == 0 { 1 } else { 0 };
                if i > 0 {
                    w += ways[i - 1][j];
                }
                if j > 0 {
                    w += ways[i][j - 1];
                }
                if i > 0 && j > 0 {
                    w += ways[i - 1][j - 1];
                }
                ways[i][j] = w;
            }
        }
        (0..n).map(|i| ways[i][m - 1]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(id: &str, rows: &[Vec<f32>]) -> FeatureSequence {
        FeatureSequence::from_rows(rows, 49.0, id, Layer::new(0).unwrap()).unwrap()
    }

    #[test]
    fn self_similarity_is_zero_cost() {
        let s = seq("a", &[vec![0.3, -0.7, 2.0]]);
        let c = cost_matrix(&s, &s).unwrap();
        assert_eq!((c.n(), c.m()), (1, 1));
        assert!(c.get(0, 0) < 1e-7);
    }

    #[test]
    fn orthogonal_column() {
        let t = seq("t", &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let q = seq("q", &[vec![1.0, 0.0]]);
        let c = cost_matrix(&t, &q).unwrap();
        assert_eq!(c.as_slice(), &[0.0, 1.0]);
        assert_eq!(c.target_id, "t");
    }

    #[test]
    fn cost_matrix_errors() {
        let t = seq("t", &[vec![1.0, 0.0], vec![0.0, 0.0]]);
        let q = seq("q", &[vec![1.0, 0.0]]);
        assert!(matches!(
            cost_matrix(&t, &q),
            Err(DtwError::ZeroNormFrame { frame: 1, .. })
        ));
        let q3 = seq("q", &[vec![1.0, 0.0, 0.0]]);
        let t2 = seq("t", &[vec![1.0, 0.0]]);
        assert!(matches!(cost_matrix(&t2, &q3), Err(DtwError::DimensionMismatch { .. })));
    }

    #[test]
    fn hand_checked_three_by_two() {
        let c = CostMatrix::from_raw(3, 2, vec![0.2, 0.9, 0.8, 0.1, 0.5, 0.5]).unwrap();
        let r = subsequence_dtw(&c);
        assert!((r.raw_cost - 0.3).abs() < 1e-12);
        assert_eq!(r.match_span, (0, 2));
        assert_eq!(r.path.unwrap(), vec![(0, 0), (1, 1)]);
        assert!((r.normalized_cost - 0.15).abs() < 1e-12);
        assert!((oracle::brute_force_min_cost(&c) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn single_row_is_forced() {
        let c = CostMatrix::from_raw(1, 4, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let r = subsequence_dtw(&c);
        assert!((r.raw_cost - 1.0).abs() < 1e-12);
        assert_eq!(r.path.unwrap(), vec![(0, 0), (0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn ties_prefer_diagonal_then_vertical() {
        // D(1,1) sees diag 0 and horiz 0: diagonal wins.
        let c = CostMatrix::from_raw(2, 2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let r = subsequence_dtw(&c);
        assert_eq!(r.path.unwrap(), vec![(0, 0), (1, 1)]);
        // All-zero: the first minimal end row is row 0.
        let c = CostMatrix::from_raw(2, 2, vec![0.0; 4]).unwrap();
        assert_eq!(subsequence_dtw(&c).path.unwrap(), vec![(0, 0), (0, 1)]);
        // Equal vertical and horizontal predecessors: vertical wins.
        let c = CostMatrix::from_raw(3, 3, vec![0.0, 0.0, 9.0, 0.0, 9.0, 0.0, 9.0, 0.0, 0.0]).unwrap();
        let r = subsequence_dtw(&c);
        assert_eq!(r.raw_cost, 0.0);
        // First minimal end row is kept.
        assert_eq!(r.match_span.1, 2);
    }

    #[test]
    fn from_raw_validates() {
        assert!(CostMatrix::from_raw(0, 1, vec![]).is_err());
        assert!(CostMatrix::from_raw(2, 2, vec![0.0; 3]).is_err());
        assert!(CostMatrix::from_raw(1, 1, vec![-0.5]).is_err());
        assert!(CostMatrix::from_raw(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn query_longer_than_target() {
        let c = CostMatrix::from_raw(2, 5, vec![0.1, 0.5, 0.2, 0.9, 0.3, 0.4, 0.1, 0.6, 0.2, 0.1]).unwrap();
        let r = subsequence_dtw(&c);
        assert!((r.raw_cost - oracle::brute_force_min_cost(&c)).abs() < 1e-12);
        let path = r.path.unwrap();
        assert_eq!(path.first().unwrap().1, 0);
        assert_eq!(path.last().unwrap().1, 4);
    }

    #[test]
    fn rolling_matches_full() {
        let t = seq(
            "t",
            &(0..12).map(|i| vec![(i as f32 * 0.7).sin() + 0.1, (i as f32 * 1.3).cos(), 0.4]).collect::<Vec<_>>(),
        );
        let q = seq("q", &(0..4).map(|i| vec![(i as f32).cos(), 0.2, (i as f32 * 0.5).sin() + 0.3]).collect::<Vec<_>>());
        let (pt, pq) = (PreparedSequence::new(&t).unwrap(), PreparedSequence::new(&q).unwrap());
        let full = subsequence_dtw(&CostMatrix::from_prepared(&pt, &pq).unwrap());
        let roll = subsequence_dtw_cost(&pt, &pq).unwrap();
        assert_eq!(full.raw_cost, roll.raw_cost);
        assert_eq!(full.match_span, (roll.start, roll.end));
    }

    #[test]
    fn path_count_formula() {
        assert_eq!(oracle::count_paths(1, 3), 1);
        assert_eq!(oracle::count_paths(2, 1), 3);
        // (0,0)->(0,1), (0,0)->(1,1), (0,0)->(1,0)->(1,1), (1,0)->(1,1), (0,0)->(0,1)->(1,1)
        assert_eq!(oracle::count_paths(2, 2), 5);
    }

    #[test]
    fn search_ranks_planted_recording_first() {
        let a = seq("a", &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]]);
        let b = seq("b", &[vec![0.0, 0.0, 1.0], vec![0.2, 0.0, 1.0], vec![0.0, 0.3, 1.0], vec![1.0, 0.0, 0.0]]);
        let c = seq("c", &[vec![0.0, 0.0, 1.0], vec![0.5, 0.5, 0.5], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let corpus = LayerCorpus::from_sequences(Layer::new(0).unwrap(), &[b.clone(), c, a]).unwrap();
        let q = b.sub_frames(1, 3).unwrap();
        let ranked = search_corpus(&corpus, &q, "q", SearchOptions { paths_for_top: 1 }).unwrap();
        assert_eq!(ranked[0].recording_id, "b");
        assert!(ranked[0].normalized_cost < 1e-6);
        assert_eq!(ranked[0].match_span, (1, 3));
        assert!(ranked[0].path.is_some());
        assert!(ranked[1].path.is_none());
        assert_eq!(ranked.len(), 3);
    }

    #[test]
    fn equal_costs_rank_by_id() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let corpus = LayerCorpus::from_sequences(
            Layer::new(0).unwrap(),
            &[seq("z", &rows), seq("m", &rows), seq("a", &rows)],
        )
        .unwrap();
        let ranked = search_corpus(&corpus, &seq("q", &rows), "q", SearchOptions::default()).unwrap();
        let ids: Vec<_> = ranked.iter().map(|r| r.recording_id.as_str()).collect();
        assert_eq!(ids, ["a", "m", "z"]);
    }
}
