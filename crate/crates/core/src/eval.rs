//! Retrieval evaluation: relevance from transcriptions, Precision@k and
//! Recall@k macro-averaged over queries, and per-k best-layer selection.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtw::{search_corpus, LayerCorpus, SearchOptions};
use crate::feature::Layer;
use crate::manifest::{CorpusManifest, ManifestEntry, QuerySet, QuerySpec};

/// The k grid reported by default.
pub const DEFAULT_KS: [usize; 8] = [1, 2, 3, 5, 10, 20, 50, 100];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("query '{0}' has no target word tokens after case folding")]
    EmptyTargetWord(String),
    #[error("k must be >= 1")]
    InvalidK,
    #[error("no rankings to evaluate")]
    NothingToEvaluate,
    #[error("insufficient pool: {0}")]
    InsufficientPool(String),
}

impl EvalError {
    pub fn is_validation(&self) -> bool {
        true
    }
}

/// Lower-cased word tokens; anything that is not alphanumeric separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn contains_tokens(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Relevant recording ids per query id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RelevanceJudgments {
    pub relevant: BTreeMap<String, BTreeSet<String>>,
}

impl RelevanceJudgments {
    pub fn get(&self, query_id: &str) -> Option<&BTreeSet<String>> {
        self.relevant.get(query_id)
    }
}

/// A recording is relevant to a query when its tokenized transcription
/// contains the query's target word (or word sequence) as whole tokens.
pub fn judge(manifest: &CorpusManifest, queries: &[QuerySpec]) -> Result<RelevanceJudgments, EvalError> {
    let docs: Vec<(&str, Vec<String>)> = manifest
        .entries()
        .iter()
        .map(|e| (e.id.as_str(), tokenize(&e.transcription)))
        .collect();
    let mut relevant = BTreeMap::new();
    for q in queries {
        let needle = tokenize(&q.target_word);
        if needle.is_empty() {
            return Err(EvalError::EmptyTargetWord(q.query_id.clone()));
        }
        let set = docs
            .iter()
            .filter(|(_, toks)| contains_tokens(toks, &needle))
            .map(|(id, _)| id.to_string())
            .collect();
        relevant.insert(q.query_id.clone(), set);
    }
    Ok(RelevanceJudgments { relevant })
}

/// Precision and recall of one ranking at one cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtK {
    pub hits: usize,
    /// `min(k, ranking length)`.
    pub effective_k: usize,
    pub truncated: bool,
    pub precision: f64,
    /// `None` when the relevant set is empty.
    pub recall: Option<f64>,
}

pub fn precision_recall_at_k<S: AsRef<str>>(
    ranking: &[S],
    relevant: &BTreeSet<String>,
    k: usize,
) -> Result<AtK, EvalError> {
    if k == 0 {
        return Err(EvalError::InvalidK);
    }
    let effective_k = k.min(ranking.len());
    let hits = ranking[..effective_k]
        .iter()
        .filter(|id| relevant.contains(id.as_ref()))
        .count();
    Ok(AtK {
        hits,
        effective_k,
        truncated: effective_k < k,
        precision: if effective_k == 0 { 0.0 } else { hits as f64 / effective_k as f64 },
        recall: if relevant.is_empty() {
            None
        } else {
            Some(hits as f64 / relevant.len() as f64)
        },
    })
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Macro-averaged metrics for one (layer, k) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalMetrics {
    pub layer: Layer,
    pub k: usize,
    pub precision_at_k: f64,
    pub recall_at_k: f64,
    /// Harmonic mean of the macro precision and recall.
    pub f1_at_k: f64,
    pub n_queries: usize,
}

/// Ranked recording ids for one query at one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRanking {
    pub query_id: String,
    pub ranking: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Queries left out of the averages because nothing is relevant to them.
    pub excluded_queries: Vec<String>,
    /// (query, layer, k) cells where the ranking was shorter than k.
    pub truncated_cells: usize,
}

/// Averages per-query precision and recall at each k.
pub fn aggregate(
    layer: Layer,
    rankings: &[QueryRanking],
    judgments: &RelevanceJudgments,
    ks: &[usize],
    diagnostics: &mut Diagnostics,
) -> Result<Vec<RetrievalMetrics>, EvalError> {
    let empty = BTreeSet::new();
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        let (mut p_sum, mut r_sum, mut n) = (0.0, 0.0, 0usize);
        for qr in rankings {
            let relevant = judgments.get(&qr.query_id).unwrap_or(&empty);
            let at = precision_recall_at_k(&qr.ranking, relevant, k)?;
            if at.truncated {
                diagnostics.truncated_cells += 1;
            }
            let Some(recall) = at.recall else {
                if !diagnostics.excluded_queries.contains(&qr.query_id) {
                    diagnostics.excluded_queries.push(qr.query_id.clone());
                }
                continue;
            };
            p_sum += at.precision;
            r_sum += recall;
            n += 1;
        }
        let (p, r) = if n == 0 { (0.0, 0.0) } else { (p_sum / n as f64, r_sum / n as f64) };
        out.push(RetrievalMetrics {
            layer,
            k,
            precision_at_k: p,
            recall_at_k: r,
            f1_at_k: f1(p, r),
            n_queries: n,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestLayer {
    pub k: usize,
    pub layer: Layer,
    pub precision_at_k: f64,
    pub recall_at_k: f64,
    pub f1_at_k: f64,
}

/// For every k, the layer with the highest F1; ties go to the lower layer.
pub fn select_best_layers(metrics: &[RetrievalMetrics]) -> Vec<BestLayer> {
    let mut best: BTreeMap<usize, &RetrievalMetrics> = BTreeMap::new();
    for m in metrics {
        match best.get(&m.k) {
            Some(b) if b.f1_at_k > m.f1_at_k || (b.f1_at_k == m.f1_at_k && b.layer <= m.layer) => {}
            _ => {
                best.insert(m.k, m);
            }
        }
    }
    best.into_values()
        .map(|m| BestLayer {
            k: m.k,
            layer: m.layer,
            precision_at_k: m.precision_at_k,
            recall_at_k: m.recall_at_k,
            f1_at_k: m.f1_at_k,
        })
        .collect()
}

/// Mean over layers of each metric, per k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerAverage {
    pub k: usize,
    pub n_layers: usize,
    pub precision_at_k: f64,
    pub recall_at_k: f64,
    pub f1_at_k: f64,
}

pub fn layer_average(metrics: &[RetrievalMetrics]) -> Vec<LayerAverage> {
    let mut by_k: BTreeMap<usize, Vec<&RetrievalMetrics>> = BTreeMap::new();
    for m in metrics {
        by_k.entry(m.k).or_default().push(m);
    }
    by_k.into_iter()
        .map(|(k, ms)| {
            let n = ms.len() as f64;
            LayerAverage {
                k,
                n_layers: ms.len(),
                precision_at_k: ms.iter().map(|m| m.precision_at_k).sum::<f64>() / n,
                recall_at_k: ms.iter().map(|m| m.recall_at_k).sum::<f64>() / n,
                f1_at_k: ms.iter().map(|m| m.f1_at_k).sum::<f64>() / n,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub metrics: Vec<RetrievalMetrics>,
    pub best_layers: Vec<BestLayer>,
    pub layer_average: Vec<LayerAverage>,
    pub diagnostics: Diagnostics,
}

impl EvaluationReport {
    /// Builds the report from per-layer rankings.
    pub fn from_rankings(
        per_layer: &[(Layer, Vec<QueryRanking>)],
        judgments: &RelevanceJudgments,
        ks: &[usize],
    ) -> Result<Self, EvalError> {
        if per_layer.is_empty() || ks.is_empty() {
            return Err(EvalError::NothingToEvaluate);
        }
        let mut diagnostics = Diagnostics::default();
        let mut metrics = Vec::new();
        for (layer, rankings) in per_layer {
            metrics.extend(aggregate(*layer, rankings, judgments, ks, &mut diagnostics)?);
        }
        diagnostics.excluded_queries.sort();
        Ok(EvaluationReport {
            best_layers: select_best_layers(&metrics),
            layer_average: layer_average(&metrics),
            metrics,
            diagnostics,
        })
    }

    pub fn get(&self, layer: Layer, k: usize) -> Option<&RetrievalMetrics> {
        self.metrics.iter().find(|m| m.layer == layer && m.k == k)
    }
}

/// Ranks every recording for every query at `layer`.
pub fn rank_layer(
    manifest: &CorpusManifest,
    queries: &QuerySet,
    layer: Layer,
) -> crate::Result<Vec<QueryRanking>> {
    queries.validate_against(manifest, layer)?;
    let corpus = LayerCorpus::load(manifest, layer)?;
    queries
        .queries
        .iter()
        .map(|q| {
            let frames = queries.resolve(q, manifest, layer)?;
            let ranked = search_corpus(&corpus, &frames, &q.query_id, SearchOptions::default())?;
            Ok(QueryRanking {
                query_id: q.query_id.clone(),
                ranking: ranked.into_iter().map(|r| r.recording_id).collect(),
            })
        })
        .collect()
}

/// Runs search for every (query, layer) and reports macro P@k, R@k, F1
/// plus the best layer per k.
pub fn evaluate(
    manifest: &CorpusManifest,
    queries: &QuerySet,
    layers: &[Layer],
    ks: &[usize],
) -> crate::Result<EvaluationReport> {
    if ks.contains(&0) {
        return Err(EvalError::InvalidK.into());
    }
    let judgments = judge(manifest, &queries.queries)?;
    let per_layer = layers
        .iter()
        .map(|&layer| Ok((layer, rank_layer(manifest, queries, layer)?)))
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(EvaluationReport::from_rankings(&per_layer, &judgments, ks)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub n_words: usize,
    pub queries_per_word: usize,
    pub n_distractors: usize,
    pub rng_seed: u64,
    /// Candidate target words shorter than this (in characters) are skipped.
    pub min_word_chars: usize,
}

impl Default for ProtocolSpec {
    fn default() -> Self {
        ProtocolSpec {
            n_words: 30,
            queries_per_word: 10,
            n_distractors: 700,
            rng_seed: 0,
            min_word_chars: 1,
        }
    }
}

/// Selects target words, their query sentences and distractor sentences
/// from a labeled pool.
///
/// Every selected query sentence becomes a `contextual_slice` query over
/// its aligned word span. The output corpus holds
/// `n_words * queries_per_word + n_distractors` recordings, and no
/// distractor contains any target word.
pub fn build_protocol_corpus(
    pool: &CorpusManifest,
    spec: &ProtocolSpec,
) -> crate::Result<(CorpusManifest, Vec<QuerySpec>)> {
    let entries = pool.entries();
    let tokens: Vec<HashSet<String>> = entries
        .iter()
        .map(|e| tokenize(&e.transcription).into_iter().collect())
        .collect();

    // word -> entries that contain it and have an aligned span for it
    let mut sources: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        let mut seen = HashSet::new();
        for span in &e.alignments {
            let folded = tokenize(&span.word);
            if folded.len() != 1 || folded[0].chars().count() < spec.min_word_chars {
                continue;
            }
            let w = folded.into_iter().next().unwrap();
            if tokens[i].contains(&w) && seen.insert(w.clone()) {
                sources.entry(w).or_default().push(i);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut candidates: Vec<&String> = sources
        .iter()
        .filter(|(_, v)| v.len() >= spec.queries_per_word)
        .map(|(w, _)| w)
        .collect();
    candidates.shuffle(&mut rng);

    let mut used = vec![false; entries.len()];
    let mut chosen: Vec<(String, Vec<usize>)> = Vec::new();
    for w in candidates {
        if chosen.len() == spec.n_words {
            break;
        }
        let mut avail: Vec<usize> = sources[w].iter().copied().filter(|&i| !used[i]).collect();
        if avail.len() < spec.queries_per_word {
            continue;
        }
        avail.shuffle(&mut rng);
        avail.truncate(spec.queries_per_word);
        avail.sort_unstable();
        for &i in &avail {
            used[i] = true;
        }
        chosen.push((w.clone(), avail));
    }
    if chosen.len() < spec.n_words {
        return Err(EvalError::InsufficientPool(format!(
            "only {} words have {} unused aligned sentences, {} requested",
            chosen.len(),
            spec.queries_per_word,
            spec.n_words
        ))
        .into());
    }

    let targets: HashSet<&str> = chosen.iter().map(|(w, _)| w.as_str()).collect();
    let mut distractors: Vec<usize> = (0..entries.len())
        .filter(|&i| !used[i] && !tokens[i].iter().any(|t| targets.contains(t.as_str())))
        .collect();
    if distractors.len() < spec.n_distractors {
        return Err(EvalError::InsufficientPool(format!(
            "{} distractor sentences available, {} requested",
            distractors.len(),
            spec.n_distractors
        ))
        .into());
    }
    distractors.shuffle(&mut rng);
    distractors.truncate(spec.n_distractors);

    let mut queries = Vec::with_capacity(spec.n_words * spec.queries_per_word);
    for (w, idxs) in &chosen {
        for (n, &i) in idxs.iter().enumerate() {
            let e = &entries[i];
            let span = e
                .alignments
                .iter()
                .find(|s| tokenize(&s.word) == [w.clone()])
                .expect("source sentence has an aligned span")
                .clone();
            let mut q = QuerySpec::contextual(format!("{w}_{n:02}"), e.id.clone(), span);
            q.target_word = w.clone();
            queries.push(q);
        }
    }

    let mut selected: Vec<usize> = chosen.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    selected.extend(distractors);
    selected.sort_unstable();
    let corpus: Vec<ManifestEntry> = selected.into_iter().map(|i| entries[i].clone()).collect();
    Ok((CorpusManifest::new(corpus)?, queries))
}
