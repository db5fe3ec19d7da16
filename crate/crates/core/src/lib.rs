//! Query-by-example spoken term detection.
//!
//! Recordings and queries are sequences of frame vectors (learned speech
//! embeddings or MFCCs). A query is scored against each recording with
//! subsequence dynamic time warping over cosine costs, and recordings are
//! ranked by normalized match cost.
//!
//! Alongside the search engine the crate ships:
//!
//! - [`feature`]: the binary feature file format, word spans and time slicing
//! - [`manifest`]: corpus manifests and query sets (JSON)
//! - [`geometry`]: anisotropy, similarity distributions and rogue dimensions
//! - [`dtw`]: cost matrices, the subsequence DTW kernel and corpus search
//! - [`eval`]: relevance judgments, Precision@k / Recall@k and layer selection
//! - [`mfcc`]: WAV reading and the MFCC baseline front end
//! - [`synth`]: seeded synthetic corpora with planted words

pub mod dtw;
pub mod error;
pub mod eval;
pub mod feature;
pub mod geometry;
pub mod manifest;
pub mod mfcc;
pub mod selftest;
pub mod synth;

pub use dtw::{cost_matrix, search, subsequence_dtw, CostMatrix, LayerCorpus, MatchResult};
pub use error::{Error, Result};
pub use eval::{evaluate, judge, precision_recall_at_k, RelevanceJudgments, RetrievalMetrics};
pub use feature::{read_feature_file, slice_by_span, write_feature_file, FeatureSequence, Layer, WordSpan};
pub use geometry::{anisotropy, cosine, rogue_dimensions, similarity_distribution};
pub use manifest::{load_manifest, CorpusManifest, QueryMode, QuerySet, QuerySpec};
