//! Corpus manifests and query sets.
//!
//! Manifest JSON:
//!
//! ```json
//! {"recordings": [{"id": "r1", "transcription": "la casa roja",
//!                  "features": {"12": "feats/r1.l12.qbef"},
//!                  "alignments": [{"word": "casa", "start_s": 0.4, "end_s": 0.8}],
//!                  "audio": "wav/r1.wav"}]}
//! ```
//!
//! `audio` is optional and only used by MFCC extraction. All paths are
//! relative to the directory holding the JSON file.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io;
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feature::{read_feature_file, slice_by_span, FeatureError, FeatureSequence, Layer, WordSpan};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("file not found: {}", path.display())]
    NotFound { path: PathBuf },
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed JSON in {}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("duplicate recording id '{0}'")]
    DuplicateId(String),
    #[error("duplicate query id '{0}'")]
    DuplicateQueryId(String),
    #[error("recording '{recording_id}': {source}")]
    InvalidSpan {
        recording_id: String,
        #[source]
        source: FeatureError,
    },
    #[error("recording '{recording_id}': spans {first} and {second} overlap or are out of order")]
    OverlappingSpans {
        recording_id: String,
        first: WordSpan,
        second: WordSpan,
    },
    #[error("recording '{recording_id}': invalid layer key '{key}'")]
    InvalidLayerKey { recording_id: String, key: String },
    #[error("unknown recording '{0}'")]
    UnknownRecording(String),
    #[error("no features for layer {layer} in recordings: {}", ids.join(", "))]
    MissingLayer { layer: Layer, ids: Vec<String> },
    #[error("{}: {source}", path.display())]
    Feature {
        path: PathBuf,
        #[source]
        source: FeatureError,
    },
    #[error("{}: source id '{found}' does not match recording '{expected}'", path.display())]
    SourceIdMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{}: file holds layer {found}, manifest lists it under layer {expected}", path.display())]
    LayerMismatch {
        path: PathBuf,
        expected: Layer,
        found: Layer,
    },
    #[error("query '{query_id}': {reason}")]
    InvalidQuery { query_id: String, reason: String },
    #[error("query '{query_id}' cannot be resolved: {source}")]
    Unresolvable {
        query_id: String,
        #[source]
        source: Box<ManifestError>,
    },
}

impl ManifestError {
    pub fn is_validation(&self) -> bool {
        match self {
            ManifestError::Io { .. } => false,
            ManifestError::Feature { source, .. } => source.is_validation(),
            ManifestError::Unresolvable { source, .. } => source.is_validation(),
            _ => true,
        }
    }

    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        if source.kind() == io::ErrorKind::NotFound {
            ManifestError::NotFound {
                path: path.to_path_buf(),
            }
        } else {
            ManifestError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub id: String,
    pub transcription: String,
    /// Feature files per layer, resolved against the manifest directory.
    pub features: BTreeMap<Layer, PathBuf>,
    pub alignments: Vec<WordSpan>,
    pub audio: Option<PathBuf>,
}

impl ManifestEntry {
    pub fn new(id: impl Into<String>, transcription: impl Into<String>) -> Self {
        ManifestEntry {
            id: id.into(),
            transcription: transcription.into(),
            features: BTreeMap::new(),
            alignments: Vec::new(),
            audio: None,
        }
    }

    fn validate_alignments(&self) -> Result<(), ManifestError> {
        for span in &self.alignments {
            span.validate().map_err(|source| ManifestError::InvalidSpan {
                recording_id: self.id.clone(),
                source,
            })?;
        }
        for pair in self.alignments.windows(2) {
            if pair[1].start_s < pair[0].end_s {
                return Err(ManifestError::OverlappingSpans {
                    recording_id: self.id.clone(),
                    first: pair[0].clone(),
                    second: pair[1].clone(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawManifest {
    recordings: Vec<RawEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawEntry {
    id: String,
    #[serde(default)]
    transcription: String,
    #[serde(default)]
    features: BTreeMap<String, String>,
    #[serde(default)]
    alignments: Vec<WordSpan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    audio: Option<String>,
}

/// Index of the recordings of a corpus.
///
/// Entry-level invariants (unique ids, ordered non-overlapping spans) are
/// checked on construction. Feature files are only opened when accessed,
/// unless [`CorpusManifest::validate_files`] is called.
#[derive(Debug, Clone)]
pub struct CorpusManifest {
    entries: Vec<ManifestEntry>,
    index: HashMap<String, usize>,
}

impl CorpusManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self, ManifestError> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.id.clone(), i).is_some() {
                return Err(ManifestError::DuplicateId(e.id.clone()));
            }
            e.validate_alignments()?;
        }
        Ok(CorpusManifest { entries, index })
    }

    /// Parses manifest JSON; relative paths are resolved against `base_dir`.
    pub fn from_json(json: &str, base_dir: &Path, origin: &Path) -> Result<Self, ManifestError> {
        let raw: RawManifest = serde_json::from_str(json).map_err(|source| ManifestError::Json {
            path: origin.to_path_buf(),
            source,
        })?;
        let mut entries = Vec::with_capacity(raw.recordings.len());
        for r in raw.recordings {
            let mut features = BTreeMap::new();
            for (key, path) in r.features {
                let layer: Layer = key.parse().map_err(|_| ManifestError::InvalidLayerKey {
                    recording_id: r.id.clone(),
                    key: key.clone(),
                })?;
                features.insert(layer, base_dir.join(path));
            }
            entries.push(ManifestEntry {
                id: r.id,
                transcription: r.transcription,
                features,
                alignments: r.alignments,
                audio: r.audio.map(|a| base_dir.join(a)),
            });
        }
        CorpusManifest::new(entries)
    }

    /// Serializes with paths written relative to `base_dir` where possible.
    pub fn to_json(&self, base_dir: &Path) -> String {
        let raw = RawManifest {
            recordings: self
                .entries
                .iter()
                .map(|e| RawEntry {
                    id: e.id.clone(),
                    transcription: e.transcription.clone(),
                    features: e
                        .features
                        .iter()
                        .map(|(l, p)| (l.to_string(), relative_to(p, base_dir)))
                        .collect(),
                    alignments: e.alignments.clone(),
                    audio: e.audio.as_ref().map(|a| relative_to(a, base_dir)),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("manifest serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ManifestError> {
        let path = path.as_ref();
        let base = parent_dir(path);
        fs::write(path, self.to_json(&base)).map_err(|e| ManifestError::io(path, e))
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ManifestEntry> {
        self.index.get(id).map(|&i| &self.entries[i])
    }

    pub fn entry(&self, id: &str) -> Result<&ManifestEntry, ManifestError> {
        self.get(id).ok_or_else(|| ManifestError::UnknownRecording(id.to_string()))
    }

    /// All layers present in at least one recording.
    pub fn layers(&self) -> BTreeSet<Layer> {
        self.entries.iter().flat_map(|e| e.features.keys().copied()).collect()
    }

    /// Ids of recordings without a feature file for `layer`.
    pub fn missing_layer(&self, layer: Layer) -> Vec<String> {
        self.entries
            .iter()
            .filter(|e| !e.features.contains_key(&layer))
            .map(|e| e.id.clone())
            .collect()
    }

    pub fn require_layer(&self, layer: Layer) -> Result<(), ManifestError> {
        let ids = self.missing_layer(layer);
        if ids.is_empty() {
            Ok(())
        } else {
            Err(ManifestError::MissingLayer { layer, ids })
        }
    }

    pub fn feature_path(&self, id: &str, layer: Layer) -> Result<&Path, ManifestError> {
        self.entry(id)?
            .features
            .get(&layer)
            .map(PathBuf::as_path)
            .ok_or_else(|| ManifestError::MissingLayer {
                layer,
                ids: vec![id.to_string()],
            })
    }

    /// Reads and checks the feature file of recording `id` at `layer`.
    pub fn load_features(&self, id: &str, layer: Layer) -> Result<FeatureSequence, ManifestError> {
        let path = self.feature_path(id, layer)?;
        load_checked(path, id, layer)
    }

    /// Opens every referenced feature file (strict mode).
    pub fn validate_files(&self) -> Result<(), ManifestError> {
        for e in &self.entries {
            for (&layer, path) in &e.features {
                load_checked(path, &e.id, layer)?;
            }
        }
        Ok(())
    }
}

fn load_checked(path: &Path, id: &str, layer: Layer) -> Result<FeatureSequence, ManifestError> {
    let seq = read_feature_file(path).map_err(|source| ManifestError::Feature {
        path: path.to_path_buf(),
        source,
    })?;
    if seq.source_id() != id {
        return Err(ManifestError::SourceIdMismatch {
            path: path.to_path_buf(),
            expected: id.to_string(),
            found: seq.source_id().to_string(),
        });
    }
    if seq.layer() != layer {
        return Err(ManifestError::LayerMismatch {
            path: path.to_path_buf(),
            expected: layer,
            found: seq.layer(),
        });
    }
    Ok(seq)
}

pub(crate) fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn normalize(path: &Path) -> PathBuf {
    let mut out = PathBuf::new();
    for c in path.components() {
        match c {
            Component::CurDir => {}
            Component::ParentDir => {
                if !out.pop() {
                    out.push("..");
                }
            }
            other => out.push(other),
        }
    }
    out
}

fn relative_to(path: &Path, base: &Path) -> String {
    let p = normalize(path);
    let b = normalize(base);
    match p.strip_prefix(&b) {
        Ok(rel) => rel.to_string_lossy().into_owned(),
        Err(_) => std::path::absolute(&p)
            .unwrap_or(p)
            .to_string_lossy()
            .into_owned(),
    }
}

/// Loads a manifest, validating entry invariants eagerly.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<CorpusManifest, ManifestError> {
    let path = path.as_ref();
    let json = fs::read_to_string(path).map_err(|e| ManifestError::io(path, e))?;
    CorpusManifest::from_json(&json, &parent_dir(path), path)
}

/// Loads a manifest and additionally opens every feature file it references.
pub fn load_manifest_strict(path: impl AsRef<Path>) -> Result<CorpusManifest, ManifestError> {
    let manifest = load_manifest(path)?;
    manifest.validate_files()?;
    Ok(manifest)
}

/// Where the frames of a query come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    /// A feature file encoded independently of any corpus recording.
    StandaloneFile,
    /// The word's audio cut out by its span and encoded on its own.
    WordSegment,
    /// The span sliced out of the full-utterance features of a recording.
    ContextualSlice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuerySource {
    /// Feature file path. A `{layer}` placeholder is substituted per layer.
    File(PathBuf),
    Segment { recording_id: String, span: WordSpan },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub query_id: String,
    pub target_word: String,
    pub mode: QueryMode,
    pub source: QuerySource,
    /// Per-layer feature files for `word_segment` queries (and optionally
    /// `standalone_file` ones). Keys are layer indices or `"none"`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub features: BTreeMap<String, PathBuf>,
}

impl QuerySpec {
    pub fn contextual(query_id: impl Into<String>, recording_id: impl Into<String>, span: WordSpan) -> Self {
        QuerySpec {
            query_id: query_id.into(),
            target_word: span.word.clone(),
            mode: QueryMode::ContextualSlice,
            source: QuerySource::Segment {
                recording_id: recording_id.into(),
                span,
            },
            features: BTreeMap::new(),
        }
    }

    /// Recording the query was cut from, if any.
    pub fn source_recording(&self) -> Option<&str> {
        match &self.source {
            QuerySource::Segment { recording_id, .. } => Some(recording_id),
            QuerySource::File(_) => None,
        }
    }

    fn invalid(&self, reason: impl Into<String>) -> ManifestError {
        ManifestError::InvalidQuery {
            query_id: self.query_id.clone(),
            reason: reason.into(),
        }
    }

    pub fn validate(&self) -> Result<(), ManifestError> {
        if self.query_id.is_empty() {
            return Err(self.invalid("empty query_id"));
        }
        if self.target_word.trim().is_empty() {
            return Err(self.invalid("empty target_word"));
        }
        for key in self.features.keys() {
            key.parse::<Layer>()
                .map_err(|_| self.invalid(format!("invalid layer key '{key}'")))?;
        }
        match (&self.mode, &self.source) {
            (QueryMode::StandaloneFile, QuerySource::File(_)) => Ok(()),
            (QueryMode::StandaloneFile, _) => Err(self.invalid("standalone_file needs a path source")),
            (_, QuerySource::File(_)) => Err(self.invalid("needs a recording_id + span source")),
            (_, QuerySource::Segment { span, .. }) => span.validate().map_err(|e| self.invalid(e.to_string())),
        }
    }

    fn feature_override(&self, layer: Layer) -> Option<&PathBuf> {
        self.features
            .iter()
            .find(|(k, _)| k.parse::<Layer>().ok() == Some(layer))
            .map(|(_, p)| p)
    }
}

/// A list of queries plus the directory their relative paths resolve against.
#[derive(Debug, Clone)]
pub struct QuerySet {
    pub base_dir: PathBuf,
    pub queries: Vec<QuerySpec>,
}

impl QuerySet {
    pub fn new(base_dir: impl Into<PathBuf>, queries: Vec<QuerySpec>) -> Result<Self, ManifestError> {
        let mut seen = BTreeSet::new();
        for q in &queries {
            q.validate()?;
            if !seen.insert(q.query_id.as_str()) {
                return Err(ManifestError::DuplicateQueryId(q.query_id.clone()));
            }
        }
        Ok(QuerySet {
            base_dir: base_dir.into(),
            queries,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ManifestError> {
        let path = path.as_ref();
        let json = fs::read_to_string(path).map_err(|e| ManifestError::io(path, e))?;
        let queries: Vec<QuerySpec> = serde_json::from_str(&json).map_err(|source| ManifestError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        QuerySet::new(parent_dir(path), queries)
    }

    /// Writes the query list; file paths are rewritten relative to the
    /// destination directory.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ManifestError> {
        let path = path.as_ref();
        let dest = parent_dir(path);
        let rebased: Vec<QuerySpec> = self
            .queries
            .iter()
            .map(|q| {
                let mut q = q.clone();
                if let QuerySource::File(p) = &mut q.source {
                    *p = PathBuf::from(relative_to(&self.base_dir.join(&*p), &dest));
                }
                for p in q.features.values_mut() {
                    *p = PathBuf::from(relative_to(&self.base_dir.join(&*p), &dest));
                }
                q
            })
            .collect();
        let json = serde_json::to_string_pretty(&rebased).expect("queries serialize");
        fs::write(path, json).map_err(|e| ManifestError::io(path, e))
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    /// Checks that every query can be resolved at `layer` without loading
    /// any frames: source recordings exist and have the layer.
    pub fn validate_against(&self, manifest: &CorpusManifest, layer: Layer) -> Result<(), ManifestError> {
        for q in &self.queries {
            let wrap = |source: ManifestError| ManifestError::Unresolvable {
                query_id: q.query_id.clone(),
                source: Box::new(source),
            };
            match (&q.mode, &q.source) {
                (QueryMode::ContextualSlice, QuerySource::Segment { recording_id, .. }) => {
                    manifest.feature_path(recording_id, layer).map_err(wrap)?;
                }
                (QueryMode::WordSegment, QuerySource::Segment { recording_id, .. }) => {
                    manifest.entry(recording_id).map_err(wrap)?;
                    if q.feature_override(layer).is_none() {
                        return Err(wrap(ManifestError::MissingLayer {
                            layer,
                            ids: vec![q.query_id.clone()],
                        }));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Produces the frames of `query` at `layer`.
    pub fn resolve(
        &self,
        query: &QuerySpec,
        manifest: &CorpusManifest,
        layer: Layer,
    ) -> Result<FeatureSequence, ManifestError> {
        let wrap = |source: ManifestError| ManifestError::Unresolvable {
            query_id: query.query_id.clone(),
            source: Box::new(source),
        };
        let read = |path: PathBuf| {
            read_feature_file(&path).map_err(|source| wrap(ManifestError::Feature { path, source }))
        };
        let seq = match (&query.mode, &query.source) {
            (QueryMode::ContextualSlice, QuerySource::Segment { recording_id, span }) => {
                let full = manifest.load_features(recording_id, layer).map_err(wrap)?;
                slice_by_span(&full, span).map_err(|source| {
                    wrap(ManifestError::Feature {
                        path: PathBuf::from(recording_id),
                        source,
                    })
                })?
            }
            (QueryMode::WordSegment, QuerySource::Segment { .. }) => {
                let path = query.feature_override(layer).ok_or_else(|| {
                    wrap(ManifestError::MissingLayer {
                        layer,
                        ids: vec![query.query_id.clone()],
                    })
                })?;
                read(self.base_dir.join(path))?
            }
            (QueryMode::StandaloneFile, QuerySource::File(path)) => {
                let path = match query.feature_override(layer) {
                    Some(p) => p.clone(),
                    None => PathBuf::from(path.to_string_lossy().replace("{layer}", &layer.to_string())),
                };
                read(self.base_dir.join(path))?
            }
            _ => return Err(query.invalid("mode and source do not agree")),
        };
        Ok(seq.with_source_id(query.query_id.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(json: &str) -> Result<CorpusManifest, ManifestError> {
        CorpusManifest::from_json(json, Path::new("/data"), Path::new("/data/m.json"))
    }

    #[test]
    fn two_valid_entries() {
        let m = parse(
            r#"{"recordings":[
                {"id":"a","transcription":"la casa","features":{"0":"a.l0.qbef","none":"a.mfcc.qbef"},
                 "alignments":[{"word":"la","start_s":0.0,"end_s":0.2},{"word":"casa","start_s":0.2,"end_s":0.6}]},
                {"id":"b","transcription":"otra","features":{"0":"b.l0.qbef"}}]}"#,
        )
        .unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(
            m.feature_path("a", Layer::NONE).unwrap(),
            Path::new("/data/a.mfcc.qbef")
        );
        assert_eq!(m.missing_layer(Layer::NONE), vec!["b".to_string()]);
        assert!(matches!(
            m.require_layer(Layer::NONE),
            Err(ManifestError::MissingLayer { ids, .. }) if ids == vec!["b".to_string()]
        ));
        assert_eq!(m.layers().len(), 2);
    }

    #[test]
    fn duplicate_id_rejected() {
        let err = parse(r#"{"recordings":[{"id":"a"},{"id":"a"}]}"#).unwrap_err();
        assert!(matches!(err, ManifestError::DuplicateId(id) if id == "a"));
    }

    #[test]
    fn reversed_span_rejected() {
        let err = parse(
            r#"{"recordings":[{"id":"a","alignments":[{"word":"x","start_s":1.0,"end_s":0.5}]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ManifestError::InvalidSpan { .. }));
    }

    #[test]
    fn overlapping_spans_rejected() {
        let err = parse(
            r#"{"recordings":[{"id":"a","alignments":[
                {"word":"x","start_s":0.0,"end_s":0.5},{"word":"y","start_s":0.4,"end_s":0.9}]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ManifestError::OverlappingSpans { .. }));
    }

    #[test]
    fn bad_layer_key_rejected() {
        let err = parse(r#"{"recordings":[{"id":"a","features":{"top":"x"}}]}"#).unwrap_err();
        assert!(matches!(err, ManifestError::InvalidLayerKey { .. }));
    }

    #[test]
    fn malformed_json() {
        assert!(matches!(parse("{"), Err(ManifestError::Json { .. })));
    }

    #[test]
    fn json_round_trip_keeps_relative_paths() {
        let m = parse(r#"{"recordings":[{"id":"a","transcription":"t","features":{"3":"f/a.qbef"}}]}"#).unwrap();
        let json = m.to_json(Path::new("/data"));
        assert!(json.contains("\"f/a.qbef\""));
        let back = parse(&json).unwrap();
        assert_eq!(back.entries(), m.entries());
    }

    #[test]
    fn query_json_shapes() {
        let json = r#"[
            {"query_id":"q1","target_word":"casa","mode":"contextual_slice",
             "source":{"recording_id":"a","span":{"word":"casa","start_s":0.2,"end_s":0.6}}},
            {"query_id":"q2","target_word":"casa","mode":"standalone_file","source":"q/casa.l{layer}.qbef"},
            {"query_id":"q3","target_word":"casa","mode":"word_segment",
             "source":{"recording_id":"a","span":{"word":"casa","start_s":0.2,"end_s":0.6}},
             "features":{"0":"q/q3.l0.qbef"}}
        ]"#;
        let qs: Vec<QuerySpec> = serde_json::from_str(json).unwrap();
        assert_eq!(qs[0].mode, QueryMode::ContextualSlice);
        assert_eq!(qs[0].source_recording(), Some("a"));
        assert!(matches!(qs[1].source, QuerySource::File(_)));
        assert_eq!(qs[2].feature_override(Layer::new(0).unwrap()), Some(&PathBuf::from("q/q3.l0.qbef")));
        let set = QuerySet::new("/q", qs).unwrap();
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn query_validation() {
        let span = WordSpan::new("casa", 0.0, 1.0).unwrap();
        let mut q = QuerySpec::contextual("q", "a", span);
        q.mode = QueryMode::StandaloneFile;
        assert!(q.validate().is_err());
        let mut q2 = QuerySpec::contextual("q", "a", WordSpan::new("x", 0.0, 1.0).unwrap());
        q2.target_word = "  ".into();
        assert!(q2.validate().is_err());
        let q3 = QuerySpec::contextual("q", "a", WordSpan::new("x", 0.0, 1.0).unwrap());
        assert!(matches!(
            QuerySet::new("/", vec![q3.clone(), q3]),
            Err(ManifestError::DuplicateQueryId(_))
        ));
    }

    #[test]
    fn contextual_query_needs_layer() {
        let m = parse(r#"{"recordings":[{"id":"a","features":{"0":"a.qbef"}}]}"#).unwrap();
        let q = QuerySpec::contextual("q", "a", WordSpan::new("x", 0.0, 0.5).unwrap());
        let set = QuerySet::new("/", vec![q]).unwrap();
        assert!(set.validate_against(&m, Layer::new(0).unwrap()).is_ok());
        assert!(set.validate_against(&m, Layer::new(1).unwrap()).is_err());
        let q = QuerySpec::contextual("q", "zzz", WordSpan::new("x", 0.0, 0.5).unwrap());
        let set = QuerySet::new("/", vec![q]).unwrap();
        assert!(set.validate_against(&m, Layer::new(0).unwrap()).is_err());
    }

    #[test]
    fn relative_paths() {
        assert_eq!(relative_to(Path::new("/a/b/c.qbef"), Path::new("/a")), "b/c.qbef");
        assert_eq!(relative_to(Path::new("/a/./b/../c"), Path::new("/a")), "c");
        assert_eq!(relative_to(Path::new("/x/c"), Path::new("/a")), "/x/c");
    }
}
