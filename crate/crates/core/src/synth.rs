//! Seeded synthetic corpora with planted "words".
//!
//! Each word is a random template of frames. Some recordings contain one
//! word's template verbatim (plus small noise) at a random offset, the rest
//! are pure Gaussian frames. Transcriptions name the planted word, so the
//! usual transcription-based relevance applies unchanged.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::feature::{write_feature_file, FeatureSequence, Layer, WordSpan};
use crate::manifest::{CorpusManifest, ManifestEntry, ManifestError, QuerySet, QuerySpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedCorpusSpec {
    pub n_recordings: usize,
    pub dim: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub n_words: usize,
    pub recordings_per_word: usize,
    pub template_len: usize,
    /// Standard deviation of the noise added to each planted template copy.
    pub plant_noise_sigma: f64,
    pub frame_rate_hz: f32,
    pub seed: u64,
}

impl Default for PlantedCorpusSpec {
    fn default() -> Self {
        PlantedCorpusSpec {
            n_recordings: 1000,
            dim: 16,
            min_len: 50,
            max_len: 200,
            n_words: 30,
            recordings_per_word: 10,
            template_len: 10,
            plant_noise_sigma: 0.01,
            frame_rate_hz: 49.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub spec: PlantedCorpusSpec,
    /// One sequence per recording, in the same order as `entries`.
    pub sequences: Vec<FeatureSequence>,
    /// Transcriptions and aligned spans; feature paths are left empty.
    pub entries: Vec<ManifestEntry>,
    /// One contextual query per planted occurrence.
    pub queries: Vec<QuerySpec>,
}

pub fn word_token(w: usize) -> String {
    format!("word{w:02}")
}

fn gaussian_frames<R: Rng>(rng: &mut R, n: usize, dim: usize) -> Vec<f32> {
    (0..n * dim).map(|_| StandardNormal.sample(rng)).collect()
}

impl PlantedCorpus {
    pub fn generate(spec: &PlantedCorpusSpec) -> Self {
        let n_planted = spec.n_words * spec.recordings_per_word;
        assert!(n_planted <= spec.n_recordings, "more planted recordings than recordings");
        assert!(spec.min_len >= spec.template_len && spec.min_len <= spec.max_len);
        assert!(spec.dim >= 1 && spec.template_len >= 1);

        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let templates: Vec<Vec<f32>> = (0..spec.n_words)
            .map(|_| gaussian_frames(&mut rng, spec.template_len, spec.dim))
            .collect();
        let plant_noise = Normal::new(0.0, spec.plant_noise_sigma.max(0.0)).expect("finite sigma");
        let rate = spec.frame_rate_hz as f64;

        let mut sequences = Vec::with_capacity(spec.n_recordings);
        let mut entries = Vec::with_capacity(spec.n_recordings);
        let mut queries = Vec::with_capacity(n_planted);
        for r in 0..spec.n_recordings {
            let id = format!("rec{r:04}");
            let len = rng.random_range(spec.min_len..=spec.max_len);
            let mut frames = gaussian_frames(&mut rng, len, spec.dim);
            let mut entry = ManifestEntry::new(id.clone(), "filler");
            if r < n_planted {
                let w = r / spec.recordings_per_word;
                let pos = rng.random_range(0..=len - spec.template_len);
                let dst = &mut frames[pos * spec.dim..(pos + spec.template_len) * spec.dim];
                for (d, &t) in dst.iter_mut().zip(&templates[w]) {
                    *d = t + plant_noise.sample(&mut rng) as f32;
                }
                let token = word_token(w);
                let span = WordSpan::new(
                    token.clone(),
                    pos as f64 / rate,
                    (pos + spec.template_len) as f64 / rate,
                )
                .expect("planted span is valid");
                entry.transcription = format!("filler {token} filler");
                entry.alignments.push(span.clone());
                let q = QuerySpec::contextual(format!("{token}_{:02}", r % spec.recordings_per_word), id.clone(), span);
                queries.push(q);
            }
            sequences.push(
                FeatureSequence::new(frames, spec.dim, spec.frame_rate_hz, id, Layer::new(0).unwrap())
                    .expect("generated frames are finite"),
            );
            entries.push(entry);
        }
        PlantedCorpus {
            spec: spec.clone(),
            sequences,
            entries,
            queries,
        }
    }

    /// The corpus seen through a noisier representation: independent
    /// Gaussian noise of standard deviation `sigma` on every value.
    pub fn degraded(&self, sigma: f64, seed: u64) -> Vec<FeatureSequence> {
        add_noise(&self.sequences, sigma, seed)
    }

    pub fn manifest(&self) -> CorpusManifest {
        CorpusManifest::new(self.entries.clone()).expect("generated ids are unique")
    }

    /// Writes one feature file per (recording, layer) plus `manifest.json`
    /// and `queries.json` under `dir`. Each layer is the corpus with the
    /// given noise level added (0 keeps it clean).
    pub fn write_to_dir(&self, dir: &Path, layers: &[(Layer, f64)], seed: u64) -> crate::Result<(PathBuf, PathBuf)> {
        let feat_dir = dir.join("features");
        fs::create_dir_all(&feat_dir).map_err(|e| ManifestError::io(&feat_dir, e))?;
        let mut entries = self.entries.clone();
        for &(layer, sigma) in layers {
            let seqs = if sigma > 0.0 {
                add_noise(&self.sequences, sigma, seed ^ (layer.raw() as u64).wrapping_mul(0x9e37_79b9))
            } else {
                self.sequences.clone()
            };
            for (seq, entry) in seqs.into_iter().zip(entries.iter_mut()) {
                let path = feat_dir.join(format!("{}.l{}.qbef", entry.id, layer));
                write_feature_file(&seq.with_layer(layer), &path)?;
                entry.features.insert(layer, path);
            }
        }
        let manifest = CorpusManifest::new(entries)?;
        let manifest_path = dir.join("manifest.json");
        manifest.save(&manifest_path)?;
        let queries_path = dir.join("queries.json");
        QuerySet::new(dir, self.queries.clone())?.save(&queries_path)?;
        Ok((manifest_path, queries_path))
    }
}

pub fn add_noise(seqs: &[FeatureSequence], sigma: f64, seed: u64) -> Vec<FeatureSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("finite sigma");
    seqs.iter()
        .map(|s| {
            let frames = s.as_slice().iter().map(|&v| v + noise.sample(&mut rng) as f32).collect();
            FeatureSequence::new(frames, s.dim(), s.frame_rate_hz(), s.source_id(), s.layer())
                .expect("noisy frames are finite")
        })
        .collect()
}
