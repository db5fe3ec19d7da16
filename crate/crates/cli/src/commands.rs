use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use qbe_core::dtw::{search_corpus, LayerCorpus, MatchResult, SearchOptions};
use qbe_core::eval::{build_protocol_corpus, judge, rank_layer, EvaluationReport, ProtocolSpec};
use qbe_core::geometry::{anisotropy, rogue_dimensions, AnisotropyReport, GeometryError, PairSamplingPlan, Stratum};
use qbe_core::manifest::{load_manifest, load_manifest_strict, ManifestEntry, QuerySet};
use qbe_core::mfcc::{read_wav, MfccConfig, MfccExtractor};
use qbe_core::selftest::run_selftest;
use qbe_core::synth::{PlantedCorpus, PlantedCorpusSpec};
use qbe_core::{write_feature_file, CorpusManifest, FeatureSequence, Layer};
use rayon::prelude::*;
use serde::Serialize;

use crate::provenance::write_run_json;
use crate::{
    AnalyzeArgs, Cli, Command, Common, EvaluateArgs, ExtractMfccArgs, MakeProtocolArgs, RogueDimsArgs, SearchArgs,
    SelftestArgs,
};

/// Bad user input detected by the CLI itself (exit code 3).
#[derive(Debug)]
pub struct InvalidInput(pub String);

impl std::error::Error for InvalidInput {}

impl std::fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::ExtractMfcc(a) => extract_mfcc(cli, a),
        Command::Analyze(a) => analyze(cli, a),
        Command::RogueDims(a) => rogue_dims(cli, a),
        Command::Search(a) => search(cli, a),
        Command::Evaluate(a) => evaluate(cli, a),
        Command::MakeProtocol(a) => make_protocol(cli, a),
        Command::Selftest(a) => selftest(cli, a),
    }
}

fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))
}

fn open_manifest(c: &Common) -> Result<CorpusManifest> {
    let m = if c.strict {
        load_manifest_strict(&c.manifest)
    } else {
        load_manifest(&c.manifest)
    }
    .map_err(qbe_core::Error::from)?;
    info!("{} recordings in {}", m.len(), c.manifest.display());
    Ok(m)
}

fn write(path: PathBuf, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn layer_sequences(m: &CorpusManifest, layer: Layer) -> Result<Vec<FeatureSequence>> {
    m.require_layer(layer).map_err(qbe_core::Error::from)?;
    let seqs = m
        .entries()
        .par_iter()
        .map(|e| m.load_features(&e.id, layer))
        .collect::<Result<Vec<_>, _>>()
        .map_err(qbe_core::Error::from)?;
    Ok(seqs)
}

fn file_stem_for(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

fn extract_mfcc(cli: &Cli, a: &ExtractMfccArgs) -> Result<()> {
    let m = open_manifest(&a.common)?;
    let missing: Vec<&str> = m.entries().iter().filter(|e| e.audio.is_none()).map(|e| e.id.as_str()).collect();
    if !missing.is_empty() {
        return Err(InvalidInput(format!("recordings without an audio path: {}", missing.join(", "))).into());
    }
    let out = &a.common.out;
    let feat_dir = out.join("features");
    prepare_out(&feat_dir)?;

    let cfg = MfccConfig::default();
    let extractor = MfccExtractor::new(cfg, 16_000).map_err(qbe_core::Error::from)?;
    let mut stems: BTreeMap<String, usize> = BTreeMap::new();
    let targets: Vec<(&ManifestEntry, PathBuf)> = m
        .entries()
        .iter()
        .map(|e| {
            let stem = file_stem_for(&e.id);
            let n = stems.entry(stem.clone()).or_insert(0);
            *n += 1;
            let name = if *n == 1 { format!("{stem}.mfcc.qbef") } else { format!("{stem}.{n}.mfcc.qbef") };
            (e, feat_dir.join(name))
        })
        .collect();
    targets
        .par_iter()
        .map(|(e, path)| -> Result<()> {
            let audio = read_wav(e.audio.as_ref().expect("checked above")).map_err(qbe_core::Error::from)?;
            let feats = extractor.extract(&audio, &e.id).map_err(qbe_core::Error::from)?;
            write_feature_file(&feats, path).map_err(qbe_core::Error::from)?;
            Ok(())
        })
        .collect::<Result<()>>()?;

    let entries = targets
        .into_iter()
        .map(|(e, path)| {
            let mut e = e.clone();
            e.features.insert(Layer::NONE, path);
            e
        })
        .collect();
    let updated = CorpusManifest::new(entries).map_err(qbe_core::Error::from)?;
    updated.save(out.join("manifest.json")).map_err(qbe_core::Error::from)?;
    info!("wrote {} MFCC files", updated.len());
    write_run_json(out, &cli, &[&a.common.manifest])
}

#[derive(Serialize)]
struct LayerAnalysis {
    layer: Layer,
    /// Mean cosine over `any` pairs; near 1 means an anisotropic space.
    anisotropy: f64,
    any: AnisotropyReport,
    same_recording: Option<AnisotropyReport>,
    different_recording: Option<AnisotropyReport>,
}

fn analyze(cli: &Cli, a: &AnalyzeArgs) -> Result<()> {
    let m = open_manifest(&a.common)?;
    prepare_out(&a.common.out)?;
    let mut csv: Vec<(Stratum, String)> = Vec::new();
    for &layer in &a.layers {
        let seqs = layer_sequences(&m, layer)?;
        let plan = |stratum| PairSamplingPlan {
            n_pairs: a.pairs,
            stratum,
            rng_seed: a.seed,
            histogram_bins: a.bins,
        };
        let any = anisotropy(&seqs, &plan(Stratum::Any)).map_err(qbe_core::Error::from)?;
        let optional = |stratum| match anisotropy(&seqs, &plan(stratum)) {
            Ok(r) => Ok(Some(r)),
            Err(GeometryError::UnsatisfiableStratum(s)) => {
                warn!("layer {layer}: stratum {} cannot be sampled, skipped", s.as_str());
                Ok(None)
            }
            Err(e) => Err(qbe_core::Error::from(e)),
        };
        let report = LayerAnalysis {
            layer,
            anisotropy: any.expected_cosine,
            same_recording: optional(Stratum::SameRecording)?,
            different_recording: optional(Stratum::DifferentRecording)?,
            any,
        };
        info!("layer {layer}: expected cosine {:.4}", report.anisotropy);
        if a.histogram_csv {
            let all = [Some(&report.any), report.same_recording.as_ref(), report.different_recording.as_ref()];
            for (stratum, r) in [Stratum::Any, Stratum::SameRecording, Stratum::DifferentRecording].into_iter().zip(all) {
                let Some(r) = r else { continue };
                let idx = match csv.iter().position(|(s, _)| *s == stratum) {
                    Some(i) => i,
                    None => {
                        csv.push((stratum, "layer,bin_lower,bin_upper,count\n".to_string()));
                        csv.len() - 1
                    }
                };
                let buf = &mut csv[idx].1;
                for b in &r.histogram {
                    writeln!(buf, "{},{},{},{}", layer, b.bin_lower, b.bin_upper, b.count)?;
                }
            }
        }
        write(a.common.out.join(format!("analyze_layer_{layer}.json")), to_json(&report)?)?;
    }
    for (stratum, body) in csv {
        write(a.common.out.join(format!("histogram_{}.csv", stratum.as_str())), body)?;
    }
    write_run_json(&a.common.out, &cli, &[&a.common.manifest])
}

fn rogue_dims(cli: &Cli, a: &RogueDimsArgs) -> Result<()> {
    let m = open_manifest(&a.common)?;
    prepare_out(&a.common.out)?;
    let mut reports = Vec::new();
    let mut csv = String::from("layer,max_mean,argmax_dim,std_of_max_dim,second_max_mean,median_of_means\n");
    for &layer in &a.layers {
        let seqs = layer_sequences(&m, layer)?;
        let r = rogue_dimensions(&seqs, layer).map_err(qbe_core::Error::from)?;
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.layer, r.max_mean, r.argmax_dim, r.std_of_max_dim, r.second_max_mean, r.median_of_means
        )?;
        reports.push(r);
    }
    write(a.common.out.join("rogue_dims.json"), to_json(&reports)?)?;
    write(a.common.out.join("rogue_dims.csv"), csv)?;
    write_run_json(&a.common.out, &cli, &[&a.common.manifest])
}

#[derive(Serialize)]
struct SearchLine<'a> {
    query_id: &'a str,
    rank: usize,
    recording_id: &'a str,
    normalized_cost: f64,
    match_start_s: f64,
    match_end_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<&'a [(usize, usize)]>,
}

fn search(cli: &Cli, a: &SearchArgs) -> Result<()> {
    let m = open_manifest(&a.common)?;
    let qs = QuerySet::load(&a.queries).map_err(qbe_core::Error::from)?;
    let selected: Vec<_> = if a.query_id.is_empty() {
        qs.queries.iter().collect()
    } else {
        let mut v = Vec::new();
        for id in &a.query_id {
            match qs.queries.iter().find(|q| &q.query_id == id) {
                Some(q) => v.push(q),
                None => return Err(InvalidInput(format!("unknown query id '{id}'")).into()),
            }
        }
        v
    };
    m.require_layer(a.layer).map_err(qbe_core::Error::from)?;
    qs.validate_against(&m, a.layer).map_err(qbe_core::Error::from)?;
    let corpus = LayerCorpus::load(&m, a.layer)?;
    prepare_out(&a.common.out)?;

    let opts = SearchOptions {
        paths_for_top: if a.paths { a.top_k } else { 0 },
    };
    let mut body = String::new();
    for q in selected {
        let frames = qs.resolve(q, &m, a.layer).map_err(qbe_core::Error::from)?;
        let mut results: Vec<MatchResult> =
            search_corpus(&corpus, &frames, &q.query_id, opts).map_err(qbe_core::Error::from)?;
        if a.top_k > 0 {
            results.truncate(a.top_k);
        }
        for (i, r) in results.iter().enumerate() {
            let (s, e) = r.match_seconds();
            let line = SearchLine {
                query_id: &q.query_id,
                rank: i + 1,
                recording_id: &r.recording_id,
                normalized_cost: r.normalized_cost,
                match_start_s: s,
                match_end_s: e,
                path: r.path.as_deref(),
            };
            body.push_str(&serde_json::to_string(&line)?);
            body.push('\n');
        }
    }
    write(a.common.out.join(format!("search_layer_{}.jsonl", a.layer)), body)?;
    write_run_json(&a.common.out, &cli, &[&a.common.manifest, &a.queries])
}

#[derive(Serialize)]
struct EvaluationSummary<'a> {
    layers: &'a [Layer],
    ks: &'a [usize],
    n_queries: usize,
    #[serde(flatten)]
    report: &'a EvaluationReport,
}

fn evaluate(cli: &Cli, a: &EvaluateArgs) -> Result<()> {
    if a.k.contains(&0) {
        return Err(InvalidInput("k values must be >= 1".into()).into());
    }
    let m = open_manifest(&a.common)?;
    let qs = QuerySet::load(&a.queries).map_err(qbe_core::Error::from)?;
    let judgments = judge(&m, &qs.queries).map_err(qbe_core::Error::from)?;
    for &layer in &a.layers {
        m.require_layer(layer).map_err(qbe_core::Error::from)?;
        qs.validate_against(&m, layer).map_err(qbe_core::Error::from)?;
    }
    prepare_out(&a.common.out)?;

    let mut per_layer = Vec::with_capacity(a.layers.len());
    for &layer in &a.layers {
        info!("ranking {} queries at layer {layer}", qs.len());
        let rankings = rank_layer(&m, &qs, layer)?;
        if a.rankings {
            let mut body = String::new();
            for r in &rankings {
                body.push_str(&serde_json::to_string(r)?);
                body.push('\n');
            }
            write(a.common.out.join(format!("rankings_layer_{layer}.jsonl")), body)?;
        }
        per_layer.push((layer, rankings));
    }
    let report = EvaluationReport::from_rankings(&per_layer, &judgments, &a.k).map_err(qbe_core::Error::from)?;
    if !report.diagnostics.excluded_queries.is_empty() {
        warn!(
            "{} queries have no relevant recording and are excluded",
            report.diagnostics.excluded_queries.len()
        );
    }

    let mut csv = String::from("layer,k,precision,recall,f1,n_queries\n");
    for r in &report.metrics {
        writeln!(csv, "{},{},{},{},{},{}", r.layer, r.k, r.precision_at_k, r.recall_at_k, r.f1_at_k, r.n_queries)?;
    }
    write(a.common.out.join("metrics.csv"), csv)?;
    let summary = EvaluationSummary {
        layers: &a.layers,
        ks: &a.k,
        n_queries: qs.len(),
        report: &report,
    };
    write(a.common.out.join("summary.json"), to_json(&summary)?)?;

    if a.fig2_grid {
        let mut grid = String::from("layer");
        for k in &a.k {
            write!(grid, ",p_at_{k}")?;
        }
        grid.push('\n');
        for &layer in &a.layers {
            write!(grid, "{layer}")?;
            for &k in &a.k {
                let p = report.get(layer, k).map(|r| r.precision_at_k).unwrap_or(f64::NAN);
                write!(grid, ",{p}")?;
            }
            grid.push('\n');
        }
        write(a.common.out.join("fig2_grid.csv"), grid)?;
    }
    for b in &report.best_layers {
        info!("k={}: best layer {} (F1 {:.4})", b.k, b.layer, b.f1_at_k);
    }
    write_run_json(&a.common.out, &cli, &[&a.common.manifest, &a.queries])
}

fn parse_noise(specs: &[String]) -> Result<Vec<(Layer, f64)>> {
    let mut out: Vec<(Layer, f64)> = Vec::new();
    for s in specs {
        let parsed = s.split_once('=').and_then(|(l, sigma)| {
            let layer: Layer = l.parse().ok()?;
            let sigma: f64 = sigma.trim().parse().ok()?;
            (sigma.is_finite() && sigma >= 0.0).then_some((layer, sigma))
        });
        match parsed {
            Some(p) if !out.iter().any(|(l, _)| *l == p.0) => out.push(p),
            Some(p) => bail!(InvalidInput(format!("layer {} listed twice in --noise", p.0))),
            None => bail!(InvalidInput(format!("bad --noise entry '{s}', expected layer=sigma"))),
        }
    }
    Ok(out)
}

fn make_protocol(cli: &Cli, a: &MakeProtocolArgs) -> Result<()> {
    if a.synthetic {
        let layers = parse_noise(&a.noise)?;
        let spec = PlantedCorpusSpec {
            n_recordings: a.n_words * a.queries_per_word + a.n_distractors,
            dim: a.dim,
            n_words: a.n_words,
            recordings_per_word: a.queries_per_word,
            seed: a.seed,
            ..PlantedCorpusSpec::default()
        };
        if a.dim == 0 || a.queries_per_word == 0 {
            bail!(InvalidInput("--dim and --queries-per-word must be >= 1".into()));
        }
        prepare_out(&a.out)?;
        let corpus = PlantedCorpus::generate(&spec);
        let (mpath, qpath) = corpus.write_to_dir(&a.out, &layers, a.seed)?;
        info!(
            "wrote {} recordings and {} queries to {} and {}",
            corpus.sequences.len(),
            corpus.queries.len(),
            mpath.display(),
            qpath.display()
        );
        return write_run_json(&a.out, &cli, &[]);
    }

    let pool_path = a.pool.as_ref().expect("clap requires --pool without --synthetic");
    let pool = load_manifest(pool_path).map_err(qbe_core::Error::from)?;
    let spec = ProtocolSpec {
        n_words: a.n_words,
        queries_per_word: a.queries_per_word,
        n_distractors: a.n_distractors,
        rng_seed: a.seed,
        min_word_chars: a.min_word_chars,
    };
    let (manifest, queries) = build_protocol_corpus(&pool, &spec)?;
    prepare_out(&a.out)?;
    manifest.save(a.out.join("manifest.json")).map_err(qbe_core::Error::from)?;
    QuerySet::new(&a.out, queries)
        .and_then(|qs| qs.save(a.out.join("queries.json")))
        .map_err(qbe_core::Error::from)?;
    info!("protocol corpus: {} recordings", manifest.len());
    write_run_json(&a.out, &cli, &[pool_path])
}

fn selftest(cli: &Cli, a: &SelftestArgs) -> Result<()> {
    let report = run_selftest(a.trials, a.seed);
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(out) = &a.out {
        prepare_out(out)?;
        write(out.join("selftest.json"), to_json(&report)?)?;
        write_run_json(out, &cli, &[])?;
    }
    if !report.passed() {
        bail!("selftest failed");
    }
    Ok(())
}
