use std::fs;

use proptest::prelude::*;
use qbe_core::dtw::{
    cost_matrix, search, search_corpus, subsequence_dtw, subsequence_dtw_cost, CostMatrix, DtwError, LayerCorpus,
    PreparedSequence, SearchOptions,
};
use qbe_core::manifest::{ManifestEntry, ManifestError, QuerySet, QuerySpec};
use qbe_core::{cosine, write_feature_file, CorpusManifest, Error, FeatureSequence, Layer, WordSpan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Minimum over every monotone free-start/free-end path, by enumeration.
fn brute_force(costs: &[f64], n: usize, m: usize) -> f64 {
    fn go(c: &[f64], n: usize, m: usize, i: usize, j: usize, acc: f64) -> f64 {
        let mut best = if j == m - 1 { acc } else { f64::INFINITY };
        if i + 1 < n {
            best = best.min(go(c, n, m, i + 1, j, acc + c[(i + 1) * m + j]));
        }
        if j + 1 < m {
            best = best.min(go(c, n, m, i, j + 1, acc + c[i * m + j + 1]));
        }
        if i + 1 < n && j + 1 < m {
            best = best.min(go(c, n, m, i + 1, j + 1, acc + c[(i + 1) * m + j + 1]));
        }
        best
    }
    (0..n).map(|s| go(costs, n, m, s, 0, costs[s * m])).fold(f64::INFINITY, f64::min)
}

fn arb_costs() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (1usize..=8, 1usize..=5).prop_flat_map(|(n, m)| {
        proptest::collection::vec(0.0f64..=2.0, n * m).prop_map(move |c| (n, m, c))
    })
}

fn random_seq(rng: &mut ChaCha8Rng, id: &str, n: usize, dim: usize) -> FeatureSequence {
    let frames = (0..n * dim).map(|_| StandardNormal.sample(rng)).collect();
    FeatureSequence::new(frames, dim, 49.0, id, Layer::new(0).unwrap()).unwrap()
}

proptest! {
    #[test]
    fn matches_exhaustive_minimum((n, m, c) in arb_costs()) {
        let r = subsequence_dtw(&CostMatrix::from_raw(n, m, c.clone()).unwrap());
        prop_assert!((r.raw_cost - brute_force(&c, n, m)).abs() < 1e-9);
    }

    #[test]
    fn path_is_valid((n, m, c) in arb_costs()) {
        let r = subsequence_dtw(&CostMatrix::from_raw(n, m, c.clone()).unwrap());
        let path = r.path.clone().unwrap();
        let (s, e) = r.match_span;
        prop_assert_eq!(path[0], (s, 0));
        prop_assert_eq!(*path.last().unwrap(), (e - 1, m - 1));
        for w in path.windows(2) {
            let step = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            prop_assert!(matches!(step, (1, 0) | (0, 1) | (1, 1)));
        }
        let sum: f64 = path.iter().map(|&(i, j)| c[i * m + j]).sum();
        prop_assert!((sum - r.raw_cost).abs() <= 1e-6 * r.raw_cost.max(1.0));
        prop_assert!((r.normalized_cost - r.raw_cost / m as f64).abs() < 1e-15);
    }

    #[test]
    fn constant_offset_adds_per_step((n, m, c) in arb_costs(), offset in 0.0f64..1.0) {
        let shifted: Vec<f64> = c.iter().map(|v| v + offset).collect();
        let r = subsequence_dtw(&CostMatrix::from_raw(n, m, shifted).unwrap());
        let path = r.path.unwrap();
        let on_path: f64 = path.iter().map(|&(i, j)| c[i * m + j]).sum();
        prop_assert!((r.raw_cost - (on_path + offset * path.len() as f64)).abs() < 1e-9);
    }

    #[test]
    fn power_of_two_scaling_keeps_path((n, m, c) in arb_costs(), exp in -3i32..4) {
        let s = 2f64.powi(exp);
        let a = subsequence_dtw(&CostMatrix::from_raw(n, m, c.clone()).unwrap());
        let b = subsequence_dtw(&CostMatrix::from_raw(n, m, c.iter().map(|v| v * s).collect()).unwrap());
        prop_assert_eq!(a.path, b.path);
        prop_assert_eq!(a.raw_cost * s, b.raw_cost);
    }

    #[test]
    fn rolling_kernel_agrees_with_full_dp(seed in any::<u64>(), n in 1usize..40, m in 1usize..12, dim in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_seq(&mut rng, "t", n, dim);
        let q = random_seq(&mut rng, "q", m, dim);
        let full = subsequence_dtw(&cost_matrix(&t, &q).unwrap());
        let fast = subsequence_dtw_cost(&PreparedSequence::new(&t).unwrap(), &PreparedSequence::new(&q).unwrap()).unwrap();
        prop_assert_eq!(full.raw_cost, fast.raw_cost);
        prop_assert_eq!(full.match_span, (fast.start, fast.end));
    }
}

#[test]
fn query_longer_than_target() {
    let c = vec![0.1, 0.9, 0.4, 0.3, 0.7, 0.6, 0.2, 0.8, 0.1, 0.5];
    let r = subsequence_dtw(&CostMatrix::from_raw(2, 5, c.clone()).unwrap());
    assert!((brute_force(&c, 2, 5) - 1.7).abs() < 1e-12);
    assert!((r.raw_cost - 1.7).abs() < 1e-12);
    assert_eq!(r.path.unwrap(), vec![(0, 0), (1, 1), (1, 2), (1, 3), (1, 4)]);
    assert_eq!(r.match_span, (0, 2));
}

#[test]
fn worked_three_by_two() {
    let r = subsequence_dtw(&CostMatrix::from_raw(3, 2, vec![0.2, 0.9, 0.8, 0.1, 0.5, 0.5]).unwrap());
    assert!((r.raw_cost - 0.3).abs() < 1e-12);
    assert_eq!(r.match_span, (0, 2));
}

#[test]
fn cost_matrix_matches_scalar_cosine() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let t = random_seq(&mut rng, "t", 5, 7);
    let q = random_seq(&mut rng, "q", 3, 7);
    let cm = cost_matrix(&t, &q).unwrap();
    for i in 0..5 {
        for j in 0..3 {
            let want = 1.0 - cosine(t.frame(i), q.frame(j)).unwrap();
            assert!((cm.get(i, j) - want).abs() < 1e-6, "({i},{j})");
        }
    }
}

#[test]
fn orthogonal_transform_leaves_costs_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let dim = 6;
    // Gram-Schmidt on a Gaussian matrix gives a random orthogonal basis.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        basis.push(v.into_iter().map(|x| x / norm).collect());
    }
    let rotate = |s: &FeatureSequence| {
        let frames = s
            .frames()
            .flat_map(|f| basis.iter().map(move |b| b.iter().zip(f).map(|(x, &y)| x * y as f64).sum::<f64>() as f32))
            .collect();
        FeatureSequence::new(frames, dim, s.frame_rate_hz(), s.source_id(), s.layer()).unwrap()
    };
    let t = random_seq(&mut rng, "t", 30, dim);
    let q = random_seq(&mut rng, "q", 8, dim);
    let a = cost_matrix(&t, &q).unwrap();
    let b = cost_matrix(&rotate(&t), &rotate(&q)).unwrap();
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        assert!((x - y).abs() < 1e-5);
    }
    let (ra, rb) = (subsequence_dtw(&a), subsequence_dtw(&b));
    assert_eq!(ra.match_span, rb.match_span);
    assert_eq!(ra.path, rb.path);
}

#[test]
fn cost_matrix_errors() {
    let a = FeatureSequence::new(vec![1.0, 0.0, 0.0, 0.0], 2, 49.0, "a", Layer::NONE).unwrap();
    let b = FeatureSequence::new(vec![1.0, 0.0, 0.0], 3, 49.0, "b", Layer::NONE).unwrap();
    assert!(matches!(cost_matrix(&a, &b), Err(DtwError::ZeroNormFrame { frame: 1, .. })));
    let a = FeatureSequence::new(vec![1.0, 0.0], 2, 49.0, "a", Layer::NONE).unwrap();
    assert!(matches!(cost_matrix(&a, &b), Err(DtwError::DimensionMismatch { target: 2, query: 3 })));
}

#[test]
fn verbatim_recording_ranks_first() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let q = random_seq(&mut rng, "q", 6, 8);
    let mut host = random_seq(&mut rng, "b", 30, 8).as_slice().to_vec();
    host[10 * 8..16 * 8].copy_from_slice(q.as_slice());
    let host = FeatureSequence::new(host, 8, 49.0, "b", Layer::new(0).unwrap()).unwrap();
    let corpus = vec![random_seq(&mut rng, "a", 25, 8), host, random_seq(&mut rng, "c", 40, 8)];
    let lc = LayerCorpus::from_sequences(Layer::new(0).unwrap(), &corpus).unwrap();
    let r = search_corpus(&lc, &q, "q", SearchOptions { paths_for_top: 1 }).unwrap();
    assert_eq!(r.len(), 3);
    assert_eq!(r[0].recording_id, "b");
    assert!(r[0].normalized_cost < 1e-6);
    assert_eq!(r[0].match_span, (10, 16));
    assert!(r[0].path.is_some() && r[1].path.is_none());
    let (s, e) = r[0].match_seconds();
    assert!((s - 10.0 / 49.0).abs() < 1e-6 && (e - 16.0 / 49.0).abs() < 1e-6);
    assert!(r.windows(2).all(|w| w[0].normalized_cost <= w[1].normalized_cost));
}

#[test]
fn ties_rank_by_recording_id() {
    let f = vec![1.0f32, 0.0, 0.0, 1.0];
    let seqs: Vec<FeatureSequence> = ["zeta", "alpha", "mid"]
        .iter()
        .map(|id| FeatureSequence::new(f.clone(), 2, 49.0, *id, Layer::new(0).unwrap()).unwrap())
        .collect();
    let lc = LayerCorpus::from_sequences(Layer::new(0).unwrap(), &seqs).unwrap();
    let r = search_corpus(&lc, &seqs[0], "q", SearchOptions::default()).unwrap();
    let ids: Vec<&str> = r.iter().map(|m| m.recording_id.as_str()).collect();
    assert_eq!(ids, ["alpha", "mid", "zeta"]);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let seqs: Vec<FeatureSequence> = (0..60)
        .map(|i| {
            let n = rng.random_range(10..50);
            random_seq(&mut rng, &format!("r{i:02}"), n, 5)
        })
        .collect();
    let q = random_seq(&mut rng, "q", 7, 5);
    let lc = LayerCorpus::from_sequences(Layer::new(0).unwrap(), &seqs).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| search_corpus(&lc, &q, "q", SearchOptions { paths_for_top: 5 }).unwrap())
    };
    assert_eq!(run(1), run(4));
}

fn disk_corpus(dir: &std::path::Path, with_layer_3: &[&str]) -> (CorpusManifest, QuerySet) {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut entries = Vec::new();
    for id in ["r1", "r2", "r3"] {
        let mut e = ManifestEntry::new(id, format!("{id} words"));
        let s = random_seq(&mut rng, id, 49, 4);
        let p = dir.join(format!("{id}.qbef"));
        write_feature_file(&s, &p).unwrap();
        e.features.insert(Layer::new(0).unwrap(), p.clone());
        if with_layer_3.contains(&id) {
            let p3 = dir.join(format!("{id}_3.qbef"));
            write_feature_file(&s.clone().with_layer(Layer::new(3).unwrap()), &p3).unwrap();
            e.features.insert(Layer::new(3).unwrap(), p3);
        }
        entries.push(e);
    }
    let m = CorpusManifest::new(entries).unwrap();
    m.save(dir.join("manifest.json")).unwrap();
    let q = QuerySpec::contextual("q", "r2", WordSpan::new("words", 0.2, 0.4).unwrap());
    let qs = QuerySet::new(dir, vec![q]).unwrap();
    (qbe_core::load_manifest(dir.join("manifest.json")).unwrap(), qs)
}

#[test]
fn contextual_query_finds_its_source_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let (m, qs) = disk_corpus(dir.path(), &[]);
    let r = search(&m, &qs, &qs.queries[0], Layer::new(0).unwrap(), SearchOptions::default()).unwrap();
    assert_eq!(r[0].recording_id, "r2");
    // floor(0.2 * 49) = 9
    assert_eq!(r[0].match_span.0, 9);
    assert!(fs::metadata(dir.path().join("r2.qbef")).is_ok());
}

#[test]
fn missing_layer_lists_recordings() {
    let dir = tempfile::tempdir().unwrap();
    let (m, qs) = disk_corpus(dir.path(), &["r2"]);
    let err = search(&m, &qs, &qs.queries[0], Layer::new(3).unwrap(), SearchOptions::default()).unwrap_err();
    match err {
        Error::Manifest(ManifestError::MissingLayer { ids, .. }) => assert_eq!(ids, vec!["r1", "r3"]),
        other => panic!("unexpected {other}"),
    }
}
