//! Built-in sanity checks: DTW against exhaustive enumeration and the
//! geometry estimators on corpora with known answers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::dtw::{oracle, subsequence_dtw, subsequence_dtw_cost, CostMatrix, PreparedSequence};
use crate::feature::{FeatureSequence, Layer};
use crate::geometry::{anisotropy, rogue_dimensions, PairSamplingPlan, Stratum};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn gaussian_corpus(rng: &mut ChaCha8Rng, n_seqs: usize, frames: usize, dim: usize, mean: &[f32]) -> Vec<FeatureSequence> {
    (0..n_seqs)
        .map(|s| {
            let v = (0..frames * dim)
                .map(|i| {
                    let x: f32 = StandardNormal.sample(rng);
                    x + mean.get(i % dim).copied().unwrap_or(0.0)
                })
                .collect();
            FeatureSequence::new(v, dim, 50.0, format!("s{s:03}"), Layer::new(0).unwrap()).expect("finite")
        })
        .collect()
}

fn dtw_oracle(rng: &mut ChaCha8Rng, trials: usize) -> Check {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..trials {
        let (n, m) = (rng.random_range(1..=8), rng.random_range(1..=5));
        let costs: Vec<f64> = (0..n * m).map(|_| rng.random_range(0.0..=2.0)).collect();
        let cm = CostMatrix::from_raw(n, m, costs).expect("valid shape");
        let d = (subsequence_dtw(&cm).raw_cost - oracle::brute_force_min_cost(&cm)).abs();
        worst = worst.max(d);
        if d >= 1e-9 {
            failures += 1;
        }
    }
    Check {
        name: "dtw_oracle",
        passed: failures == 0,
        detail: format!("{trials} matrices, {failures} mismatches, max |delta| {worst:e}"),
    }
}

fn rolling_matches_full(rng: &mut ChaCha8Rng) -> Check {
    let corpus = gaussian_corpus(rng, 40, 30, 8, &[]);
    let mut mismatches = 0;
    for pair in corpus.chunks(2) {
        let (t, q) = (&pair[0], pair[1].sub_frames(0, 7).expect("in range"));
        let full = subsequence_dtw(&crate::dtw::cost_matrix(t, &q).expect("same dim"));
        let fast = subsequence_dtw_cost(&PreparedSequence::new(t).unwrap(), &PreparedSequence::new(&q).unwrap()).unwrap();
        if full.raw_cost != fast.raw_cost || full.match_span != (fast.start, fast.end) {
            mismatches += 1;
        }
    }
    Check {
        name: "rolling_dtw_matches_full",
        passed: mismatches == 0,
        detail: format!("20 pairs, {mismatches} mismatches"),
    }
}

fn geometry(rng: &mut ChaCha8Rng, seed: u64) -> Vec<Check> {
    let plan = PairSamplingPlan::new(1000, Stratum::Any, seed);
    let mut checks = Vec::new();

    let v: Vec<f32> = (0..32).map(|_| StandardNormal.sample(&mut *rng)).collect();
    let copies: Vec<FeatureSequence> = (0..10)
        .map(|s| FeatureSequence::new(v.repeat(20), 32, 50.0, format!("c{s}"), Layer::new(0).unwrap()).unwrap())
        .collect();
    let a = anisotropy(&copies, &plan);
    checks.push(match a {
        Ok(r) => Check {
            name: "anisotropy_identical_frames",
            passed: (r.expected_cosine - 1.0).abs() <= 1e-6 && r.one_minus_expected_cosine == 1.0 - r.expected_cosine,
            detail: format!("expected_cosine {}", r.expected_cosine),
        },
        Err(e) => Check {
            name: "anisotropy_identical_frames",
            passed: false,
            detail: e.to_string(),
        },
    });

    let iso = gaussian_corpus(rng, 20, 100, 256, &[]);
    checks.push(match anisotropy(&iso, &plan) {
        Ok(r) => Check {
            name: "anisotropy_isotropic",
            passed: r.expected_cosine.abs() <= 0.05,
            detail: format!("expected_cosine {:+.4}", r.expected_cosine),
        },
        Err(e) => Check {
            name: "anisotropy_isotropic",
            passed: false,
            detail: e.to_string(),
        },
    });

    let mut mean = vec![0.0f32; 24];
    mean[5] = 100.0;
    let rogue = gaussian_corpus(rng, 10, 50, 24, &mean);
    checks.push(match rogue_dimensions(&rogue, Layer::new(0).unwrap()) {
        Ok(r) => Check {
            name: "rogue_dimension",
            passed: r.argmax_dim == 5 && r.max_mean >= r.second_max_mean && r.second_max_mean >= r.median_of_means,
            detail: format!("argmax {} max {:.2} second {:.3}", r.argmax_dim, r.max_mean, r.second_max_mean),
        },
        Err(e) => Check {
            name: "rogue_dimension",
            passed: false,
            detail: e.to_string(),
        },
    });
    checks
}

pub fn run_selftest(trials: usize, seed: u64) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![dtw_oracle(&mut rng, trials), rolling_matches_full(&mut rng)];
    checks.extend(geometry(&mut rng, seed));
    SelftestReport { seed, checks }
}
