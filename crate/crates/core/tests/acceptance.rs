//! Acceptance suite. Every test prints one `PASS`/`FAIL` line and fails
//! when its criterion is not met:
//!
//! ```text
//! cargo test --release -p mlp-core --test acceptance -- --nocapture --test-threads=1
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::ln_gamma;

use mlp_core::eval::{grade_with, random_baseline, run_experiment, synth_generate, EvalMethod, ExperimentConfig, SyntheticSpec};
use mlp_core::features::{FeatureMatrix, SolutionContent};
use mlp_core::mlp_b::{feedback_trace, grade_b, new_cluster_marginal, sample_alpha, update_beta, BetaConfig};
use mlp_core::mlp_s::{affinity_propagation, similarity_ratio, spectral_cluster, ApConfig};
use mlp_core::{
    adjusted_rand_index, analyze, build_matrix, canonical_key, prepare, AnalysisParams, EncodingMode,
    FeatureVector, Method, RawSolution, SimplificationLevel,
};

const ARITH: SimplificationLevel = SimplificationLevel::ArithmeticOnly;

fn report(name: &str, pass: bool, detail: String) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn secs(d: Duration) -> String {
    format!("{:.3}s", d.as_secs_f64())
}

const TWO_PATHS: [&str; 2] = [
    "(x^2+x+sin^2 x+cos^2 x)(2x-3) = (x^2+x+1)(2x-3) = 2x(x^2+x+1) - 3(x^2+x+1) = 2x^3 - x^2 - x - 3",
    "(x^2+x+sin^2 x+cos^2 x)(2x-3) = (x^2+x)(2x-3) + (sin^2 x + cos^2 x)(2x-3) \
     = (x^2+x)(2x-3) + 2x - 3 = x(2x^2 - x - 3) + 2x - 3 = 2x^3 - x^2 - x - 3",
];
const DERIVATIVE: [&str; 2] = [
    "((x^3+sin x)/e^x)' = (x^3+sin x)' e^(-x) + (x^3+sin x)(e^(-x))' \
     = (3x^2+cos x)e^(-x) - (x^3+sin x)e^(-x) = (3x^2 - x^3 + cos x - sin x)e^(-x)",
    "((x^3+sin x)/e^x)' = (3x^2 + cos x - (x^3 + sin x))/e^x = (3^x^2 + cos x - (x^3+sin x))/e^x",
];

fn featurize(bodies: &[&str]) -> FeatureMatrix {
    let sols: Vec<RawSolution> =
        bodies.iter().enumerate().map(|(j, b)| RawSolution::text(format!("s{j}"), *b)).collect();
    build_matrix(&sols, ARITH, EncodingMode::Binary).unwrap().0
}

#[test]
fn feature_matrix_fixture() {
    let t = Instant::now();
    let y = featurize(&TWO_PATHS);
    let mut rows = y.to_dense_rows();
    rows.sort();
    let mut expected: Vec<Vec<u32>> = [[1, 1], [1, 0], [1, 0], [1, 1], [0, 1], [0, 1], [0, 1]]
        .iter()
        .map(|r| r.to_vec())
        .collect();
    expected.sort();
    let elapsed = t.elapsed();
    report(
        "Y fixture (7x2 up to row permutation)",
        rows == expected && elapsed < Duration::from_secs(1),
        format!("V = {}, N = {}, in {}", y.n_features(), y.n_solutions(), secs(elapsed)),
    );
}

#[test]
fn similarity_fixtures() {
    let t = Instant::now();
    let ratio = |bodies: &[&str]| {
        let y = featurize(bodies);
        let r = similarity_ratio(y.column(0), y.column(1)).unwrap();
        (*r.numer(), *r.denom())
    };
    let (a, b) = (ratio(&TWO_PATHS), ratio(&DERIVATIVE));
    let elapsed = t.elapsed();
    report(
        "exact similarity fixtures",
        a == (1, 2) && b == (1, 3) && elapsed < Duration::from_secs(1),
        format!("two paths {}/{}, derivative pair {}/{}, in {}", a.0, a.1, b.0, b.1, secs(elapsed)),
    );
}

#[test]
fn canonicalizer_fixtures() {
    let k = |s: &str| canonical_key(s, ARITH).unwrap();
    let cases = [
        (k("x^2 + x^2") == k("2x^2"), "x^2+x^2 = 2x^2"),
        (k("e^x x^2 / e^(2x)") == k("x^2 e^(-x)"), "e^x x^2/e^(2x) = x^2 e^(-x)"),
        (k("sin^2 x + cos^2 x + x") != k("1 + x"), "sin^2 x+cos^2 x+x kept"),
    ];
    let failed: Vec<&str> = cases.iter().filter(|c| !c.0).map(|c| c.1).collect();
    report(
        "canonicalizer fixtures",
        failed.is_empty(),
        if failed.is_empty() { "3/3 keys as expected".into() } else { format!("mismatch: {failed:?}") },
    );
}

/// Tanh-sinh nodes on (0, 1) as `(x, 1 - x, weight)`; both ends are kept
/// accurate so endpoint singularities integrate cleanly.
fn tanh_sinh_nodes(h: f64, t_max: f64) -> Vec<(f64, f64, f64)> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let m = (t_max / h) as i64;
    (-m..=m)
        .map(|i| {
            let t = i as f64 * h;
            let u = half_pi * t.sinh();
            let x = 1.0 / (1.0 + (-2.0 * u).exp());
            let xc = 1.0 / (1.0 + (2.0 * u).exp());
            let w = h * half_pi * t.cosh() / (2.0 * u.cosh().powi(2));
            (x, xc, w)
        })
        .collect()
}

/// `∫ Π φ_i^{a_i} dφ` over the probability simplex, for `V` in {2, 3}.
fn simplex_integral(a: &[f64], nodes: &[(f64, f64, f64)]) -> f64 {
    match a.len() {
        2 => nodes.iter().map(|&(x, xc, w)| w * x.powf(a[0]) * xc.powf(a[1])).sum(),
        3 => nodes
            .iter()
            .map(|&(x, xc, w)| {
                let inner: f64 = nodes
                    .iter()
                    .map(|&(t, tc, wt)| wt * (xc * t).powf(a[1]) * (xc * tc).powf(a[2]))
                    .sum();
                w * x.powf(a[0]) * xc * inner
            })
            .sum(),
        _ => unreachable!(),
    }
}

#[test]
fn new_cluster_marginal_matches_quadrature() {
    let t = Instant::now();
    let nodes = tanh_sinh_nodes(1.0 / 48.0, 4.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for v in [2usize, 3] {
        for beta in [0.5, 1.0, 2.0] {
            let prior: Vec<f64> = vec![beta - 1.0; v];
            let norm = simplex_integral(&prior, &nodes);
            for _ in 0..20 {
                let y: Vec<u32> = (0..v).map(|_| rng.random_range(0..2)).collect();
                let a: Vec<f64> = y.iter().map(|&c| c as f64 + beta - 1.0).collect();
                let oracle = simplex_integral(&a, &nodes) / norm;
                let got = new_cluster_marginal(&FeatureVector::from_dense(&y), beta).exp();
                worst = worst.max((got - oracle).abs() / oracle);
                cases += 1;
            }
        }
    }
    let elapsed = t.elapsed();
    report(
        "new-cluster marginal vs simplex quadrature",
        worst <= 1e-6 && elapsed < Duration::from_secs(10),
        format!("{cases} cases, max relative error {worst:.2e}, in {}", secs(elapsed)),
    );
}

/// Posterior mean of α given `K` clusters among `N` under a Gamma(a, b)
/// prior, by trapezoid quadrature in `ln α`.
fn alpha_posterior_mean(k: usize, n: usize, a: f64, b: f64) -> f64 {
    let log_f = |alpha: f64| {
        (a - 1.0) * alpha.ln() - b * alpha + k as f64 * alpha.ln() + ln_gamma(alpha) - ln_gamma(alpha + n as f64)
    };
    let (lo, hi, steps) = (-40.0f64, 12.0f64, 200_000);
    let h = (hi - lo) / steps as f64;
    let grid: Vec<f64> = (0..=steps).map(|i| lo + i as f64 * h).collect();
    let logs: Vec<f64> = grid.iter().map(|&s| log_f(s.exp()) + s).collect();
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut z, mut m) = (0.0, 0.0);
    for (i, (&s, &l)) in grid.iter().zip(&logs).enumerate() {
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        let p = w * (l - peak).exp();
        z += p;
        m += p * s.exp();
    }
    m / z
}

#[test]
fn alpha_sampler_matches_quadrature() {
    let t = Instant::now();
    let (shape, rate) = (1.0, 1.0);
    let (draws, batches, burn) = (100_000usize, 100usize, 1_000usize);
    let mut lines = Vec::new();
    let mut ok = true;
    let settings = [(1usize, 10usize), (3, 50), (6, 120), (10, 100), (20, 500)];
    for (i, &(k, n)) in settings.iter().enumerate() {
        // one independent chain per setting
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let mut alpha = 1.0;
        for _ in 0..burn {
            alpha = sample_alpha(k, n, alpha, shape, rate, &mut rng);
        }
        let xs: Vec<f64> = (0..draws)
            .map(|_| {
                alpha = sample_alpha(k, n, alpha, shape, rate, &mut rng);
                alpha
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / draws as f64;
        let size = draws / batches;
        let batch_means: Vec<f64> =
            xs.chunks(size).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
        let var = batch_means.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
        let mcse = (var / batches as f64).sqrt();
        let truth = alpha_posterior_mean(k, n, shape, rate);
        let z = (mean - truth) / mcse;
        ok &= z.abs() <= 3.0;
        lines.push(format!("(K={k},N={n}) {mean:.4} vs {truth:.4} z={z:+.2}"));
    }
    let elapsed = t.elapsed();
    report(
        "alpha sampler vs quadrature posterior mean",
        ok && elapsed < Duration::from_secs(30),
        format!("{}; in {}", lines.join(", "), secs(elapsed)),
    );
}

/// Log evidence of count vectors under a symmetric Dirichlet(β).
fn evidence(counts: &[Vec<u32>], beta: f64) -> f64 {
    counts
        .iter()
        .map(|c| {
            let v = c.len() as f64;
            let total: f64 = c.iter().map(|&x| x as f64).sum();
            c.iter().map(|&x| ln_gamma(x as f64 + beta) - ln_gamma(beta)).sum::<f64>() + ln_gamma(v * beta)
                - ln_gamma(total + v * beta)
        })
        .sum()
}

/// Grid over `ln β`, then golden-section refinement around the best cell.
fn evidence_argmax(counts: &[Vec<u32>]) -> f64 {
    let grid: Vec<f64> = (0..=2000).map(|i| -9.0 + i as f64 * 0.009).collect();
    let best = (0..grid.len())
        .max_by(|&a, &b| evidence(counts, grid[a].exp()).total_cmp(&evidence(counts, grid[b].exp())))
        .unwrap();
    let (mut lo, mut hi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-12 {
        let (c, d) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if evidence(counts, c.exp()) > evidence(counts, d.exp()) {
            hi = d;
        } else {
            lo = c;
        }
    }
    ((lo + hi) / 2.0).exp()
}

fn dirichlet_counts(k: usize, v: usize, beta: f64, draws: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<u32>> {
    let gamma = Gamma::new(beta, 1.0).unwrap();
    (0..k)
        .map(|_| {
            let w: Vec<f64> = (0..v).map(|_| gamma.sample(rng) + 1e-300).collect();
            let total: f64 = w.iter().sum();
            let mut c = vec![0u32; v];
            for _ in 0..draws {
                let mut u = rng.random::<f64>() * total;
                let mut i = 0;
                while i + 1 < v && u >= w[i] {
                    u -= w[i];
                    i += 1;
                }
                c[i] += 1;
            }
            c
        })
        .collect()
}

#[test]
fn beta_fixed_point_matches_evidence_argmax() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let settings = [(4, 10, 0.2, 30), (6, 20, 0.5, 40), (3, 8, 1.0, 50), (8, 30, 0.1, 25), (5, 12, 2.0, 60)];
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for (k, v, beta_true, draws) in settings {
        let counts = dirichlet_counts(k, v, beta_true, draws, &mut rng);
        let oracle = evidence_argmax(&counts);
        let got = update_beta(&counts, 1.0, &BetaConfig::default());
        worst = worst.max((got.beta - oracle).abs());
        lines.push(format!("{:.4}/{:.4}", got.beta, oracle));
    }
    let elapsed = t.elapsed();
    report(
        "beta fixed point vs evidence argmax",
        worst <= 1e-3 && elapsed < Duration::from_secs(10),
        format!("fixed point/oracle {}; max |diff| {worst:.2e}, in {}", lines.join(" "), secs(elapsed)),
    );
}

fn planted(seed: u64) -> mlp_core::eval::SyntheticCorpus {
    synth_generate(&SyntheticSpec { seed, ..SyntheticSpec::default() }).unwrap()
}

#[test]
fn planted_cluster_recovery() {
    let mut b_hits = 0;
    let mut sc_hits = 0;
    let mut b_slowest = Duration::ZERO;
    let mut ap_slowest = Duration::ZERO;
    let mut b_k = Vec::new();
    for seed in 0..10u64 {
        let corpus = planted(seed);
        let prep = prepare(&corpus.dataset).unwrap();

        let t = Instant::now();
        let params = AnalysisParams { method: Method::Bayes, seed, ..AnalysisParams::default() };
        let b = analyze(&prep, &params).unwrap();
        b_slowest = b_slowest.max(t.elapsed());
        let summary = &b.bayes.as_ref().unwrap().summary;
        let ari = adjusted_rand_index(&summary.z_hat, &corpus.labels);
        b_k.push(summary.k_hat);
        if summary.k_hat == 6 && ari >= 0.9 {
            b_hits += 1;
        }

        let sc = spectral_cluster(&prep.s, 6, seed).unwrap();
        if adjusted_rand_index(&sc.labels, &corpus.labels) >= 0.9 {
            sc_hits += 1;
        }

        let t = Instant::now();
        affinity_propagation(&prep.s, &ApConfig::default());
        ap_slowest = ap_slowest.max(t.elapsed());
    }
    report(
        "planted-cluster recovery",
        b_hits >= 8 && sc_hits >= 9 && b_slowest <= Duration::from_secs(120) && ap_slowest <= Duration::from_secs(5),
        format!(
            "MLP-B K=6 & ARI>=0.9 in {b_hits}/10 (K̂ {b_k:?}), SC ARI>=0.9 in {sc_hits}/10, \
             slowest MLP-B {}, slowest AP {}",
            secs(b_slowest),
            secs(ap_slowest)
        ),
    );
}

#[test]
fn grading_accuracy_on_planted_corpora() {
    let cfg = ExperimentConfig::default();
    let (mut sc_worst, mut b_worst): (f64, f64) = (0.0, 0.0);
    let (mut sc_beats, mut b_beats) = (0, 0);
    let mut rs = Vec::new();
    for seed in 0..10u64 {
        let corpus = planted(seed);
        let prep = prepare(&corpus.dataset).unwrap();
        let (sc, _) = grade_with(&prep, &corpus.grades, Method::Sc, Some(6), seed, &cfg).unwrap();
        let (b, _) = grade_with(&prep, &corpus.grades, Method::Bayes, None, seed, &cfg).unwrap();
        sc_worst = sc_worst.max(sc.mae);
        b_worst = b_worst.max(b.mae);
        let rs_sc = random_baseline(&prep.s, sc.n_graded, &corpus.grades, seed, 10).unwrap().mae;
        let rs_b = random_baseline(&prep.s, b.n_graded, &corpus.grades, seed, 10).unwrap().mae;
        sc_beats += usize::from(sc.mae < rs_sc);
        b_beats += usize::from(b.mae < rs_b);
        rs.push(format!("{rs_sc:.3}"));
    }
    report(
        "grading accuracy vs random sub-sampling",
        sc_worst <= 0.15 && b_worst <= 0.15 && sc_beats >= 8 && b_beats >= 8,
        format!(
            "max MAE SC {sc_worst:.4}, MLP-B {b_worst:.4}; strictly below RS in {sc_beats}/10 and {b_beats}/10 \
             (RS at K=6: {})",
            rs.join(" ")
        ),
    );
}

#[test]
fn mae_reaches_zero_with_one_cluster_per_distinct_solution() {
    // Lower noise leaves many exact duplicates, which share their grade.
    let corpus = synth_generate(&SyntheticSpec { seed: 0, noise: 0.02, ..SyntheticSpec::default() }).unwrap();
    let prep = prepare(&corpus.dataset).unwrap();
    let distinct: BTreeSet<&Vec<(usize, u32)>> = prep.y.columns.iter().map(|c| &c.entries).collect();
    let d = distinct.len();
    let cfg = ExperimentConfig::default();
    let mut curve = Vec::new();
    for k in [2, 4, 6, 12, 24, 48, d] {
        let (row, _) = grade_with(&prep, &corpus.grades, Method::Sc, Some(k), 0, &cfg).unwrap();
        curve.push((k, row.mae));
    }
    let at_d = curve.last().unwrap().1;
    report(
        "SC MAE at one cluster per distinct solution",
        at_d == 0.0,
        format!(
            "N = {}, distinct = {d}; MAE by K {}",
            prep.n(),
            curve.iter().map(|(k, m)| format!("{k}:{m:.3}")).collect::<Vec<_>>().join(" ")
        ),
    );
}

#[test]
fn stepwise_grade_ends_at_the_full_grade() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let v = 20;
    let k = 4;
    let gamma = Gamma::new(0.5, 1.0).unwrap();
    let phi: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            let w: Vec<f64> = (0..v).map(|_| gamma.sample(&mut rng) + 1e-6).collect();
            let t: f64 = w.iter().sum();
            w.into_iter().map(|x| x / t).collect()
        })
        .collect();
    let grades: BTreeMap<usize, f64> = (0..k).map(|c| (c, rng.random_range(0.0..=3.0))).collect();
    let (lo, hi) = grades.values().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &g| (l.min(g), h.max(g)));

    // The first solution lists every key so that all 100 share one vocabulary.
    let mut sols = vec![RawSolution {
        learner_id: "all".into(),
        content: SolutionContent::Keys((0..v).map(|i| format!("k{i}")).collect()),
    }];
    for j in 0..100 {
        let len = rng.random_range(1..12);
        let keys = (0..len).map(|_| format!("k{}", rng.random_range(0..v))).collect();
        sols.push(RawSolution { learner_id: format!("s{j}"), content: SolutionContent::Keys(keys) });
    }
    let (y, feats) = build_matrix(&sols, ARITH, EncodingMode::Binary).unwrap();
    let mut worst: f64 = 0.0;
    let mut in_range = true;
    for (j, sol) in feats.iter().enumerate().skip(1) {
        let trace = feedback_trace(sol, &phi, &grades, 3.0, 0.5).unwrap();
        let full = grade_b(y.column(j), &phi, &grades).unwrap();
        worst = worst.max((trace.steps.last().unwrap().expected_grade - full).abs());
        in_range &= (lo..=hi).contains(&full);
        in_range &= trace.steps.iter().all(|s| (lo..=hi).contains(&s.expected_grade));
    }
    report(
        "stepwise grade consistency",
        worst <= 1e-12 && in_range,
        format!("100 solutions, max |last step - grade| {worst:.1e}, all within [{lo:.3}, {hi:.3}]: {in_range}"),
    );
}

#[test]
fn eval_reports_are_byte_identical() {
    let corpus = planted(3);
    let prep = prepare(&corpus.dataset).unwrap();
    let cfg = ExperimentConfig { methods: EvalMethod::ALL.to_vec(), k_range: 5..=8, seeds: vec![0, 1], ..ExperimentConfig::default() };
    let a = run_experiment("planted", &prep, &corpus.grades, &cfg).unwrap();
    let b = run_experiment("planted", &prep, &corpus.grades, &cfg).unwrap();
    let same = a.to_json() == b.to_json() && a.to_csv() == b.to_csv() && a.to_text() == b.to_text();
    report(
        "eval determinism",
        same,
        format!("{} rows, JSON {} bytes, identical: {same}", a.rows.len(), a.to_json().len()),
    );
}
