use std::collections::BTreeMap;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use std::hint::black_box;

use mlp_bench::{planted, solution_texts};
use mlp_core::mlp_b::{grade_all_b, summarize_posterior, GibbsSampler};
use mlp_core::mlp_s::{affinity_propagation, similarity, spectral_cluster, ApConfig};
use mlp_core::{build_matrix, EncodingMode, ModelHyperparams, RawSolution, SimplificationLevel};

fn featurize(c: &mut Criterion) {
    let texts = solution_texts(100);
    let sols: Vec<RawSolution> =
        texts.iter().enumerate().map(|(i, t)| RawSolution::text(format!("s{i}"), t.as_str())).collect();
    let mut group = c.benchmark_group("featurize");
    for level in [SimplificationLevel::ArithmeticOnly, SimplificationLevel::Full] {
        group.bench_with_input(BenchmarkId::new("100 solutions", format!("{level:?}")), &level, |b, &level| {
            b.iter(|| build_matrix(black_box(&sols), level, EncodingMode::Binary).unwrap())
        });
    }
    group.finish();
}

fn similarity_matrix(c: &mut Criterion) {
    let mut group = c.benchmark_group("similarity");
    for n in [120, 500] {
        let prep = planted(n, 60, 0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &prep.y, |b, y| b.iter(|| similarity(black_box(y))));
    }
    group.finish();
}

fn clustering(c: &mut Criterion) {
    let prep = planted(120, 60, 0);
    let mut group = c.benchmark_group("cluster N=120");
    group.bench_function("spectral K=6", |b| b.iter(|| spectral_cluster(black_box(&prep.s), 6, 0).unwrap()));
    group.bench_function("affinity propagation", |b| {
        b.iter(|| affinity_propagation(black_box(&prep.s), &ApConfig::default()))
    });
    group.finish();
}

fn gibbs(c: &mut Criterion) {
    let prep = planted(120, 60, 0);
    let mut group = c.benchmark_group("gibbs N=120");
    group.sample_size(20);
    let hp = ModelHyperparams { iterations: 100, burn_in: 50, ..ModelHyperparams::default() };
    group.bench_function("100 sweeps", |b| {
        b.iter_batched(
            || GibbsSampler::new(&prep.y, hp.clone()).unwrap(),
            |s| s.run(),
            BatchSize::SmallInput,
        )
    });
    let trace = GibbsSampler::new(&prep.y, hp).unwrap().run();
    group.bench_function("posterior summary", |b| b.iter(|| summarize_posterior(black_box(&trace.samples)).unwrap()));
    let summary = summarize_posterior(&trace.samples).unwrap();
    let grades: BTreeMap<usize, f64> = (0..summary.phi_hat.len()).map(|k| (k, (k % 4) as f64)).collect();
    group.bench_function("grade all", |b| b.iter(|| grade_all_b(&prep.y, black_box(&summary.phi_hat), &grades).unwrap()));
    group.finish();
}

criterion_group!(benches, featurize, similarity_matrix, clustering, gibbs);
criterion_main!(benches);
