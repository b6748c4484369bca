use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use intergenic::harness::bench;
use intergenic::harness::generator::InstanceSpec;
use intergenic::{build_graph, exact_distance, run, OracleLimits, WeightScheme};
use intergenic_bench::{figure_one, oracle_sized, scrambled};

fn graph(c: &mut Criterion) {
    let w = WeightScheme::from_ints(2, 3, 2, 4, 1);
    let mut group = c.benchmark_group("build_graph");
    group.bench_function("figure_one", |b| {
        let pair = figure_one();
        b.iter(|| build_graph(black_box(&pair)))
    });
    for m in [50, 200, 1000] {
        let pair = scrambled(m, 1, &w).remove(0);
        group.throughput(Throughput::Elements(m as u64));
        group.bench_with_input(BenchmarkId::from_parameter(m), &pair, |b, pair| b.iter(|| build_graph(pair)));
    }
    group.finish();
}

fn sort(c: &mut Criterion) {
    let mut group = c.benchmark_group("run");
    group.sample_size(20);
    for w in WeightScheme::published_schemes() {
        for m in [10, 40, 100] {
            let pairs = scrambled(m, 4, &w);
            group.bench_with_input(BenchmarkId::new(w.to_string(), m), &pairs, |b, pairs| {
                b.iter(|| {
                    for p in pairs {
                        black_box(run(p, &w).expect("sorts"));
                    }
                })
            });
        }
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let w = WeightScheme::from_ints(2, 3, 1, 1, 1);
    let pairs = oracle_sized(8, &w);
    let limits = OracleLimits::default();
    let mut group = c.benchmark_group("exact_distance");
    group.sample_size(10);
    group.bench_function("three_genes", |b| {
        b.iter(|| {
            for p in &pairs {
                black_box(exact_distance(p, &w, &limits).ok());
            }
        })
    });
    group.finish();
}

fn report(c: &mut Criterion) {
    let specs: Vec<InstanceSpec> = (0..50)
        .map(|seed| InstanceSpec { m: 8, k: 6, max_region: 3, exclusive_counts: (1, 1), seed })
        .collect();
    let schemes = WeightScheme::published_schemes();
    let mut group = c.benchmark_group("bench_report");
    group.sample_size(10);
    group.bench_function("50x4_csv", |b| b.iter(|| bench(&specs, &schemes, None).expect("no defects").to_csv()));
    group.finish();
}

criterion_group!(benches, graph, sort, oracle, report);
criterion_main!(benches);
