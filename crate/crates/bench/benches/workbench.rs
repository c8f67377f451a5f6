use criterion::{black_box, criterion_group, criterion_main, Criterion};
use halfswitch::{
    build_buffer, count_hk_matrix, enumerate_realizations_with_limit, exact_mixing,
    flow_representation, greedy_realization, hk_sequence, sample, ChainConfig, PathSystem,
};

fn bench_oracle(c: &mut Criterion) {
    c.bench_function("enumerate k=1 n=6", |b| {
        let d = hk_sequence(6, 1);
        b.iter(|| enumerate_realizations_with_limit(&d, 36).unwrap().len())
    });
}

fn bench_chain(c: &mut Criterion) {
    c.bench_function("chain 10k steps k=2 n=32", |b| {
        let d = hk_sequence(32, 2);
        let cfg = ChainConfig {
            seed: 1,
            steps: 10_000,
        };
        b.iter(|| sample(&d, &cfg).unwrap().accepted)
    });
}

fn bench_counting(c: &mut Criterion) {
    c.bench_function("matrix count k=2 n=64", |b| {
        b.iter(|| count_hk_matrix(black_box(64), black_box(2)).unwrap())
    });
}

fn bench_flow(c: &mut Criterion) {
    c.bench_function("flow representation k=2 n=32", |b| {
        let g = greedy_realization(&hk_sequence(32, 2)).unwrap();
        b.iter(|| flow_representation(&g).unwrap().arcs.len())
    });
}

fn bench_buffer(c: &mut Criterion) {
    c.bench_function("buffer window k=1 n=16", |b| {
        let d = hk_sequence(16, 1);
        let x = sample(
            &d,
            &ChainConfig {
                seed: 5,
                steps: 4000,
            },
        )
        .unwrap()
        .realization;
        let y = sample(
            &d,
            &ChainConfig {
                seed: 9,
                steps: 4000,
            },
        )
        .unwrap()
        .realization;
        b.iter(|| build_buffer(&x, &y, 4, 5).unwrap().edge_count())
    });
}

fn bench_paths(c: &mut Criterion) {
    c.bench_function("canonical path family k=1 n=7", |b| {
        let sys = PathSystem::new(7, 1, 49).unwrap();
        let x = &sys.space.states[0];
        let y = &sys.space.states[sys.space.len() - 1];
        b.iter(|| sys.canonical_path(x, y).unwrap().states.len())
    });
}

fn bench_mixing(c: &mut Criterion) {
    c.bench_function("exact mixing k=1 n=5", |b| {
        let d = hk_sequence(5, 1);
        b.iter(|| exact_mixing(&d, 0.25, 36).unwrap().tau_epsilon)
    });
}

criterion_group!(
    benches,
    bench_oracle,
    bench_chain,
    bench_counting,
    bench_flow,
    bench_buffer,
    bench_paths,
    bench_mixing
);
criterion_main!(benches);
