use beambit::bench::{run_drops, run_drops_seq, Algo, ExperimentConfig};
use criterion::{criterion_group, criterion_main, Criterion};

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        n_rx: 8,
        n_users: 3,
        n_chains: 4,
        chain_cap: 4,
        n_subcarriers: 4,
        n_taps: 2,
        n_drops: 8,
        seed: 3,
        ..ExperimentConfig::default()
    }
}

fn bench_drops(c: &mut Criterion) {
    let cfg = small_config();
    let mut group = c.benchmark_group("drops");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| run_drops(&cfg, Algo::Joint, 10.0, 3).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| run_drops_seq(&cfg, Algo::Joint, 10.0, 3).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_drops);
criterion_main!(benches);
