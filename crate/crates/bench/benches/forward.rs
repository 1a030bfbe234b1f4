use criterion::{black_box, criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};
use fkgrad::synth::{random_configurations, serial_arm};
use fkgrad::{extract_chain, reference, FkEngine};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn forward(c: &mut Criterion) {
    let model = serial_arm(4);
    let chain = extract_chain(&model, "link0", "tool").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let mut group = c.benchmark_group("forward");
    for b in [1usize, 256, 1024, 4096] {
        let engine = FkEngine::new(chain.clone(), b).unwrap();
        group.throughput(Throughput::Elements(b as u64));
        group.bench_with_input(BenchmarkId::new("batched", b), &b, |bench, &b| {
            bench.iter_batched(
                || random_configurations(&mut rng, &chain, b),
                |thetas| black_box(engine.forward(&thetas).unwrap()),
                BatchSize::SmallInput,
            )
        });
    }
    group.throughput(Throughput::Elements(1));
    group.bench_function("sequential_reference", |bench| {
        bench.iter_batched(
            || random_configurations(&mut rng, &chain, 1),
            |q| black_box(reference::forward(&model, "link0", "tool", &q).unwrap()),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

fn jacobian(c: &mut Criterion) {
    let chain = extract_chain(&serial_arm(4), "link0", "tool").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let engine = FkEngine::new(chain.clone(), 256).unwrap();
    c.bench_function("pose_jacobians/256", |bench| {
        bench.iter_batched(
            || random_configurations(&mut rng, &chain, 256),
            |thetas| black_box(engine.pose_jacobians(&thetas).unwrap()),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, forward, jacobian);
criterion_main!(benches);
