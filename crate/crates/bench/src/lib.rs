//! FK throughput harness.
//!
//! One op is one configuration's final end transform; pose extraction is
//! not included. Inputs are drawn before each timed call and results pass
//! through [`black_box`], so only `FkEngine::forward` is on the clock.

use std::hint::black_box;
use std::time::{Duration, Instant};

use fkgrad::synth::random_configurations;
use fkgrad::{extract_chain, reference, ChainError, FkEngine, FkError, KinematicChain, RobotModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Untimed calls before each measurement.
pub const WARMUP_CALLS: usize = 3;
pub const MIN_ITERATIONS: usize = 10;
/// Configurations per timed call of the sequential baseline.
pub const BASELINE_BLOCK: usize = 64;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Fk(#[from] FkError),
    #[error("batch sizes must be positive")]
    ZeroBatch,
    #[error("no batch sizes requested")]
    NoBatchSizes,
    #[error("chain `{base}` → `{end}` has no degrees of freedom")]
    NoDof { base: String, end: String },
}

/// Builds engines of any batch size for one chain.
#[derive(Clone, Debug)]
pub struct EngineFactory {
    model: RobotModel,
    chain: KinematicChain,
}

impl EngineFactory {
    pub fn new(model: RobotModel, base: &str, end: &str) -> Result<Self, BenchError> {
        let chain = extract_chain(&model, base, end)?;
        Ok(Self { model, chain })
    }

    pub fn chain(&self) -> &KinematicChain {
        &self.chain
    }

    pub fn build(&self, batch_size: usize) -> Result<FkEngine, FkError> {
        FkEngine::new(self.chain.clone(), batch_size)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Measurement {
    pub batch_size: usize,
    pub iterations: usize,
    /// Sum of the timed regions.
    pub seconds: f64,
    pub ops_per_sec: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub measurements: Vec<Measurement>,
    /// Naive one-configuration-at-a-time FK.
    pub baseline: Measurement,
    pub machine: String,
    pub threads: usize,
    pub dof: usize,
    pub op: &'static str,
}

impl BenchReport {
    pub fn baseline_ops_per_sec(&self) -> f64 {
        self.baseline.ops_per_sec
    }

    pub fn measurement(&self, batch_size: usize) -> Option<&Measurement> {
        self.measurements.iter().find(|m| m.batch_size == batch_size)
    }

    /// Throughput at `batch_size` over the baseline.
    pub fn speedup(&self, batch_size: usize) -> Option<f64> {
        self.measurement(batch_size)
            .map(|m| m.ops_per_sec / self.baseline.ops_per_sec)
    }

    /// Whether ops/s never drops as the batch grows (sizes in request order).
    pub fn is_monotonic(&self) -> bool {
        let mut sorted: Vec<&Measurement> = self.measurements.iter().collect();
        sorted.sort_by_key(|m| m.batch_size);
        sorted.windows(2).all(|w| w[1].ops_per_sec >= w[0].ops_per_sec)
    }
}

/// Largest relative ops/s difference between two reports, per batch size
/// present in both, relative to their mean.
pub fn run_disagreement(a: &BenchReport, b: &BenchReport) -> f64 {
    a.measurements
        .iter()
        .filter_map(|x| b.measurement(x.batch_size).map(|y| (x.ops_per_sec, y.ops_per_sec)))
        .map(|(x, y)| (x - y).abs() / (0.5 * (x + y)))
        .fold(0.0, f64::max)
}

/// Monotonicity judged across repeated runs: for consecutive batch sizes
/// `b₁ < b₂`, the best ops/s seen at `b₂` must reach the worst seen at `b₁`.
/// A pair fails only when every run at `b₂` is slower than every run at `b₁`.
pub fn monotonic_within_noise(runs: &[BenchReport]) -> bool {
    let Some(first) = runs.first() else { return false };
    let mut sizes: Vec<usize> = first.measurements.iter().map(|m| m.batch_size).collect();
    sizes.sort_unstable();
    let range = |b: usize| {
        runs.iter()
            .filter_map(|r| r.measurement(b))
            .map(|m| m.ops_per_sec)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    sizes.windows(2).all(|w| range(w[1]).1 >= range(w[0]).0)
}

pub fn machine_descriptor() -> String {
    format!(
        "{}-{} ({} logical cpus)",
        std::env::consts::ARCH,
        std::env::consts::OS,
        std::thread::available_parallelism().map_or(1, |n| n.get())
    )
}

/// A timed workload: each call draws fresh inputs off the clock, then
/// returns the duration of the measured region alone.
struct Workload<'a> {
    ops_per_call: usize,
    call: Box<dyn FnMut() -> Duration + 'a>,
    iterations: usize,
    timed: Duration,
}

impl<'a> Workload<'a> {
    fn new<I: 'a, O>(
        ops_per_call: usize,
        mut make_input: impl FnMut() -> I + 'a,
        mut run: impl FnMut(&I) -> O + 'a,
    ) -> Self {
        let call = move || {
            let input = make_input();
            let start = Instant::now();
            black_box(run(black_box(&input)));
            start.elapsed()
        };
        Self {
            ops_per_call,
            call: Box::new(call),
            iterations: 0,
            timed: Duration::ZERO,
        }
    }

    fn done(&self, target: Duration) -> bool {
        self.iterations >= MIN_ITERATIONS && self.timed >= target
    }

    fn measurement(&self) -> Measurement {
        let seconds = self.timed.as_secs_f64();
        Measurement {
            batch_size: self.ops_per_call,
            iterations: self.iterations,
            seconds,
            ops_per_sec: (self.ops_per_call * self.iterations) as f64 / seconds,
        }
    }
}

/// Warms every workload up, then runs them round-robin in short slices until
/// each has at least `min_seconds` of timed work and [`MIN_ITERATIONS`]
/// calls. Interleaving spreads slow drift in machine load evenly.
fn measure_interleaved(workloads: &mut [Workload<'_>], min_seconds: f64) {
    for w in workloads.iter_mut() {
        for _ in 0..WARMUP_CALLS {
            (w.call)();
        }
    }
    let target = Duration::from_secs_f64(min_seconds);
    let slice = Duration::from_secs_f64((min_seconds / 20.0).max(1e-3));
    while !workloads.iter().all(|w| w.done(target)) {
        for w in workloads.iter_mut() {
            let (mut spent, mut calls) = (Duration::ZERO, 0);
            while spent < slice {
                spent += (w.call)();
                calls += 1;
            }
            w.timed += spent;
            w.iterations += calls;
        }
    }
}

fn batch_workload<'a>(
    factory: &'a EngineFactory,
    engine: &'a FkEngine,
    seed: u64,
) -> Workload<'a> {
    let b = engine.batch_size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ b as u64);
    Workload::new(
        b,
        move || random_configurations(&mut rng, &factory.chain, b),
        |thetas: &Vec<f64>| engine.forward(thetas).expect("input has engine shape"),
    )
}

fn baseline_workload(factory: &EngineFactory, seed: u64) -> Workload<'_> {
    let (base, end) = (factory.chain.base_link(), factory.chain.end_link());
    let m = factory.chain.m();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Workload::new(
        BASELINE_BLOCK,
        move || random_configurations(&mut rng, &factory.chain, BASELINE_BLOCK),
        move |thetas: &Vec<f64>| {
            thetas
                .chunks(m)
                .map(|q| reference::forward(&factory.model, base, end, q).expect("valid chain"))
                .collect::<Vec<_>>()
        },
    )
}

/// Batched throughput of `factory`'s engine at one size.
pub fn measure_batch(
    factory: &EngineFactory,
    batch_size: usize,
    min_seconds: f64,
    seed: u64,
) -> Result<Measurement, BenchError> {
    let engine = factory.build(batch_size)?;
    let mut w = [batch_workload(factory, &engine, seed)];
    measure_interleaved(&mut w, min_seconds);
    Ok(w[0].measurement())
}

/// Throughput of the naive sequential FK on the same chain.
pub fn measure_baseline(factory: &EngineFactory, min_seconds: f64, seed: u64) -> Measurement {
    let mut w = [baseline_workload(factory, seed)];
    measure_interleaved(&mut w, min_seconds);
    w[0].measurement()
}

/// Measures every batch size and the sequential baseline, interleaved.
pub fn run_bench(
    factory: &EngineFactory,
    batch_sizes: &[usize],
    min_seconds: f64,
) -> Result<BenchReport, BenchError> {
    if batch_sizes.is_empty() {
        return Err(BenchError::NoBatchSizes);
    }
    if batch_sizes.contains(&0) {
        return Err(BenchError::ZeroBatch);
    }
    if factory.chain.m() == 0 {
        return Err(BenchError::NoDof {
            base: factory.chain.base_link().to_string(),
            end: factory.chain.end_link().to_string(),
        });
    }
    let engines = batch_sizes
        .iter()
        .map(|&b| factory.build(b))
        .collect::<Result<Vec<_>, _>>()?;
    let mut workloads: Vec<Workload<'_>> = engines
        .iter()
        .map(|e| batch_workload(factory, e, 0))
        .collect();
    workloads.push(baseline_workload(factory, 0));
    measure_interleaved(&mut workloads, min_seconds);

    let mut measurements: Vec<Measurement> = workloads.iter().map(Workload::measurement).collect();
    let baseline = measurements.pop().expect("baseline workload");
    Ok(BenchReport {
        measurements,
        baseline,
        machine: machine_descriptor(),
        threads: rayon::current_num_threads(),
        dof: factory.chain.m(),
        op: "final transform of one configuration (no pose extraction)",
    })
}
