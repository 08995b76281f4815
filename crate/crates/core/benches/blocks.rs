//! Throughput benchmarks for the per-sample hot paths, comparing the default
//! thread pool against a single-thread pool. Build with
//! `--no-default-features` to measure the plain sequential code instead.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use photon_sim_core::electrical::{amplify, bandpass_filter, noise_seed, AmpParams, BpfParams};
use photon_sim_core::oeo::{run_loop, ChainConfig, LoopParams};
use photon_sim_core::photonic::{cw_laser, mz_modulate, photodetect, MzmParams};
use photon_sim_core::signal::SamplingGrid;

fn grid() -> SamplingGrid {
    SamplingGrid::new(65.536e9, 1 << 18).unwrap()
}

#[cfg(feature = "parallel")]
fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    vec![
        (
            "default_pool",
            rayon::ThreadPoolBuilder::new().build().unwrap(),
        ),
        (
            "one_thread",
            rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .unwrap(),
        ),
    ]
}

#[cfg(feature = "parallel")]
fn run_in<F: FnOnce() + Send>(pool: &rayon::ThreadPool, f: F) {
    pool.install(f);
}

#[cfg(not(feature = "parallel"))]
fn pools() -> Vec<(&'static str, ())> {
    vec![("sequential", ())]
}

#[cfg(not(feature = "parallel"))]
fn run_in<F: FnOnce() + Send>(_pool: &(), f: F) {
    f();
}

fn bench_mzm_detect(c: &mut Criterion) {
    let grid = grid();
    let light = cw_laser(3.0, 1550.0, grid).unwrap();
    let drive = noise_seed(grid, 0.5, 42).unwrap();
    let mzm = MzmParams::default();
    let mut group = c.benchmark_group("mzm_detect");
    group.sample_size(20);
    for (name, pool) in &pools() {
        group.bench_function(*name, |b| {
            b.iter(|| {
                run_in(pool, || {
                    let m = mz_modulate(&light, &drive, &mzm).unwrap();
                    let _ = photodetect(&m, 0.9).unwrap();
                });
            })
        });
    }
    group.finish();
}

fn bench_bandpass(c: &mut Criterion) {
    let grid = grid();
    let input = noise_seed(grid, 0.5, 42).unwrap();
    let params = BpfParams::default();
    let mut group = c.benchmark_group("bandpass");
    group.sample_size(20);
    for (name, pool) in &pools() {
        group.bench_function(*name, |b| {
            b.iter(|| {
                run_in(pool, || {
                    let _ = bandpass_filter(&input, &params).unwrap();
                });
            })
        });
    }
    group.finish();
}

fn bench_amplify(c: &mut Criterion) {
    let grid = grid();
    let input = noise_seed(grid, 0.5, 42).unwrap();
    let params = AmpParams {
        gain: 100.0,
        saturation_v: 3.0e-3,
    };
    let mut group = c.benchmark_group("amplify");
    group.sample_size(20);
    for (name, pool) in &pools() {
        group.bench_function(*name, |b| {
            b.iter(|| {
                run_in(pool, || {
                    let _ = amplify(&input, &params).unwrap();
                });
            })
        });
    }
    group.finish();
}

fn bench_loop_iteration(c: &mut Criterion) {
    let mut cfg = ChainConfig {
        loop_params: LoopParams {
            iterations: 1,
            seed_rms_v: 1.5,
            rng_seed: 42,
        },
        ..ChainConfig::default()
    };
    cfg.amp.gain = Some(100.0);
    let mut group = c.benchmark_group("loop_iteration");
    group.sample_size(10);
    for (name, pool) in &pools() {
        group.bench_function(*name, |b| {
            b.iter_batched(
                || cfg,
                |cfg| {
                    run_in(pool, || {
                        let _ = run_loop(&cfg).unwrap();
                    });
                },
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_mzm_detect,
    bench_bandpass,
    bench_amplify,
    bench_loop_iteration
);
criterion_main!(benches);
