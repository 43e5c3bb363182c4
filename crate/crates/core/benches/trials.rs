use std::hint::black_box;
use std::time::Duration;

use criterion::{BenchmarkId, Criterion};

use glgp_core::par::map_trials_sequential;
use glgp_core::process::{run_trial, EngineOptions, Sampling, Schedule, StopRule};
use glgp_core::rng::trial_seed;
use glgp_core::trajectory::{derive_params, ModelParams};

const TRIALS: usize = 8;

fn one(params: &ModelParams, k: usize) -> glgp_core::Result<u64> {
    let out = run_trial(
        params,
        k as u64,
        trial_seed(42, k as u64),
        &Schedule::default(),
        StopRule::Termination,
        &Sampling::none(),
        &EngineOptions::default(),
    )?;
    Ok(out.trace.m_final)
}

fn bench_trial_maps(c: &mut Criterion) {
    let mut group = c.benchmark_group("trial_map");
    for n in [40usize, 80] {
        let params = derive_params(n, 3, 4, None, None).unwrap();
        group.bench_with_input(BenchmarkId::new("sequential", n), &params, |b, p| {
            b.iter(|| black_box(map_trials_sequential(TRIALS, |k| one(p, k)).unwrap()))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", n), &params, |b, p| {
            b.iter(|| black_box(glgp_core::par::map_trials_parallel(TRIALS, None, |k| one(p, k)).unwrap()))
        });
    }
    group.finish();
}

fn main() {
    let mut c = Criterion::default()
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(3))
        .sample_size(10)
        .configure_from_args();
    bench_trial_maps(&mut c);
    c.final_summary();
}
