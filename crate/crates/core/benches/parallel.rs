use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cox_grenander::bootstrap::bootstrap_test;
use cox_grenander::limits::{estimate_constants, ArgmaxMcConfig};
use cox_grenander::study::lookup;
use cox_grenander::{Baseline, Exec, Stat, TestConfig};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn bootstrap(c: &mut Criterion) {
    let reg = lookup(&Baseline::Weibull { mu: 1.0, nu: 0.5 }).unwrap();
    let data = reg.scenario(1000).sample(1).unwrap();
    let mut cfg = TestConfig::new(reg.window());
    cfg.b = 99;
    let mut g = c.benchmark_group("bootstrap_n1000_b99");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| bootstrap_test(&data, &cfg, &Stat::ALL, 7, exec).unwrap())
        });
    }
    g.finish();
}

fn argmax(c: &mut Criterion) {
    let cfg = ArgmaxMcConfig { reps: 5_000, ..Default::default() };
    let mut g = c.benchmark_group("argmax_constants_5k");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| estimate_constants(1.0, &cfg, 3, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bootstrap, argmax);
criterion_main!(benches);
