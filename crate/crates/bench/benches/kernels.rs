use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use apl_bench::{generated, singular_kernel, two_tone, unit_kernel};
use apl_core::bohr::{bohr_numeric_many, default_quad_step};
use apl_core::convolution::{convolve_finite, convolve_infinite, summability, ConvolutionConfig};
use apl_core::scanner::{classify, scan, DefectMode, GridParams, ScanConfig};
use apl_core::stepanov::{sp_defect, StepanovParams};
use apl_core::NormKind;

fn evaluation(c: &mut Criterion) {
    let f = generated();
    c.bench_function("evaluate/8 terms, d=3", |b| {
        b.iter(|| f.evaluate(black_box(12.345)))
    });
}

fn scanning(c: &mut Criterion) {
    let f = two_tone();
    let grid = GridParams::default();
    let mut group = c.benchmark_group("classify");
    for tau in [1.0, 140.0, 1402.17] {
        group.bench_with_input(BenchmarkId::from_parameter(tau), &tau, |b, &tau| {
            b.iter(|| classify(&f, DefectMode::Anti, tau, 0.05, &grid).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    group.bench_function("two tone, 20k tau", |b| {
        b.iter(|| scan(&f, &ScanConfig::new(DefectMode::Anti, 0.05, 200.0, 0.01)).unwrap())
    });
    group.finish();
}

fn averaging(c: &mut Criterion) {
    let f = generated();
    let freqs: Vec<f64> = f.frequencies().collect();
    let step = freqs
        .iter()
        .map(|&r| default_quad_step(&f, r))
        .fold(f64::INFINITY, f64::min);
    let mut group = c.benchmark_group("bohr");
    group.sample_size(10);
    group.bench_function("numeric, T=2000", |b| {
        b.iter(|| bohr_numeric_many(&f, &freqs, 2000.0, step).unwrap())
    });
    group.finish();
}

fn stepanov(c: &mut Criterion) {
    let f = generated();
    let params = StepanovParams::new(2.0).unwrap();
    c.bench_function("sp_defect/window 20", |b| {
        b.iter(|| sp_defect(&f, &params, 0.7, 20.0, 0.05).unwrap())
    });
}

fn convolution(c: &mut Criterion) {
    let f = generated();
    let grid: Vec<f64> = (0..100).map(|k| k as f64 * 0.1).collect();
    let config = ConvolutionConfig::default();
    let mut group = c.benchmark_group("convolution");
    group.sample_size(10);
    for (name, kernel) in [("smooth", unit_kernel(3)), ("singular", singular_kernel(3))] {
        group.bench_function(BenchmarkId::new("infinite", name), |b| {
            b.iter(|| convolve_infinite(&kernel, &f, &grid, &config).unwrap())
        });
        group.bench_function(BenchmarkId::new("finite", name), |b| {
            b.iter(|| convolve_finite(&kernel, &f, &grid, &config).unwrap())
        });
    }
    group.bench_function("summability q=2", |b| {
        b.iter(|| summability(&singular_kernel(3), 2.0, 1e-12, NormKind::Euclidean).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    evaluation,
    scanning,
    averaging,
    stepanov,
    convolution
);
criterion_main!(benches);
