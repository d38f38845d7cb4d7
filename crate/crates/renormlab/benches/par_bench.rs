//! Parallel-versus-sequential throughput of the two batch kernels:
//! word distortion tables and conjugacy evaluation grids.
//!
//! The parallel side goes through rayon; the sequential side runs the same
//! public per-item kernels in a plain loop. Build with
//! `--no-default-features` to also time the library's internal fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::prelude::*;
use renormlab::cascade;
use renormlab::conjugacy::Conjugacy;
use renormlab::maps::Family;
use renormlab::markov::{build_partition, Partition, Word};
use renormlab::scaffold::Scaffold;
use renormlab::MapSpec;

fn fixture() -> (Partition, Vec<Word>, Conjugacy) {
    let params = cascade::feigenbaum_parameter(Family::Affine, 2.0, 0.0, 8).unwrap();
    let spec = MapSpec::new(Family::Affine, 2.0, params.lambda_inf, 0.0).unwrap();
    let scaffold = Scaffold::build(&spec, 8).unwrap();
    let partition = build_partition(&scaffold, 7).unwrap();
    let words = partition.enumerate_words(3, 4);
    let conj = Conjugacy::new(partition.clone(), partition.clone(), 12).unwrap();
    (partition, words, conj)
}

fn bench_word_distortion(c: &mut Criterion) {
    let (partition, words, _) = fixture();
    let mut group = c.benchmark_group("word_distortion");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("rayon", words.len()), &words, |b, ws| {
        b.iter(|| {
            ws.par_iter()
                .map(|w| partition.word_cylinder_and_distortion(w, 4).unwrap().deriv_ratio)
                .reduce(|| 1.0, f64::max)
        })
    });
    group.bench_with_input(BenchmarkId::new("sequential", words.len()), &words, |b, ws| {
        b.iter(|| {
            ws.iter()
                .map(|w| partition.word_cylinder_and_distortion(w, 4).unwrap().deriv_ratio)
                .fold(1.0, f64::max)
        })
    });
    group.finish();
}

fn bench_conjugacy_grid(c: &mut Criterion) {
    let (_, _, conj) = fixture();
    let xs: Vec<f64> = (0..256).map(|i| -0.95 + 1.9 * i as f64 / 255.0).collect();
    let mut group = c.benchmark_group("conjugacy_grid");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("rayon", xs.len()), &xs, |b, xs| {
        b.iter(|| {
            xs.par_iter()
                .map(|&x| conj.eval(x).unwrap().value)
                .sum::<f64>()
        })
    });
    group.bench_with_input(BenchmarkId::new("sequential", xs.len()), &xs, |b, xs| {
        b.iter(|| xs.iter().map(|&x| conj.eval(x).unwrap().value).sum::<f64>())
    });
    group.finish();
}

criterion_group!(benches, bench_word_distortion, bench_conjugacy_grid);
criterion_main!(benches);
