use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hecke_loops::classfn::{build_table, dual_tp, ClassFunction};
use hecke_loops::hecke::{apply_tn, apply_tp};
use hecke_loops::{canonicalize, LoopSum};
use hecke_loops_bench::{classes, matrices};

fn bench_canonicalize(c: &mut Criterion) {
    let mut group = c.benchmark_group("canonicalize");
    for len in [4, 12, 24] {
        let ms = matrices(64, len);
        group.bench_with_input(BenchmarkId::from_parameter(len), &ms, |b, ms| {
            b.iter(|| ms.iter().map(|m| canonicalize(black_box(m))).count())
        });
    }
    group.finish();
}

fn bench_tp(c: &mut Criterion) {
    let xs: Vec<LoopSum> = classes(16, 10).into_iter().map(LoopSum::single).collect();
    let mut group = c.benchmark_group("tp");
    for p in [2u64, 3, 5, 7, 11] {
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, &p| {
            b.iter(|| xs.iter().map(|x| apply_tp(black_box(x), p).unwrap().len()).sum::<usize>())
        });
    }
    group.finish();
}

fn bench_tn(c: &mut Criterion) {
    let x = LoopSum::single(classes(1, 8).remove(0));
    c.bench_function("tn/12", |b| b.iter(|| apply_tn(black_box(&x), 12).unwrap()));
}

fn bench_dual_tp(c: &mut Criterion) {
    let mut group = c.benchmark_group("dual_tp");
    for (n, p) in [(2u64, 3u64), (3, 2), (4, 3), (6, 2)] {
        let g = build_table(n).unwrap();
        let f = ClassFunction::indicator(g, 1);
        group.bench_with_input(BenchmarkId::new(format!("level{n}"), p), &p, |b, &p| {
            b.iter(|| dual_tp(black_box(&f), p).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_canonicalize, bench_tp, bench_tn, bench_dual_tp);
criterion_main!(benches);
