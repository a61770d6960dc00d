use std::hint::black_box;

use cbmw::algebra::{gram, markov_trace, mul};
use cbmw::diagram::basis_enumerate;
use cbmw::engine::{mul_basis_with, Bmw};
use cbmw::hecke::{hecke_basis, hecke_mul, HeckeElem, HeckeParams};
use cbmw::rewrite::Strategy;
use cbmw::{invariant, AlgElem, BraidWord, RingElem, StructureCache};
use cbmw_bench::{numeric, spread, universal};
use criterion::{criterion_group, criterion_main, Criterion};
use num_rational::BigRational;

fn completion(c: &mut Criterion) {
    let mut group = c.benchmark_group("completion");
    group.sample_size(10);
    let p = universal(2);
    group.bench_function("symbolic n=2 r=2", |b| b.iter(|| Bmw::<RingElem>::build(black_box(&p), 2, Strategy::Standard)));
    let p = numeric(2);
    group.bench_function("numeric n=3 r=2", |b| b.iter(|| Bmw::<BigRational>::build(black_box(&p), 3, Strategy::Standard)));
    group.finish();
}

fn products(c: &mut Criterion) {
    let mut group = c.benchmark_group("products");
    let p = numeric(2);
    let basis = basis_enumerate(3, 2);
    let pairs: Vec<_> = spread(&basis, 32, 37).into_iter().zip(spread(&basis, 32, 53)).collect();
    group.bench_function("mul_basis cold numeric n=3 r=2 (32 pairs)", |b| {
        b.iter(|| {
            let cache = StructureCache::in_memory();
            for (x, y) in &pairs {
                black_box(mul_basis_with(x, y, &p, &cache).unwrap());
            }
        })
    });
    let p = universal(2);
    let basis = basis_enumerate(2, 2);
    let x = AlgElem::from_terms(2, 2, p.mode(), spread(&basis, 3, 5).into_iter().map(|b| (b, RingElem::from_int(2)))).unwrap();
    let y = AlgElem::from_terms(2, 2, p.mode(), spread(&basis, 3, 7).into_iter().map(|b| (b, RingElem::from_int(-1)))).unwrap();
    group.bench_function("mul symbolic n=2 r=2", |b| b.iter(|| mul(black_box(&x), black_box(&y), &p).unwrap()));
    group.finish();
}

fn traces(c: &mut Criterion) {
    let mut group = c.benchmark_group("trace");
    let p = universal(2);
    let basis = basis_enumerate(2, 2);
    let x = AlgElem::from_terms(2, 2, p.mode(), spread(&basis, 4, 5).into_iter().map(|b| (b, RingElem::one()))).unwrap();
    group.bench_function("markov_trace symbolic n=2 r=2", |b| b.iter(|| markov_trace(black_box(&x), &p).unwrap()));
    let beta = BraidWord::parse(2, "s1 t s1^-1 t^-1 s1").unwrap();
    group.bench_function("invariant symbolic n=2 r=2", |b| b.iter(|| invariant(black_box(&beta), &p, true).unwrap()));
    group.sample_size(10);
    group.bench_function("gram symbolic n=2 r=2", |b| b.iter(|| gram(2, black_box(&p)).unwrap()));
    group.finish();
}

fn hecke(c: &mut Criterion) {
    let mut group = c.benchmark_group("hecke");
    let hp = HeckeParams::universal(2).unwrap();
    let basis = hecke_basis(3, 2);
    let elem = |step| {
        let mut x = HeckeElem::zero(3, 2);
        for b in spread(&basis, 3, step) {
            x.add_term(b, RingElem::one()).unwrap();
        }
        x
    };
    let (x, y) = (elem(5), elem(11));
    group.bench_function("hecke_mul symbolic n=3 r=2", |b| b.iter(|| hecke_mul(black_box(&x), black_box(&y), &hp).unwrap()));
    group.finish();
}

criterion_group!(benches, completion, products, traces, hecke);
criterion_main!(benches);
