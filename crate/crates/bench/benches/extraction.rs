use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_bigint::BigUint;
use scengen::casestudy::CaseStudy;
use scengen::sample::{rng_from_seed, uniform_below};
use scengen::{sample_uniform, synthesize_sg, SamplePolicy, TraceIndex};
use scengen_bench::{scenario, single};

const HORIZONS: [usize; 3] = [50, 100, 200];

fn synthesis(c: &mut Criterion) {
    let compiled = CaseStudy::Fcs.compile("sg4").unwrap();
    let m = compiled.conjoined().unwrap();
    c.bench_function("synthesize/fcs-sg4", |b| b.iter(|| synthesize_sg(m.as_ref()).unwrap()));
}

fn counting(c: &mut Criterion) {
    let sg = single(CaseStudy::Fcs, "assumptions");
    let mut g = c.benchmark_group("count/fcs-assumptions");
    for h in HORIZONS {
        g.bench_with_input(BenchmarkId::from_parameter(h), &h, |b, &h| {
            b.iter(|| TraceIndex::new(sg.clone()).nb_traces(h).unwrap())
        });
    }
    g.finish();
}

fn extraction(c: &mut Criterion) {
    let mut idx = TraceIndex::new(single(CaseStudy::Fcs, "assumptions"));
    idx.extend(HORIZONS[2]).unwrap();
    let mut rng = rng_from_seed(1);
    let mut g = c.benchmark_group("extract/fcs-assumptions");
    for h in HORIZONS {
        let n = idx.nb_traces(h).unwrap();
        let picks: Vec<BigUint> = (0..256).map(|_| uniform_below(&mut rng, &n)).collect();
        g.bench_with_input(BenchmarkId::from_parameter(h), &h, |b, &h| {
            let mut k = 0;
            b.iter(|| {
                k = (k + 1) % picks.len();
                idx.trace(black_box(&picks[k]), h).unwrap()
            })
        });
    }
    g.finish();
}

fn tuple_extraction(c: &mut Criterion) {
    let mut t = scenario(CaseStudy::Alma, "sg1").tuple();
    let h = 100;
    let n = t.nb_traces(h).unwrap();
    let mut rng = rng_from_seed(2);
    let picks: Vec<BigUint> = (0..256).map(|_| uniform_below(&mut rng, &n)).collect();
    let mut k = 0;
    c.bench_function("extract/alma-sg1/100", |b| {
        b.iter(|| {
            k = (k + 1) % picks.len();
            t.trace(black_box(&picks[k]), h).unwrap()
        })
    });
}

fn sampling(c: &mut Criterion) {
    let mut idx = TraceIndex::new(single(CaseStudy::Fcs, "sg4"));
    idx.extend(100).unwrap();
    let policy = SamplePolicy::fixed(100, 3);
    c.bench_function("sample/fcs-sg4/1000x100", |b| {
        b.iter(|| sample_uniform(&mut idx, &policy, 1000).unwrap())
    });
}

criterion_group!(benches, synthesis, counting, extraction, tuple_extraction, sampling);
criterion_main!(benches);
