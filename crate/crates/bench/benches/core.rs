use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use gsf_core::gsf::{find_embedding, fixture_odd_family, is_family_free};
use gsf_core::harness::{spectral_gap, CountingOracle};
use gsf_core::neighborhoods::{enumerate_types, graph_histogram, CatalogMode};
use gsf_core::reduction::{apply_reduction, QueryTranslator};
use gsf_core::zigzag::ZigZag;
use gsf_core::{Graph, Signature};

fn cycle(n: usize) -> Graph {
    let ids = (0..n).map(|i| format!("v{i}")).collect();
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::new(ids, &edges, &[], 2).unwrap()
}

fn types(c: &mut Criterion) {
    let sig = Signature::graph();
    c.bench_function("enumerate_types d=3 r=1", |b| {
        b.iter(|| enumerate_types(&sig, 3, 1, true, CatalogMode::Exhaustive).unwrap())
    });
    let catalog = enumerate_types(&sig, 2, 2, true, CatalogMode::Exhaustive).unwrap();
    let g = cycle(200);
    c.bench_function("graph_histogram C200 r=2", |b| b.iter(|| graph_histogram(black_box(&g), &catalog).unwrap()));
}

fn embeddings(c: &mut Criterion) {
    let fam = fixture_odd_family();
    let g = cycle(61);
    c.bench_function("family_free C61", |b| b.iter(|| is_family_free(black_box(&g), &fam)));
    let f = &fam.members[0];
    c.bench_function("find_embedding C61", |b| b.iter(|| find_embedding(f, black_box(&g))));
}

fn zigzag(c: &mut Criterion) {
    let zz = ZigZag::toy(2).unwrap();
    c.bench_function("canonical_model L=2", |b| b.iter(|| zz.canonical_model(2, 1_000_000).unwrap()));
    let model = zz.canonical_model(1, 100_000).unwrap();
    c.bench_function("apply_reduction L=1", |b| b.iter(|| apply_reduction(black_box(&model)).unwrap()));
    c.bench_function("translate 100 queries", |b| {
        b.iter(|| {
            let mut oracle = CountingOracle::structure(&model);
            let mut t = QueryTranslator::new(&mut oracle).unwrap();
            for v in 0..100 {
                black_box(t.translate(v * 97, 1).unwrap());
            }
        })
    });
}

fn spectral(c: &mut Criterion) {
    let small = cycle(256);
    let large = cycle(2000);
    c.bench_function("spectral_gap dense C256", |b| b.iter(|| spectral_gap(black_box(&small)).unwrap()));
    c.bench_function("spectral_gap lanczos C2000", |b| b.iter(|| spectral_gap(black_box(&large)).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = types, embeddings, zigzag, spectral
}
criterion_main!(benches);
