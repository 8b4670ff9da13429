use std::collections::BTreeMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use corpusforge::dedup::synthetic::injected_corpus;
use corpusforge::dedup::{build_index, census_signature, decode_all, DedupParams, GrayFrame, Search};
use corpusforge::sampling::{sample, SamplingPlan, Strategy};
use corpusforge::tensor::inflate_net;
use corpusforge::{rng, synth};
use rand::Rng;

fn census(c: &mut Criterion) {
    let mut r = rng::seeded(1);
    let px: Vec<u8> = (0..112 * 112).map(|_| r.random()).collect();
    let frame = GrayFrame::new(112, 112, px).unwrap();
    c.bench_function("census_signature_112", |b| b.iter(|| census_signature(black_box(&frame)).unwrap()));
}

fn lsh_query(c: &mut Criterion) {
    let corpus = injected_corpus(7, 20, 40, 5, 32);
    let src = decode_all(&corpus.sources).unwrap();
    let tgt = decode_all(&corpus.targets).unwrap();
    let params = DedupParams::default();
    let queries: Vec<_> = src.iter().flat_map(|s| s.frames.iter().cloned()).collect();
    let mut group = c.benchmark_group("frame_query");
    for search in [Search::Lsh, Search::Exhaustive] {
        let idx = build_index(&tgt, &params, search).unwrap();
        group.bench_function(format!("{search:?}"), |b| {
            b.iter(|| queries.iter().map(|q| idx.matches(q, params.tau).len()).sum::<usize>())
        });
    }
    group.finish();
}

fn conv3d(c: &mut Criterion) {
    let rn = synth::random_net(3, 3, 32);
    let net3d = inflate_net(&rn.net, 3).unwrap();
    let [ch, h, w] = rn.input;
    let x = synth::random_input(3, &[ch, 8, h, w]);
    c.bench_function("inflated_net_forward_8x32x32", |b| b.iter(|| net3d.forward(black_box(&x)).unwrap()));
}

fn sampling(c: &mut Criterion) {
    let counts: BTreeMap<String, usize> = synth::zipf_counts(50, 2000, 1.0)
        .into_iter()
        .enumerate()
        .map(|(i, n)| (synth::label_name(i), n))
        .collect();
    let (corpus, space) = synth::labelled_corpus(&counts, (5.0, 60.0), 1);
    let mut group = c.benchmark_group("sample_1000");
    for strategy in [Strategy::Random, Strategy::SquareRoot, Strategy::TailPreserving] {
        let plan = SamplingPlan::new(strategy, 1000, 5);
        group.bench_function(format!("{strategy:?}"), |b| b.iter(|| sample(&corpus, &space, &plan).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, census, lsh_query, conv3d, sampling);
criterion_main!(benches);
