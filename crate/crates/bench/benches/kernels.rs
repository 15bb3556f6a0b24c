use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use invkge::dataset::build_filter_set;
use invkge::estimator::estimate_candidates;
use invkge::eval::{filtered_rank, LpQuery, Slot};
use invkge::model::distance;
use invkge::reducer::{reduce, weights, RelationCorrelation};
use invkge::synthetic::generate_synthetic_splits;
use invkge::train::{self_adversarial_loss, sample_negatives_from};
use invkge::{EmbeddingTables, ModelKind, NormOrder, WeightScheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn bench_distance(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut group = c.benchmark_group("distance");
    for dim in [32, 200, 1000] {
        let (h, r, t) = (vector(&mut rng, dim), vector(&mut rng, dim), vector(&mut rng, dim));
        group.bench_with_input(BenchmarkId::new("transe_l1", dim), &dim, |b, _| {
            b.iter(|| distance(ModelKind::TransE, NormOrder::L1, black_box(&h), black_box(&r), black_box(&t)))
        });
        let (hc, tc) = (vector(&mut rng, 2 * dim), vector(&mut rng, 2 * dim));
        group.bench_with_input(BenchmarkId::new("rotate_l1", dim), &dim, |b, _| {
            b.iter(|| distance(ModelKind::RotatE, NormOrder::L1, black_box(&hc), black_box(&r), black_box(&tc)))
        });
    }
    group.finish();
}

fn bench_pipeline(c: &mut Criterion) {
    let splits = generate_synthetic_splits(0, 2000, 20, 20000, 0.1).unwrap();
    let tables = EmbeddingTables::init(
        0,
        ModelKind::TransE,
        NormOrder::L1,
        200,
        splits.num_entities(),
        splits.num_relations(),
        12.0,
    )
    .unwrap();
    let train = splits.train_store();
    let aux = splits.aux_store();
    let corr = RelationCorrelation::build(&train);
    let is_ikg = |e| splits.is_ikg(e);
    let ookg = splits.ookg_entities()[0];

    c.bench_function("estimate_and_reduce/degree", |b| {
        b.iter(|| {
            let set = estimate_candidates(&tables, &aux, is_ikg, black_box(ookg)).unwrap();
            let w = weights(WeightScheme::Degree(0.1), &set, None, Some(&train)).unwrap();
            reduce(&set, &w).unwrap()
        })
    });
    c.bench_function("estimate_and_reduce/correlation", |b| {
        b.iter(|| {
            let set = estimate_candidates(&tables, &aux, is_ikg, black_box(ookg)).unwrap();
            let w = weights(WeightScheme::Correlation(0), &set, Some(&corr), None).unwrap();
            reduce(&set, &w).unwrap()
        })
    });

    let filter = build_filter_set(&splits);
    let candidates = splits.ikg_entities().to_vec();
    let t = splits.train[0];
    let query = LpQuery {
        known_entity: t.head,
        known: tables.entity(t.head),
        relation: t.relation,
        missing: Slot::Tail,
        truth: t.tail,
    };
    c.bench_function("filtered_rank/all_ikg", |b| {
        b.iter(|| filtered_rank(&tables, black_box(&query), &candidates, Some(&filter)).unwrap())
    });

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let negatives = sample_negatives_from(&mut rng, t, 256, &candidates).unwrap();
    c.bench_function("loss_and_gradient/256_negatives", |b| {
        b.iter(|| self_adversarial_loss(&tables, black_box(t), &negatives, 12.0, 1.0))
    });
}

criterion_group!(benches, bench_distance, bench_pipeline);
criterion_main!(benches);
