use std::fs;

use invkge::checkpoint::encode_checkpoint;
use invkge::dataset::{load_splits, SplitPaths};
use invkge::eval::{
    ablate, link_prediction, tune_thresholds, validation_accuracy, AblationVariant, EvalConfig, Weighting,
};
use invkge::synthetic::{generate_synthetic, generate_synthetic_splits, SyntheticConfig};
use invkge::train::{self_adversarial_loss, train, TrainConfig};
use invkge::{BenchmarkSplits, EmbeddingTables, LabeledTriplet, ModelKind, NormOrder, Task, Triplet, Vocabulary};
use proptest::prelude::*;

fn small_config(seed: u64) -> TrainConfig {
    TrainConfig {
        dim: 8,
        gamma: 4.0,
        negatives: 8,
        batch_size: 64,
        learning_rate: 0.01,
        steps: 60,
        seed,
        ..TrainConfig::default()
    }
}

fn l1(h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    h.iter().zip(r).zip(t).map(|((a, b), c)| (a + b - c).abs()).sum()
}

fn ln_sigmoid(x: f64) -> f64 {
    -(-x).exp().ln_1p()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_temperature_loss_averages_negatives(
        ents in prop::collection::vec(-2.0f64..2.0, 12),
        rel in prop::collection::vec(-1.0f64..1.0, 3),
        negs in prop::collection::vec((0u32..4, 0u32..4), 1..6),
        gamma in 0.5f64..4.0,
    ) {
        let t = EmbeddingTables::from_parts(ModelKind::TransE, NormOrder::L1, 3, 0, ents, rel).unwrap();
        let pos = Triplet::new(0, 0, 1);
        let negs: Vec<Triplet> = negs.into_iter().map(|(h, tl)| Triplet::new(h, 0, tl)).collect();
        let (loss, _) = self_adversarial_loss(&t, pos, &negs, gamma, 0.0);
        let d = |x: Triplet| l1(t.entity(x.head), t.relation(0), t.entity(x.tail));
        let uniform = -ln_sigmoid(gamma - d(pos))
            - negs.iter().map(|&n| ln_sigmoid(d(n) - gamma)).sum::<f64>() / negs.len() as f64;
        prop_assert!((loss - uniform).abs() < 1e-12 * uniform.max(1.0));
    }

    #[test]
    fn tuned_validation_accuracy_beats_label_prior(
        ents in prop::collection::vec(-3.0f64..3.0, 16),
        rels in prop::collection::vec(-1.0f64..1.0, 4),
        rows in prop::collection::vec((0u32..8, 0u32..2, 0u32..8, any::<bool>()), 1..40),
    ) {
        let tables = EmbeddingTables::from_parts(ModelKind::TransE, NormOrder::L1, 2, 0, ents, rels).unwrap();
        let valid: Vec<LabeledTriplet> = rows
            .iter()
            .map(|&(h, r, t, positive)| LabeledTriplet { triplet: Triplet::new(h, r, t), positive })
            .collect();
        let mut vocab = Vocabulary::new();
        (0..8).for_each(|i| { vocab.intern_entity(&format!("e{i}")); });
        (0..2).for_each(|i| { vocab.intern_relation(&format!("r{i}")); });
        let splits = BenchmarkSplits::from_parts(Task::Classification, vocab, vec![], vec![], valid.clone(), vec![]);
        let th = tune_thresholds(&tables, &valid).unwrap();
        let acc = validation_accuracy(&tables, &splits, &th).unwrap();
        let prior = valid.iter().filter(|l| l.positive).count() as f64 / valid.len() as f64;
        prop_assert!(acc + 1e-12 >= prior.max(1.0 - prior));
    }
}

#[test]
fn report_metric_bounds() {
    let splits = generate_synthetic_splits(3, 80, 4, 600, 0.15).unwrap();
    let tables = train(&splits, &small_config(3)).unwrap().tables;
    for w in [Weighting::Correlation, Weighting::Degree { delta: 0.1 }, Weighting::Uniform] {
        let r = link_prediction(&tables, &splits, &EvalConfig::new(w)).unwrap();
        let (mrr, h1, h10) = (r.mrr.unwrap(), r.hits1.unwrap(), r.hits10.unwrap());
        assert!(mrr > 0.0 && mrr <= 1.0);
        assert!(0.0 <= h1 && h1 <= h10 && h10 <= 1.0);
        assert_eq!(r.count, splits.test.len());
        assert_eq!(r.dangling, 0);
    }
}

#[test]
fn inactive_cap_matches_full_run() {
    let splits = generate_synthetic_splits(4, 60, 3, 400, 0.1).unwrap();
    let tables = train(&splits, &small_config(4)).unwrap().tables;
    let most = splits
        .ookg_entities()
        .iter()
        .map(|&e| splits.aux_store().neighbors_of(e).count())
        .max()
        .unwrap();
    let base = EvalConfig::new(Weighting::Degree { delta: 0.1 });
    let reports = ablate(&tables, &splits, &base, &[AblationVariant::Full, AblationVariant::Cap(most)]).unwrap();
    assert_eq!(reports[0].mrr, reports[1].mrr);
    assert_eq!(reports[0].hits10, reports[1].hits10);
}

#[test]
fn training_is_reproducible_and_zero_steps_is_init() {
    let splits = generate_synthetic_splits(5, 50, 3, 300, 0.1).unwrap();
    let config = small_config(9);
    let a = train(&splits, &config).unwrap();
    let b = train(&splits, &config).unwrap();
    assert_eq!(encode_checkpoint(&a.tables), encode_checkpoint(&b.tables));
    assert_eq!(a.loss_log, b.loss_log);

    let zero = train(&splits, &TrainConfig { steps: 0, ..config.clone() }).unwrap();
    let init = EmbeddingTables::init(
        config.seed,
        config.model,
        config.norm,
        config.dim,
        splits.num_entities(),
        splits.num_relations(),
        config.gamma,
    )
    .unwrap();
    assert_eq!(zero.tables, init);
    assert!(zero.loss_log.is_empty());
}

#[test]
fn synthetic_files_round_trip_and_are_byte_identical() {
    for task in [Task::LinkPrediction, Task::Classification] {
        let config = SyntheticConfig::new(1, 50, 5, 300, 0.1).with_task(task);
        let splits = generate_synthetic(&config).unwrap();
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        splits.write(a.path()).unwrap();
        generate_synthetic(&config).unwrap().write(b.path()).unwrap();
        for name in ["train.txt", "aux.txt", "valid.txt", "test.txt"] {
            assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
        }
        let loaded = load_splits(&SplitPaths::in_dir(a.path()), task).unwrap();
        assert_eq!(loaded, splits);
    }
}

#[test]
fn training_pulls_train_triplets_below_random_ones() {
    let splits = generate_synthetic_splits(6, 50, 3, 400, 0.1).unwrap();
    let config = TrainConfig { dim: 16, steps: 2000, ..small_config(6) };
    let tables = train(&splits, &config).unwrap().tables;
    let mean = |ts: &[Triplet]| ts.iter().map(|t| tables.distance_ids(t.head, t.relation, t.tail).unwrap()).sum::<f64>() / ts.len() as f64;

    let ikg = splits.ikg_entities();
    let nr = splits.num_relations() as u32;
    let random: Vec<Triplet> = (0..2000usize)
        .map(|i| {
            let h = ikg[(i * 7919) % ikg.len()];
            let t = ikg[(i * 104_729 + 13) % ikg.len()];
            Triplet::new(h, i as u32 % nr, t)
        })
        .collect();
    let (trained, baseline) = (mean(&splits.train), mean(&random));
    assert!(trained < baseline, "train {trained} vs random {baseline}");
}
