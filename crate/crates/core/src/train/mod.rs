//! Pretraining with self-adversarial negative sampling and Adam.

mod adam;
mod config;
mod loss;
mod sampler;

pub use adam::Adam;
pub use config::TrainConfig;
pub use loss::{accumulate_loss, adversarial_weights, self_adversarial_loss, Gradients};
pub use sampler::{sample_negatives, sample_negatives_from};

use std::collections::HashSet;

use rand::seq::SliceRandom;

use crate::dataset::BenchmarkSplits;
use crate::error::{Error, Result};
use crate::kg::Triplet;
use crate::model::EmbeddingTables;
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub tables: EmbeddingTables,
    /// `(step, mean batch loss)`, 1-based steps.
    pub loss_log: Vec<(usize, f64)>,
}

pub fn train(splits: &BenchmarkSplits, config: &TrainConfig) -> Result<TrainOutput> {
    train_with(splits, config, |_, _| {})
}

/// Runs `config.steps` Adam updates over shuffled minibatches of the training
/// split. `on_log` sees every logged `(step, loss)`.
///
/// Negatives are drawn from the training entities only. Each pass over the
/// training set uses a fresh shuffle; a trailing partial batch is dropped.
pub fn train_with(
    splits: &BenchmarkSplits,
    config: &TrainConfig,
    mut on_log: impl FnMut(usize, f64),
) -> Result<TrainOutput> {
    config.validate()?;
    if splits.train.is_empty() {
        return Err(Error::Input("training split is empty".into()));
    }
    let mut tables = EmbeddingTables::init(
        config.seed,
        config.model,
        config.norm,
        config.dim,
        splits.num_entities(),
        splits.num_relations(),
        config.gamma,
    )?;
    let pool = splits.ikg_entities();
    let train_set: HashSet<Triplet> = if config.filter_negatives {
        splits.train.iter().copied().collect()
    } else {
        HashSet::new()
    };

    let mut neg_rng = stream_rng(config.seed, Stream::Negatives);
    let mut shuffle_rng = stream_rng(config.seed, Stream::Shuffle);
    let mut order: Vec<usize> = (0..splits.train.len()).collect();
    order.shuffle(&mut shuffle_rng);
    let batch = config.batch_size.min(order.len());
    let mut cursor = 0;

    let mut grads = Gradients::zeros_like(&tables);
    let mut adam_e = Adam::new(tables.entity_params().len(), config.learning_rate);
    let mut adam_r = Adam::new(tables.relation_params().len(), config.learning_rate);
    let mut loss_log = Vec::new();
    let scale = 1.0 / batch as f64;

    for step in 1..=config.steps {
        if cursor + batch > order.len() {
            order.shuffle(&mut shuffle_rng);
            cursor = 0;
        }
        let mut loss = 0.0;
        for &i in &order[cursor..cursor + batch] {
            let pos = splits.train[i];
            let mut negs = sample_negatives_from(&mut neg_rng, pos, config.negatives, pool)?;
            if config.filter_negatives {
                for n in negs.iter_mut() {
                    let mut tries = 0;
                    while train_set.contains(n) && tries < 16 {
                        *n = sample_negatives_from(&mut neg_rng, pos, 1, pool)?[0];
                        tries += 1;
                    }
                }
            }
            loss += accumulate_loss(&tables, pos, &negs, config.gamma, config.alpha, scale, &mut grads);
        }
        cursor += batch;
        loss *= scale;

        if config.l2 > 0.0 {
            loss += apply_l2(&tables, &mut grads, config.l2);
        }
        if !loss.is_finite() {
            return Err(Error::Diverged { step, loss });
        }

        let (ents, rels) = tables.params_mut();
        adam_e.update(ents, &grads.entities);
        adam_r.update(rels, &grads.relations);
        grads.clear();

        if step % config.log_every == 0 || step == config.steps {
            loss_log.push((step, loss));
            on_log(step, loss);
        }
    }
    Ok(TrainOutput { tables, loss_log })
}

/// `λ · Σ ‖row‖²` over touched rows; adds `2λ · row` to their gradients.
fn apply_l2(tables: &EmbeddingTables, grads: &mut Gradients, l2: f64) -> f64 {
    let mut penalty = 0.0;
    let w = tables.entity_width();
    let ents = grads.touched_entities().to_vec();
    for e in ents {
        let row = tables.entity(e);
        penalty += row.iter().map(|x| x * x).sum::<f64>();
        let g = &mut grads.entities[e as usize * w..(e as usize + 1) * w];
        g.iter_mut().zip(row).for_each(|(g, x)| *g += 2.0 * l2 * x);
    }
    let d = tables.dim;
    let rels = grads.touched_relations().to_vec();
    for r in rels {
        let row = tables.relation(r);
        penalty += row.iter().map(|x| x * x).sum::<f64>();
        let g = &mut grads.relations[r as usize * d..(r as usize + 1) * d];
        g.iter_mut().zip(row).for_each(|(g, x)| *g += 2.0 * l2 * x);
    }
    l2 * penalty
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{NamedTriplet, Task};
    use crate::model::{ModelKind, NormOrder};

    fn chain_splits() -> BenchmarkSplits {
        let train: Vec<NamedTriplet> = (0..20)
            .map(|i| NamedTriplet::new(format!("e{i}"), format!("r{}", i % 2), format!("e{}", (i + 1) % 20)))
            .collect();
        BenchmarkSplits::from_named(
            Task::LinkPrediction,
            &train,
            &[NamedTriplet::new("x", "r0", "e0")],
            &[],
            &[NamedTriplet::new("x", "r1", "e3")],
        )
    }

    fn small_config(model: ModelKind) -> TrainConfig {
        TrainConfig {
            model,
            norm: NormOrder::L1,
            dim: 8,
            gamma: 4.0,
            negatives: 4,
            batch_size: 8,
            learning_rate: 0.01,
            steps: 50,
            log_every: 10,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn zero_steps_returns_initialization() {
        let s = chain_splits();
        let cfg = TrainConfig { steps: 0, ..small_config(ModelKind::TransE) };
        let out = train(&s, &cfg).unwrap();
        let init = EmbeddingTables::init(11, ModelKind::TransE, NormOrder::L1, 8, s.num_entities(), s.num_relations(), 4.0).unwrap();
        assert_eq!(out.tables, init);
        assert!(out.loss_log.is_empty());
    }

    #[test]
    fn deterministic_and_finite() {
        let s = chain_splits();
        for model in [ModelKind::TransE, ModelKind::RotatE] {
            let cfg = TrainConfig { l2: 1e-3, filter_negatives: true, ..small_config(model) };
            let a = train(&s, &cfg).unwrap();
            let b = train(&s, &cfg).unwrap();
            assert_eq!(a.tables, b.tables);
            assert_eq!(a.loss_log, b.loss_log);
            assert_eq!(a.loss_log.iter().map(|l| l.0).collect::<Vec<_>>(), vec![10, 20, 30, 40, 50]);
            assert!(a.loss_log.iter().all(|l| l.1.is_finite()));
            assert!(a.tables.all_finite());
        }
    }

    #[test]
    fn loss_decreases() {
        let s = chain_splits();
        let cfg = TrainConfig { steps: 400, log_every: 50, ..small_config(ModelKind::TransE) };
        let out = train(&s, &cfg).unwrap();
        let first = out.loss_log.first().unwrap().1;
        let last = out.loss_log.last().unwrap().1;
        assert!(last < first, "{first} -> {last}");
    }

    #[test]
    fn ookg_rows_untouched() {
        let s = chain_splits();
        let cfg = small_config(ModelKind::TransE);
        let out = train(&s, &cfg).unwrap();
        let init = EmbeddingTables::init(11, ModelKind::TransE, NormOrder::L1, 8, s.num_entities(), s.num_relations(), 4.0).unwrap();
        let x = s.vocab.entity_id("x").unwrap();
        assert_eq!(out.tables.entity(x), init.entity(x));
    }

    #[test]
    fn empty_train_is_an_error() {
        let s = BenchmarkSplits::from_named(Task::LinkPrediction, &[], &[], &[], &[]);
        assert!(train(&s, &small_config(ModelKind::TransE)).is_err());
    }
}
