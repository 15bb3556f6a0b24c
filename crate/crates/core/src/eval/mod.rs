//! Filtered link prediction, triplet classification and ablations.

mod ablation;
mod rank;
mod threshold;

pub use ablation::{ablate, ratio_sweep, AblationVariant};
pub use rank::{filtered_rank, worst_rank, LpQuery, Slot};
pub use threshold::{best_threshold, tune_thresholds, Thresholds};

use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{build_filter_set, BenchmarkSplits, Task};
use crate::error::{Error, Result};
use crate::estimator::{cap_neighbors, estimate_candidates, CandidateSet};
use crate::kg::{EntityId, RelationId, TripleStore};
use crate::model::EmbeddingTables;
use crate::reducer::{reduce, weights, RelationCorrelation, WeightScheme};
use crate::rng::{keyed_rng, Stream};

/// How candidates are weighted when reducing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum Weighting {
    /// Query-aware: recomputed for every query relation.
    Correlation,
    Degree { delta: f64 },
    Uniform,
}

impl Weighting {
    pub const DEFAULT_DELTA: f64 = 0.1;

    pub fn default_for(task: Task) -> Self {
        match task {
            Task::LinkPrediction => Weighting::Correlation,
            Task::Classification => Weighting::Degree {
                delta: Self::DEFAULT_DELTA,
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Weighting::Correlation => "correlation",
            Weighting::Degree { .. } => "degree",
            Weighting::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub weighting: Weighting,
    /// Keep at most this many aux neighbors per OOKG entity.
    pub neighbor_cap: Option<usize>,
    /// Seed for neighbor capping.
    pub seed: u64,
}

impl EvalConfig {
    pub fn new(weighting: Weighting) -> Self {
        EvalConfig {
            weighting,
            neighbor_cap: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub name: String,
    pub task: Task,
    /// Ranked queries (lp) or classified triplets (tc).
    pub count: usize,
    /// Queries/triplets whose OOKG entity had no usable aux neighbor.
    pub dangling: usize,
    /// Link-prediction test triplets with no IKG side to rank.
    pub skipped: usize,
    pub mrr: Option<f64>,
    pub hits1: Option<f64>,
    pub hits10: Option<f64>,
    pub accuracy: Option<f64>,
    pub ookg_ratio: f64,
    pub config: EvalConfig,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "name,task,count,dangling,skipped,mrr,hits1,hits10,accuracy,ookg_ratio,scheme,neighbor_cap";

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
        let mut s = String::new();
        write!(
            s,
            "{},{},{},{},{},{},{},{},{},{:.6},{},{}",
            self.name,
            self.task,
            self.count,
            self.dangling,
            self.skipped,
            opt(self.mrr),
            opt(self.hits1),
            opt(self.hits10),
            opt(self.accuracy),
            self.ookg_ratio,
            self.config.weighting.name(),
            self.config.neighbor_cap.map(|k| k.to_string()).unwrap_or_default(),
        )
        .unwrap();
        s
    }

    pub fn to_csv(reports: &[EvalReport]) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in reports {
            s.push_str(&r.csv_row());
            s.push('\n');
        }
        s
    }
}

/// Embeds OOKG entities from their aux neighborhoods.
///
/// Candidate sets (after optional capping) are built once per entity.
/// Query-independent schemes cache the reduced vector; correlation weighting
/// reduces per query relation.
pub struct OokgEmbedder<'a> {
    tables: &'a EmbeddingTables,
    weighting: Weighting,
    train: TripleStore,
    correlation: Option<RelationCorrelation>,
    ikg_mask: Vec<bool>,
    candidates: HashMap<EntityId, CandidateSet>,
    cached: HashMap<EntityId, Vec<f64>>,
}

impl<'a> OokgEmbedder<'a> {
    pub fn new(tables: &'a EmbeddingTables, splits: &BenchmarkSplits, config: &EvalConfig) -> Result<Self> {
        if tables.num_entities() != splits.num_entities() || tables.num_relations() != splits.num_relations() {
            return Err(Error::Input(format!(
                "tables are {}x{} but the dataset has {} entities and {} relations",
                tables.num_entities(),
                tables.num_relations(),
                splits.num_entities(),
                splits.num_relations()
            )));
        }
        if let Weighting::Degree { delta } = config.weighting {
            if !(delta > 0.0) {
                return Err(Error::Config(format!("degree smoothing must be positive, got {delta}")));
            }
        }
        if config.neighbor_cap == Some(0) {
            return Err(Error::Config("neighbor cap must be at least 1".into()));
        }
        let train = splits.train_store();
        let aux = splits.aux_store();
        let ikg_mask: Vec<bool> = (0..splits.num_entities() as u32).map(|e| splits.is_ikg(e)).collect();
        let correlation = matches!(config.weighting, Weighting::Correlation).then(|| RelationCorrelation::build(&train));

        let mut candidates = HashMap::new();
        for &e in splits.ookg_entities() {
            match estimate_candidates(tables, &aux, |n| ikg_mask[n as usize], e) {
                Ok(set) => {
                    let set = match config.neighbor_cap {
                        Some(k) => cap_neighbors(&set, k, &mut keyed_rng(config.seed, Stream::Capping, e as u64)),
                        None => set,
                    };
                    candidates.insert(e, set);
                }
                Err(Error::Estimation { .. }) => {}
                Err(err) => return Err(err),
            }
        }

        let mut embedder = OokgEmbedder {
            tables,
            weighting: config.weighting,
            train,
            correlation,
            ikg_mask,
            candidates,
            cached: HashMap::new(),
        };
        if let Some(scheme) = embedder.fixed_scheme() {
            let mut cached = HashMap::with_capacity(embedder.candidates.len());
            for (&e, set) in &embedder.candidates {
                cached.insert(e, embedder.reduce_with(set, scheme)?);
            }
            embedder.cached = cached;
        }
        Ok(embedder)
    }

    fn fixed_scheme(&self) -> Option<WeightScheme> {
        match self.weighting {
            Weighting::Correlation => None,
            Weighting::Degree { delta } => Some(WeightScheme::Degree(delta)),
            Weighting::Uniform => Some(WeightScheme::Uniform),
        }
    }

    fn reduce_with(&self, set: &CandidateSet, scheme: WeightScheme) -> Result<Vec<f64>> {
        let w = weights(scheme, set, self.correlation.as_ref(), Some(&self.train))?;
        reduce(set, &w)
    }

    pub fn candidate_set(&self, e: EntityId) -> Option<&CandidateSet> {
        self.candidates.get(&e)
    }

    pub fn is_ikg(&self, e: EntityId) -> bool {
        self.ikg_mask[e as usize]
    }

    /// Vector for `e` in a query about `relation`: the table row for IKG
    /// entities, the reduced estimate for OOKG ones, `None` when dangling.
    pub fn vector(&self, e: EntityId, relation: RelationId) -> Result<Option<Cow<'_, [f64]>>> {
        if self.is_ikg(e) {
            return Ok(Some(Cow::Borrowed(self.tables.entity(e))));
        }
        if let Some(v) = self.cached.get(&e) {
            return Ok(Some(Cow::Borrowed(v)));
        }
        match self.candidates.get(&e) {
            None => Ok(None),
            Some(set) => {
                let scheme = self.fixed_scheme().unwrap_or(WeightScheme::Correlation(relation));
                Ok(Some(Cow::Owned(self.reduce_with(set, scheme)?)))
            }
        }
    }

    /// Reduced embeddings of all non-dangling OOKG entities, ascending by id.
    /// Only valid for query-independent weighting.
    pub fn reduced_embeddings(&self) -> Result<Vec<(EntityId, Vec<f64>)>> {
        if self.fixed_scheme().is_none() {
            return Err(Error::Config(
                "correlation weights depend on the query relation; pick degree or uniform weights".into(),
            ));
        }
        let mut out: Vec<(EntityId, Vec<f64>)> = self.cached.iter().map(|(&e, v)| (e, v.clone())).collect();
        out.sort_by_key(|p| p.0);
        Ok(out)
    }
}

enum QueryOutcome {
    Ranked(f64),
    Dangling(f64),
    Skipped,
}

/// Filtered MRR / Hits@1 / Hits@10 over the test split. The OOKG side of
/// each test triplet is the known entity and the IKG side is ranked against
/// all IKG entities.
pub fn link_prediction(tables: &EmbeddingTables, splits: &BenchmarkSplits, config: &EvalConfig) -> Result<EvalReport> {
    let embedder = OokgEmbedder::new(tables, splits, config)?;
    let filter = build_filter_set(splits);
    let candidates = splits.ikg_entities();

    let outcomes: Vec<QueryOutcome> = splits
        .test
        .par_iter()
        .filter(|l| l.positive)
        .map(|l| -> Result<QueryOutcome> {
            let t = l.triplet;
            let (known, truth, missing) = match (embedder.is_ikg(t.head), embedder.is_ikg(t.tail)) {
                (false, false) => return Ok(QueryOutcome::Skipped),
                (false, true) => (t.head, t.tail, Slot::Tail),
                (true, false) => (t.tail, t.head, Slot::Head),
                (true, true) => (t.head, t.tail, Slot::Tail),
            };
            let vec = embedder.vector(known, t.relation)?;
            let known_vec: &[f64] = vec.as_deref().unwrap_or(&[]);
            let query = LpQuery {
                known_entity: known,
                known: known_vec,
                relation: t.relation,
                missing,
                truth,
            };
            if vec.is_none() {
                return Ok(QueryOutcome::Dangling(worst_rank(&query, candidates, Some(&filter))));
            }
            filtered_rank(tables, &query, candidates, Some(&filter)).map(QueryOutcome::Ranked)
        })
        .collect::<Result<_>>()?;

    let (mut n, mut dangling, mut skipped) = (0usize, 0usize, 0usize);
    let (mut rr, mut h1, mut h10) = (0.0, 0usize, 0usize);
    for o in outcomes {
        let rank = match o {
            QueryOutcome::Skipped => {
                skipped += 1;
                continue;
            }
            QueryOutcome::Dangling(r) => {
                dangling += 1;
                r
            }
            QueryOutcome::Ranked(r) => r,
        };
        n += 1;
        rr += 1.0 / rank;
        h1 += (rank <= 1.0) as usize;
        h10 += (rank <= 10.0) as usize;
    }
    let frac = |x: f64| if n == 0 { None } else { Some(x / n as f64) };
    Ok(EvalReport {
        name: "full".into(),
        task: Task::LinkPrediction,
        count: n,
        dangling,
        skipped,
        mrr: frac(rr),
        hits1: frac(h1 as f64),
        hits10: frac(h10 as f64),
        accuracy: None,
        ookg_ratio: splits.ookg_ratio(),
        config: config.clone(),
    })
}

/// Classification accuracy on the labeled test split. Triplets whose OOKG
/// entity cannot be embedded are classified false.
pub fn triplet_classification(
    tables: &EmbeddingTables,
    splits: &BenchmarkSplits,
    thresholds: &Thresholds,
    config: &EvalConfig,
) -> Result<EvalReport> {
    let embedder = OokgEmbedder::new(tables, splits, config)?;
    let outcomes: Vec<(bool, bool)> = splits
        .test
        .par_iter()
        .map(|l| -> Result<(bool, bool)> {
            let t = l.triplet;
            let h = embedder.vector(t.head, t.relation)?;
            let tl = embedder.vector(t.tail, t.relation)?;
            let (predicted, dangling) = match (h, tl) {
                (Some(h), Some(tl)) => {
                    let d = tables.distance(&h, t.relation, &tl)?;
                    (thresholds.classify(t.relation, d), false)
                }
                _ => (false, true),
            };
            Ok((predicted == l.positive, dangling))
        })
        .collect::<Result<_>>()?;
    let n = outcomes.len();
    let correct = outcomes.iter().filter(|o| o.0).count();
    let dangling = outcomes.iter().filter(|o| o.1).count();
    Ok(EvalReport {
        name: "full".into(),
        task: Task::Classification,
        count: n,
        dangling,
        skipped: 0,
        mrr: None,
        hits1: None,
        hits10: None,
        accuracy: (n > 0).then(|| correct as f64 / n as f64),
        ookg_ratio: splits.ookg_ratio(),
        config: config.clone(),
    })
}

/// Accuracy of `thresholds` on the validation split.
pub fn validation_accuracy(tables: &EmbeddingTables, splits: &BenchmarkSplits, thresholds: &Thresholds) -> Result<f64> {
    if splits.valid.is_empty() {
        return Err(Error::Input("empty validation set".into()));
    }
    let mut correct = 0;
    for l in &splits.valid {
        let t = l.triplet;
        let d = tables.distance_ids(t.head, t.relation, t.tail)?;
        correct += (thresholds.classify(t.relation, d) == l.positive) as usize;
    }
    Ok(correct as f64 / splits.valid.len() as f64)
}

/// Runs the split's task: link prediction, or threshold tuning on the
/// validation split followed by classification.
pub fn evaluate(tables: &EmbeddingTables, splits: &BenchmarkSplits, config: &EvalConfig) -> Result<EvalReport> {
    match splits.task {
        Task::LinkPrediction => link_prediction(tables, splits, config),
        Task::Classification => {
            let th = tune_thresholds(tables, &splits.valid)?;
            triplet_classification(tables, splits, &th, config)
        }
    }
}
