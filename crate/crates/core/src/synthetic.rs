//! Seeded benchmark generators.
//!
//! [`generate_synthetic`] draws a graph from a latent translational model with
//! Zipf-skewed entity popularity and a share of random (noisy) training
//! facts, then carves out OOKG entities whose triplets go to the aux and test
//! splits. Rarely seen entities end up with weakly constrained embeddings,
//! which is the regime degree weighting targets. [`generate_planted`] builds a graph whose
//! integer ground-truth TransE embeddings fit every positive triplet exactly.

use std::collections::{HashMap, HashSet};

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{BenchmarkSplits, NamedTriplet, Task};
use crate::error::{Error, Result};
use crate::model::{EmbeddingTables, ModelKind, NormOrder};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub num_entities: usize,
    pub num_relations: usize,
    /// Number of training triplets.
    pub num_triplets: usize,
    /// Share of entities held out as OOKG, in (0, 1).
    pub ookg_fraction: f64,
    pub task: Task,
    /// Dimension of the hidden generating model.
    pub latent_dim: usize,
    /// A tail is drawn among this many nearest entities to `h + r`.
    pub neighborhood: usize,
    /// Share of each OOKG entity's triplets placed in test.
    pub test_share: f64,
    /// Positive validation triplets; defaults to a tenth of `num_triplets`.
    pub valid_size: Option<usize>,
    /// Zipf exponent of entity popularity; 0 gives uniform popularity.
    pub skew: f64,
    /// Share of training triplets whose tail is drawn uniformly at random.
    pub noise: f64,
    /// Expected triplets per OOKG entity, as a multiple of the mean
    /// training degree.
    pub ookg_degree: f64,
}

impl SyntheticConfig {
    pub fn new(seed: u64, num_entities: usize, num_relations: usize, num_triplets: usize, ookg_fraction: f64) -> Self {
        SyntheticConfig {
            seed,
            num_entities,
            num_relations,
            num_triplets,
            ookg_fraction,
            task: Task::LinkPrediction,
            latent_dim: 8,
            neighborhood: 8,
            test_share: 0.2,
            valid_size: None,
            skew: 1.2,
            noise: 0.1,
            ookg_degree: 3.0,
        }
    }

    pub fn with_task(mut self, task: Task) -> Self {
        self.task = task;
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.ookg_fraction > 0.0 && self.ookg_fraction < 1.0) {
            return Err(Error::Config(format!(
                "ookg fraction must lie in (0, 1), got {}",
                self.ookg_fraction
            )));
        }
        if self.num_entities < 4 || self.num_relations == 0 || self.num_triplets == 0 {
            return Err(Error::Config(
                "need at least 4 entities, 1 relation and 1 triplet".into(),
            ));
        }
        if self.latent_dim == 0 || self.neighborhood == 0 {
            return Err(Error::Config("latent dimension and neighborhood must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.noise) || !(self.skew >= 0.0) || !(self.ookg_degree > 0.0) {
            return Err(Error::Config("noise must lie in [0, 1], skew ≥ 0, ookg degree > 0".into()));
        }
        if !(0.0..1.0).contains(&self.test_share) {
            return Err(Error::Config(format!("test share must lie in [0, 1), got {}", self.test_share)));
        }
        Ok(())
    }
}

/// Link-prediction splits with default generator settings.
pub fn generate_synthetic_splits(
    seed: u64,
    num_entities: usize,
    num_relations: usize,
    num_triplets: usize,
    ookg_fraction: f64,
) -> Result<BenchmarkSplits> {
    generate_synthetic(&SyntheticConfig::new(seed, num_entities, num_relations, num_triplets, ookg_fraction))
}

type Raw = (u32, u32, u32);

struct Latent {
    pos: Vec<Vec<f64>>,
    rel: Vec<Vec<f64>>,
}

impl Latent {
    /// The `m` entities of `pool` nearest to `target`, skipping `exclude`.
    fn nearest(&self, target: &[f64], pool: &[u32], exclude: u32, m: usize) -> Vec<u32> {
        let mut scored: Vec<(f64, u32)> = pool
            .iter()
            .filter(|&&e| e != exclude)
            .map(|&e| {
                let d: f64 = self.pos[e as usize].iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, e)
            })
            .collect();
        let m = m.min(scored.len());
        if m == 0 {
            return Vec::new();
        }
        scored.select_nth_unstable_by(m - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        scored.truncate(m);
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        scored.into_iter().map(|p| p.1).collect()
    }

    fn shifted(&self, e: u32, r: u32, sign: f64) -> Vec<f64> {
        self.pos[e as usize].iter().zip(&self.rel[r as usize]).map(|(p, q)| p + sign * q).collect()
    }
}

struct Neighborhoods<'a> {
    latent: &'a Latent,
    pool: &'a [u32],
    m: usize,
    cache: HashMap<(u32, u32, bool), Vec<u32>>,
}

impl Neighborhoods<'_> {
    /// Plausible tails of `(e, r, ?)` (`forward`) or heads of `(?, r, e)`.
    fn get(&mut self, e: u32, r: u32, forward: bool) -> &[u32] {
        let (latent, pool, m) = (self.latent, self.pool, self.m);
        self.cache.entry((e, r, forward)).or_insert_with(|| {
            let target = latent.shifted(e, r, if forward { 1.0 } else { -1.0 });
            latent.nearest(&target, pool, e, m)
        })
    }
}

fn pick_popular(cands: &[u32], popularity: &[f64], rng: &mut ChaCha8Rng) -> Option<u32> {
    let total: f64 = cands.iter().map(|&e| popularity[e as usize]).sum();
    let mut x = rng.gen_range(0.0..1.0) * total;
    for &e in cands {
        x -= popularity[e as usize];
        if x < 0.0 {
            return Some(e);
        }
    }
    cands.last().copied()
}

fn name(t: Raw, label: Option<bool>) -> NamedTriplet {
    let n = NamedTriplet::new(format!("e{}", t.0), format!("r{}", t.1), format!("e{}", t.2));
    match label {
        Some(l) => n.labeled(l),
        None => n,
    }
}

/// Deterministic splits for the given configuration. Fails when the
/// parameters cannot produce the requested number of distinct triplets.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<BenchmarkSplits> {
    config.check()?;
    let mut rng = stream_rng(config.seed, Stream::Synthetic);
    let n = config.num_entities;
    let k = config.latent_dim;

    let latent = Latent {
        pos: (0..n).map(|_| (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect(),
        rel: (0..config.num_relations)
            .map(|_| (0..k).map(|_| rng.gen_range(-0.5..0.5)).collect())
            .collect(),
    };
    // Zipf popularity over a random ranking
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(&mut rng);
    let mut popularity = vec![0.0; n];
    for (rank, &e) in order.iter().enumerate() {
        popularity[e as usize] = ((rank + 1) as f64).powf(-config.skew);
    }
    let n_ookg = ((n as f64 * config.ookg_fraction).round() as usize).clamp(1, n - 3);
    order.shuffle(&mut rng);
    let mut ookg: Vec<u32> = order[..n_ookg].to_vec();
    let mut ikg: Vec<u32> = order[n_ookg..].to_vec();
    ookg.sort_unstable();
    ikg.sort_unstable();

    let num_rel = config.num_relations as u32;
    let mut known: HashSet<Raw> = HashSet::new();

    // training graph: both endpoints favor popular entities
    let head_pick = WeightedIndex::new(ikg.iter().map(|&e| popularity[e as usize])).expect("positive weights");
    let mut hoods = Neighborhoods {
        latent: &latent,
        pool: &ikg,
        m: config.neighborhood,
        cache: HashMap::new(),
    };
    let mut train: Vec<Raw> = Vec::with_capacity(config.num_triplets);
    let max_attempts = 100 * config.num_triplets + 1000;
    let mut attempts = 0;
    while train.len() < config.num_triplets {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::Config(format!(
                "could only generate {} of {} distinct training triplets",
                train.len(),
                config.num_triplets
            )));
        }
        let h = ikg[head_pick.sample(&mut rng)];
        let r = rng.gen_range(0..num_rel);
        let t = if rng.gen_bool(config.noise) {
            *ikg.choose(&mut rng).unwrap()
        } else {
            let Some(t) = pick_popular(hoods.get(h, r, true), &popularity, &mut rng) else {
                continue;
            };
            t
        };
        if t == h {
            continue;
        }
        if known.insert((h, r, t)) {
            train.push((h, r, t));
        }
    }

    // entities actually present in training
    let mut in_train = vec![false; n];
    for &(h, _, t) in &train {
        in_train[h as usize] = true;
        in_train[t as usize] = true;
    }
    let ikg: Vec<u32> = ikg.into_iter().filter(|&e| in_train[e as usize]).collect();
    if ikg.len() < 2 {
        return Err(Error::Config("training graph has fewer than two entities".into()));
    }
    let mut hoods = Neighborhoods {
        latent: &latent,
        pool: &ikg,
        m: config.neighborhood,
        cache: HashMap::new(),
    };

    // OOKG triplets, split between aux and test
    let avg_degree = 2.0 * train.len() as f64 / ikg.len() as f64;
    let mean_pop = ikg.iter().map(|&e| popularity[e as usize]).sum::<f64>() / ikg.len() as f64;
    let mut aux: Vec<Raw> = Vec::new();
    let mut test_pos: Vec<Raw> = Vec::new();
    for &e in &ookg {
        let rel_pop = popularity[e as usize] / mean_pop;
        let scale = config.ookg_degree * avg_degree;
        let target = (scale * (0.5 + 0.5 * rel_pop)).round().clamp(2.0, 3.0 * scale.max(2.0)) as usize;
        let mut mine: Vec<Raw> = Vec::with_capacity(target);
        let mut tries = 0;
        while mine.len() < target && tries < 50 * target {
            tries += 1;
            let r = rng.gen_range(0..num_rel);
            let forward = rng.gen_bool(0.5);
            let Some(&other) = hoods.get(e, r, forward).choose(&mut rng) else {
                continue;
            };
            let t = if forward { (e, r, other) } else { (other, r, e) };
            if known.insert(t) {
                mine.push(t);
            }
        }
        if mine.is_empty() {
            return Err(Error::Config(format!("OOKG entity e{e} received no aux neighbor")));
        }
        let n_test = if mine.len() < 2 {
            0
        } else {
            ((mine.len() as f64 * config.test_share).round() as usize).clamp(1, mine.len() - 1)
        };
        let n_test = if config.test_share == 0.0 { 0 } else { n_test };
        test_pos.extend_from_slice(&mine[..n_test]);
        aux.extend_from_slice(&mine[n_test..]);
    }

    // held-out IKG triplets for validation
    let valid_size = config.valid_size.unwrap_or((config.num_triplets / 10).max(1));
    let mut valid_pos: Vec<Raw> = Vec::with_capacity(valid_size);
    let mut tries = 0;
    while valid_pos.len() < valid_size && tries < 100 * valid_size + 1000 {
        tries += 1;
        let h = *ikg.choose(&mut rng).unwrap();
        let r = rng.gen_range(0..num_rel);
        let Some(&t) = hoods.get(h, r, true).choose(&mut rng) else {
            continue;
        };
        if known.insert((h, r, t)) {
            valid_pos.push((h, r, t));
        }
    }

    let (valid, test): (Vec<NamedTriplet>, Vec<NamedTriplet>) = match config.task {
        Task::LinkPrediction => (
            valid_pos.iter().map(|&t| name(t, None)).collect(),
            test_pos.iter().map(|&t| name(t, None)).collect(),
        ),
        Task::Classification => {
            let is_ikg = {
                let mut m = vec![false; n];
                ikg.iter().for_each(|&e| m[e as usize] = true);
                m
            };
            let mut corrupt = |t: Raw, rng: &mut ChaCha8Rng| -> Option<Raw> {
                for _ in 0..100 {
                    let c = *ikg.choose(rng).unwrap();
                    // replace an IKG side; both sides are IKG in validation
                    let neg = if is_ikg[t.2 as usize] && (rng.gen_bool(0.5) || !is_ikg[t.0 as usize]) {
                        (t.0, t.1, c)
                    } else {
                        (c, t.1, t.2)
                    };
                    if !known.contains(&neg) {
                        known.insert(neg);
                        return Some(neg);
                    }
                }
                None
            };
            let mut labeled = |pos: &[Raw], rng: &mut ChaCha8Rng| -> Vec<NamedTriplet> {
                let mut out = Vec::with_capacity(2 * pos.len());
                for &t in pos {
                    out.push(name(t, Some(true)));
                    if let Some(neg) = corrupt(t, rng) {
                        out.push(name(neg, Some(false)));
                    }
                }
                out
            };
            let v = labeled(&valid_pos, &mut rng);
            let t = labeled(&test_pos, &mut rng);
            (v, t)
        }
    };

    let train: Vec<NamedTriplet> = train.iter().map(|&t| name(t, None)).collect();
    let aux: Vec<NamedTriplet> = aux.iter().map(|&t| name(t, None)).collect();
    Ok(BenchmarkSplits::from_named(config.task, &train, &aux, &valid, &test))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    pub seed: u64,
    pub dim: usize,
    pub num_relations: usize,
    /// IKG anchors; each spawns children and grandchildren along every relation.
    pub num_anchors: usize,
    pub num_ookg: usize,
    /// Anchor coordinates are drawn from `[-extent, extent]`.
    pub extent: i64,
    /// Relation coordinates are drawn from `[-step, step]`.
    pub step: i64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            seed: 0,
            dim: 8,
            num_relations: 4,
            num_anchors: 20,
            num_ookg: 10,
            extent: 1000,
            step: 20,
        }
    }
}

/// A benchmark plus TransE tables that score every positive at distance 0.
#[derive(Debug, Clone)]
pub struct PlantedKg {
    pub splits: BenchmarkSplits,
    pub tables: EmbeddingTables,
}

struct Points {
    index: HashMap<Vec<i64>, u32>,
    coords: Vec<Vec<i64>>,
    ookg: Vec<bool>,
}

impl Points {
    fn get_or_add(&mut self, x: Vec<i64>) -> u32 {
        if let Some(&id) = self.index.get(&x) {
            return id;
        }
        let id = self.coords.len() as u32;
        self.index.insert(x.clone(), id);
        self.coords.push(x);
        self.ookg.push(false);
        id
    }
}

fn add(a: &[i64], b: &[i64], sign: i64) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + sign * y).collect()
}

fn l1(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// A graph where every positive triplet is an exact integer translation,
/// with negatives kept at L1 distance in `[F, 2F)` for a data-driven `F`.
pub fn generate_planted(config: &PlantedConfig, task: Task) -> Result<PlantedKg> {
    if config.dim == 0 || config.num_relations < 2 || config.num_anchors == 0 || config.num_ookg == 0 {
        return Err(Error::Config(
            "planted graph needs dim ≥ 1, ≥ 2 relations, ≥ 1 anchor and ≥ 1 OOKG entity".into(),
        ));
    }
    if config.step < 1 || config.extent < 1 {
        return Err(Error::Config("extent and step must be positive".into()));
    }
    let mut rng = stream_rng(config.seed, Stream::Synthetic);
    let d = config.dim;
    let nr = config.num_relations;
    let draw = |lim: i64, rng: &mut ChaCha8Rng| -> Vec<i64> { (0..d).map(|_| rng.gen_range(-lim..=lim)).collect() };

    // relations: distinct, nonzero, and no pair cancels out
    let mut rels: Vec<Vec<i64>> = Vec::with_capacity(nr);
    let mut guard = 0;
    while rels.len() < nr {
        guard += 1;
        if guard > 10_000 {
            return Err(Error::Config("could not draw distinct relation vectors; raise step".into()));
        }
        let r = draw(config.step, &mut rng);
        let cancels = rels.iter().any(|q| q == &r || add(q, &r, 1).iter().all(|&x| x == 0));
        if r.iter().all(|&x| x == 0) || add(&r, &r, 1).iter().all(|&x| x == 0) || cancels {
            continue;
        }
        rels.push(r);
    }

    let mut pts = Points {
        index: HashMap::new(),
        coords: Vec::new(),
        ookg: Vec::new(),
    };
    // OOKG anchors first so no IKG construction can claim their points
    let mut ookg = Vec::with_capacity(config.num_ookg);
    while ookg.len() < config.num_ookg {
        let x = draw(config.extent, &mut rng);
        if pts.index.contains_key(&x) {
            continue;
        }
        let id = pts.get_or_add(x);
        pts.ookg[id as usize] = true;
        ookg.push(id);
    }

    let mut train: Vec<Raw> = Vec::new();
    let mut train_set: HashSet<Raw> = HashSet::new();
    // adds (x, r, x + r) unless it would touch an OOKG point
    let mut link = |pts: &mut Points, train: &mut Vec<Raw>, x: Vec<i64>, r: usize| -> Option<(u32, u32)> {
        let y = add(&x, &rels[r], 1);
        if pts.index.get(&x).is_some_and(|&i| pts.ookg[i as usize])
            || pts.index.get(&y).is_some_and(|&i| pts.ookg[i as usize])
        {
            return None;
        }
        let h = pts.get_or_add(x);
        let t = pts.get_or_add(y);
        if train_set.insert((h, r as u32, t)) {
            train.push((h, r as u32, t));
        }
        Some((h, t))
    };

    let mut anchor_edges: Vec<Vec<Raw>> = Vec::new();
    for _ in 0..config.num_anchors {
        let a = draw(config.extent, &mut rng);
        let mut edges = Vec::new();
        for j in 0..nr {
            let Some((h, c)) = link(&mut pts, &mut train, a.clone(), j) else {
                continue;
            };
            edges.push((h, j as u32, c));
            let cx = pts.coords[c as usize].clone();
            for k in 0..nr {
                link(&mut pts, &mut train, cx.clone(), k);
            }
        }
        anchor_edges.push(edges);
    }

    // OOKG neighborhoods: every relation as head, one as tail
    let mut aux: Vec<Raw> = Vec::new();
    let mut test_pos: Vec<Raw> = Vec::new();
    for &e in &ookg {
        let ex = pts.coords[e as usize].clone();
        let mut heads: Vec<Raw> = Vec::new();
        for j in 0..nr {
            let px = add(&ex, &rels[j], 1);
            // give the partner a training edge that avoids OOKG points
            let mut ok = None;
            for k in 0..nr {
                if let Some((p, _)) = link(&mut pts, &mut train, px.clone(), k) {
                    ok = Some(p);
                    break;
                }
            }
            if let Some(p) = ok {
                heads.push((e, j as u32, p));
            }
        }
        let j = rng.gen_range(0..nr);
        let qx = add(&ex, &rels[j], -1);
        let k = (j + 1 + rng.gen_range(0..nr - 1)) % nr;
        let tail_edge = link(&mut pts, &mut train, qx, k).map(|(q, _)| (q, j as u32, e));
        if heads.len() < 2 {
            return Err(Error::Config(format!("OOKG point {e} has too few usable neighbors")));
        }
        heads.shuffle(&mut rng);
        test_pos.push(heads[0]);
        aux.extend_from_slice(&heads[1..]);
        aux.extend(tail_edge);
    }

    // hold out at most one anchor edge per anchor for validation, keeping
    // both endpoints in the training graph
    let mut degree: HashMap<u32, usize> = HashMap::new();
    for &(h, _, t) in &train {
        *degree.entry(h).or_default() += 1;
        *degree.entry(t).or_default() += 1;
    }
    let mut valid_pos: Vec<Raw> = Vec::new();
    for edges in &anchor_edges {
        if let Some(&t) = edges.choose(&mut rng) {
            if degree[&t.0] >= 2 && degree[&t.2] >= 2 && rng.gen_bool(0.5) {
                *degree.get_mut(&t.0).unwrap() -= 1;
                *degree.get_mut(&t.2).unwrap() -= 1;
                valid_pos.push(t);
            }
        }
    }
    if valid_pos.is_empty() {
        let t = anchor_edges.iter().flatten().find(|t| degree[&t.0] >= 2 && degree[&t.2] >= 2);
        valid_pos.extend(t.copied());
    }
    let held: HashSet<Raw> = valid_pos.iter().copied().collect();
    train.retain(|t| !held.contains(t));

    let ikg: Vec<u32> = {
        let mut s: Vec<u32> = train.iter().flat_map(|t| [t.0, t.2]).collect();
        s.sort_unstable();
        s.dedup();
        s
    };

    let (valid, test) = match task {
        Task::LinkPrediction => (
            valid_pos.iter().map(|&t| name(t, None)).collect::<Vec<_>>(),
            test_pos.iter().map(|&t| name(t, None)).collect::<Vec<_>>(),
        ),
        Task::Classification => {
            let dist = |h: u32, r: u32, t: u32| {
                l1(&add(&pts.coords[h as usize], &rels[r as usize], 1), &pts.coords[t as usize])
            };
            let mut sample: Vec<i64> = (0..256)
                .map(|_| {
                    let h = *ikg.choose(&mut rng).unwrap();
                    let t = *ikg.choose(&mut rng).unwrap();
                    dist(h, rng.gen_range(0..nr as u32), t)
                })
                .collect();
            sample.sort_unstable();
            let floor = sample[sample.len() / 4].max(1);
            let corrupt = |t: Raw, rng: &mut ChaCha8Rng| -> Result<Raw> {
                for _ in 0..10_000 {
                    let c = *ikg.choose(rng).unwrap();
                    let dd = dist(t.0, t.1, c);
                    if dd >= floor && dd < 2 * floor {
                        return Ok((t.0, t.1, c));
                    }
                }
                Err(Error::Config("could not draw a separable negative".into()))
            };
            let labeled = |pos: &[Raw], rng: &mut ChaCha8Rng| -> Result<Vec<NamedTriplet>> {
                let mut out = Vec::new();
                for &t in pos {
                    out.push(name(t, Some(true)));
                    out.push(name(corrupt(t, rng)?, Some(false)));
                }
                Ok(out)
            };
            (labeled(&valid_pos, &mut rng)?, labeled(&test_pos, &mut rng)?)
        }
    };

    let train_n: Vec<NamedTriplet> = train.iter().map(|&t| name(t, None)).collect();
    let aux_n: Vec<NamedTriplet> = aux.iter().map(|&t| name(t, None)).collect();
    let splits = BenchmarkSplits::from_named(task, &train_n, &aux_n, &valid, &test);

    let mut entities = Vec::with_capacity(splits.num_entities() * d);
    for nm in splits.vocab.entity_names() {
        let id: usize = nm[1..].parse().expect("generated name");
        entities.extend(pts.coords[id].iter().map(|&x| x as f64));
    }
    let mut relations = Vec::with_capacity(splits.num_relations() * d);
    for nm in splits.vocab.relation_names() {
        let id: usize = nm[1..].parse().expect("generated name");
        relations.extend(rels[id].iter().map(|&x| x as f64));
    }
    let tables = EmbeddingTables::from_parts(ModelKind::TransE, NormOrder::L1, d, config.seed, entities, relations)?;
    Ok(PlantedKg { splits, tables })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_example_validates() {
        let s = generate_synthetic_splits(1, 50, 5, 300, 0.1).unwrap();
        let report = s.validate();
        assert!(report.is_ok(), "{}", report.summary(&s.vocab));
        assert_eq!(s.train.len(), 300);
        assert!(!s.test.is_empty() && !s.aux.is_empty() && !s.valid.is_empty());
        assert!(s.dangling_entities().is_empty());
        assert!(s.ookg_entities().len() >= 1);
    }

    #[test]
    fn fraction_bounds() {
        assert!(generate_synthetic_splits(1, 50, 5, 300, 0.0).is_err());
        assert!(generate_synthetic_splits(1, 50, 5, 300, 1.0).is_err());
        assert!(generate_synthetic_splits(1, 50, 5, 300, f64::NAN).is_err());
    }

    #[test]
    fn deterministic() {
        let a = generate_synthetic_splits(7, 60, 4, 400, 0.2).unwrap();
        let b = generate_synthetic_splits(7, 60, 4, 400, 0.2).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_splits(8, 60, 4, 400, 0.2).unwrap();
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn infeasible_size_errors() {
        // 10 entities, 1 relation, neighborhood 8: at most ~72 distinct triplets
        assert!(generate_synthetic_splits(1, 10, 1, 5000, 0.2).is_err());
    }

    #[test]
    fn classification_has_both_labels() {
        let s = generate_synthetic(&SyntheticConfig::new(2, 80, 4, 500, 0.1).with_task(Task::Classification)).unwrap();
        assert!(s.validate().is_ok());
        for split in [&s.valid, &s.test] {
            assert!(split.iter().any(|l| l.positive));
            assert!(split.iter().any(|l| !l.positive));
        }
    }

    #[test]
    fn planted_positives_fit_exactly() {
        for task in [Task::LinkPrediction, Task::Classification] {
            let kg = generate_planted(&PlantedConfig::default(), task).unwrap();
            let s = &kg.splits;
            assert!(s.validate().is_ok(), "{}", s.validate().summary(&s.vocab));
            let positives = s
                .train
                .iter()
                .chain(&s.aux)
                .chain(s.valid.iter().chain(&s.test).filter(|l| l.positive).map(|l| &l.triplet));
            for t in positives {
                assert_eq!(kg.tables.distance_ids(t.head, t.relation, t.tail).unwrap(), 0.0);
            }
            for l in s.valid.iter().chain(&s.test).filter(|l| !l.positive) {
                let t = l.triplet;
                assert!(kg.tables.distance_ids(t.head, t.relation, t.tail).unwrap() >= 1.0);
            }
        }
    }
}
