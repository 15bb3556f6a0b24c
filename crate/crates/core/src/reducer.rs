//! Collapses a candidate set into one embedding by weighted average.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::estimator::CandidateSet;
use crate::kg::{RelationId, TripleStore, Vocabulary};

/// `P(r2 | r1)`: among training entities whose neighbor set contains `r1`,
/// the fraction whose neighbor set also contains `r2`. Each entity counts
/// once per relation regardless of multiplicity or direction.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationCorrelation {
    num_relations: usize,
    /// Row `r1`, column `r2`.
    probs: Vec<f64>,
    support: Vec<usize>,
}

impl RelationCorrelation {
    pub fn build(train: &TripleStore) -> Self {
        let nr = train.num_relations();
        let mut co = vec![0usize; nr * nr];
        let mut rels: Vec<RelationId> = Vec::new();
        for e in 0..train.num_entities() as u32 {
            rels.clear();
            rels.extend(train.neighbors_of(e).map(|n| n.relation));
            rels.sort_unstable();
            rels.dedup();
            for &a in &rels {
                for &b in &rels {
                    co[a as usize * nr + b as usize] += 1;
                }
            }
        }
        let support: Vec<usize> = (0..nr).map(|r| co[r * nr + r]).collect();
        let probs = (0..nr * nr)
            .map(|i| {
                let s = support[i / nr];
                if s == 0 {
                    0.0
                } else {
                    co[i] as f64 / s as f64
                }
            })
            .collect();
        RelationCorrelation {
            num_relations: nr,
            probs,
            support,
        }
    }

    pub fn num_relations(&self) -> usize {
        self.num_relations
    }

    /// `P(r2 | r1)`.
    pub fn conditional(&self, r1: RelationId, r2: RelationId) -> f64 {
        self.probs[r1 as usize * self.num_relations + r2 as usize]
    }

    /// Number of training entities carrying `r`.
    pub fn support(&self, r: RelationId) -> usize {
        self.support[r as usize]
    }

    /// Header row of relation names, then one row per `r1`.
    pub fn to_csv(&self, vocab: &Vocabulary) -> String {
        let mut s = String::from("r1\\r2");
        for name in vocab.relation_names() {
            s.push(',');
            s.push_str(&csv_field(name));
        }
        s.push('\n');
        for r1 in 0..self.num_relations {
            s.push_str(&csv_field(vocab.relation_name(r1 as u32)));
            for r2 in 0..self.num_relations {
                write!(s, ",{}", self.probs[r1 * self.num_relations + r2]).unwrap();
            }
            s.push('\n');
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightScheme {
    /// `P(r_c | r_q) + P(r_q | r_c)` for query relation `r_q`.
    Correlation(RelationId),
    /// `log(d_c + δ)` with `d_c` the source entity's training degree.
    Degree(f64),
    Uniform,
}

/// Unnormalized degree weight `log(d + δ)`, clamped at zero.
pub fn degree_weight(degree: f64, delta: f64) -> f64 {
    (degree + delta).ln().max(0.0)
}

/// Normalized weight per candidate. Degenerate (all-zero) raw weights fall
/// back to uniform.
pub fn weights(
    scheme: WeightScheme,
    set: &CandidateSet,
    correlation: Option<&RelationCorrelation>,
    train: Option<&TripleStore>,
) -> Result<Vec<f64>> {
    let n = set.len();
    if n == 0 {
        return Err(Error::Input("cannot weight an empty candidate set".into()));
    }
    let raw: Vec<f64> = match scheme {
        WeightScheme::Uniform => return Ok(vec![1.0 / n as f64; n]),
        WeightScheme::Correlation(q) => {
            let corr = correlation
                .ok_or_else(|| Error::Input("correlation weights need the correlation matrix".into()))?;
            set.candidates
                .iter()
                .map(|c| corr.conditional(q, c.source_relation) + corr.conditional(c.source_relation, q))
                .collect()
        }
        WeightScheme::Degree(delta) => {
            if !(delta > 0.0) {
                return Err(Error::Config(format!("degree smoothing must be positive, got {delta}")));
            }
            let train = train.ok_or_else(|| Error::Input("degree weights need the training store".into()))?;
            set.candidates
                .iter()
                .map(|c| {
                    let d = if (c.source_entity as usize) < train.num_entities() {
                        train.degree(c.source_entity)
                    } else {
                        0
                    };
                    degree_weight(d as f64, delta)
                })
                .collect()
        }
    };
    let z: f64 = raw.iter().sum();
    if !(z > 0.0) || !z.is_finite() {
        log::warn!("entity {}: all raw weights are zero, using uniform weights", set.entity);
        return Ok(vec![1.0 / n as f64; n]);
    }
    Ok(raw.into_iter().map(|w| w / z).collect())
}

/// `Σ w_c · c` element-wise. Works for both models: a complex scaling by a
/// real weight is the same as scaling the interleaved parts.
pub fn reduce(set: &CandidateSet, weights: &[f64]) -> Result<Vec<f64>> {
    if weights.len() != set.len() || set.is_empty() {
        return Err(Error::Input(format!(
            "{} weights for {} candidates",
            weights.len(),
            set.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Input(format!("weights sum to {total}, expected 1")));
    }
    let mut out = vec![0.0; set.candidates[0].vector.len()];
    for (c, &w) in set.candidates.iter().zip(weights) {
        for (o, x) in out.iter_mut().zip(&c.vector) {
            *o += w * x;
        }
    }
    Ok(out)
}
