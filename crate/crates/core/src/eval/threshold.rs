use std::cmp::Ordering;

use crate::dataset::LabeledTriplet;
use crate::error::{Error, Result};
use crate::kg::RelationId;
use crate::model::EmbeddingTables;

/// Per-relation distance cutoffs: a triplet is classified true iff its
/// distance is at most the cutoff of its relation.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    per_relation: Vec<Option<f64>>,
    /// Used for relations absent from the validation set.
    pub global: f64,
}

impl Thresholds {
    pub fn get(&self, r: RelationId) -> f64 {
        self.per_relation
            .get(r as usize)
            .copied()
            .flatten()
            .unwrap_or(self.global)
    }

    pub fn tuned(&self, r: RelationId) -> Option<f64> {
        self.per_relation.get(r as usize).copied().flatten()
    }

    pub fn classify(&self, r: RelationId, distance: f64) -> bool {
        distance <= self.get(r)
    }
}

/// Accuracy-maximizing cutoff for `(distance, label)` samples.
///
/// Candidates are `-∞`, the midpoints between consecutive distinct sorted
/// distances, and `+∞`. Ties go to the smallest cutoff. Returns the cutoff
/// and the number of correctly classified samples.
pub fn best_threshold(samples: &[(f64, bool)]) -> (f64, usize) {
    let mut sorted: Vec<(f64, bool)> = samples.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let mut correct = sorted.iter().filter(|s| !s.1).count();
    let (mut best, mut best_correct) = (f64::NEG_INFINITY, correct);
    let mut i = 0;
    while i < sorted.len() {
        let d = sorted[i].0;
        let mut j = i;
        while j < sorted.len() && sorted[j].0 == d {
            correct = if sorted[j].1 { correct + 1 } else { correct - 1 };
            j += 1;
        }
        let cut = if j < sorted.len() { (d + sorted[j].0) / 2.0 } else { f64::INFINITY };
        if correct > best_correct {
            best = cut;
            best_correct = correct;
        }
        i = j;
    }
    (best, best_correct)
}

/// Tunes one cutoff per relation on labeled validation triplets (all
/// entities must be in the table) plus a global fallback.
pub fn tune_thresholds(tables: &EmbeddingTables, valid: &[LabeledTriplet]) -> Result<Thresholds> {
    if valid.is_empty() {
        return Err(Error::Input("threshold tuning needs a non-empty validation set".into()));
    }
    let mut by_rel: Vec<Vec<(f64, bool)>> = vec![Vec::new(); tables.num_relations()];
    let mut all = Vec::with_capacity(valid.len());
    for l in valid {
        let t = l.triplet;
        let d = tables.distance_ids(t.head, t.relation, t.tail)?;
        by_rel[t.relation as usize].push((d, l.positive));
        all.push((d, l.positive));
    }
    let per_relation = by_rel
        .iter()
        .map(|s| (!s.is_empty()).then(|| best_threshold(s).0))
        .collect();
    Ok(Thresholds {
        per_relation,
        global: best_threshold(&all).0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable() {
        let s = [(1.0, true), (2.0, true), (4.0, false), (5.0, false)];
        assert_eq!(best_threshold(&s), (3.0, 4));
    }

    #[test]
    fn degenerate_labels() {
        assert_eq!(best_threshold(&[(1.0, true), (3.0, true)]), (f64::INFINITY, 2));
        assert_eq!(best_threshold(&[(1.0, false), (3.0, false)]), (f64::NEG_INFINITY, 2));
    }

    #[test]
    fn equal_distances_are_not_split() {
        let s = [(1.0, true), (1.0, false), (1.0, true), (2.0, false)];
        assert_eq!(best_threshold(&s), (1.5, 3));
    }

    #[test]
    fn global_fallback() {
        use crate::kg::Triplet;
        use crate::model::{ModelKind, NormOrder};
        let t = EmbeddingTables::from_parts(ModelKind::TransE, NormOrder::L1, 1, 0, vec![0.0, 1.0, 4.0], vec![0.0, 0.0])
            .unwrap();
        let valid = [
            LabeledTriplet { triplet: Triplet::new(0, 0, 1), positive: true },
            LabeledTriplet { triplet: Triplet::new(0, 0, 2), positive: false },
        ];
        let th = tune_thresholds(&t, &valid).unwrap();
        assert_eq!(th.tuned(0), Some(2.5));
        assert_eq!(th.tuned(1), None);
        assert_eq!(th.get(1), 2.5);
        assert!(th.classify(0, 1.0) && !th.classify(0, 3.0));
        assert!(tune_thresholds(&t, &[]).is_err());
    }
}
