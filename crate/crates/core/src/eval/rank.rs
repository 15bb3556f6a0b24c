use crate::dataset::FilterSet;
use crate::error::{Error, Result};
use crate::kg::{EntityId, RelationId, Triplet};
use crate::model::EmbeddingTables;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Head,
    Tail,
}

/// A link-prediction query: the known side is given as a vector (a table row
/// or an estimated embedding); candidates fill the missing slot.
#[derive(Debug, Clone, Copy)]
pub struct LpQuery<'a> {
    pub known_entity: EntityId,
    pub known: &'a [f64],
    pub relation: RelationId,
    pub missing: Slot,
    pub truth: EntityId,
}

impl LpQuery<'_> {
    fn triplet_with(&self, candidate: EntityId) -> Triplet {
        match self.missing {
            Slot::Tail => Triplet::new(self.known_entity, self.relation, candidate),
            Slot::Head => Triplet::new(candidate, self.relation, self.known_entity),
        }
    }

    fn distance(&self, tables: &EmbeddingTables, candidate: EntityId) -> f64 {
        let c = tables.entity(candidate);
        match self.missing {
            Slot::Tail => tables.distance_raw(self.known, self.relation, c),
            Slot::Head => tables.distance_raw(c, self.relation, self.known),
        }
    }
}

/// Rank of the ground truth among `candidates` by descending score.
///
/// With a filter, every candidate other than the truth that forms a known
/// triplet is dropped first. Ties count as the mean of the best and worst
/// tied position.
pub fn filtered_rank(
    tables: &EmbeddingTables,
    query: &LpQuery<'_>,
    candidates: &[EntityId],
    filter: Option<&FilterSet>,
) -> Result<f64> {
    let mut truth_seen = false;
    let truth_dist = query.distance(tables, query.truth);
    if !truth_dist.is_finite() {
        return Err(Error::Numeric(format!("score of entity {}", query.truth)));
    }
    let (mut better, mut tied) = (0usize, 0usize);
    for &c in candidates {
        if c == query.truth {
            truth_seen = true;
            continue;
        }
        if let Some(f) = filter {
            if f.contains(&query.triplet_with(c)) {
                continue;
            }
        }
        let d = query.distance(tables, c);
        if d < truth_dist {
            better += 1;
        } else if d == truth_dist {
            tied += 1;
        }
    }
    if !truth_seen {
        return Err(Error::Input(format!(
            "ground truth {} is not among the ranking candidates",
            query.truth
        )));
    }
    Ok(1.0 + better as f64 + tied as f64 / 2.0)
}

/// Number of candidates left after filtering; the rank given to a query
/// whose known entity could not be embedded.
pub fn worst_rank(query: &LpQuery<'_>, candidates: &[EntityId], filter: Option<&FilterSet>) -> f64 {
    candidates
        .iter()
        .filter(|&&c| c == query.truth || filter.map_or(true, |f| !f.contains(&query.triplet_with(c))))
        .count() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelKind, NormOrder};

    // 1-d TransE: entity i sits at position pos[i]; relation is +0
    fn line(pos: &[f64]) -> EmbeddingTables {
        EmbeddingTables::from_parts(ModelKind::TransE, NormOrder::L1, 1, 0, pos.to_vec(), vec![0.0]).unwrap()
    }

    #[test]
    fn strict_best_is_rank_one() {
        let mut pos = vec![0.0];
        pos.extend((1..11).map(|i| i as f64));
        let t = line(&pos);
        let cands: Vec<u32> = (1..11).collect();
        let q = LpQuery { known_entity: 0, known: &[0.5], relation: 0, missing: Slot::Tail, truth: 1 };
        assert_eq!(filtered_rank(&t, &q, &cands, None).unwrap(), 1.0);
    }

    #[test]
    fn ties_take_mean_rank() {
        let t = line(&[0.0, 1.0, 1.0, 1.0, 5.0]);
        let cands = [1, 2, 3, 4];
        let q = LpQuery { known_entity: 0, known: &[0.0], relation: 0, missing: Slot::Tail, truth: 2 };
        assert_eq!(filtered_rank(&t, &q, &cands, None).unwrap(), 2.0);
    }

    #[test]
    fn filter_removes_known_triplets_but_not_truth() {
        let t = line(&[0.0, 1.0, 2.0, 3.0]);
        let cands = [1, 2, 3];
        let q = LpQuery { known_entity: 0, known: &[0.0], relation: 0, missing: Slot::Tail, truth: 3 };
        assert_eq!(filtered_rank(&t, &q, &cands, None).unwrap(), 3.0);
        let f: FilterSet = [Triplet::new(0, 0, 1), Triplet::new(0, 0, 3)].into_iter().collect();
        assert_eq!(filtered_rank(&t, &q, &cands, Some(&f)).unwrap(), 2.0);
        assert_eq!(worst_rank(&q, &cands, Some(&f)), 2.0);
        // head slot uses (candidate, r, known)
        let q = LpQuery { known_entity: 0, known: &[0.0], relation: 0, missing: Slot::Head, truth: 3 };
        let f: FilterSet = [Triplet::new(1, 0, 0)].into_iter().collect();
        assert_eq!(filtered_rank(&t, &q, &cands, Some(&f)).unwrap(), 2.0);
    }

    #[test]
    fn missing_truth_is_an_error() {
        let t = line(&[0.0, 1.0, 2.0]);
        let q = LpQuery { known_entity: 0, known: &[0.0], relation: 0, missing: Slot::Tail, truth: 2 };
        assert!(filtered_rank(&t, &q, &[1], None).is_err());
    }
}
