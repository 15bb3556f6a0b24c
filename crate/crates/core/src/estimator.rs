//! Closed-form candidate embeddings for an out-of-graph entity.
//!
//! Each auxiliary neighbor yields the unique vector that makes its triplet an
//! exact fit of the translational model:
//!
//! | entity is | TransE      | RotatE             |
//! |-----------|-------------|--------------------|
//! | head      | `t - r`     | `t ∘ e^{-iθ}`      |
//! | tail      | `h + r`     | `h ∘ e^{iθ}`       |

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kg::{Direction, EntityId, RelationId, TripleStore};
use crate::model::{compose, invert, EmbeddingTables};

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub vector: Vec<f64>,
    /// The IKG neighbor the estimate was computed from.
    pub source_entity: EntityId,
    pub source_relation: RelationId,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub entity: EntityId,
    pub candidates: Vec<Candidate>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// One candidate per usable aux neighbor of `e`, in neighbor order.
///
/// Neighbors that are themselves out-of-graph, or that fall outside the
/// table, are skipped. Fails if nothing usable remains.
pub fn estimate_candidates(
    tables: &EmbeddingTables,
    aux: &TripleStore,
    is_ikg: impl Fn(EntityId) -> bool,
    e: EntityId,
) -> Result<CandidateSet> {
    if (e as usize) >= aux.num_entities() {
        return Err(Error::Estimation {
            entity: e,
            reason: "entity outside the auxiliary store".into(),
        });
    }
    let mut candidates = Vec::new();
    let mut skipped = 0usize;
    for n in aux.neighbors_of(e) {
        let usable = is_ikg(n.entity)
            && (n.entity as usize) < tables.num_entities()
            && (n.relation as usize) < tables.num_relations();
        if !usable {
            skipped += 1;
            continue;
        }
        let other = tables.entity(n.entity);
        let rel = tables.relation(n.relation);
        let vector = match n.direction {
            Direction::AsHead => invert(tables.model, other, rel),
            Direction::AsTail => compose(tables.model, other, rel),
        };
        candidates.push(Candidate {
            vector,
            source_entity: n.entity,
            source_relation: n.relation,
            direction: n.direction,
        });
    }
    if skipped > 0 {
        log::warn!("entity {e}: skipped {skipped} aux neighbor(s) without a trained embedding");
    }
    if candidates.is_empty() {
        return Err(Error::Estimation {
            entity: e,
            reason: "no auxiliary neighbor with a trained embedding".into(),
        });
    }
    Ok(CandidateSet {
        entity: e,
        candidates,
    })
}

/// Keeps a uniform random subset of at most `k` candidates, preserving their
/// relative order. Returns the set unchanged when it already fits.
pub fn cap_neighbors<R: Rng + ?Sized>(set: &CandidateSet, k: usize, rng: &mut R) -> CandidateSet {
    assert!(k >= 1, "neighbor cap must be at least 1");
    if set.len() <= k {
        return set.clone();
    }
    let mut keep = sample(rng, set.len(), k).into_vec();
    keep.sort_unstable();
    CandidateSet {
        entity: set.entity,
        candidates: keep.into_iter().map(|i| set.candidates[i].clone()).collect(),
    }
}
