//! Vocabulary, triplets, and the indexed triplet store.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type EntityId = u32;
pub type RelationId = u32;

/// Name to dense id mapping for entities and relations.
///
/// Ids are assigned in first-seen order, so reading the same files in the same
/// order always yields the same ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    entities: Vec<String>,
    relations: Vec<String>,
    entity_index: HashMap<String, EntityId>,
    relation_index: HashMap<String, RelationId>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern_entity(&mut self, name: &str) -> EntityId {
        intern(&mut self.entities, &mut self.entity_index, name)
    }

    pub fn intern_relation(&mut self, name: &str) -> RelationId {
        intern(&mut self.relations, &mut self.relation_index, name)
    }

    pub fn entity_id(&self, name: &str) -> Option<EntityId> {
        self.entity_index.get(name).copied()
    }

    pub fn relation_id(&self, name: &str) -> Option<RelationId> {
        self.relation_index.get(name).copied()
    }

    pub fn entity_name(&self, id: EntityId) -> &str {
        &self.entities[id as usize]
    }

    pub fn relation_name(&self, id: RelationId) -> &str {
        &self.relations[id as usize]
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn entity_names(&self) -> &[String] {
        &self.entities
    }

    pub fn relation_names(&self) -> &[String] {
        &self.relations
    }
}

fn intern(names: &mut Vec<String>, index: &mut HashMap<String, u32>, name: &str) -> u32 {
    if let Some(&id) = index.get(name) {
        return id;
    }
    let id = names.len() as u32;
    names.push(name.to_owned());
    index.insert(name.to_owned(), id);
    id
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triplet {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

impl Triplet {
    pub const fn new(head: EntityId, relation: RelationId, tail: EntityId) -> Self {
        Self {
            head,
            relation,
            tail,
        }
    }
}

/// Which slot of a triplet the queried entity occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// The entity is the head; the neighbor is the tail.
    AsHead,
    /// The entity is the tail; the neighbor is the head.
    AsTail,
}

/// One element of an entity's neighbor set: the other entity, the connecting
/// relation, and which side the queried entity sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Neighbor {
    pub entity: EntityId,
    pub relation: RelationId,
    pub direction: Direction,
}

/// Immutable, deduplicated set of triplets with per-entity adjacency.
#[derive(Debug, Clone)]
pub struct TripleStore {
    num_entities: usize,
    num_relations: usize,
    triplets: Vec<Triplet>,
    set: HashSet<Triplet>,
    out_index: Vec<Vec<(RelationId, EntityId)>>,
    in_index: Vec<Vec<(EntityId, RelationId)>>,
}

impl TripleStore {
    /// Builds the store, keeping the first occurrence of each duplicate.
    pub fn build<I>(num_entities: usize, num_relations: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = Triplet>,
    {
        let mut store = TripleStore {
            num_entities,
            num_relations,
            triplets: Vec::new(),
            set: HashSet::new(),
            out_index: vec![Vec::new(); num_entities],
            in_index: vec![Vec::new(); num_entities],
        };
        for t in triplets {
            if t.head as usize >= num_entities || t.tail as usize >= num_entities {
                return Err(Error::Input(format!(
                    "entity id out of range in {t:?} (vocabulary has {num_entities} entities)"
                )));
            }
            if t.relation as usize >= num_relations {
                return Err(Error::Input(format!(
                    "relation id out of range in {t:?} (vocabulary has {num_relations} relations)"
                )));
            }
            if store.set.insert(t) {
                store.triplets.push(t);
                store.out_index[t.head as usize].push((t.relation, t.tail));
                store.in_index[t.tail as usize].push((t.head, t.relation));
            }
        }
        Ok(store)
    }

    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    pub fn num_relations(&self) -> usize {
        self.num_relations
    }

    pub fn triplets(&self) -> &[Triplet] {
        &self.triplets
    }

    pub fn contains(&self, head: EntityId, relation: RelationId, tail: EntityId) -> bool {
        self.set.contains(&Triplet::new(head, relation, tail))
    }

    pub fn outgoing(&self, e: EntityId) -> &[(RelationId, EntityId)] {
        &self.out_index[e as usize]
    }

    pub fn incoming(&self, e: EntityId) -> &[(EntityId, RelationId)] {
        &self.in_index[e as usize]
    }

    /// Number of incident triplets. A self-loop counts twice.
    pub fn degree(&self, e: EntityId) -> usize {
        self.out_index[e as usize].len() + self.in_index[e as usize].len()
    }

    /// Outgoing neighbors first (entity as head), then incoming ones, each in
    /// insertion order.
    pub fn neighbors_of(&self, e: EntityId) -> impl Iterator<Item = Neighbor> + '_ {
        let outgoing = self.outgoing(e).iter().map(|&(relation, tail)| Neighbor {
            entity: tail,
            relation,
            direction: Direction::AsHead,
        });
        let incoming = self.incoming(e).iter().map(|&(head, relation)| Neighbor {
            entity: head,
            relation,
            direction: Direction::AsTail,
        });
        outgoing.chain(incoming)
    }
}
