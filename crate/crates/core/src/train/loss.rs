//! Self-adversarial negative sampling loss.
//!
//! For a positive `(h, r, t)` with distance `D` and negatives with distances
//! `D'_i`:
//!
//! ```text
//! L = -log σ(γ - D) - Σ_i p_i · log σ(D'_i - γ),   p = softmax(-α · D')
//! ```
//!
//! `p` is a constant weight: no gradient flows through it.

use crate::kg::{EntityId, RelationId, Triplet};
use crate::model::{distance_with_grad, EmbeddingTables};

/// Dense gradient buffers shaped like the tables, with the touched rows
/// tracked so they can be cleared and regularized cheaply.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub entities: Vec<f64>,
    pub relations: Vec<f64>,
    entity_width: usize,
    dim: usize,
    entity_touched: Vec<bool>,
    relation_touched: Vec<bool>,
    touched_entities: Vec<EntityId>,
    touched_relations: Vec<RelationId>,
}

impl Gradients {
    pub fn zeros_like(t: &EmbeddingTables) -> Self {
        Gradients {
            entities: vec![0.0; t.entity_params().len()],
            relations: vec![0.0; t.relation_params().len()],
            entity_width: t.entity_width(),
            dim: t.dim,
            entity_touched: vec![false; t.num_entities()],
            relation_touched: vec![false; t.num_relations()],
            touched_entities: Vec::new(),
            touched_relations: Vec::new(),
        }
    }

    pub fn touched_entities(&self) -> &[EntityId] {
        &self.touched_entities
    }

    pub fn touched_relations(&self) -> &[RelationId] {
        &self.touched_relations
    }

    pub fn entity(&self, e: EntityId) -> &[f64] {
        let w = self.entity_width;
        &self.entities[e as usize * w..(e as usize + 1) * w]
    }

    pub fn relation(&self, r: RelationId) -> &[f64] {
        &self.relations[r as usize * self.dim..(r as usize + 1) * self.dim]
    }

    fn touch(&mut self, t: Triplet) {
        for e in [t.head, t.tail] {
            if !self.entity_touched[e as usize] {
                self.entity_touched[e as usize] = true;
                self.touched_entities.push(e);
            }
        }
        if !self.relation_touched[t.relation as usize] {
            self.relation_touched[t.relation as usize] = true;
            self.touched_relations.push(t.relation);
        }
    }

    /// Zeroes the touched rows.
    pub fn clear(&mut self) {
        let (w, d) = (self.entity_width, self.dim);
        for &e in &self.touched_entities {
            self.entities[e as usize * w..(e as usize + 1) * w].fill(0.0);
            self.entity_touched[e as usize] = false;
        }
        for &r in &self.touched_relations {
            self.relations[r as usize * d..(r as usize + 1) * d].fill(0.0);
            self.relation_touched[r as usize] = false;
        }
        self.touched_entities.clear();
        self.touched_relations.clear();
    }

    /// Adds `scale · ∂D(t)/∂θ` and returns `D(t)`.
    fn add_distance_grad(&mut self, tables: &EmbeddingTables, t: Triplet, scale: f64) -> f64 {
        self.touch(t);
        let (w, d) = (self.entity_width, self.dim);
        let h = tables.entity(t.head);
        let r = tables.relation(t.relation);
        let tl = tables.entity(t.tail);
        let mut gh = vec![0.0; w];
        let mut gr = vec![0.0; d];
        let mut gt = vec![0.0; w];
        let dist = distance_with_grad(tables.model, tables.norm, h, r, tl, scale, &mut gh, &mut gr, &mut gt);
        let add = |dst: &mut [f64], src: &[f64]| dst.iter_mut().zip(src).for_each(|(a, b)| *a += b);
        add(&mut self.entities[t.head as usize * w..(t.head as usize + 1) * w], &gh);
        add(&mut self.entities[t.tail as usize * w..(t.tail as usize + 1) * w], &gt);
        add(&mut self.relations[t.relation as usize * d..(t.relation as usize + 1) * d], &gr);
        dist
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)`, i.e. `-log σ(-x)`.
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Normalized `exp(-α · D_i)` weights, computed via log-sum-exp.
pub fn adversarial_weights(distances: &[f64], alpha: f64) -> Vec<f64> {
    let logits: Vec<f64> = distances.iter().map(|d| -alpha * d).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Loss for one positive and its negatives; adds `scale · ∂L/∂θ` into `grads`.
pub fn accumulate_loss(
    tables: &EmbeddingTables,
    positive: Triplet,
    negatives: &[Triplet],
    gamma: f64,
    alpha: f64,
    scale: f64,
    grads: &mut Gradients,
) -> f64 {
    let neg_dist: Vec<f64> = negatives
        .iter()
        .map(|n| tables.distance_raw(tables.entity(n.head), n.relation, tables.entity(n.tail)))
        .collect();
    let p = adversarial_weights(&neg_dist, alpha);

    let pos_dist = tables.distance_raw(
        tables.entity(positive.head),
        positive.relation,
        tables.entity(positive.tail),
    );
    let mut loss = softplus(pos_dist - gamma);
    grads.add_distance_grad(tables, positive, scale * sigmoid(pos_dist - gamma));

    for ((n, &d), &w) in negatives.iter().zip(&neg_dist).zip(&p) {
        loss += w * softplus(gamma - d);
        grads.add_distance_grad(tables, *n, -scale * w * sigmoid(gamma - d));
    }
    loss
}

/// Loss value and full gradient for a single positive.
pub fn self_adversarial_loss(
    tables: &EmbeddingTables,
    positive: Triplet,
    negatives: &[Triplet],
    gamma: f64,
    alpha: f64,
) -> (f64, Gradients) {
    let mut g = Gradients::zeros_like(tables);
    let loss = accumulate_loss(tables, positive, negatives, gamma, alpha, 1.0, &mut g);
    (loss, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelKind, NormOrder};

    fn line_tables(values: &[f64], rel: f64) -> EmbeddingTables {
        EmbeddingTables::from_parts(ModelKind::TransE, NormOrder::L1, 1, 0, values.to_vec(), vec![rel]).unwrap()
    }

    #[test]
    fn zero_temperature_is_uniform() {
        let p = adversarial_weights(&[0.3, 5.0, 11.0, 2.0], 0.0);
        assert!(p.iter().all(|&w| (w - 0.25).abs() < 1e-15));
    }

    #[test]
    fn weights_survive_large_logits() {
        let p = adversarial_weights(&[1e6, 1e6 + 1.0], 10.0);
        assert!(p.iter().all(|w| w.is_finite()));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[0] > p[1]);
    }

    #[test]
    fn margin_equal_distances_give_two_log_two() {
        // entities 0,1 at 0 and 1; r = 0; D(0,0,1) = 1 = γ; negative (1,0,0) also D = 1
        let t = line_tables(&[0.0, 1.0], 0.0);
        let (loss, _) = self_adversarial_loss(&t, Triplet::new(0, 0, 1), &[Triplet::new(1, 0, 0)], 1.0, 1.0);
        assert!((loss - 2.0 * std::f64::consts::LN_2).abs() < 1e-14);
    }

    #[test]
    fn clear_resets_touched_rows() {
        let t = line_tables(&[0.0, 1.0, 3.0], 0.5);
        let mut g = Gradients::zeros_like(&t);
        accumulate_loss(&t, Triplet::new(0, 0, 1), &[Triplet::new(0, 0, 2)], 1.0, 1.0, 1.0, &mut g);
        assert_eq!(g.touched_entities(), &[0, 1, 2]);
        assert!(g.entities.iter().any(|&x| x != 0.0));
        g.clear();
        assert!(g.entities.iter().chain(&g.relations).all(|&x| x == 0.0));
        assert!(g.touched_entities().is_empty());
    }

    #[test]
    fn stable_helpers() {
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(softplus(1000.0), 1000.0);
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
    }
}
