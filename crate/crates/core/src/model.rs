//! TransE / RotatE parameter tables and distance functions.
//!
//! TransE entities and relations are real vectors of length `dim`. RotatE
//! entities are complex vectors stored as `2 * dim` reals with interleaved
//! real/imaginary parts; RotatE relations are `dim` phases, each realized as
//! the unit-modulus number `e^{iθ}`.
//!
//! All arithmetic is `f64`. Checkpoints store `f32`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{EntityId, RelationId};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    TransE,
    RotatE,
}

impl ModelKind {
    /// Number of reals per entity row.
    pub fn entity_width(self, dim: usize) -> usize {
        match self {
            ModelKind::TransE => dim,
            ModelKind::RotatE => 2 * dim,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::TransE => "transe",
            ModelKind::RotatE => "rotate",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "transe" => Ok(ModelKind::TransE),
            "rotate" => Ok(ModelKind::RotatE),
            _ => Err(Error::Config(format!("unknown model {s:?} (transe|rotate)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormOrder {
    L1,
    L2,
}

impl NormOrder {
    pub fn order(self) -> u8 {
        match self {
            NormOrder::L1 => 1,
            NormOrder::L2 => 2,
        }
    }

    pub fn from_order(p: u8) -> Result<Self> {
        match p {
            1 => Ok(NormOrder::L1),
            2 => Ok(NormOrder::L2),
            _ => Err(Error::Config(format!("norm order must be 1 or 2, got {p}"))),
        }
    }
}

/// Distance between `h` composed with `r` and `t`, on raw parameter slices.
///
/// For RotatE the per-dimension term is the modulus of the complex residual;
/// L1 sums the moduli and L2 takes the root of the summed squares.
pub fn distance(model: ModelKind, norm: NormOrder, h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    match model {
        ModelKind::TransE => {
            debug_assert!(h.len() == r.len() && r.len() == t.len());
            let it = h.iter().zip(r).zip(t).map(|((h, r), t)| h + r - t);
            match norm {
                NormOrder::L1 => it.map(f64::abs).sum(),
                NormOrder::L2 => it.map(|x| x * x).sum::<f64>().sqrt(),
            }
        }
        ModelKind::RotatE => {
            debug_assert!(h.len() == 2 * r.len() && h.len() == t.len());
            let mut acc = 0.0;
            for (k, &theta) in r.iter().enumerate() {
                let (re, im) = rotate_residual(h, t, k, theta);
                let sq = re * re + im * im;
                acc += match norm {
                    NormOrder::L1 => sq.sqrt(),
                    NormOrder::L2 => sq,
                };
            }
            match norm {
                NormOrder::L1 => acc,
                NormOrder::L2 => acc.sqrt(),
            }
        }
    }
}

#[inline]
fn rotate_residual(h: &[f64], t: &[f64], k: usize, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    let (a, b) = (h[2 * k], h[2 * k + 1]);
    (a * c - b * s - t[2 * k], a * s + b * c - t[2 * k + 1])
}

/// Computes the distance and adds `scale * ∂D/∂x` into the three gradient
/// buffers. Non-differentiable points (a zero residual) get a zero
/// subgradient.
#[allow(clippy::too_many_arguments)]
pub fn distance_with_grad(
    model: ModelKind,
    norm: NormOrder,
    h: &[f64],
    r: &[f64],
    t: &[f64],
    scale: f64,
    gh: &mut [f64],
    gr: &mut [f64],
    gt: &mut [f64],
) -> f64 {
    match model {
        ModelKind::TransE => {
            let d = distance(model, norm, h, r, t);
            for k in 0..h.len() {
                let x = h[k] + r[k] - t[k];
                let g = match norm {
                    NormOrder::L1 => sign(x),
                    NormOrder::L2 => {
                        if d > 0.0 {
                            x / d
                        } else {
                            0.0
                        }
                    }
                } * scale;
                gh[k] += g;
                gr[k] += g;
                gt[k] -= g;
            }
            d
        }
        ModelKind::RotatE => {
            let d = distance(model, norm, h, r, t);
            for (k, &theta) in r.iter().enumerate() {
                let (s, c) = theta.sin_cos();
                let (a, b) = (h[2 * k], h[2 * k + 1]);
                let ure = a * c - b * s - t[2 * k];
                let uim = a * s + b * c - t[2 * k + 1];
                let denom = match norm {
                    NormOrder::L1 => (ure * ure + uim * uim).sqrt(),
                    NormOrder::L2 => d,
                };
                if denom <= 0.0 {
                    continue;
                }
                let gre = scale * ure / denom;
                let gim = scale * uim / denom;
                gh[2 * k] += gre * c + gim * s;
                gh[2 * k + 1] += -gre * s + gim * c;
                gr[k] += gre * (-a * s - b * c) + gim * (a * c - b * s);
                gt[2 * k] -= gre;
                gt[2 * k + 1] -= gim;
            }
            d
        }
    }
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Forward translation: `h + r` (TransE) or `h ∘ e^{iθ}` (RotatE).
pub fn compose(model: ModelKind, h: &[f64], r: &[f64]) -> Vec<f64> {
    match model {
        ModelKind::TransE => h.iter().zip(r).map(|(h, r)| h + r).collect(),
        ModelKind::RotatE => rotate(h, r, 1.0),
    }
}

/// Inverse translation: `t - r` (TransE) or `t ∘ e^{-iθ}` (RotatE). The
/// RotatE inverse is a phase negation, never a division.
pub fn invert(model: ModelKind, t: &[f64], r: &[f64]) -> Vec<f64> {
    match model {
        ModelKind::TransE => t.iter().zip(r).map(|(t, r)| t - r).collect(),
        ModelKind::RotatE => rotate(t, r, -1.0),
    }
}

fn rotate(x: &[f64], phases: &[f64], direction: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    for (k, &theta) in phases.iter().enumerate() {
        let (s, c) = (direction * theta).sin_cos();
        let (a, b) = (x[2 * k], x[2 * k + 1]);
        out.push(a * c - b * s);
        out.push(a * s + b * c);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTables {
    pub model: ModelKind,
    pub norm: NormOrder,
    pub dim: usize,
    /// Seed the tables were initialized from.
    pub seed: u64,
    num_entities: usize,
    num_relations: usize,
    entities: Vec<f64>,
    relations: Vec<f64>,
}

impl EmbeddingTables {
    /// Entity values (and RotatE real/imaginary parts) uniform in
    /// `[-γ/d, γ/d]`; RotatE phases uniform in `[-π, π)`.
    pub fn init(
        seed: u64,
        model: ModelKind,
        norm: NormOrder,
        dim: usize,
        num_entities: usize,
        num_relations: usize,
        gamma: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Config(format!("margin must be positive, got {gamma}")));
        }
        let mut rng = stream_rng(seed, Stream::Init);
        let bound = gamma / dim as f64;
        let width = model.entity_width(dim);
        let entities = (0..num_entities * width)
            .map(|_| rng.gen_range(-bound..=bound))
            .collect();
        let relations = match model {
            ModelKind::TransE => (0..num_relations * dim)
                .map(|_| rng.gen_range(-bound..=bound))
                .collect(),
            ModelKind::RotatE => (0..num_relations * dim)
                .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect(),
        };
        Ok(EmbeddingTables {
            model,
            norm,
            dim,
            seed,
            num_entities,
            num_relations,
            entities,
            relations,
        })
    }

    /// Wraps existing parameter arrays, checking shapes.
    pub fn from_parts(
        model: ModelKind,
        norm: NormOrder,
        dim: usize,
        seed: u64,
        entities: Vec<f64>,
        relations: Vec<f64>,
    ) -> Result<Self> {
        let width = model.entity_width(dim);
        if dim == 0 || entities.len() % width != 0 || relations.len() % dim != 0 {
            return Err(Error::Input(format!(
                "table sizes {} / {} do not match dim {dim} for {model}",
                entities.len(),
                relations.len()
            )));
        }
        Ok(EmbeddingTables {
            model,
            norm,
            dim,
            seed,
            num_entities: entities.len() / width,
            num_relations: relations.len() / dim,
            entities,
            relations,
        })
    }

    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    pub fn num_relations(&self) -> usize {
        self.num_relations
    }

    pub fn entity_width(&self) -> usize {
        self.model.entity_width(self.dim)
    }

    pub fn entity(&self, e: EntityId) -> &[f64] {
        let w = self.entity_width();
        &self.entities[e as usize * w..(e as usize + 1) * w]
    }

    pub fn entity_mut(&mut self, e: EntityId) -> &mut [f64] {
        let w = self.entity_width();
        &mut self.entities[e as usize * w..(e as usize + 1) * w]
    }

    pub fn relation(&self, r: RelationId) -> &[f64] {
        &self.relations[r as usize * self.dim..(r as usize + 1) * self.dim]
    }

    pub fn relation_mut(&mut self, r: RelationId) -> &mut [f64] {
        let d = self.dim;
        &mut self.relations[r as usize * d..(r as usize + 1) * d]
    }

    pub fn entity_params(&self) -> &[f64] {
        &self.entities
    }

    pub fn relation_params(&self) -> &[f64] {
        &self.relations
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.entities, &mut self.relations)
    }

    /// Unchecked distance on an entity vector pair and a relation id.
    #[inline]
    pub fn distance_raw(&self, h: &[f64], r: RelationId, t: &[f64]) -> f64 {
        distance(self.model, self.norm, h, self.relation(r), t)
    }

    /// Distance with shape and finiteness checks. `h` and `t` are raw vectors
    /// so that estimated (out-of-table) embeddings can be scored.
    pub fn distance(&self, h: &[f64], r: RelationId, t: &[f64]) -> Result<f64> {
        let w = self.entity_width();
        if h.len() != w || t.len() != w || r as usize >= self.num_relations {
            return Err(Error::Input(format!(
                "shape mismatch: |h|={}, |t|={}, expected {w}; relation {r} of {}",
                h.len(),
                t.len(),
                self.num_relations
            )));
        }
        let rel = self.relation(r);
        if !h.iter().chain(rel).chain(t).all(|x| x.is_finite()) {
            return Err(Error::Numeric(format!("distance inputs for relation {r}")));
        }
        Ok(distance(self.model, self.norm, h, rel, t))
    }

    pub fn distance_ids(&self, h: EntityId, r: RelationId, t: EntityId) -> Result<f64> {
        self.distance(self.entity(h), r, self.entity(t))
    }

    /// `-distance`.
    pub fn score(&self, h: &[f64], r: RelationId, t: &[f64]) -> Result<f64> {
        self.distance(h, r, t).map(|d| -d)
    }

    pub fn all_finite(&self) -> bool {
        self.entities.iter().chain(&self.relations).all(|x| x.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn transe_examples() {
        let d = distance(ModelKind::TransE, NormOrder::L1, &[1.0, 2.0], &[0.5, -1.0], &[1.5, 1.0]);
        assert_eq!(d, 0.0);
        let d = distance(ModelKind::TransE, NormOrder::L1, &[0.0, 0.0], &[1.0, 1.0], &[0.0, 0.0]);
        assert_eq!(d, 2.0);
        let d = distance(ModelKind::TransE, NormOrder::L2, &[0.0, 0.0], &[3.0, 4.0], &[0.0, 0.0]);
        assert_eq!(d, 5.0);
    }

    #[test]
    fn rotate_quarter_turn() {
        let d = distance(ModelKind::RotatE, NormOrder::L1, &[1.0, 0.0], &[PI / 2.0], &[0.0, 1.0]);
        assert!(d.abs() < 1e-15);
    }

    #[test]
    fn score_is_negated_distance() {
        let t = EmbeddingTables::from_parts(
            ModelKind::TransE,
            NormOrder::L1,
            2,
            0,
            vec![0.0, 0.0, 1.0, 1.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert_eq!(t.score(&[0.0, 0.0], 0, &[0.0, 0.0]).unwrap(), -2.0);
        assert_eq!(t.score(t.entity(0), 0, t.entity(1)).unwrap(), 0.0);
        // moving t away lowers the score
        let near = t.score(&[0.0, 0.0], 0, &[1.0, 1.5]).unwrap();
        let far = t.score(&[0.0, 0.0], 0, &[1.0, 3.0]).unwrap();
        assert!(far < near);
    }

    #[test]
    fn non_finite_and_shape_errors() {
        let t = EmbeddingTables::init(1, ModelKind::TransE, NormOrder::L1, 2, 2, 1, 1.0).unwrap();
        assert!(matches!(
            t.distance(&[f64::NAN, 0.0], 0, &[0.0, 0.0]),
            Err(Error::Numeric(_))
        ));
        assert!(matches!(t.distance(&[0.0], 0, &[0.0, 0.0]), Err(Error::Input(_))));
    }

    #[test]
    fn init_is_deterministic_and_shaped() {
        let a = EmbeddingTables::init(9, ModelKind::RotatE, NormOrder::L1, 2, 3, 2, 6.0).unwrap();
        let b = EmbeddingTables::init(9, ModelKind::RotatE, NormOrder::L1, 2, 3, 2, 6.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.entity_params().len(), 3 * 4);
        let t = EmbeddingTables::init(9, ModelKind::TransE, NormOrder::L1, 2, 3, 2, 6.0).unwrap();
        assert_eq!(t.entity_params().len(), 3 * 2);
        assert!(t.entity_params().iter().all(|x| x.abs() <= 3.0));
        for &theta in a.relation_params() {
            assert!((-PI..PI).contains(&theta));
            let (s, c) = theta.sin_cos();
            assert!(((s * s + c * c).sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn compose_and_invert_examples() {
        assert_eq!(invert(ModelKind::TransE, &[1.5, 1.0], &[0.5, -1.0]), vec![1.0, 2.0]);
        assert_eq!(compose(ModelKind::TransE, &[1.0, 1.0], &[2.0, 0.0]), vec![3.0, 1.0]);
        let e = invert(ModelKind::RotatE, &[0.0, 1.0], &[PI / 2.0]);
        assert!((e[0] - 1.0).abs() < 1e-15 && e[1].abs() < 1e-15);
    }

    fn vecs(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-3.0f64..3.0, n)
    }

    proptest! {
        #[test]
        fn rotation_preserves_modulus(h in vecs(8), r in prop::collection::vec(-PI..PI, 4)) {
            let out = compose(ModelKind::RotatE, &h, &r);
            for k in 0..4 {
                let m0 = h[2 * k].hypot(h[2 * k + 1]);
                let m1 = out[2 * k].hypot(out[2 * k + 1]);
                prop_assert!((m0 - m1).abs() < 1e-12);
            }
        }

        #[test]
        fn distance_is_permutation_invariant(h in vecs(8), r in vecs(8), t in vecs(8), l2 in any::<bool>()) {
            let norm = if l2 { NormOrder::L2 } else { NormOrder::L1 };
            let perm = [3usize, 0, 7, 1, 6, 2, 5, 4];
            let p = |v: &[f64]| perm.iter().map(|&i| v[i]).collect::<Vec<_>>();
            let d0 = distance(ModelKind::TransE, norm, &h, &r, &t);
            let d1 = distance(ModelKind::TransE, norm, &p(&h), &p(&r), &p(&t));
            prop_assert!(d0 >= 0.0);
            prop_assert!((d0 - d1).abs() < 1e-12);

            // RotatE: permute complex dimensions
            let cperm = [2usize, 0, 3, 1];
            let pc = |v: &[f64]| cperm.iter().flat_map(|&i| [v[2 * i], v[2 * i + 1]]).collect::<Vec<_>>();
            let pr: Vec<f64> = cperm.iter().map(|&i| r[i]).collect();
            let d0 = distance(ModelKind::RotatE, norm, &h, &r[..4], &t);
            let d1 = distance(ModelKind::RotatE, norm, &pc(&h), &pr, &pc(&t));
            prop_assert!(d0 >= 0.0);
            prop_assert!((d0 - d1).abs() < 1e-12);
        }

        #[test]
        fn zero_distance_iff_exact_translation(h in vecs(8), r in vecs(8)) {
            for model in [ModelKind::TransE, ModelKind::RotatE] {
                let rr = if model == ModelKind::TransE { &r[..] } else { &r[..4] };
                let t = compose(model, &h, rr);
                prop_assert!(distance(model, NormOrder::L1, &h, rr, &t) < 1e-12);
                let mut off = t.clone();
                off[0] += 0.25;
                prop_assert!(distance(model, NormOrder::L1, &h, rr, &off) > 0.2);
            }
        }
    }
}
