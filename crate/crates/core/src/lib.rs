//! Embeddings for out-of-knowledge-graph entities without retraining.
//!
//! A TransE or RotatE model is pretrained on the in-graph entities. Each
//! unseen entity then receives one closed-form candidate embedding per
//! auxiliary neighbor ([`estimator`]), and the candidates are averaged with
//! correlation, degree or uniform weights ([`reducer`]). [`eval`] scores the
//! result with filtered link prediction and triplet classification.
//!
//! ```
//! use invkge::{eval, synthetic, train};
//!
//! let splits = synthetic::generate_synthetic_splits(1, 60, 4, 400, 0.1).unwrap();
//! let config = train::TrainConfig { dim: 8, steps: 20, batch_size: 64, negatives: 8, ..Default::default() };
//! let tables = train::train(&splits, &config).unwrap().tables;
//! let report = eval::evaluate(&tables, &splits, &eval::EvalConfig::new(eval::Weighting::Uniform)).unwrap();
//! assert!(report.mrr.unwrap() > 0.0);
//! ```

pub mod checkpoint;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod eval;
pub mod kg;
pub mod model;
pub mod reducer;
pub mod rng;
pub mod synthetic;
pub mod train;

pub use dataset::{BenchmarkSplits, FilterSet, LabeledTriplet, Task};
pub use error::{Error, Result};
pub use estimator::{Candidate, CandidateSet};
pub use eval::{EvalConfig, EvalReport, Thresholds, Weighting};
pub use kg::{Direction, EntityId, Neighbor, RelationId, TripleStore, Triplet, Vocabulary};
pub use model::{EmbeddingTables, ModelKind, NormOrder};
pub use reducer::{RelationCorrelation, WeightScheme};
pub use train::TrainConfig;
