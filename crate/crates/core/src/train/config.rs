use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelKind, NormOrder};

/// Pretraining hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub model: ModelKind,
    pub norm: NormOrder,
    pub dim: usize,
    /// Margin γ.
    pub gamma: f64,
    /// Self-adversarial sampling temperature α.
    pub alpha: f64,
    /// Negatives per positive.
    pub negatives: usize,
    /// L2 coefficient on parameters touched by a batch; 0 disables it.
    pub l2: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub steps: usize,
    pub seed: u64,
    /// Loss is logged every this many steps (and at the last step).
    pub log_every: usize,
    /// Resample corruptions that happen to be training triplets.
    pub filter_negatives: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            model: ModelKind::TransE,
            norm: NormOrder::L1,
            dim: 100,
            gamma: 12.0,
            alpha: 1.0,
            negatives: 64,
            l2: 0.0,
            batch_size: 1024,
            learning_rate: 1e-3,
            steps: 10_000,
            seed: 0,
            log_every: 100,
            filter_negatives: false,
        }
    }
}

impl TrainConfig {
    /// Settings used for the FB15k-based link-prediction benchmarks.
    pub fn fb15k() -> Self {
        TrainConfig {
            dim: 1000,
            gamma: 24.0,
            alpha: 1.0,
            negatives: 256,
            l2: 0.0,
            batch_size: 1024,
            learning_rate: 1e-3,
            steps: 100_000,
            ..Default::default()
        }
    }

    /// Settings used for the WN11-based triplet-classification benchmarks.
    pub fn wn11() -> Self {
        TrainConfig {
            dim: 300,
            gamma: 0.5,
            alpha: 1.0,
            negatives: 128,
            l2: 1e-5,
            batch_size: 1024,
            learning_rate: 1e-3,
            steps: 20_000,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_owned()));
        if self.dim == 0 {
            return bad("dim must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be positive");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be non-negative");
        }
        if self.negatives == 0 {
            return bad("need at least one negative sample");
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad("l2 must be non-negative");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.log_every == 0 {
            return bad("log_every must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let fb = TrainConfig::fb15k();
        assert_eq!((fb.dim, fb.gamma, fb.alpha, fb.negatives, fb.l2, fb.steps), (1000, 24.0, 1.0, 256, 0.0, 100_000));
        let wn = TrainConfig::wn11();
        assert_eq!((wn.dim, wn.gamma, wn.alpha, wn.negatives, wn.l2, wn.steps), (300, 0.5, 1.0, 128, 1e-5, 20_000));
        assert_eq!((wn.batch_size, wn.learning_rate), (1024, 1e-3));
        assert!(fb.validate().is_ok() && wn.validate().is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        let c = TrainConfig { negatives: 0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = TrainConfig { gamma: -1.0, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
