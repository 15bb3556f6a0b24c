use std::fmt;
use std::str::FromStr;

use crate::dataset::BenchmarkSplits;
use crate::error::{Error, Result};
use crate::model::EmbeddingTables;

use super::{evaluate, EvalConfig, EvalReport, Weighting};

/// A single-dataset ablation. The OOKG-ratio sweep spans several datasets and
/// lives in [`ratio_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationVariant {
    Full,
    /// Keep at most `k` aux neighbors per OOKG entity.
    Cap(usize),
    /// Reduce with uniform weights instead of the configured scheme.
    Uniform,
}

impl AblationVariant {
    pub const STANDARD_SET: [AblationVariant; 5] = [
        AblationVariant::Cap(1),
        AblationVariant::Cap(8),
        AblationVariant::Cap(32),
        AblationVariant::Uniform,
        AblationVariant::Full,
    ];

    fn apply(self, base: &EvalConfig) -> EvalConfig {
        let mut c = base.clone();
        match self {
            AblationVariant::Full => {}
            AblationVariant::Cap(k) => c.neighbor_cap = Some(k),
            AblationVariant::Uniform => c.weighting = Weighting::Uniform,
        }
        c
    }
}

impl fmt::Display for AblationVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AblationVariant::Full => f.write_str("full"),
            AblationVariant::Cap(k) => write!(f, "cap{k}"),
            AblationVariant::Uniform => f.write_str("uniform"),
        }
    }
}

impl FromStr for AblationVariant {
    type Err = Error;

    /// Accepts `full`, `uniform` and `cap<k>` / `cap-<k>` with `k ≥ 1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "full" => return Ok(AblationVariant::Full),
            "uniform" | "uniform-weights" => return Ok(AblationVariant::Uniform),
            _ => {}
        }
        if let Some(k) = s.strip_prefix("cap") {
            let k = k.strip_prefix('-').unwrap_or(k);
            if let Ok(k) = k.parse::<usize>() {
                if k >= 1 {
                    return Ok(AblationVariant::Cap(k));
                }
            }
        }
        Err(Error::Config(format!(
            "unknown ablation variant {s:?} (expected full, uniform or cap<k>)"
        )))
    }
}

/// One report per variant, in the given order.
pub fn ablate(
    tables: &EmbeddingTables,
    splits: &BenchmarkSplits,
    base: &EvalConfig,
    variants: &[AblationVariant],
) -> Result<Vec<EvalReport>> {
    variants
        .iter()
        .map(|v| {
            let mut report = evaluate(tables, splits, &v.apply(base))?;
            report.name = v.to_string();
            Ok(report)
        })
        .collect()
}

/// Evaluates each member of a dataset family with its own tables. Reports
/// are named after the member and sorted by increasing OOKG ratio.
pub fn ratio_sweep(members: &[(&str, &EmbeddingTables, &BenchmarkSplits)], base: &EvalConfig) -> Result<Vec<EvalReport>> {
    let mut reports = members
        .iter()
        .map(|(name, tables, splits)| {
            let mut report = evaluate(tables, splits, base)?;
            report.name = (*name).to_owned();
            Ok(report)
        })
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| a.ookg_ratio.total_cmp(&b.ookg_ratio));
    Ok(reports)
}
