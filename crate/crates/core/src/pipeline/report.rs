//! Persisted run records.
//!
//! One JSON document per tuning run, with a stable field order so
//! reports diff cleanly and can serve as regression fixtures. Reports
//! re-validate: the stored MSE/MAPE must match values recomputed from
//! the stored forecasts.

use crate::error::{Error, Result};
use crate::metrics::{self, ForecastPair};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingSummary {
    pub m: usize,
    pub tau: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsSummary {
    pub c: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

/// One test-set point in raw price units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastPoint {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub date: Option<String>,
    pub actual: f64,
    pub predicted: f64,
}

/// Record of one tuning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub dataset: String,
    pub embedding: EmbeddingSummary,
    pub optimizer: String,
    pub seed: u64,
    pub params: ParamsSummary,
    pub mse: f64,
    pub mape: f64,
    pub cost_seconds: f64,
    pub fitness_target: String,
    pub scaling_mode: String,
    pub fitness_history: Vec<f64>,
    pub forecasts: Vec<ForecastPoint>,
}

impl TuneReport {
    pub fn forecast_pair(&self) -> Result<ForecastPair> {
        ForecastPair::new(
            self.forecasts.iter().map(|p| p.actual).collect(),
            self.forecasts.iter().map(|p| p.predicted).collect(),
        )
    }

    /// Recompute MSE and MAPE from the stored forecasts and compare to
    /// the stored values; names of any fields off by more than
    /// `tolerance` come back in the error.
    pub fn validate(&self, tolerance: f64) -> Result<()> {
        let pair = self.forecast_pair()?;
        let mse = metrics::mse(&pair);
        let mape = metrics::mape(&pair)?;
        let mut mismatched = Vec::new();
        if (mse - self.mse).abs() > tolerance {
            mismatched.push(format!("mse (stored {}, recomputed {mse})", self.mse));
        }
        if (mape - self.mape).abs() > tolerance {
            mismatched.push(format!("mape (stored {}, recomputed {mape})", self.mape));
        }
        if mismatched.is_empty() {
            Ok(())
        } else {
            Err(Error::Report(format!(
                "stored metrics disagree with stored forecasts: {}",
                mismatched.join("; ")
            )))
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Report(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// One line of the optimizer comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub optimizer: String,
    pub c: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub mse: f64,
    pub mape: f64,
    pub cost_seconds: f64,
}

/// A member that never produced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedMember {
    pub optimizer: String,
    pub error: String,
}

/// Comparison across optimizers on one dataset: a table ranked by MSE
/// ascending plus the pairwise DM statistics (null where the comparison
/// is degenerate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub dataset: String,
    pub embedding: EmbeddingSummary,
    pub table: Vec<ComparisonRow>,
    pub dm_matrix: BTreeMap<String, BTreeMap<String, Option<f64>>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub failed: Vec<FailedMember>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}
