//! Phase-space reconstruction of scalar series.
//!
//! A series x_1..x_n with embedding dimension m and delay tau becomes the
//! design matrix whose row r is (x_r, x_{r+tau}, ..., x_{r+(m-1)tau}) and
//! the target vector y_r = x_{r+1+(m-1)tau}, giving n - 1 - (m-1)tau rows
//! of m columns; the final raw point appears only as a target. Entries
//! are then min-max scaled to [0, 1] and split chronologically.

mod estimation;

pub use estimation::{
    average_mutual_information, estimate_delay_ami, estimate_dimension_fnn, DelayEstimate,
    DimensionEstimate, FnnConfig,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A labelled scalar series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    label: String,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput(
                "a time series needs at least two points".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "series value at index {i} is non-finite"
            )));
        }
        Ok(TimeSeries {
            values,
            label: label.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires two points
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Embedding dimension m and delay tau.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingSpec {
    pub dimension: usize,
    pub delay: usize,
}

impl EmbeddingSpec {
    pub fn new(dimension: usize, delay: usize) -> Result<Self> {
        if dimension < 1 || delay < 1 {
            return Err(Error::InvalidInput(format!(
                "embedding needs dimension >= 1 and delay >= 1, got m={dimension}, tau={delay}"
            )));
        }
        Ok(EmbeddingSpec { dimension, delay })
    }

    /// Shortest series this spec can embed with at least one row.
    pub fn min_series_len(&self) -> usize {
        (self.dimension - 1) * self.delay + 2
    }

    /// Rows the design matrix will have for a series of `n` points.
    pub fn rows_for(&self, n: usize) -> usize {
        n - 1 - (self.dimension - 1) * self.delay
    }
}

/// Which slice of the raw series supplies the min/max scaling pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingMode {
    /// Statistics from the training prefix only (no test leakage); the
    /// ratio must match the later chronological split.
    TrainOnly { ratio: f64 },
    /// Statistics over the whole series, normalizing before the split.
    FullSeries,
}

/// Design matrix, targets, and scaling metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedDataset {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    spec: EmbeddingSpec,
    scaling: Option<(f64, f64)>,
    raw: Vec<f64>,
    label: String,
}

impl EmbeddedDataset {
    pub fn x(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn rows(&self) -> usize {
        self.y.len()
    }

    pub fn spec(&self) -> EmbeddingSpec {
        self.spec
    }

    /// The (min, max) pair applied to the entries, if scaled.
    pub fn scaling(&self) -> Option<(f64, f64)> {
        self.scaling
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The raw series the dataset was embedded from.
    pub fn raw_series(&self) -> &[f64] {
        &self.raw
    }

    /// Raw-series index of the target for row `r`.
    pub fn target_index(&self, r: usize) -> usize {
        r + 1 + (self.spec.dimension - 1) * self.spec.delay
    }
}

/// Build the unscaled delay embedding of `series` under `spec`.
pub fn reconstruct(series: &TimeSeries, spec: &EmbeddingSpec) -> Result<EmbeddedDataset> {
    let n = series.len();
    if n < spec.min_series_len() {
        return Err(Error::InvalidInput(format!(
            "series '{}' has {n} points; embedding m={} tau={} needs at least {}",
            series.label(),
            spec.dimension,
            spec.delay,
            spec.min_series_len()
        )));
    }
    let rows = spec.rows_for(n);
    let v = series.values();
    let x: Vec<Vec<f64>> = (0..rows)
        .map(|r| (0..spec.dimension).map(|j| v[r + j * spec.delay]).collect())
        .collect();
    let y: Vec<f64> = (0..rows)
        .map(|r| v[r + 1 + (spec.dimension - 1) * spec.delay])
        .collect();
    Ok(EmbeddedDataset {
        x,
        y,
        spec: *spec,
        scaling: None,
        raw: v.to_vec(),
        label: series.label().to_string(),
    })
}

/// Number of rows the chronological split assigns to training.
pub fn train_rows_for(rows: usize, ratio: f64) -> usize {
    (ratio * rows as f64).floor() as usize
}

/// Map every entry through (v - min) / (max - min), recording the pair
/// for later inversion. The pair comes from the raw series: either its
/// training prefix or, with [`ScalingMode::FullSeries`], all of it.
pub fn scale_minmax(dataset: &EmbeddedDataset, mode: ScalingMode) -> Result<EmbeddedDataset> {
    if dataset.scaling.is_some() {
        return Err(Error::InvalidInput("dataset is already scaled".into()));
    }
    let stats_slice: &[f64] = match mode {
        ScalingMode::FullSeries => &dataset.raw,
        ScalingMode::TrainOnly { ratio } => {
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "split ratio must lie in (0, 1), got {ratio}"
                )));
            }
            let train_rows = train_rows_for(dataset.rows(), ratio);
            if train_rows == 0 {
                return Err(Error::InvalidInput(
                    "split ratio leaves the training side empty".into(),
                ));
            }
            // Everything a training row can see, inputs and target alike.
            let last = train_rows + (dataset.spec.dimension - 1) * dataset.spec.delay;
            &dataset.raw[..=last]
        }
    };
    let min = stats_slice.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = stats_slice.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return Err(Error::Scaling(format!(
            "series '{}' is constant over the scaling window (min = max = {min})",
            dataset.label
        )));
    }
    let span = max - min;
    let scale = |v: f64| (v - min) / span;
    Ok(EmbeddedDataset {
        x: dataset
            .x
            .iter()
            .map(|row| row.iter().map(|&v| scale(v)).collect())
            .collect(),
        y: dataset.y.iter().map(|&v| scale(v)).collect(),
        spec: dataset.spec,
        scaling: Some((min, max)),
        raw: dataset.raw.clone(),
        label: dataset.label.clone(),
    })
}

/// Undo [`scale_minmax`] for a single value.
pub fn invert_minmax(value: f64, scaling: (f64, f64)) -> f64 {
    let (min, max) = scaling;
    value * (max - min) + min
}

/// Chronological train/test split; the first `floor(ratio * rows)` rows
/// train and the remainder tests, no shuffling.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train_x: Vec<Vec<f64>>,
    pub train_y: Vec<f64>,
    pub test_x: Vec<Vec<f64>>,
    pub test_y: Vec<f64>,
    pub ratio: f64,
}

impl SplitDataset {
    pub fn train_rows(&self) -> usize {
        self.train_y.len()
    }

    pub fn test_rows(&self) -> usize {
        self.test_y.len()
    }
}

pub fn split_chronological(dataset: &EmbeddedDataset, ratio: f64) -> Result<SplitDataset> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidInput(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let rows = dataset.rows();
    let train = train_rows_for(rows, ratio);
    if train == 0 || train == rows {
        return Err(Error::InvalidInput(format!(
            "ratio {ratio} leaves an empty side for {rows} rows ({train} train)"
        )));
    }
    Ok(SplitDataset {
        train_x: dataset.x[..train].to_vec(),
        train_y: dataset.y[..train].to_vec(),
        test_x: dataset.x[train..].to_vec(),
        test_y: dataset.y[train..].to_vec(),
        ratio,
    })
}
