//! Forecast-error measurement and pairwise accuracy comparison.
//!
//! MSE is the mean squared residual and MAPE the mean absolute relative
//! residual, reported as a fraction. The Diebold-Mariano statistic tests
//! equal accuracy of two forecast-error sequences through their loss
//! differential; one-step-ahead forecasts justify the lag-0 variance and
//! the 5% decision uses the normal 1.96 threshold.

use crate::error::{Error, Result};

/// Actual and predicted values of equal, nonzero length.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastPair {
    actual: Vec<f64>,
    predicted: Vec<f64>,
}

impl ForecastPair {
    pub fn new(actual: Vec<f64>, predicted: Vec<f64>) -> Result<Self> {
        if actual.is_empty() {
            return Err(Error::InvalidInput("forecast pair is empty".into()));
        }
        if actual.len() != predicted.len() {
            return Err(Error::InvalidInput(format!(
                "actual has {} entries, predicted {}",
                actual.len(),
                predicted.len()
            )));
        }
        if actual.iter().chain(predicted.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "forecast pair contains a non-finite value".into(),
            ));
        }
        Ok(ForecastPair { actual, predicted })
    }

    pub fn len(&self) -> usize {
        self.actual.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one point
    }

    pub fn actual(&self) -> &[f64] {
        &self.actual
    }

    pub fn predicted(&self) -> &[f64] {
        &self.predicted
    }

    /// Forecast errors y_i - f_i.
    pub fn errors(&self) -> Vec<f64> {
        self.actual
            .iter()
            .zip(self.predicted.iter())
            .map(|(&y, &f)| y - f)
            .collect()
    }
}

/// Mean squared error (1/N) sum (y_i - f_i)^2.
pub fn mse(pair: &ForecastPair) -> f64 {
    let n = pair.len() as f64;
    pair.actual
        .iter()
        .zip(pair.predicted.iter())
        .map(|(&y, &f)| (y - f) * (y - f))
        .sum::<f64>()
        / n
}

/// Mean absolute percentage error (1/N) sum |(y_i - f_i) / y_i|, as a
/// fraction. Zero actuals make the measure undefined.
pub fn mape(pair: &ForecastPair) -> Result<f64> {
    if let Some(i) = pair.actual.iter().position(|&y| y == 0.0) {
        return Err(Error::InvalidInput(format!(
            "actual value at index {i} is zero; MAPE is undefined"
        )));
    }
    let n = pair.len() as f64;
    Ok(pair
        .actual
        .iter()
        .zip(pair.predicted.iter())
        .map(|(&y, &f)| ((y - f) / y).abs())
        .sum::<f64>()
        / n)
}

/// Loss applied to each forecast error before differencing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DmLoss {
    #[default]
    Squared,
    Absolute,
}

/// Test configuration; the Harvey-Leybourne-Newbold small-sample factor
/// (one-step horizon) is off by default to match the plain 1.96 protocol.
#[derive(Debug, Clone, Copy, Default)]
pub struct DmConfig {
    pub loss: DmLoss,
    pub small_sample_correction: bool,
}

/// DM statistic and its 5% two-sided verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmResult {
    pub statistic: f64,
    pub significant: bool,
    pub n: usize,
}

const DM_THRESHOLD: f64 = 1.96;

/// Diebold-Mariano on two forecast-error sequences with squared loss and
/// no small-sample correction.
pub fn diebold_mariano(errors_a: &[f64], errors_b: &[f64]) -> Result<DmResult> {
    diebold_mariano_with(errors_a, errors_b, DmConfig::default())
}

pub fn diebold_mariano_with(
    errors_a: &[f64],
    errors_b: &[f64],
    cfg: DmConfig,
) -> Result<DmResult> {
    if errors_a.len() != errors_b.len() {
        return Err(Error::InvalidInput(format!(
            "error sequences differ in length: {} vs {}",
            errors_a.len(),
            errors_b.len()
        )));
    }
    let n = errors_a.len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "Diebold-Mariano needs at least two observations".into(),
        ));
    }
    let differential: Vec<f64> = errors_a
        .iter()
        .zip(errors_b.iter())
        .map(|(&a, &b)| match cfg.loss {
            DmLoss::Squared => a * a - b * b,
            DmLoss::Absolute => a.abs() - b.abs(),
        })
        .collect();
    if differential.iter().all(|&d| d == 0.0) {
        return Err(Error::DegenerateComparison(
            "loss differential is identically zero; the forecasts are indistinguishable".into(),
        ));
    }
    let nf = n as f64;
    let mean = differential.iter().sum::<f64>() / nf;
    let variance = differential.iter().map(|&d| (d - mean) * (d - mean)).sum::<f64>() / nf;
    if variance == 0.0 {
        return Err(Error::DegenerateComparison(
            "loss differential has zero variance; the statistic is undefined".into(),
        ));
    }
    let mut statistic = mean / (variance / nf).sqrt();
    if cfg.small_sample_correction {
        // One-step horizon: sqrt((n - 1) / n).
        statistic *= ((nf - 1.0) / nf).sqrt();
    }
    Ok(DmResult {
        statistic,
        significant: statistic.abs() > DM_THRESHOLD,
        n,
    })
}
