//! Delay and dimension estimation for the embedding.
//!
//! The delay is the first local minimum of the average mutual
//! information between the series and its lagged copy; the dimension is
//! the smallest m at which the false-nearest-neighbor fraction drops
//! below a cutoff.

use super::TimeSeries;
use crate::error::{Error, Result};

/// Estimated delay plus whether a genuine local minimum was found; when
/// none exists inside the horizon, `delay` is the horizon itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelayEstimate {
    pub delay: usize,
    pub found_minimum: bool,
}

/// Average mutual information (nats) between x_t and x_{t+lag}, from an
/// equal-width joint histogram whose edges span the series range.
pub fn average_mutual_information(values: &[f64], lag: usize, bins: usize) -> f64 {
    let pairs = values.len() - lag;
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let index = |v: f64| (((v - min) / span * bins as f64) as usize).min(bins - 1);

    let mut joint = vec![0usize; bins * bins];
    for t in 0..pairs {
        joint[index(values[t]) * bins + index(values[t + lag])] += 1;
    }
    let mut row = vec![0usize; bins];
    let mut col = vec![0usize; bins];
    for i in 0..bins {
        for j in 0..bins {
            row[i] += joint[i * bins + j];
            col[j] += joint[i * bins + j];
        }
    }
    let total = pairs as f64;
    let mut mi = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let c = joint[i * bins + j];
            if c == 0 {
                continue;
            }
            let p = c as f64 / total;
            mi += p * (p * total * total / (row[i] as f64 * col[j] as f64)).ln();
        }
    }
    mi
}

/// Sturges' rule: floor(1 + log2 n) bins.
fn sturges_bins(n: usize) -> usize {
    ((1.0 + (n as f64).log2()).floor() as usize).max(2)
}

/// Smallest lag in [1, max_delay] where the mutual information dips
/// below both neighbors. `bins` of `None` uses Sturges' rule.
pub fn estimate_delay_ami(
    series: &TimeSeries,
    max_delay: usize,
    bins: Option<usize>,
) -> Result<DelayEstimate> {
    if max_delay < 1 {
        return Err(Error::InvalidInput("max_delay must be at least 1".into()));
    }
    if series.len() <= max_delay + 1 {
        return Err(Error::InvalidInput(format!(
            "series '{}' has {} points, need more than {} for delays up to {}",
            series.label(),
            series.len(),
            max_delay + 1,
            max_delay
        )));
    }
    let values = series.values();
    if is_constant(values) {
        return Err(Error::Estimation(format!(
            "series '{}' is constant; mutual information is undefined",
            series.label()
        )));
    }
    let bins = bins.unwrap_or_else(|| sturges_bins(series.len()));
    if bins < 2 {
        return Err(Error::InvalidInput("need at least 2 histogram bins".into()));
    }

    let ami: Vec<f64> = (0..=max_delay + 1)
        .map(|lag| average_mutual_information(values, lag, bins))
        .collect();
    for delay in 1..=max_delay {
        if ami[delay] < ami[delay - 1] && ami[delay] <= ami[delay + 1] {
            return Ok(DelayEstimate {
                delay,
                found_minimum: true,
            });
        }
    }
    Ok(DelayEstimate {
        delay: max_delay,
        found_minimum: false,
    })
}

/// Thresholds of the false-nearest-neighbor test: the distance-ratio
/// criterion, the attractor-size criterion, and the acceptable fraction
/// of false neighbors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FnnConfig {
    pub r_tol: f64,
    pub a_tol: f64,
    pub cutoff: f64,
}

impl Default for FnnConfig {
    fn default() -> Self {
        FnnConfig {
            r_tol: 10.0,
            a_tol: 2.0,
            cutoff: 0.01,
        }
    }
}

/// Estimated dimension plus whether the false-neighbor fraction actually
/// fell below the cutoff before `max_dim` was exhausted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionEstimate {
    pub dimension: usize,
    pub below_cutoff: bool,
    pub fraction: f64,
}

/// Smallest m in [1, max_dim] whose false-neighbor fraction is below
/// `cfg.cutoff`, searching upward.
pub fn estimate_dimension_fnn(
    series: &TimeSeries,
    delay: usize,
    max_dim: usize,
    cfg: &FnnConfig,
) -> Result<DimensionEstimate> {
    if delay < 1 || max_dim < 1 {
        return Err(Error::InvalidInput(
            "delay and max_dim must be at least 1".into(),
        ));
    }
    let n = series.len();
    if n < max_dim * delay + 2 {
        return Err(Error::Estimation(format!(
            "series '{}' has {} points; dimension search up to m={} with tau={} needs at least {}",
            series.label(),
            n,
            max_dim,
            delay,
            max_dim * delay + 2
        )));
    }
    let values = series.values();
    if is_constant(values) {
        return Err(Error::Estimation(format!(
            "series '{}' is constant; neighbors are degenerate",
            series.label()
        )));
    }
    let attractor_size = standard_deviation(values);

    let mut last_fraction = 1.0;
    for m in 1..=max_dim {
        let usable = n - m * delay; // rows with an (m+1)-th coordinate
        let mut false_neighbors = 0usize;
        let mut counted = 0usize;
        for i in 0..usable {
            let Some((j, dist2)) = nearest_neighbor(values, delay, m, usable, i) else {
                continue;
            };
            if dist2 == 0.0 {
                continue; // duplicate delay vector, ratio undefined
            }
            let gap = (values[i + m * delay] - values[j + m * delay]).abs();
            let dist = dist2.sqrt();
            let ratio_false = gap / dist > cfg.r_tol;
            let size_false = (dist2 + gap * gap).sqrt() / attractor_size > cfg.a_tol;
            if ratio_false || size_false {
                false_neighbors += 1;
            }
            counted += 1;
        }
        if counted == 0 {
            continue;
        }
        last_fraction = false_neighbors as f64 / counted as f64;
        if last_fraction < cfg.cutoff {
            return Ok(DimensionEstimate {
                dimension: m,
                below_cutoff: true,
                fraction: last_fraction,
            });
        }
    }
    Ok(DimensionEstimate {
        dimension: max_dim,
        below_cutoff: false,
        fraction: last_fraction,
    })
}

/// Index and squared distance of the nearest other delay vector of
/// dimension m (vectors start at 0..usable).
fn nearest_neighbor(
    values: &[f64],
    delay: usize,
    m: usize,
    usable: usize,
    i: usize,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..usable {
        if j == i {
            continue;
        }
        let mut d2 = 0.0;
        for k in 0..m {
            let d = values[i + k * delay] - values[j + k * delay];
            d2 += d * d;
            if let Some((_, b)) = best {
                if d2 > b {
                    break;
                }
            }
        }
        if best.is_none_or(|(_, b)| d2 < b) {
            best = Some((j, d2));
        }
    }
    best
}

fn is_constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

fn standard_deviation(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}
