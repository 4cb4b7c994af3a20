//! Canonical synthetic fixtures shared across integration suites.

use gsvr_core::embedding::TimeSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The end-to-end regression fixture: 800 points of a period-25 sine,
/// offset away from zero so MAPE is well defined, with Gaussian noise of
/// standard deviation 0.01 from a fixed generator.
pub fn sine800() -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(20250808);
    let mut normal = move || {
        let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.random_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let values: Vec<f64> = (0..800)
        .map(|t| 2.0 + (2.0 * std::f64::consts::PI * t as f64 / 25.0).sin() + 0.01 * normal())
        .collect();
    TimeSeries::new(values, "sine800").unwrap()
}
