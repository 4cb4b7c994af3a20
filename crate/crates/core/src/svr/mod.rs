//! Epsilon-insensitive support vector regression with an RBF kernel.
//!
//! Residuals inside a tube of half-width epsilon around the fit cost
//! nothing; points outside are penalized linearly with weight C. Training
//! solves the dual problem with a from-scratch SMO solver and keeps only
//! the points whose dual coefficient survives pruning.

mod cache;
mod smo;

use crate::error::{Error, Result};

/// Dual coefficients smaller than this are treated as zero and their
/// points dropped from the support set.
const PRUNE_THRESHOLD: f64 = 1e-8;

/// The tuned triple (C, gamma, epsilon). Doubles as a search point for the
/// optimizers: `[c, gamma, epsilon]` in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrParams {
    /// Penalty weight for tube violations.
    pub c: f64,
    /// RBF kernel width.
    pub gamma: f64,
    /// Half-width of the insensitive tube.
    pub epsilon: f64,
}

impl SvrParams {
    pub fn new(c: f64, gamma: f64, epsilon: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidInput(format!("C must be positive, got {c}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "epsilon must be non-negative, got {epsilon}"
            )));
        }
        Ok(SvrParams { c, gamma, epsilon })
    }

    /// Position-vector view used by the tuners.
    pub fn from_position(p: &[f64]) -> Result<Self> {
        if p.len() != 3 {
            return Err(Error::InvalidInput(format!(
                "parameter vector must have 3 entries (C, gamma, epsilon), got {}",
                p.len()
            )));
        }
        SvrParams::new(p[0], p[1], p[2])
    }

    pub fn as_position(&self) -> [f64; 3] {
        [self.c, self.gamma, self.epsilon]
    }
}

/// Training inputs: n rows of d features plus n targets.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
}

impl TrainingSet {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!(
                "row count {} does not match target count {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::InvalidInput(
                "training set needs at least two rows".into(),
            ));
        }
        let d = x[0].len();
        if d == 0 {
            return Err(Error::InvalidInput("rows must have at least one column".into()));
        }
        for (i, row) in x.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} columns, expected {d}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("row {i} contains a non-finite value")));
            }
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("target {i} is non-finite")));
        }
        Ok(TrainingSet { x, y })
    }

    pub fn rows(&self) -> usize {
        self.x.len()
    }

    pub fn dims(&self) -> usize {
        self.x[0].len()
    }

    pub fn x(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }
}

/// Knobs for the SMO solver. `None` fields fall back to data-sized
/// defaults at train time: 10000 * n pair updates and min(n, 512) cached
/// kernel rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub kkt_tolerance: f64,
    pub max_iterations: Option<usize>,
    pub kernel_cache_budget: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            kkt_tolerance: 1e-3,
            max_iterations: None,
            kernel_cache_budget: None,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.kkt_tolerance > 0.0 && self.kkt_tolerance.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "kkt_tolerance must be positive, got {}",
                self.kkt_tolerance
            )));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidInput("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// A trained regressor: support vectors, their dual coefficient
/// differences beta_i - beta*_i, and the bias.
#[derive(Debug, Clone)]
pub struct SvrModel {
    support_vectors: Vec<Vec<f64>>,
    dual_coefs: Vec<f64>,
    bias: f64,
    gamma: f64,
    dims: usize,
}

impl SvrModel {
    pub fn support_vectors(&self) -> &[Vec<f64>] {
        &self.support_vectors
    }

    pub fn dual_coefs(&self) -> &[f64] {
        &self.dual_coefs
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// RBF kernel exp(-gamma * ||xi - xj||^2); always in (0, 1].
pub fn rbf_kernel(xi: &[f64], xj: &[f64], gamma: f64) -> Result<f64> {
    if xi.len() != xj.len() {
        return Err(Error::InvalidInput(format!(
            "kernel arguments differ in dimension: {} vs {}",
            xi.len(),
            xj.len()
        )));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let d2: f64 = xi
        .iter()
        .zip(xj.iter())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    Ok((-gamma * d2).exp())
}

/// Train an epsilon-SVR model by solving the dual to `kkt_tolerance`.
///
/// Deterministic for fixed inputs: working-set ties break on the lowest
/// index. Data whose targets all sit inside the tube yields a model with
/// an empty support set whose prediction is the bias.
pub fn train(data: &TrainingSet, params: &SvrParams, cfg: &SolverConfig) -> Result<SvrModel> {
    cfg.validate()?;
    SvrParams::new(params.c, params.gamma, params.epsilon)?;
    let n = data.rows();
    let problem = smo::SmoProblem {
        x: data.x(),
        y: data.y(),
        c: params.c,
        gamma: params.gamma,
        epsilon: params.epsilon,
        tolerance: cfg.kkt_tolerance,
        max_pair_updates: cfg.max_iterations.unwrap_or(10_000 * n),
        cache_rows: cfg.kernel_cache_budget.unwrap_or_else(|| n.min(512)),
    };
    let solution = problem.solve()?;

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for (row, &coef) in data.x().iter().zip(solution.theta.iter()) {
        if coef.abs() >= PRUNE_THRESHOLD {
            support_vectors.push(row.clone());
            dual_coefs.push(coef);
        }
    }
    Ok(SvrModel {
        support_vectors,
        dual_coefs,
        bias: solution.bias,
        gamma: params.gamma,
        dims: data.dims(),
    })
}

/// Evaluate sum_i coef_i * K(sv_i, x) + bias.
pub fn predict(model: &SvrModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.dims {
        return Err(Error::InvalidInput(format!(
            "query has {} dims, model expects {}",
            x.len(),
            model.dims
        )));
    }
    let mut acc = model.bias;
    for (sv, &coef) in model.support_vectors.iter().zip(model.dual_coefs.iter()) {
        let mut d2 = 0.0;
        for (&a, &b) in sv.iter().zip(x.iter()) {
            let d = a - b;
            d2 += d * d;
        }
        acc += coef * (-model.gamma * d2).exp();
    }
    Ok(acc)
}

/// Row-wise `predict`.
pub fn predict_batch(model: &SvrModel, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
    xs.iter().map(|row| predict(model, row)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_fixture() -> TrainingSet {
        let xs: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 * 0.25]).collect();
        let ys: Vec<f64> = xs.iter().map(|r| 2.0 * r[0]).collect();
        TrainingSet::new(xs, ys).unwrap()
    }

    #[test]
    fn rbf_of_identical_points_is_one() {
        let x = [0.3, -1.2, 4.5];
        for gamma in [1e-6, 0.5, 10.0, 1e4] {
            assert_eq!(rbf_kernel(&x, &x, gamma).unwrap(), 1.0);
        }
    }

    #[test]
    fn rbf_approaches_one_as_gamma_vanishes() {
        let v = rbf_kernel(&[0.0, 0.0], &[3.0, 4.0], 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rbf_matches_direct_evaluation() {
        // ||(0,0)-(1,1)||^2 = 2, so K = exp(-2).
        let v = rbf_kernel(&[0.0, 0.0], &[1.0, 1.0], 1.0).unwrap();
        assert!((v - (-2.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.1353352832366127).abs() < 1e-12);
    }

    #[test]
    fn rbf_rejects_dimension_mismatch() {
        assert!(matches!(
            rbf_kernel(&[1.0], &[1.0, 2.0], 1.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn rbf_is_symmetric() {
        let a = [0.17, -2.3, 0.9];
        let b = [1.4, 0.02, -0.6];
        let ab = rbf_kernel(&a, &b, 0.7).unwrap();
        let ba = rbf_kernel(&b, &a, 0.7).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn linear_data_is_fit_within_tube_slack() {
        let data = linear_fixture();
        let params = SvrParams::new(100.0, 1.0, 0.01).unwrap();
        let model = train(&data, &params, &SolverConfig::default()).unwrap();
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            let f = predict(&model, &[x]).unwrap();
            assert!(
                (f - 2.0 * x).abs() < 0.05,
                "prediction {f} too far from {} at x={x}",
                2.0 * x
            );
        }
    }

    #[test]
    fn constant_targets_need_no_support_vectors() {
        let xs: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let ys = vec![3.0; 6];
        let data = TrainingSet::new(xs, ys).unwrap();
        let params = SvrParams::new(10.0, 1.0, 0.1).unwrap();
        let model = train(&data, &params, &SolverConfig::default()).unwrap();
        assert!(model.support_vectors().is_empty());
        for x in [-1.0, 0.0, 2.5, 9.0] {
            assert!((predict(&model, &[x]).unwrap() - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn dual_coefficients_sum_to_zero() {
        let data = linear_fixture();
        let cfg = SolverConfig::default();
        let params = SvrParams::new(100.0, 1.0, 0.01).unwrap();
        let model = train(&data, &params, &cfg).unwrap();
        let sum: f64 = model.dual_coefs().iter().sum();
        assert!(sum.abs() <= 10.0 * cfg.kkt_tolerance);
    }

    #[test]
    fn dual_coefficients_respect_box() {
        let data = linear_fixture();
        let cfg = SolverConfig::default();
        for c in [0.5, 10.0, 100.0] {
            let params = SvrParams::new(c, 2.0, 0.001).unwrap();
            let model = train(&data, &params, &cfg).unwrap();
            for &coef in model.dual_coefs() {
                assert!(coef.abs() <= c + cfg.kkt_tolerance);
            }
        }
    }

    #[test]
    fn widening_the_tube_never_adds_support_vectors() {
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 19.0]).collect();
        let ys: Vec<f64> = xs.iter().map(|r| (6.0 * r[0]).sin()).collect();
        let data = TrainingSet::new(xs, ys).unwrap();
        let cfg = SolverConfig::default();
        let mut previous = usize::MAX;
        for epsilon in [0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0] {
            let params = SvrParams::new(10.0, 1.0, epsilon).unwrap();
            let model = train(&data, &params, &cfg).unwrap();
            let count = model.dual_coefs().len();
            assert!(
                count <= previous,
                "epsilon {epsilon} grew the support set: {count} > {previous}"
            );
            previous = count;
        }
    }

    #[test]
    fn shifting_targets_shifts_predictions() {
        let xs: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 / 11.0, (i % 3) as f64]).collect();
        let ys: Vec<f64> = xs.iter().map(|r| r[0] * r[0] - r[1]).collect();
        let shift = 7.5;
        let shifted: Vec<f64> = ys.iter().map(|v| v + shift).collect();
        let base = TrainingSet::new(xs.clone(), ys).unwrap();
        let moved = TrainingSet::new(xs, shifted).unwrap();
        let params = SvrParams::new(50.0, 1.5, 0.05).unwrap();
        // The shift identity holds at the dual optimum; converge tightly so
        // solver slack does not mask it.
        let cfg = SolverConfig {
            kkt_tolerance: 1e-8,
            ..SolverConfig::default()
        };
        let m0 = train(&base, &params, &cfg).unwrap();
        let m1 = train(&moved, &params, &cfg).unwrap();
        for probe in [[0.1, 0.0], [0.4, 1.0], [0.9, 2.0]] {
            let p0 = predict(&m0, &probe).unwrap();
            let p1 = predict(&m1, &probe).unwrap();
            assert!((p1 - p0 - shift).abs() < 1e-6);
        }
    }

    #[test]
    fn exhausted_iteration_budget_is_an_error() {
        let xs: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 / 9.0]).collect();
        let ys: Vec<f64> = xs.iter().map(|r| (9.0 * r[0]).sin()).collect();
        let data = TrainingSet::new(xs, ys).unwrap();
        let params = SvrParams::new(100.0, 1.0, 0.0001).unwrap();
        let cfg = SolverConfig {
            max_iterations: Some(1),
            ..SolverConfig::default()
        };
        match train(&data, &params, &cfg) {
            Err(Error::NoConvergence { iterations, .. }) => assert_eq!(iterations, 1),
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn prediction_on_single_support_vector_model() {
        let model = SvrModel {
            support_vectors: vec![vec![0.4, -1.0]],
            dual_coefs: vec![1.0],
            bias: 0.0,
            gamma: 3.0,
            dims: 2,
        };
        assert!((predict(&model, &[0.4, -1.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_support_set_predicts_bias() {
        let model = SvrModel {
            support_vectors: vec![],
            dual_coefs: vec![],
            bias: -2.25,
            gamma: 1.0,
            dims: 3,
        };
        for x in [[0.0, 0.0, 0.0], [5.0, -5.0, 1.0]] {
            assert_eq!(predict(&model, &x).unwrap(), -2.25);
        }
    }

    #[test]
    fn batch_prediction_matches_scalar_path() {
        let data = linear_fixture();
        let params = SvrParams::new(100.0, 1.0, 0.01).unwrap();
        let model = train(&data, &params, &SolverConfig::default()).unwrap();
        let queries = vec![vec![0.1], vec![0.5], vec![0.9]];
        let batch = predict_batch(&model, &queries).unwrap();
        assert_eq!(batch.len(), 3);
        for (row, &b) in queries.iter().zip(batch.iter()) {
            assert_eq!(predict(&model, row).unwrap(), b);
        }
        assert!(predict_batch(&model, &[]).unwrap().is_empty());
    }

    #[test]
    fn predict_rejects_wrong_dimension() {
        let data = linear_fixture();
        let params = SvrParams::new(1.0, 1.0, 0.1).unwrap();
        let model = train(&data, &params, &SolverConfig::default()).unwrap();
        assert!(predict(&model, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn training_set_validation() {
        assert!(TrainingSet::new(vec![vec![1.0]], vec![1.0]).is_err());
        assert!(TrainingSet::new(vec![vec![1.0], vec![2.0]], vec![1.0]).is_err());
        assert!(TrainingSet::new(vec![vec![1.0], vec![2.0, 3.0]], vec![1.0, 2.0]).is_err());
        assert!(TrainingSet::new(vec![vec![f64::NAN], vec![2.0]], vec![1.0, 2.0]).is_err());
        assert!(TrainingSet::new(vec![vec![1.0], vec![2.0]], vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(SvrParams::new(0.0, 1.0, 0.1).is_err());
        assert!(SvrParams::new(1.0, -1.0, 0.1).is_err());
        assert!(SvrParams::new(1.0, 1.0, -0.1).is_err());
        assert!(SvrParams::new(1.0, 1.0, 0.0).is_ok());
        assert!(SvrParams::from_position(&[1.0, 1.0]).is_err());
    }
}
