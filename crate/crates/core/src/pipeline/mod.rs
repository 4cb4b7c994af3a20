//! End-to-end tuning runs: embed the series, scale, split, search the
//! (C, gamma, epsilon) box with a tuner whose fitness is the SVR test
//! error, train the final model, forecast the test partition one step
//! ahead, and persist a report in raw price units.

mod quotes;
mod report;

pub use quotes::{ingest_csv, ingest_quotes, Date, IngestOutcome, PriceColumn, QuoteRecord};
pub use report::{
    ComparisonReport, ComparisonRow, EmbeddingSummary, FailedMember, ForecastPoint, ParamsSummary,
    TuneReport,
};

use crate::embedding::{
    estimate_delay_ami, estimate_dimension_fnn, invert_minmax, reconstruct, scale_minmax,
    split_chronological, EmbeddedDataset, EmbeddingSpec, FnnConfig, ScalingMode, SplitDataset,
    TimeSeries,
};
use crate::error::{Error, Result};
use crate::metrics::{self, diebold_mariano, ForecastPair};
use crate::optim::{optimize, OptimizerConfig, SearchSpace};
use crate::svr::{predict_batch, train, SolverConfig, SvrParams, TrainingSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

/// Fitness returned for parameter vectors whose training run fails;
/// scaled targets live in [0, 1], so any value far above 1 dominates.
pub const OBJECTIVE_PENALTY: f64 = 1e3;

/// The box the tuners search: C and gamma in [4^-7, 4^4], epsilon in
/// [4^-7, 0.25].
pub fn default_search_space() -> SearchSpace {
    let low = 4.0f64.powi(-7);
    SearchSpace::new(vec![low, low, low], vec![256.0, 256.0, 0.25])
        .expect("default bounds are valid")
}

/// Which partition the tuning objective scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitnessTarget {
    /// Score on the test partition. Leaks the test set into tuning;
    /// kept as the default because the classic tuning loop does exactly
    /// this and reports produced that way are comparable to it.
    #[default]
    TestSet,
    /// Score on the last fifth of the training rows, leaving the test
    /// partition untouched until the final forecast.
    ValidationSplit,
}

impl FitnessTarget {
    pub fn name(&self) -> &'static str {
        match self {
            FitnessTarget::TestSet => "test_set",
            FitnessTarget::ValidationSplit => "validation_split",
        }
    }
}

impl fmt::Display for FitnessTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FitnessTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "test_set" => Ok(FitnessTarget::TestSet),
            "validation_split" => Ok(FitnessTarget::ValidationSplit),
            other => Err(Error::InvalidInput(format!(
                "unknown fitness target '{other}' (expected test_set or validation_split)"
            ))),
        }
    }
}

/// Knobs for automatic (m, tau) estimation when a request does not pin
/// the embedding.
#[derive(Debug, Clone)]
pub struct EstimationConfig {
    pub max_delay: usize,
    pub bins: Option<usize>,
    pub max_dimension: usize,
    pub fnn: FnnConfig,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            max_delay: 30,
            bins: None,
            max_dimension: 15,
            fnn: FnnConfig::default(),
        }
    }
}

/// Everything one tuning run needs.
#[derive(Debug, Clone)]
pub struct TuneRequest {
    pub series: TimeSeries,
    /// Estimated from the series when absent.
    pub embedding: Option<EmbeddingSpec>,
    pub space: SearchSpace,
    pub optimizer: OptimizerConfig,
    pub solver: SolverConfig,
    pub split_ratio: f64,
    pub fitness_target: FitnessTarget,
    /// Scale with full-series statistics (normalize before splitting)
    /// instead of training-prefix statistics.
    pub paper_faithful_scaling: bool,
    pub estimation: EstimationConfig,
    /// Dates aligned with the series, for report annotation.
    pub dates: Option<Vec<Date>>,
}

impl TuneRequest {
    pub fn new(series: TimeSeries) -> Self {
        TuneRequest {
            series,
            embedding: None,
            space: default_search_space(),
            optimizer: OptimizerConfig::default(),
            solver: SolverConfig::default(),
            split_ratio: 0.8,
            fitness_target: FitnessTarget::default(),
            paper_faithful_scaling: false,
            estimation: EstimationConfig::default(),
            dates: None,
        }
    }

    fn scaling_mode(&self) -> ScalingMode {
        if self.paper_faithful_scaling {
            ScalingMode::FullSeries
        } else {
            ScalingMode::TrainOnly {
                ratio: self.split_ratio,
            }
        }
    }

    fn scaling_name(&self) -> &'static str {
        if self.paper_faithful_scaling {
            "full_series"
        } else {
            "train_only"
        }
    }
}

/// Estimate (m, tau) for a series: delay from the first AMI minimum,
/// dimension from the false-nearest-neighbor search at that delay.
pub fn estimate_embedding(series: &TimeSeries, cfg: &EstimationConfig) -> Result<EmbeddingSpec> {
    let max_delay = cfg.max_delay.min(series.len().saturating_sub(2)).max(1);
    let delay = estimate_delay_ami(series, max_delay, cfg.bins)?.delay;
    let max_dim = cfg
        .max_dimension
        .min(series.len().saturating_sub(2) / delay)
        .max(1);
    let dimension = estimate_dimension_fnn(series, delay, max_dim, &cfg.fnn)?.dimension;
    EmbeddingSpec::new(dimension, delay)
}

/// Embed, scale and split a series the way a tuning run would.
pub fn prepare_split(request: &TuneRequest) -> Result<(EmbeddingSpec, EmbeddedDataset, SplitDataset)> {
    let spec = match request.embedding {
        Some(spec) => spec,
        None => estimate_embedding(&request.series, &request.estimation)?,
    };
    let dataset = reconstruct(&request.series, &spec)?;
    let scaled = scale_minmax(&dataset, request.scaling_mode())?;
    let split = split_chronological(&scaled, request.split_ratio)?;
    Ok((spec, scaled, split))
}

/// Pair-update budget per objective evaluation, per training row. Corner
/// parameter triples (huge C with a hair-width tube) can demand millions
/// of updates for a fit the search will discard anyway; they surface as
/// the penalty instead of stalling the run.
const TUNING_PAIR_UPDATES_PER_ROW: usize = 50;

/// Build the tuning objective: train on the training rows with the
/// candidate (C, gamma, epsilon) and return the MSE on the fitness
/// partition. Training failures come back as [`OBJECTIVE_PENALTY`]
/// rather than aborting the surrounding search. A `solver` without an
/// explicit iteration cap gets a tuning budget of
/// [`TUNING_PAIR_UPDATES_PER_ROW`] per row; the final fit in
/// [`run_tune`] still uses the unbounded-by-default train cap.
pub fn objective_from_split<'a>(
    split: &'a SplitDataset,
    solver: &'a SolverConfig,
    target: FitnessTarget,
) -> Result<impl Fn(&[f64]) -> f64 + Sync + 'a> {
    let (fit_rows, eval_x, eval_y): (usize, &[Vec<f64>], &[f64]) = match target {
        FitnessTarget::TestSet => (split.train_rows(), &split.test_x, &split.test_y),
        FitnessTarget::ValidationSplit => {
            let inner = (0.8 * split.train_rows() as f64).floor() as usize;
            if inner < 2 || inner == split.train_rows() {
                return Err(Error::InvalidInput(format!(
                    "{} training rows are too few for a validation split",
                    split.train_rows()
                )));
            }
            (inner, &split.train_x[inner..], &split.train_y[inner..])
        }
    };
    let fit_set = TrainingSet::new(
        split.train_x[..fit_rows].to_vec(),
        split.train_y[..fit_rows].to_vec(),
    )?;
    let solver = SolverConfig {
        max_iterations: Some(
            solver
                .max_iterations
                .unwrap_or(TUNING_PAIR_UPDATES_PER_ROW * fit_rows),
        ),
        ..*solver
    };

    Ok(move |position: &[f64]| -> f64 {
        let params = match SvrParams::from_position(position) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("objective: rejecting parameter vector {position:?}: {e}");
                return OBJECTIVE_PENALTY;
            }
        };
        let model = match train(&fit_set, &params, &solver) {
            Ok(m) => m,
            Err(e) => {
                eprintln!(
                    "objective: training failed at C={} gamma={} epsilon={}: {e}",
                    params.c, params.gamma, params.epsilon
                );
                return OBJECTIVE_PENALTY;
            }
        };
        let predictions = match predict_batch(&model, eval_x) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("objective: prediction failed: {e}");
                return OBJECTIVE_PENALTY;
            }
        };
        let n = eval_y.len() as f64;
        eval_y
            .iter()
            .zip(predictions.iter())
            .map(|(&y, &f)| (y - f) * (y - f))
            .sum::<f64>()
            / n
    })
}

/// Run the whole tuning procedure for one request.
pub fn run_tune(request: &TuneRequest) -> Result<TuneReport> {
    let started = Instant::now();
    if !(request.split_ratio > 0.0 && request.split_ratio < 1.0) {
        return Err(Error::InvalidInput(format!(
            "split ratio must lie in (0, 1), got {}",
            request.split_ratio
        )));
    }
    if let Some(dates) = &request.dates {
        if dates.len() != request.series.len() {
            return Err(Error::InvalidInput(format!(
                "{} dates for {} series points",
                dates.len(),
                request.series.len()
            )));
        }
    }

    let (spec, scaled, split) = prepare_split(request)?;
    let objective = objective_from_split(&split, &request.solver, request.fitness_target)?;
    let outcome = optimize(&objective, &request.space, &request.optimizer)?;
    let params = SvrParams::from_position(&outcome.best_position)?;

    // Final fit on the full training partition with the winning triple.
    let train_set = TrainingSet::new(split.train_x.clone(), split.train_y.clone())?;
    let model = train(&train_set, &params, &request.solver)?;
    let scaled_predictions = predict_batch(&model, &split.test_x)?;

    let scaling = scaled.scaling().expect("pipeline datasets are scaled");
    let forecasts: Vec<ForecastPoint> = split
        .test_y
        .iter()
        .zip(scaled_predictions.iter())
        .enumerate()
        .map(|(i, (&actual, &predicted))| {
            let date = request.dates.as_ref().map(|dates| {
                let row = split.train_rows() + i;
                dates[scaled.target_index(row)].to_string()
            });
            ForecastPoint {
                date,
                actual: invert_minmax(actual, scaling),
                predicted: invert_minmax(predicted, scaling),
            }
        })
        .collect();

    let pair = ForecastPair::new(
        forecasts.iter().map(|p| p.actual).collect(),
        forecasts.iter().map(|p| p.predicted).collect(),
    )?;
    let mse = metrics::mse(&pair);
    let mape = metrics::mape(&pair)?;

    Ok(TuneReport {
        dataset: request.series.label().to_string(),
        embedding: EmbeddingSummary {
            m: spec.dimension,
            tau: spec.delay,
        },
        optimizer: request.optimizer.algorithm.name().to_string(),
        seed: request.optimizer.seed,
        params: ParamsSummary {
            c: params.c,
            gamma: params.gamma,
            epsilon: params.epsilon,
        },
        mse,
        mape,
        cost_seconds: started.elapsed().as_secs_f64(),
        fitness_target: request.fitness_target.name().to_string(),
        scaling_mode: request.scaling_name().to_string(),
        fitness_history: outcome.history,
        forecasts,
    })
}

/// Run several tuners on one dataset and compare them pairwise.
///
/// Members must share the series, embedding, split and solver so the
/// comparison is fair; each may differ in algorithm and budget. `jobs`
/// bounds how many members run concurrently. A failed member is dropped
/// from the table and listed under `failed`.
pub fn run_compare(requests: &[TuneRequest], jobs: usize) -> Result<ComparisonReport> {
    if requests.is_empty() {
        return Err(Error::InvalidInput("no requests to compare".into()));
    }
    let first = &requests[0];
    for (i, request) in requests.iter().enumerate().skip(1) {
        // Fairness: members may differ in algorithm and seed, nothing else.
        let same = request.series == first.series
            && request.embedding == first.embedding
            && request.split_ratio == first.split_ratio
            && request.paper_faithful_scaling == first.paper_faithful_scaling
            && request.fitness_target == first.fitness_target
            && request.space == first.space
            && request.optimizer.population == first.optimizer.population
            && request.optimizer.max_iterations == first.optimizer.max_iterations
            && request.solver == first.solver;
        if !same {
            return Err(Error::InvalidInput(format!(
                "request {i} differs from the first in data, budget or solver; comparisons must be evaluation-fair"
            )));
        }
    }
    let (spec, _, _) = prepare_split(first)?;

    // Unique labels even when the same algorithm appears twice.
    let labels: Vec<String> = requests
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let name = r.optimizer.algorithm.name();
            if requests
                .iter()
                .filter(|o| o.optimizer.algorithm == r.optimizer.algorithm)
                .count()
                > 1
            {
                format!("{name}#{i}")
            } else {
                name.to_string()
            }
        })
        .collect();

    let results: Vec<Result<TuneReport>> = if jobs <= 1 || requests.len() <= 1 {
        requests.iter().map(run_tune).collect()
    } else {
        let threads = jobs.min(requests.len());
        let chunk = requests.len().div_ceil(threads);
        let mut results: Vec<Option<Result<TuneReport>>> =
            (0..requests.len()).map(|_| None).collect();
        std::thread::scope(|scope| {
            let mut remaining: &mut [Option<Result<TuneReport>>] = &mut results;
            let mut handles = Vec::new();
            for group in requests.chunks(chunk) {
                let (slot, rest) = remaining.split_at_mut(group.len());
                remaining = rest;
                handles.push(scope.spawn(move || {
                    for (out, request) in slot.iter_mut().zip(group.iter()) {
                        *out = Some(run_tune(request));
                    }
                }));
            }
            for handle in handles {
                handle.join().expect("comparison thread panicked");
            }
        });
        results.into_iter().map(|r| r.expect("slot filled")).collect()
    };

    let mut completed: Vec<(String, TuneReport)> = Vec::new();
    let mut failed = Vec::new();
    for (label, outcome) in labels.into_iter().zip(results) {
        match outcome {
            Ok(report) => completed.push((label, report)),
            Err(e) => failed.push(FailedMember {
                optimizer: label,
                error: e.to_string(),
            }),
        }
    }
    if completed.is_empty() {
        return Err(Error::InvalidInput(
            "every comparison member failed".into(),
        ));
    }

    let mut dm_matrix = std::collections::BTreeMap::new();
    for (label_a, report_a) in &completed {
        let mut row = std::collections::BTreeMap::new();
        let errors_a: Vec<f64> = report_a.forecast_pair()?.errors();
        for (label_b, report_b) in &completed {
            if label_a == label_b {
                continue;
            }
            let errors_b: Vec<f64> = report_b.forecast_pair()?.errors();
            let stat = match diebold_mariano(&errors_a, &errors_b) {
                Ok(result) => Some(result.statistic),
                Err(Error::DegenerateComparison(_)) => None,
                Err(e) => return Err(e),
            };
            row.insert(label_b.clone(), stat);
        }
        dm_matrix.insert(label_a.clone(), row);
    }

    let mut table: Vec<ComparisonRow> = completed
        .iter()
        .map(|(label, report)| ComparisonRow {
            optimizer: label.clone(),
            c: report.params.c,
            gamma: report.params.gamma,
            epsilon: report.params.epsilon,
            mse: report.mse,
            mape: report.mape,
            cost_seconds: report.cost_seconds,
        })
        .collect();
    table.sort_by(|a, b| a.mse.partial_cmp(&b.mse).unwrap());

    Ok(ComparisonReport {
        dataset: first.series.label().to_string(),
        embedding: EmbeddingSummary {
            m: spec.dimension,
            tau: spec.delay,
        },
        table,
        dm_matrix,
        failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::Algorithm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sine_series(len: usize, noise: f64, seed: u64) -> TimeSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..len)
            .map(|t| {
                2.0 + (2.0 * std::f64::consts::PI * t as f64 / 25.0).sin()
                    + noise * rng.random_range(-1.0..1.0)
            })
            .collect();
        TimeSeries::new(values, "sine").unwrap()
    }

    fn small_request() -> TuneRequest {
        let mut request = TuneRequest::new(sine_series(240, 0.01, 8));
        request.embedding = Some(EmbeddingSpec::new(3, 6).unwrap());
        request.optimizer = OptimizerConfig {
            population: 6,
            max_iterations: 8,
            seed: 42,
            algorithm: Algorithm::GoldenSine,
            evaluation_jobs: 1,
        };
        request
    }

    #[test]
    fn default_space_matches_the_documented_bounds() {
        let space = default_search_space();
        let low = 4.0f64.powi(-7);
        assert!((low - 6.103515625e-5).abs() < 1e-18);
        assert_eq!(space.lower(), &[low, low, low]);
        assert_eq!(space.upper(), &[256.0, 256.0, 0.25]);
    }

    #[test]
    fn objective_matches_external_train_then_score() {
        let request = small_request();
        let (_, _, split) = prepare_split(&request).unwrap();
        let objective =
            objective_from_split(&split, &request.solver, FitnessTarget::TestSet).unwrap();
        let position = [10.0, 1.0, 0.01];

        let value = objective(&position);

        let train_set = TrainingSet::new(split.train_x.clone(), split.train_y.clone()).unwrap();
        let params = SvrParams::from_position(&position).unwrap();
        let model = train(&train_set, &params, &request.solver).unwrap();
        let predictions = predict_batch(&model, &split.test_x).unwrap();
        let pair = ForecastPair::new(split.test_y.clone(), predictions).unwrap();
        assert!((value - metrics::mse(&pair)).abs() < 1e-15);
    }

    #[test]
    fn objective_penalizes_failed_training() {
        let request = small_request();
        let (_, _, split) = prepare_split(&request).unwrap();
        let strangled = SolverConfig {
            max_iterations: Some(1),
            ..SolverConfig::default()
        };
        let objective =
            objective_from_split(&split, &strangled, FitnessTarget::TestSet).unwrap();
        assert_eq!(objective(&[100.0, 1.0, 0.0001]), OBJECTIVE_PENALTY);
    }

    #[test]
    fn validation_target_scores_the_training_tail() {
        let request = small_request();
        let (_, _, split) = prepare_split(&request).unwrap();
        let objective =
            objective_from_split(&split, &request.solver, FitnessTarget::ValidationSplit)
                .unwrap();
        // A constant-prediction parameter set scores against the tail of
        // the training rows, not the test partition.
        let inner = (0.8 * split.train_rows() as f64).floor() as usize;
        let value = objective(&[1.0, 1.0, 0.25]);

        let train_set = TrainingSet::new(
            split.train_x[..inner].to_vec(),
            split.train_y[..inner].to_vec(),
        )
        .unwrap();
        let params = SvrParams::new(1.0, 1.0, 0.25).unwrap();
        let model = train(&train_set, &params, &request.solver).unwrap();
        let predictions = predict_batch(&model, &split.train_x[inner..]).unwrap();
        let pair = ForecastPair::new(split.train_y[inner..].to_vec(), predictions).unwrap();
        assert!((value - metrics::mse(&pair)).abs() < 1e-15);
    }

    #[test]
    fn run_tune_produces_a_self_consistent_report() {
        let report = run_tune(&small_request()).unwrap();
        assert!(report.validate(1e-12).is_ok());
        assert_eq!(report.optimizer, "golden_sine");
        assert_eq!(report.seed, 42);
        assert_eq!(report.embedding, EmbeddingSummary { m: 3, tau: 6 });
        assert_eq!(report.fitness_history.len(), 9);
        assert!(default_search_space().contains(&[
            report.params.c,
            report.params.gamma,
            report.params.epsilon
        ]));
        // Forecasts are stored in raw units, near the raw series scale.
        assert!(report.forecasts.iter().all(|p| p.actual > 0.5 && p.actual < 3.5));
    }

    #[test]
    fn run_tune_is_deterministic_up_to_wall_clock() {
        let request = small_request();
        let mut a = run_tune(&request).unwrap();
        let mut b = run_tune(&request).unwrap();
        a.cost_seconds = 0.0;
        b.cost_seconds = 0.0;
        assert_eq!(a, b);
    }

    #[test]
    fn run_tune_annotates_dates_when_given() {
        let mut request = small_request();
        let base: Date = "2020-01-01".parse().unwrap();
        request.dates = Some(
            (0..request.series.len())
                .map(|i| Date {
                    year: base.year,
                    month: 1 + (i / 28) as u8,
                    day: 1 + (i % 28) as u8,
                })
                .collect(),
        );
        let report = run_tune(&request).unwrap();
        assert!(report.forecasts.iter().all(|p| p.date.is_some()));
        // The first test target lives at raw index train_rows + 1 + (m-1)tau.
        let (_, scaled, split) = prepare_split(&request).unwrap();
        let idx = scaled.target_index(split.train_rows());
        let expected = request.dates.as_ref().unwrap()[idx].to_string();
        assert_eq!(report.forecasts[0].date.as_deref(), Some(&expected[..]));
    }

    #[test]
    fn estimated_embedding_is_used_when_unpinned() {
        let mut request = small_request();
        request.embedding = None;
        request.series = sine_series(500, 0.05, 3);
        let report = run_tune(&request).unwrap();
        assert!(report.embedding.tau >= 1);
        assert!(report.embedding.m >= 1);
    }

    #[test]
    fn compare_runs_rank_by_mse_and_fill_the_dm_matrix() {
        let base = small_request();
        let mut members = Vec::new();
        for algorithm in [Algorithm::GoldenSine, Algorithm::RandomSearch] {
            let mut request = base.clone();
            request.optimizer.algorithm = algorithm;
            members.push(request);
        }
        let report = run_compare(&members, 1).unwrap();
        assert_eq!(report.table.len(), 2);
        assert!(report.table[0].mse <= report.table[1].mse);
        assert!(report.failed.is_empty());
        let ab = report.dm_matrix["golden_sine"]["random_search"];
        let ba = report.dm_matrix["random_search"]["golden_sine"];
        match (ab, ba) {
            (Some(x), Some(y)) => assert_eq!(x, -y),
            (None, None) => {} // degenerate both ways
            other => panic!("asymmetric degeneracy {other:?}"),
        }
    }

    #[test]
    fn identical_members_are_degenerate_in_the_matrix() {
        let base = small_request();
        let report = run_compare(&[base.clone(), base], 1).unwrap();
        assert_eq!(report.table.len(), 2);
        let labels: Vec<&String> = report.dm_matrix.keys().collect();
        assert_eq!(labels, ["golden_sine#0", "golden_sine#1"]);
        assert_eq!(report.dm_matrix["golden_sine#0"]["golden_sine#1"], None);
    }

    #[test]
    fn compare_jobs_do_not_change_results() {
        let base = small_request();
        let mut members = Vec::new();
        for algorithm in [Algorithm::GoldenSine, Algorithm::RandomSearch, Algorithm::GreyWolf] {
            let mut request = base.clone();
            request.optimizer.algorithm = algorithm;
            members.push(request);
        }
        let mut serial = run_compare(&members, 1).unwrap();
        let mut threaded = run_compare(&members, 3).unwrap();
        for row in serial.table.iter_mut().chain(threaded.table.iter_mut()) {
            row.cost_seconds = 0.0;
        }
        assert_eq!(serial, threaded);
    }

    #[test]
    fn mismatched_members_are_rejected() {
        let a = small_request();
        let mut b = a.clone();
        b.split_ratio = 0.7;
        assert!(run_compare(&[a, b], 1).is_err());
    }
}
