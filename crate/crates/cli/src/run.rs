//! Subcommand implementations.

use crate::config::{resolve, Settings};
use crate::CommonArgs;
use gsvr_core::embedding::{
    estimate_delay_ami, estimate_dimension_fnn, reconstruct, scale_minmax, split_chronological,
    EmbeddingSpec, ScalingMode, TimeSeries,
};
use gsvr_core::optim::{OptimizerConfig, SearchSpace};
use gsvr_core::pipeline::{
    ingest_csv, run_compare, run_tune, Date, EstimationConfig, TuneReport, TuneRequest,
};
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(gsvr_core::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(message) => f.write_str(message),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<gsvr_core::Error> for CliError {
    fn from(e: gsvr_core::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult = Result<(), CliError>;

fn load_series(settings: &Settings) -> Result<(TimeSeries, Vec<Date>), CliError> {
    let input = settings
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let outcome = ingest_csv(input)?;
    if outcome.dropped_rows > 0 {
        eprintln!("warning: dropped {} rows with null fields", outcome.dropped_rows);
    }
    if outcome.resorted {
        eprintln!("warning: input rows were out of order and have been re-sorted");
    }
    let label = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".into());
    let values: Vec<f64> = outcome
        .records
        .iter()
        .map(|r| settings.column.extract(r))
        .collect();
    let dates: Vec<Date> = outcome.records.iter().map(|r| r.date).collect();
    Ok((TimeSeries::new(values, label)?, dates))
}

/// Fill in whichever of (m, tau) the flags left unspecified.
fn resolve_embedding(
    settings: &Settings,
    series: &TimeSeries,
) -> Result<(EmbeddingSpec, bool), CliError> {
    let estimation = EstimationConfig::default();
    if let (Some(m), Some(tau)) = (settings.m, settings.tau) {
        return Ok((EmbeddingSpec::new(m, tau)?, false));
    }
    let tau = match settings.tau {
        Some(tau) => tau,
        None => {
            let horizon = estimation.max_delay.min(series.len().saturating_sub(2)).max(1);
            estimate_delay_ami(series, horizon, estimation.bins)?.delay
        }
    };
    let m = match settings.m {
        Some(m) => m,
        None => {
            let max_dim = estimation
                .max_dimension
                .min(series.len().saturating_sub(2) / tau)
                .max(1);
            estimate_dimension_fnn(series, tau, max_dim, &estimation.fnn)?.dimension
        }
    };
    Ok((EmbeddingSpec::new(m, tau)?, true))
}

fn search_space(settings: &Settings) -> Result<SearchSpace, CliError> {
    Ok(SearchSpace::new(
        vec![settings.bounds_c.0, settings.bounds_gamma.0, settings.bounds_epsilon.0],
        vec![settings.bounds_c.1, settings.bounds_gamma.1, settings.bounds_epsilon.1],
    )?)
}

fn build_request(
    settings: &Settings,
    algorithm: gsvr_core::optim::Algorithm,
    series: TimeSeries,
    dates: Vec<Date>,
    spec: EmbeddingSpec,
    evaluation_jobs: usize,
) -> Result<TuneRequest, CliError> {
    let mut request = TuneRequest::new(series);
    request.embedding = Some(spec);
    request.space = search_space(settings)?;
    request.optimizer = OptimizerConfig {
        population: settings.population,
        max_iterations: settings.iterations,
        seed: settings.seed,
        algorithm,
        evaluation_jobs,
    };
    request.split_ratio = settings.split;
    request.fitness_target = settings.fitness_target;
    request.paper_faithful_scaling = settings.paper_faithful_scaling;
    request.dates = Some(dates);
    Ok(request)
}

fn default_output(settings: &Settings, kind: &str) -> PathBuf {
    let stem = settings
        .input
        .as_ref()
        .and_then(|p| p.file_stem())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".into());
    PathBuf::from(format!("{stem}-{kind}.json"))
}

pub fn embed(args: CommonArgs) -> CliResult {
    let settings = resolve(&args)?;
    let (series, _) = load_series(&settings)?;
    let (spec, estimated) = resolve_embedding(&settings, &series)?;

    let dataset = reconstruct(&series, &spec)?;
    let mode = if settings.paper_faithful_scaling {
        ScalingMode::FullSeries
    } else {
        ScalingMode::TrainOnly {
            ratio: settings.split,
        }
    };
    let scaled = scale_minmax(&dataset, mode)?;
    let split = split_chronological(&scaled, settings.split)?;
    eprintln!(
        "embedding {}: {}",
        series.label(),
        if estimated { "estimated" } else { "overridden" }
    );
    println!(
        "m={} tau={} rows={} train={} test={}",
        spec.dimension,
        spec.delay,
        scaled.rows(),
        split.train_rows(),
        split.test_rows()
    );

    if settings.output.is_some() {
        let path = settings.output.clone().unwrap();
        let (min, max) = scaled.scaling().expect("scaled dataset");
        let doc = serde_json::json!({
            "dataset": series.label(),
            "embedding": { "m": spec.dimension, "tau": spec.delay },
            "scaling": { "min": min, "max": max },
            "rows": { "total": scaled.rows(), "train": split.train_rows(), "test": split.test_rows() },
            "x": scaled.x(),
            "y": scaled.y(),
        });
        std::fs::write(&path, serde_json::to_string_pretty(&doc).map_err(gsvr_core::Error::from)? + "\n")
            .map_err(gsvr_core::Error::from)?;
        eprintln!("embedded dataset written to {}", path.display());
    }
    Ok(())
}

pub fn tune(args: CommonArgs) -> CliResult {
    let settings = resolve(&args)?;
    let (series, dates) = load_series(&settings)?;
    let (spec, _) = resolve_embedding(&settings, &series)?;
    let request = build_request(
        &settings,
        settings.optimizer,
        series,
        dates,
        spec,
        settings.jobs,
    )?;

    let report = run_tune(&request)?;
    for (iteration, best) in report.fitness_history.iter().enumerate() {
        eprintln!("iter {iteration:3} best {best:.6e}");
    }
    let path = settings
        .output
        .clone()
        .unwrap_or_else(|| default_output(&settings, "report"));
    report.write_to(&path)?;
    eprintln!("report written to {}", path.display());
    println!(
        "{} {} mse={} mape={} time={}",
        report.dataset, report.optimizer, report.mse, report.mape, report.cost_seconds
    );
    Ok(())
}

pub fn compare(args: CommonArgs) -> CliResult {
    let settings = resolve(&args)?;
    let (series, dates) = load_series(&settings)?;
    let (spec, _) = resolve_embedding(&settings, &series)?;

    let members: Vec<TuneRequest> = settings
        .optimizers
        .iter()
        .map(|&algorithm| {
            build_request(&settings, algorithm, series.clone(), dates.clone(), spec, 1)
        })
        .collect::<Result<_, _>>()?;

    let report = run_compare(&members, settings.jobs)?;
    let path = settings
        .output
        .clone()
        .unwrap_or_else(|| default_output(&settings, "comparison"));
    report.write_to(&path)?;
    eprintln!("comparison written to {}", path.display());
    for row in &report.table {
        println!(
            "{} mse={} mape={} time={}",
            row.optimizer, row.mse, row.mape, row.cost_seconds
        );
    }
    for failed in &report.failed {
        eprintln!("warning: {} failed: {}", failed.optimizer, failed.error);
    }
    Ok(())
}

pub fn validate(report_path: &Path) -> CliResult {
    let text = std::fs::read_to_string(report_path).map_err(gsvr_core::Error::from)?;
    let report = TuneReport::from_json(&text)?;
    report.validate(1e-9)?;
    println!("ok {}", report_path.display());
    Ok(())
}
