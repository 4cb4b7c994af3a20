//! Flag resolution: command line beats config file beats the built-in
//! defaults (population 20, iterations 50, seed 42, bounds 4^-7..4^4 for
//! C and gamma, 4^-7..0.25 for epsilon, split 0.8).

use crate::run::CliError;
use crate::CommonArgs;
use gsvr_core::optim::Algorithm;
use gsvr_core::pipeline::{FitnessTarget, PriceColumn};
use std::collections::BTreeMap;
use std::path::PathBuf;

pub struct Settings {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub m: Option<usize>,
    pub tau: Option<usize>,
    pub population: usize,
    pub iterations: usize,
    pub optimizer: Algorithm,
    pub optimizers: Vec<Algorithm>,
    pub bounds_c: (f64, f64),
    pub bounds_gamma: (f64, f64),
    pub bounds_epsilon: (f64, f64),
    pub split: f64,
    pub fitness_target: FitnessTarget,
    pub paper_faithful_scaling: bool,
    pub column: PriceColumn,
    pub jobs: usize,
}

const KNOWN_KEYS: &[&str] = &[
    "input",
    "output",
    "seed",
    "m",
    "tau",
    "population",
    "iterations",
    "optimizer",
    "optimizers",
    "bounds-c",
    "bounds-gamma",
    "bounds-epsilon",
    "split",
    "fitness-target",
    "paper-faithful-scaling",
    "column",
    "jobs",
];

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

/// Parse a `key = value` file; keys mirror the long flag names.
fn load_config(path: &PathBuf) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(format!(
                "config line {}: expected key=value, got '{raw}'",
                idx + 1
            )));
        };
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(usage(format!("config line {}: unknown key '{key}'", idx + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse_bounds(text: &str, name: &str) -> Result<(f64, f64), CliError> {
    let Some((lo, hi)) = text.split_once(':') else {
        return Err(usage(format!("--{name} expects LO:HI, got '{text}'")));
    };
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| usage(format!("--{name}: bad lower bound '{lo}'")))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| usage(format!("--{name}: bad upper bound '{hi}'")))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(usage(format!("--{name}: need finite LO < HI, got {lo}:{hi}")));
    }
    Ok((lo, hi))
}

fn parse_seed(text: &str) -> Result<u64, CliError> {
    if text == "random" {
        return Ok(rand::random());
    }
    text.parse()
        .map_err(|_| usage(format!("--seed expects an integer or 'random', got '{text}'")))
}

pub fn resolve(args: &CommonArgs) -> Result<Settings, CliError> {
    let file = match &args.config {
        Some(path) => load_config(path)?,
        None => BTreeMap::new(),
    };
    let from_file = |key: &str| file.get(key).cloned();
    let pick = |cli: Option<String>, key: &str| cli.or_else(|| from_file(key));

    let low = 4.0f64.powi(-7);
    let seed = match pick(args.seed.clone(), "seed") {
        Some(text) => parse_seed(&text)?,
        None => 42,
    };
    let parse_usize = |value: Option<String>, key: &str, default: usize| -> Result<usize, CliError> {
        match value {
            Some(text) => text
                .parse()
                .map_err(|_| usage(format!("--{key} expects an integer, got '{text}'"))),
            None => Ok(default),
        }
    };
    let population = parse_usize(
        args.population.map(|v| v.to_string()).or_else(|| from_file("population")),
        "population",
        20,
    )?;
    let iterations = parse_usize(
        args.iterations.map(|v| v.to_string()).or_else(|| from_file("iterations")),
        "iterations",
        50,
    )?;
    if population < 2 {
        return Err(usage("--population must be at least 2"));
    }
    if iterations < 1 {
        return Err(usage("--iterations must be at least 1"));
    }

    let m = match args.m.map(|v| v.to_string()).or_else(|| from_file("m")) {
        Some(text) => Some(
            text.parse::<usize>()
                .ok()
                .filter(|&v| v >= 1)
                .ok_or_else(|| usage(format!("--m expects a positive integer, got '{text}'")))?,
        ),
        None => None,
    };
    let tau = match args.tau.map(|v| v.to_string()).or_else(|| from_file("tau")) {
        Some(text) => Some(
            text.parse::<usize>()
                .ok()
                .filter(|&v| v >= 1)
                .ok_or_else(|| usage(format!("--tau expects a positive integer, got '{text}'")))?,
        ),
        None => None,
    };

    let optimizer: Algorithm = pick(args.optimizer.clone(), "optimizer")
        .unwrap_or_else(|| "golden_sine".into())
        .parse()
        .map_err(|e| usage(format!("{e}")))?;
    let optimizers: Vec<Algorithm> = pick(args.optimizers.clone(), "optimizers")
        .unwrap_or_else(|| "golden_sine,random_search,particle_swarm,grey_wolf".into())
        .split(',')
        .map(|name| name.trim().parse().map_err(|e| usage(format!("{e}"))))
        .collect::<Result<_, _>>()?;
    if optimizers.is_empty() {
        return Err(usage("--optimizers needs at least one name"));
    }

    let bounds_c = match pick(args.bounds_c.clone(), "bounds-c") {
        Some(text) => parse_bounds(&text, "bounds-c")?,
        None => (low, 256.0),
    };
    let bounds_gamma = match pick(args.bounds_gamma.clone(), "bounds-gamma") {
        Some(text) => parse_bounds(&text, "bounds-gamma")?,
        None => (low, 256.0),
    };
    let bounds_epsilon = match pick(args.bounds_epsilon.clone(), "bounds-epsilon") {
        Some(text) => parse_bounds(&text, "bounds-epsilon")?,
        None => (low, 0.25),
    };

    let split = match args.split.map(|v| v.to_string()).or_else(|| from_file("split")) {
        Some(text) => text
            .parse::<f64>()
            .ok()
            .filter(|v| *v > 0.0 && *v < 1.0)
            .ok_or_else(|| usage(format!("--split expects a fraction in (0, 1), got '{text}'")))?,
        None => 0.8,
    };
    let fitness_target: FitnessTarget = pick(args.fitness_target.clone(), "fitness-target")
        .unwrap_or_else(|| "test_set".into())
        .parse()
        .map_err(|e| usage(format!("{e}")))?;
    let paper_faithful_scaling = args.paper_faithful_scaling
        || from_file("paper-faithful-scaling")
            .map(|v| v == "true" || v == "1")
            .unwrap_or(false);
    let column: PriceColumn = pick(args.column.clone(), "column")
        .unwrap_or_else(|| "close".into())
        .parse()
        .map_err(|e| usage(format!("{e}")))?;
    let jobs = parse_usize(
        args.jobs.map(|v| v.to_string()).or_else(|| from_file("jobs")),
        "jobs",
        1,
    )?
    .max(1);

    Ok(Settings {
        input: args
            .input
            .clone()
            .or_else(|| from_file("input").map(PathBuf::from)),
        output: args
            .output
            .clone()
            .or_else(|| from_file("output").map(PathBuf::from)),
        seed,
        m,
        tau,
        population,
        iterations,
        optimizer,
        optimizers,
        bounds_c,
        bounds_gamma,
        bounds_epsilon,
        split,
        fitness_target,
        paper_faithful_scaling,
        column,
        jobs,
    })
}
