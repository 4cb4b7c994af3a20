//! Bound-constrained black-box minimization.
//!
//! The golden sine algorithm is the flagship tuner; random search,
//! particle swarm and grey wolf run behind the same contract so
//! comparisons are evaluation-fair: every algorithm spends exactly
//! `population` evaluations up front and `population` per iteration.

mod baselines;
mod golden;

pub use golden::{golden_sine_step, GoldenCoefficients};

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

/// Box bounds of the search, one (lower, upper) pair per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidInput(
                "bounds must be non-empty and of equal length".into(),
            ));
        }
        for (i, (&lo, &hi)) in lower.iter().zip(upper.iter()).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidInput(format!(
                    "dimension {i}: lower bound {lo} must be strictly below upper bound {hi}"
                )));
            }
        }
        Ok(SearchSpace { lower, upper })
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, position: &[f64]) -> bool {
        position.len() == self.dims()
            && position
                .iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(&v, (&lo, &hi))| v >= lo && v <= hi)
    }

    /// Hard clamp to the violated bound, in place.
    pub fn clamp(&self, position: &mut [f64]) {
        for (v, (&lo, &hi)) in position
            .iter_mut()
            .zip(self.lower.iter().zip(self.upper.iter()))
        {
            *v = v.clamp(lo, hi);
        }
    }

    /// One uniform draw per dimension: lb + (ub - lb) * u with u in (0, 1).
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.lower
            .iter()
            .zip(self.upper.iter())
            .map(|(&lo, &hi)| {
                let u = loop {
                    let u: f64 = rng.random();
                    if u > 0.0 {
                        break u;
                    }
                };
                lo + (hi - lo) * u
            })
            .collect()
    }
}

/// One member of the population: a position and its objective value.
/// The fitness is infinite until the position has been evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub position: Vec<f64>,
    pub fitness: f64,
}

/// Which update rule drives the population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    GoldenSine,
    RandomSearch,
    ParticleSwarm,
    GreyWolf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::GoldenSine,
        Algorithm::RandomSearch,
        Algorithm::ParticleSwarm,
        Algorithm::GreyWolf,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::GoldenSine => "golden_sine",
            Algorithm::RandomSearch => "random_search",
            Algorithm::ParticleSwarm => "particle_swarm",
            Algorithm::GreyWolf => "grey_wolf",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "golden_sine" => Ok(Algorithm::GoldenSine),
            "random_search" => Ok(Algorithm::RandomSearch),
            "particle_swarm" => Ok(Algorithm::ParticleSwarm),
            "grey_wolf" => Ok(Algorithm::GreyWolf),
            other => Err(Error::InvalidInput(format!(
                "unknown algorithm '{other}' (expected golden_sine, random_search, particle_swarm or grey_wolf)"
            ))),
        }
    }
}

/// Population size, iteration budget, seed and algorithm choice.
/// `evaluation_jobs > 1` evaluates the population of one iteration on
/// that many threads; results are identical either way.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub population: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub evaluation_jobs: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            population: 20,
            max_iterations: 50,
            seed: 42,
            algorithm: Algorithm::GoldenSine,
            evaluation_jobs: 1,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidInput(format!(
                "population must be at least 2, got {}",
                self.population
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of a run: incumbent, its trace, and the evaluation count.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Best-so-far fitness after initialization and after each iteration;
    /// length max_iterations + 1, non-increasing.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

/// Draw `n` agents uniformly inside the box; fitness is left unevaluated.
pub fn init_agents(space: &SearchSpace, n: usize, rng: &mut ChaCha8Rng) -> Vec<AgentState> {
    (0..n)
        .map(|_| AgentState {
            position: space.sample(rng),
            fitness: f64::INFINITY,
        })
        .collect()
}

/// Minimize `objective` over `space` with the configured algorithm.
/// Reproducible bit-for-bit for a fixed (seed, config, objective).
pub fn optimize<F>(objective: &F, space: &SearchSpace, cfg: &OptimizerConfig) -> Result<OptimizationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match cfg.algorithm {
        Algorithm::GoldenSine => golden::run(objective, space, cfg, &mut rng),
        Algorithm::RandomSearch => baselines::run_random_search(objective, space, cfg, &mut rng),
        Algorithm::ParticleSwarm => baselines::run_particle_swarm(objective, space, cfg, &mut rng),
        Algorithm::GreyWolf => baselines::run_grey_wolf(objective, space, cfg, &mut rng),
    }
}

/// Evaluate every position, optionally fanning out over threads. Output
/// order matches input order, so parallelism cannot change results; the
/// first non-finite value (by index) reports as the error.
pub(crate) fn evaluate_all<F>(objective: &F, positions: &[Vec<f64>], jobs: usize) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let values: Vec<f64> = if jobs <= 1 || positions.len() <= 1 {
        positions.iter().map(|p| objective(p)).collect()
    } else {
        // Strided assignment: expensive positions tend to cluster once a
        // population converges, so round-robin balances better than
        // contiguous chunks.
        let threads = jobs.min(positions.len());
        let mut values = vec![0.0; positions.len()];
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|lane| {
                    let positions = &positions;
                    scope.spawn(move || {
                        (lane..positions.len())
                            .step_by(threads)
                            .map(|idx| (idx, objective(&positions[idx])))
                            .collect::<Vec<(usize, f64)>>()
                    })
                })
                .collect();
            for handle in handles {
                for (idx, value) in handle.join().expect("evaluation thread panicked") {
                    values[idx] = value;
                }
            }
        });
        values
    };
    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteObjective {
            position: positions[bad].clone(),
        });
    }
    Ok(values)
}

/// Index of the smallest fitness; ties go to the lowest index.
pub(crate) fn argmin(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, &f) in fitness.iter().enumerate().skip(1) {
        if f < fitness[best] {
            best = i;
        }
    }
    best
}
