//! The golden sine update rule and its coefficient schedule.
//!
//! Each agent moves by v' = v|sin r1| - r2 sin(r1) |x1 d - x2 v| toward
//! the incumbent best d, where x1 and x2 come from golden-section
//! narrowing of an interval that starts at [-pi, pi]. The narrowing keeps
//! the probes in the region that has been paying off: an improving
//! iteration keeps the lower sub-interval, a stagnant one the upper.

use super::{argmin, evaluate_all, init_agents, OptimizationResult, OptimizerConfig, SearchSpace};
use crate::error::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Width below which the probe interval is declared collapsed and the
/// optimizer re-opens it to [-pi, pi].
const COLLAPSE_WIDTH: f64 = 1e-12;

/// Golden-section probe state: interval [a, b] plus the two interior
/// probes x1 < x2 and the golden number tau = (sqrt(5) - 1) / 2.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenCoefficients {
    a: f64,
    b: f64,
    x1: f64,
    x2: f64,
    tau: f64,
}

/// The positive root of tau^2 + tau = 1.
pub fn golden_ratio() -> f64 {
    (5.0f64.sqrt() - 1.0) / 2.0
}

impl Default for GoldenCoefficients {
    fn default() -> Self {
        Self::new()
    }
}

impl GoldenCoefficients {
    pub fn new() -> Self {
        let tau = golden_ratio();
        let (a, b) = (-PI, PI);
        GoldenCoefficients {
            a,
            b,
            x1: a * tau + b * (1.0 - tau),
            x2: a * (1.0 - tau) + b * tau,
            tau,
        }
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn x2(&self) -> f64 {
        self.x2
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    /// Narrow the interval by one golden-section step: keep [a, x2] when
    /// the incumbent improved, [x1, b] otherwise. Should the two probes
    /// collide exactly, they are redrawn from [0, pi] and [-pi, 0].
    pub fn update(&mut self, improved: bool, rng: &mut ChaCha8Rng) {
        if improved {
            self.b = self.x2;
            self.x2 = self.x1;
            self.x1 = self.a * self.tau + self.b * (1.0 - self.tau);
        } else {
            self.a = self.x1;
            self.x1 = self.x2;
            self.x2 = self.a * (1.0 - self.tau) + self.b * self.tau;
        }
        while self.x1 == self.x2 {
            self.x1 = rng.random_range(0.0..PI);
            self.x2 = rng.random_range(-PI..0.0);
        }
    }

    pub fn is_collapsed(&self) -> bool {
        self.width() < COLLAPSE_WIDTH
    }
}

/// One golden sine move of `position` toward `target`.
pub fn golden_sine_step(
    position: &[f64],
    target: &[f64],
    r1: f64,
    r2: f64,
    x1: f64,
    x2: f64,
) -> Vec<f64> {
    debug_assert_eq!(position.len(), target.len());
    let sin_r1 = r1.sin();
    let abs_sin_r1 = sin_r1.abs();
    position
        .iter()
        .zip(target.iter())
        .map(|(&v, &d)| v * abs_sin_r1 - r2 * sin_r1 * (x1 * d - x2 * v).abs())
        .collect()
}

pub(super) fn run<F>(
    objective: &F,
    space: &SearchSpace,
    cfg: &OptimizerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<OptimizationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut agents = init_agents(space, cfg.population, rng);
    let positions: Vec<Vec<f64>> = agents.iter().map(|a| a.position.clone()).collect();
    let fitness = evaluate_all(objective, &positions, cfg.evaluation_jobs)?;
    for (agent, &f) in agents.iter_mut().zip(fitness.iter()) {
        agent.fitness = f;
    }
    let mut evaluations = agents.len();

    let seed_best = argmin(&fitness);
    let mut best_position = agents[seed_best].position.clone();
    let mut best_fitness = agents[seed_best].fitness;
    let mut history = Vec::with_capacity(cfg.max_iterations + 1);
    history.push(best_fitness);

    let mut coeffs = GoldenCoefficients::new();
    for _ in 0..cfg.max_iterations {
        // All agents step against the same incumbent and probes; the RNG
        // stays in this loop so evaluations can run on worker threads.
        let proposals: Vec<Vec<f64>> = agents
            .iter()
            .map(|agent| {
                let r1 = rng.random_range(0.0..2.0 * PI);
                let r2 = rng.random_range(0.0..PI);
                let mut next = golden_sine_step(
                    &agent.position,
                    &best_position,
                    r1,
                    r2,
                    coeffs.x1,
                    coeffs.x2,
                );
                space.clamp(&mut next);
                next
            })
            .collect();
        let fitness = evaluate_all(objective, &proposals, cfg.evaluation_jobs)?;
        evaluations += fitness.len();
        for (agent, (position, &f)) in agents.iter_mut().zip(proposals.into_iter().zip(&fitness)) {
            agent.position = position;
            agent.fitness = f;
        }

        let round_best = argmin(&fitness);
        let improved = fitness[round_best] < best_fitness;
        if improved {
            best_fitness = fitness[round_best];
            best_position = agents[round_best].position.clone();
        }
        coeffs.update(improved, rng);
        if coeffs.is_collapsed() {
            coeffs = GoldenCoefficients::new();
        }
        history.push(best_fitness);
    }

    Ok(OptimizationResult {
        best_position,
        best_fitness,
        history,
        evaluations,
    })
}
