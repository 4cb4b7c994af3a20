//! Comparison optimizers behind the same budget contract as the golden
//! sine tuner: textbook particle swarm (inertia 0.72, cognitive and
//! social weights 1.49), grey wolf with its coefficient decaying linearly
//! from 2 to 0, and plain uniform random search.

use super::{argmin, evaluate_all, init_agents, OptimizationResult, OptimizerConfig, SearchSpace};
use crate::error::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const PSO_INERTIA: f64 = 0.72;
const PSO_COGNITIVE: f64 = 1.49;
const PSO_SOCIAL: f64 = 1.49;

pub(super) fn run_random_search<F>(
    objective: &F,
    space: &SearchSpace,
    cfg: &OptimizerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<OptimizationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut batch: Vec<Vec<f64>> = (0..cfg.population).map(|_| space.sample(rng)).collect();
    let mut fitness = evaluate_all(objective, &batch, cfg.evaluation_jobs)?;
    let mut evaluations = batch.len();

    let first = argmin(&fitness);
    let mut best_position = batch[first].clone();
    let mut best_fitness = fitness[first];
    let mut history = vec![best_fitness];

    for _ in 0..cfg.max_iterations {
        batch = (0..cfg.population).map(|_| space.sample(rng)).collect();
        fitness = evaluate_all(objective, &batch, cfg.evaluation_jobs)?;
        evaluations += batch.len();
        let round = argmin(&fitness);
        if fitness[round] < best_fitness {
            best_fitness = fitness[round];
            best_position = batch[round].clone();
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

pub(super) fn run_particle_swarm<F>(
    objective: &F,
    space: &SearchSpace,
    cfg: &OptimizerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<OptimizationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dims = space.dims();
    let mut particles = init_agents(space, cfg.population, rng);
    let mut velocities = vec![vec![0.0; dims]; cfg.population];

    let positions: Vec<Vec<f64>> = particles.iter().map(|p| p.position.clone()).collect();
    let fitness = evaluate_all(objective, &positions, cfg.evaluation_jobs)?;
    for (p, &f) in particles.iter_mut().zip(fitness.iter()) {
        p.fitness = f;
    }
    let mut evaluations = cfg.population;

    let mut personal_best = particles.clone();
    let leader = argmin(&fitness);
    let mut best_position = particles[leader].position.clone();
    let mut best_fitness = particles[leader].fitness;
    let mut history = vec![best_fitness];

    for _ in 0..cfg.max_iterations {
        for ((particle, velocity), personal) in particles
            .iter_mut()
            .zip(velocities.iter_mut())
            .zip(personal_best.iter())
        {
            for d in 0..dims {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                velocity[d] = PSO_INERTIA * velocity[d]
                    + PSO_COGNITIVE * r1 * (personal.position[d] - particle.position[d])
                    + PSO_SOCIAL * r2 * (best_position[d] - particle.position[d]);
                particle.position[d] += velocity[d];
            }
            space.clamp(&mut particle.position);
        }
        let positions: Vec<Vec<f64>> = particles.iter().map(|p| p.position.clone()).collect();
        let fitness = evaluate_all(objective, &positions, cfg.evaluation_jobs)?;
        evaluations += fitness.len();
        for ((particle, &f), personal) in
            particles.iter_mut().zip(fitness.iter()).zip(personal_best.iter_mut())
        {
            particle.fitness = f;
            if f < personal.fitness {
                personal.fitness = f;
                personal.position = particle.position.clone();
            }
        }
        let round = argmin(&fitness);
        if fitness[round] < best_fitness {
            best_fitness = fitness[round];
            best_position = particles[round].position.clone();
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

pub(super) fn run_grey_wolf<F>(
    objective: &F,
    space: &SearchSpace,
    cfg: &OptimizerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<OptimizationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dims = space.dims();
    let mut wolves = init_agents(space, cfg.population, rng);
    let positions: Vec<Vec<f64>> = wolves.iter().map(|w| w.position.clone()).collect();
    let fitness = evaluate_all(objective, &positions, cfg.evaluation_jobs)?;
    for (w, &f) in wolves.iter_mut().zip(fitness.iter()) {
        w.fitness = f;
    }
    let mut evaluations = cfg.population;

    // Leaders: the three best positions seen so far (fewer if the pack
    // is smaller), kept monotone across iterations.
    let mut order: Vec<usize> = (0..wolves.len()).collect();
    order.sort_by(|&i, &j| wolves[i].fitness.partial_cmp(&wolves[j].fitness).unwrap().then(i.cmp(&j)));
    let mut leaders: Vec<(Vec<f64>, f64)> = order
        .iter()
        .take(3)
        .map(|&i| (wolves[i].position.clone(), wolves[i].fitness))
        .collect();

    let mut history = vec![leaders[0].1];

    for iter in 0..cfg.max_iterations {
        let a_coef = 2.0 * (1.0 - iter as f64 / cfg.max_iterations as f64);
        for wolf in wolves.iter_mut() {
            let mut next = vec![0.0; dims];
            for d in 0..dims {
                let mut pull = 0.0;
                for (leader_pos, _) in leaders.iter() {
                    let r1: f64 = rng.random();
                    let r2: f64 = rng.random();
                    let a = 2.0 * a_coef * r1 - a_coef;
                    let c = 2.0 * r2;
                    let dist = (c * leader_pos[d] - wolf.position[d]).abs();
                    pull += leader_pos[d] - a * dist;
                }
                next[d] = pull / leaders.len() as f64;
            }
            space.clamp(&mut next);
            wolf.position = next;
        }
        let positions: Vec<Vec<f64>> = wolves.iter().map(|w| w.position.clone()).collect();
        let fitness = evaluate_all(objective, &positions, cfg.evaluation_jobs)?;
        evaluations += fitness.len();
        for (wolf, &f) in wolves.iter_mut().zip(fitness.iter()) {
            wolf.fitness = f;
            update_leaders(&mut leaders, wolf.position.clone(), f);
        }
        history.push(leaders[0].1);
    }

    Ok(OptimizationResult {
        best_position: leaders[0].0.clone(),
        best_fitness: leaders[0].1,
        history,
        evaluations,
    })
}

fn update_leaders(leaders: &mut [(Vec<f64>, f64)], position: Vec<f64>, fitness: f64) {
    for slot in 0..leaders.len() {
        if fitness < leaders[slot].1 {
            // Shift the weaker leaders down and insert.
            for k in (slot + 1..leaders.len()).rev() {
                leaders[k] = leaders[k - 1].clone();
            }
            leaders[slot] = (position, fitness);
            return;
        }
    }
}
