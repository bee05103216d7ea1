use rand::Rng;

use super::{hybrid_step, init_swarm, pso_step, HybridConfig, Objective, OptimizerKind, StopRule, Swarm};
use crate::error::Result;

/// Population state after one generation.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub positions: Vec<Vec<f64>>,
    pub fitness: Vec<f64>,
    pub gbest_fitness: f64,
}

impl Snapshot {
    fn of(swarm: &Swarm) -> Self {
        Self {
            positions: swarm.particles.iter().map(|p| p.position.clone()).collect(),
            fitness: swarm.fitness().collect(),
            gbest_fitness: swarm.gbest_fitness,
        }
    }

    /// Population standard deviation of the current fitness values.
    pub fn fitness_std(&self) -> f64 {
        let n = self.fitness.len() as f64;
        let mean = self.fitness.iter().sum::<f64>() / n;
        (self.fitness.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / n).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptRun {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub iterations_used: usize,
    pub converged: bool,
    /// Global-best fitness per generation, starting with generation zero.
    pub history: Vec<f64>,
    /// One snapshot per generation when logging is enabled.
    pub trajectory: Option<Vec<Snapshot>>,
}

/// Seeds a swarm around `seed_solution` and iterates until the stop rule
/// fires or `max_iter` iterations have run.
pub fn run_optimizer<O, R>(
    objective: &O,
    seed_solution: &[f64],
    cfg: &HybridConfig,
    kind: OptimizerKind,
    spread: f64,
    rng: &mut R,
    log_trajectory: bool,
) -> Result<OptRun>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let base = &cfg.base;
    let mut swarm = init_swarm(seed_solution, base, spread, objective, rng);
    let mut history = vec![swarm.gbest_fitness];
    let mut trajectory = log_trajectory.then(|| vec![Snapshot::of(&swarm)]);

    let mut converged = match base.stop_rule {
        StopRule::ImprovementStall | StopRule::FitnessThreshold => swarm.gbest_fitness < base.tolerance,
        StopRule::Disabled => false,
    };
    let mut iterations_used = 0;

    while !converged && iterations_used < base.max_iter {
        let prev = swarm.gbest_fitness;
        match kind {
            OptimizerKind::Pso => pso_step(&mut swarm, objective, iterations_used, base, rng),
            OptimizerKind::Hybrid => {
                hybrid_step(&mut swarm, objective, iterations_used, cfg, rng)?;
            }
        }
        iterations_used += 1;
        history.push(swarm.gbest_fitness);
        if let Some(t) = trajectory.as_mut() {
            t.push(Snapshot::of(&swarm));
        }
        converged = match base.stop_rule {
            StopRule::ImprovementStall => prev - swarm.gbest_fitness < base.tolerance,
            StopRule::FitnessThreshold => swarm.gbest_fitness < base.tolerance,
            StopRule::Disabled => false,
        };
    }

    Ok(OptRun {
        best_position: swarm.gbest_position,
        best_fitness: swarm.gbest_fitness,
        iterations_used,
        converged,
        history,
        trajectory,
    })
}
