use rand::Rng;
use rand_distr::StandardNormal;

use super::{Objective, PsoConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    /// Fitness of the current position.
    pub fitness: f64,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
}

impl Particle {
    fn new(position: Vec<f64>, fitness: f64) -> Self {
        Self {
            velocity: vec![0.0; position.len()],
            best_position: position.clone(),
            best_fitness: fitness,
            position,
            fitness,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Swarm {
    pub particles: Vec<Particle>,
    pub gbest_index: usize,
    pub gbest_position: Vec<f64>,
    pub gbest_fitness: f64,
}

impl Swarm {
    fn from_particles(particles: Vec<Particle>) -> Self {
        let gbest_index = argmin(particles.iter().map(|p| p.best_fitness));
        Self {
            gbest_position: particles[gbest_index].best_position.clone(),
            gbest_fitness: particles[gbest_index].best_fitness,
            gbest_index,
            particles,
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.gbest_position.len()
    }

    pub fn fitness(&self) -> impl Iterator<Item = f64> + '_ {
        self.particles.iter().map(|p| p.fitness)
    }

    /// Re-evaluates every position and updates personal and global bests
    /// on strict improvement.
    pub(crate) fn evaluate<O: Objective + ?Sized>(&mut self, objective: &O) {
        for p in &mut self.particles {
            p.fitness = objective.evaluate(&p.position);
            if p.fitness < p.best_fitness {
                p.best_fitness = p.fitness;
                p.best_position.clone_from(&p.position);
            }
        }
        let i = argmin(self.particles.iter().map(|p| p.best_fitness));
        if self.particles[i].best_fitness < self.gbest_fitness {
            self.gbest_index = i;
            self.gbest_fitness = self.particles[i].best_fitness;
            self.gbest_position.clone_from(&self.particles[i].best_position);
        }
    }
}

/// Index of the smallest value; the lowest index wins ties.
pub(crate) fn argmin(values: impl Iterator<Item = f64>) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        match best {
            Some((_, b)) if !(v < b) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map_or(0, |(i, _)| i)
}

/// Swarm seeded around `seed_solution`: particle 0 sits exactly on the seed,
/// the others are offset by i.i.d. `N(0, spread^2)` noise. Velocities start
/// at zero.
pub fn init_swarm<O, R>(
    seed_solution: &[f64],
    cfg: &PsoConfig,
    spread: f64,
    objective: &O,
    rng: &mut R,
) -> Swarm
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    let q = cfg.population.max(1);
    let mut particles = Vec::with_capacity(q);
    particles.push(Particle::new(
        seed_solution.to_vec(),
        objective.evaluate(seed_solution),
    ));
    for _ in 1..q {
        let pos: Vec<f64> = seed_solution
            .iter()
            .map(|&x| x + spread * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let f = objective.evaluate(&pos);
        particles.push(Particle::new(pos, f));
    }
    Swarm::from_particles(particles)
}

/// Inertia weight at `iter`, decreasing linearly from start to end over
/// `max_iter` iterations.
pub fn inertia(cfg: &PsoConfig, iter: usize) -> f64 {
    if cfg.max_iter <= 1 {
        return cfg.inertia_start;
    }
    let t = iter as f64 / (cfg.max_iter - 1) as f64;
    cfg.inertia_start - (cfg.inertia_start - cfg.inertia_end) * t
}

/// Standard velocity/position update for one particle. Draws `r1` then `r2`,
/// each one value per dimension.
pub(crate) fn move_particle<R: Rng + ?Sized>(
    p: &mut Particle,
    gbest: &[f64],
    w: f64,
    cfg: &PsoConfig,
    rng: &mut R,
) {
    let d = p.position.len();
    let r1: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let r2: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    for j in 0..d {
        let x = p.position[j];
        let mut v = w * p.velocity[j]
            + cfg.accel_personal * r1[j] * (p.best_position[j] - x)
            + cfg.accel_social * r2[j] * (gbest[j] - x);
        if let Some(c) = cfg.velocity_clamp {
            v = v.clamp(-c, c);
        }
        p.velocity[j] = v;
        p.position[j] = x + v;
    }
}

/// One synchronous PSO iteration: every particle moves against the global
/// best from the start of the step, then the swarm is re-evaluated.
pub fn pso_step<O, R>(swarm: &mut Swarm, objective: &O, iter: usize, cfg: &PsoConfig, rng: &mut R)
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    let w = inertia(cfg, iter);
    let gbest = swarm.gbest_position.clone();
    for p in &mut swarm.particles {
        move_particle(p, &gbest, w, cfg, rng);
    }
    swarm.evaluate(objective);
}
