//! Hybrid GA-PSO generation.
//!
//! Each generation splits the swarm into three groups: a small elite that is
//! mutated, a small tail that is discarded and restarted from its personal
//! best, and the remaining majority that receives the ordinary PSO update.
//! Group membership is the extreme particle plus uniformly random others,
//! which avoids sorting the whole swarm.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use super::swarm::{argmin, inertia, move_particle};
use super::{HybridConfig, Objective, Swarm};
use crate::error::Result;

/// Indices chosen for mutation and reproduction in one generation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Partition {
    pub mutated: Vec<usize>,
    pub reproduced: Vec<usize>,
}

/// Adds i.i.d. `N(0, sigma_sq)` noise to every component.
pub fn gaussian_mutation<R: Rng + ?Sized>(position: &mut [f64], sigma_sq: f64, rng: &mut R) {
    let sigma = sigma_sq.sqrt();
    for x in position {
        *x += sigma * rng.sample::<f64, _>(StandardNormal);
    }
}

fn partition<R: Rng + ?Sized>(swarm: &Swarm, n_best: usize, n_worst: usize, rng: &mut R) -> Partition {
    let q = swarm.len();
    if n_best + n_worst == 0 {
        return Partition::default();
    }

    let fittest = (n_best > 0).then(|| argmin(swarm.fitness()));
    let worst = (n_worst > 0).then(|| {
        // argmax over everything but the fittest; lowest index wins ties
        argmin(
            swarm
                .fitness()
                .enumerate()
                .map(|(i, f)| if Some(i) == fittest { f64::INFINITY } else { -f }),
        )
    });

    let pool: Vec<usize> = (0..q)
        .filter(|&i| Some(i) != fittest && Some(i) != worst)
        .collect();
    let extra_best = n_best.saturating_sub(1);
    let extra_worst = n_worst.saturating_sub(1);
    let picks = index::sample(rng, pool.len(), extra_best + extra_worst).into_vec();

    let mut mutated: Vec<usize> = fittest.into_iter().collect();
    mutated.extend(picks[..extra_best].iter().map(|&k| pool[k]));
    let mut reproduced: Vec<usize> = worst.into_iter().collect();
    reproduced.extend(picks[extra_best..].iter().map(|&k| pool[k]));
    Partition { mutated, reproduced }
}

/// One hybrid generation. Returns the groups that were mutated and
/// reproduced.
///
/// Random draws happen in a fixed order: group selection first, then per
/// particle in index order (mutation noise, or `r1`/`r2` for the PSO
/// update). With both fractions at zero the stream usage, and therefore the
/// result, is identical to [`super::pso_step`].
pub fn hybrid_step<O, R>(
    swarm: &mut Swarm,
    objective: &O,
    iter: usize,
    cfg: &HybridConfig,
    rng: &mut R,
) -> Result<Partition>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let q = swarm.len();
    let n_best = (cfg.mutate_frac * q as f64).floor() as usize;
    let n_worst = (cfg.reproduce_frac * q as f64).floor() as usize;

    let groups = partition(swarm, n_best, n_worst, rng);
    let mut role = vec![Role::Better; q];
    for &i in &groups.mutated {
        role[i] = Role::Best;
    }
    for &i in &groups.reproduced {
        role[i] = Role::Worst;
    }

    let w = inertia(&cfg.base, iter);
    let gbest = swarm.gbest_position.clone();
    for (p, r) in swarm.particles.iter_mut().zip(role) {
        match r {
            Role::Worst => {
                p.position.clone_from(&p.best_position);
                p.velocity.iter_mut().for_each(|v| *v = 0.0);
            }
            Role::Best => gaussian_mutation(&mut p.position, cfg.mutation_sigma_sq, rng),
            Role::Better => move_particle(p, &gbest, w, &cfg.base, rng),
        }
    }
    swarm.evaluate(objective);
    Ok(groups)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Role {
    Best,
    Better,
    Worst,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::{init_swarm, pso_step, sphere, PsoConfig};
    use crate::rng::stream;

    #[test]
    fn zero_fractions_match_pso() {
        let cfg = HybridConfig {
            mutate_frac: 0.0,
            reproduce_frac: 0.0,
            ..Default::default()
        };
        let start = init_swarm(&[1.0, 0.5, -0.5, 0.2], &cfg.base, 0.4, &sphere, &mut stream(1));
        let (mut a, mut b) = (start.clone(), start);
        let (mut ra, mut rb) = (stream(2), stream(2));
        for t in 0..cfg.base.max_iter {
            pso_step(&mut a, &sphere, t, &cfg.base, &mut ra);
            let groups = hybrid_step(&mut b, &sphere, t, &cfg, &mut rb).unwrap();
            assert_eq!(groups, Partition::default());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn groups_are_disjoint_and_anchored() {
        let cfg = HybridConfig::default();
        let mut rng = stream(3);
        let mut s = init_swarm(&[1.0; 6], &cfg.base, 0.5, &sphere, &mut rng);
        for t in 0..5 {
            let fittest = argmin(s.fitness());
            let fit: Vec<f64> = s.fitness().collect();
            let worst_val = fit.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let best_before: Vec<Vec<f64>> =
                s.particles.iter().map(|p| p.best_position.clone()).collect();

            let g = hybrid_step(&mut s, &sphere, t, &cfg, &mut rng).unwrap();
            assert_eq!(g.mutated.len(), 3);
            assert_eq!(g.reproduced.len(), 3);
            assert_eq!(g.mutated[0], fittest);
            assert_eq!(fit[g.reproduced[0]], worst_val);
            assert!(g.mutated.iter().all(|i| !g.reproduced.contains(i)));
            for &i in &g.reproduced {
                assert_eq!(s.particles[i].position, best_before[i]);
                assert!(s.particles[i].velocity.iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn reproduction_keeps_personal_best() {
        let cfg = HybridConfig::default();
        let mut rng = stream(4);
        let mut s = init_swarm(&[2.0; 4], &cfg.base, 1.0, &sphere, &mut rng);
        for t in 0..cfg.base.max_iter {
            let before: Vec<f64> = s.particles.iter().map(|p| p.best_fitness).collect();
            let g = hybrid_step(&mut s, &sphere, t, &cfg, &mut rng).unwrap();
            for &i in &g.reproduced {
                assert_eq!(s.particles[i].best_fitness, before[i]);
                assert_eq!(s.particles[i].fitness, before[i]);
            }
        }
    }

    #[test]
    fn mutation_variance() {
        let mut rng = stream(5);
        let mut v = vec![0.0; 100_000];
        gaussian_mutation(&mut v, 0.02, &mut rng);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 3.0 * (0.02f64 / n).sqrt());
        assert!((var / 0.02 - 1.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn rejects_oversized_groups() {
        let cfg = HybridConfig {
            base: PsoConfig {
                population: 4,
                ..Default::default()
            },
            mutate_frac: 0.5,
            reproduce_frac: 0.5,
            ..Default::default()
        };
        let mut s = init_swarm(&[1.0], &cfg.base, 0.1, &sphere, &mut stream(0));
        assert!(hybrid_step(&mut s, &sphere, 0, &cfg, &mut stream(0)).is_err());
    }

    #[test]
    fn tiny_swarm_with_single_extremes() {
        // floor(0.25 * 4) = 1 mutated, 1 reproduced, 2 plain PSO
        let cfg = HybridConfig {
            base: PsoConfig {
                population: 4,
                ..Default::default()
            },
            mutate_frac: 0.25,
            reproduce_frac: 0.25,
            ..Default::default()
        };
        let mut rng = stream(8);
        let mut s = init_swarm(&[1.0, 1.0], &cfg.base, 0.5, &sphere, &mut rng);
        let g = hybrid_step(&mut s, &sphere, 0, &cfg, &mut rng).unwrap();
        assert_eq!(g.mutated.len(), 1);
        assert_eq!(g.reproduced.len(), 1);
        assert_ne!(g.mutated[0], g.reproduced[0]);
    }
}
