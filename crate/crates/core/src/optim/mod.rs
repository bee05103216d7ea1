//! Particle swarm optimization and the hybrid GA-PSO variant.
//!
//! Both optimizers minimize a scalar objective over real vectors. Channel
//! matrices are mapped to that space with [`encode`] / [`decode`].

mod hybrid;
mod run;
mod swarm;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::ChannelObjective;
use crate::mat::{CMatrix, Complex};

pub use hybrid::{gaussian_mutation, hybrid_step, Partition};
pub use run::{run_optimizer, OptRun, Snapshot};
pub use swarm::{init_swarm, inertia, pso_step, Particle, Swarm};

/// Scalar objective to be minimized.
pub trait Objective {
    fn evaluate(&self, x: &[f64]) -> f64;
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> f64,
{
    fn evaluate(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

impl Objective for ChannelObjective {
    fn evaluate(&self, x: &[f64]) -> f64 {
        ChannelObjective::evaluate(self, x)
    }
}

/// `f(x) = sum x_i^2`.
pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Real and imaginary parts interleaved, row-major.
pub fn encode(h: &CMatrix) -> Vec<f64> {
    h.as_slice().iter().flat_map(|z| [z.re, z.im]).collect()
}

pub fn decode(v: &[f64], rows: usize, cols: usize) -> Result<CMatrix> {
    if v.len() != 2 * rows * cols {
        return Err(Error::Shape(format!(
            "vector of length {} cannot hold a {rows}x{cols} complex matrix",
            v.len()
        )));
    }
    let data = v.chunks_exact(2).map(|p| Complex::new(p[0], p[1])).collect();
    CMatrix::from_vec(rows, cols, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Pso,
    Hybrid,
}

/// When a run is declared converged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopRule {
    /// Global-best improvement over one iteration falls below the tolerance
    /// (or the initial global best is already below it).
    #[default]
    ImprovementStall,
    /// Global-best fitness falls below the tolerance.
    FitnessThreshold,
    /// Never stop early; always run `max_iter` iterations.
    Disabled,
}

impl FromStr for StopRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "improvement-stall" | "stall" => Ok(StopRule::ImprovementStall),
            "fitness-threshold" | "threshold" => Ok(StopRule::FitnessThreshold),
            "disabled" | "none" => Ok(StopRule::Disabled),
            other => Err(Error::config("stop_rule", format!("unknown rule `{other}`"))),
        }
    }
}

impl fmt::Display for StopRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopRule::ImprovementStall => "improvement-stall",
            StopRule::FitnessThreshold => "fitness-threshold",
            StopRule::Disabled => "disabled",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig {
    /// Swarm size (Q).
    pub population: usize,
    pub inertia_start: f64,
    pub inertia_end: f64,
    /// Cognitive coefficient (C1).
    pub accel_personal: f64,
    /// Social coefficient (C2).
    pub accel_social: f64,
    pub max_iter: usize,
    pub tolerance: f64,
    /// Independent repetitions per experiment cell.
    pub runs: usize,
    pub stop_rule: StopRule,
    /// Optional symmetric bound on each velocity component.
    pub velocity_clamp: Option<f64>,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            population: 64,
            inertia_start: 0.9,
            inertia_end: 0.4,
            accel_personal: 2.0,
            accel_social: 2.0,
            max_iter: 10,
            tolerance: 1e-2,
            runs: 12,
            stop_rule: StopRule::ImprovementStall,
            velocity_clamp: None,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population == 0 {
            return Err(Error::config("population", "must be at least 1"));
        }
        if self.max_iter == 0 {
            return Err(Error::config("max_iter", "must be at least 1"));
        }
        if self.runs == 0 {
            return Err(Error::config("runs", "must be at least 1"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::config("tolerance", "must be positive"));
        }
        for (field, v) in [
            ("inertia_start", self.inertia_start),
            ("inertia_end", self.inertia_end),
            ("c1", self.accel_personal),
            ("c2", self.accel_social),
        ] {
            if !v.is_finite() {
                return Err(Error::config(field, "must be finite"));
            }
        }
        if let Some(c) = self.velocity_clamp {
            if !(c > 0.0) {
                return Err(Error::config("velocity_clamp", "must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridConfig {
    pub base: PsoConfig,
    /// Fraction of the swarm mutated each generation.
    pub mutate_frac: f64,
    /// Fraction of the swarm discarded and restarted each generation.
    pub reproduce_frac: f64,
    /// Variance of the Gaussian mutation.
    pub mutation_sigma_sq: f64,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            base: PsoConfig::default(),
            mutate_frac: 0.05,
            reproduce_frac: 0.05,
            mutation_sigma_sq: 0.02,
        }
    }
}

impl HybridConfig {
    /// Group sizes `(mutated, reproduced)` for the configured swarm.
    pub fn group_sizes(&self) -> (usize, usize) {
        let q = self.base.population as f64;
        (
            (self.mutate_frac * q).floor() as usize,
            (self.reproduce_frac * q).floor() as usize,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        for (field, v) in [
            ("mutate_frac", self.mutate_frac),
            ("reproduce_frac", self.reproduce_frac),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(field, "must lie in [0, 1]"));
            }
        }
        // floor(a Q) + floor(b Q) < Q whenever a + b < 1, so this also
        // guarantees at least one particle gets the PSO update.
        if !(self.mutate_frac + self.reproduce_frac < 1.0) {
            return Err(Error::config(
                "mutate_frac",
                "mutate_frac + reproduce_frac must be below 1",
            ));
        }
        if !(self.mutation_sigma_sq >= 0.0) || !self.mutation_sigma_sq.is_finite() {
            return Err(Error::config("mutation_var", "must be a finite non-negative number"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn encode_examples() {
        let m = CMatrix::from_rows(&[vec![Complex::new(1.0, 2.0)]]).unwrap();
        assert_eq!(encode(&m), vec![1.0, 2.0]);
        assert_eq!(decode(&[0.0; 4], 2, 1).unwrap(), CMatrix::zeros(2, 1));
        assert!(matches!(decode(&[0.0; 3], 2, 1), Err(Error::Shape(_))));
    }

    #[test]
    fn default_group_sizes() {
        let cfg = HybridConfig::default();
        assert_eq!(cfg.group_sizes(), (3, 3));
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn config_validation() {
        let mut cfg = HybridConfig::default();
        cfg.base.runs = 0;
        assert!(matches!(cfg.validate(), Err(Error::Config { field, .. }) if field == "runs"));

        let cfg = HybridConfig {
            mutate_frac: 0.6,
            reproduce_frac: 0.4,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(rows in 1usize..9, cols in 1usize..9, seed in any::<u64>()) {
            use rand::Rng;
            let mut rng = crate::rng::stream(seed);
            let data = (0..rows * cols)
                .map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() * 1e6))
                .collect();
            let m = CMatrix::from_vec(rows, cols, data).unwrap();
            let v = encode(&m);
            prop_assert_eq!(v.len(), 2 * rows * cols);
            prop_assert_eq!(decode(&v, rows, cols).unwrap(), m);
        }
    }
}
