//! Channel estimation for a flat-fading MIMO pilot block.
//!
//! Least-squares and linear-MMSE baselines, PSO and hybrid GA-PSO refinement
//! of the least-squares estimate, and a Monte Carlo harness that produces
//! SNR-vs-NMSE sweeps, convergence statistics and swarm trajectories.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod mat;
pub mod model;
pub mod optim;
pub mod report;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
