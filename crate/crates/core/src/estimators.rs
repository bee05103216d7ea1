//! Data-aided channel estimators and the error metrics used to score them.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mat::CMatrix;
use crate::model::{ChannelRealization, PilotMatrix, ReceivedSignal};

/// Default magnitude floor for the fitness denominators.
pub const DEFAULT_FITNESS_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ls,
    Mmse,
    Pso,
    Hybrid,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ls, Method::Mmse, Method::Pso, Method::Hybrid];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ls => "ls",
            Method::Mmse => "mmse",
            Method::Pso => "pso",
            Method::Hybrid => "hybrid",
        }
    }

    pub fn is_optimizer(self) -> bool {
        matches!(self, Method::Pso | Method::Hybrid)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ls" => Ok(Method::Ls),
            "mmse" | "lmmse" => Ok(Method::Mmse),
            "pso" => Ok(Method::Pso),
            "hybrid" | "ga-pso" | "gapso" => Ok(Method::Hybrid),
            other => Err(Error::config("methods", format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub h_hat: CMatrix,
    pub method: Method,
}

/// `H_LS = Y S^H (S S^H)^-1`.
pub fn estimate_ls(rx: &ReceivedSignal, pilots: &PilotMatrix) -> Result<Estimate> {
    let s = pilots.matrix();
    let s_h = s.hermitian();
    let gram_inv = s.matmul(&s_h)?.inverse()?;
    let h_hat = rx.y.matmul(&s_h)?.matmul(&gram_inv)?;
    Ok(Estimate {
        h_hat,
        method: Method::Ls,
    })
}

/// Linear MMSE estimate for an i.i.d. unit-variance channel prior.
///
/// With `R_H = I` and orthogonal pilots (`S S^H = tau I`) the LMMSE solution
/// `H_LS R_H (R_H + (sigma^2 / tau) I)^-1` is a scalar shrinkage of the LS
/// estimate by `tau / (tau + sigma^2)`.
pub fn estimate_mmse(rx: &ReceivedSignal, pilots: &PilotMatrix, noise_var: f64) -> Result<Estimate> {
    if !(noise_var >= 0.0) {
        return Err(Error::config("noise_var", "must be non-negative"));
    }
    let ls = estimate_ls(rx, pilots)?;
    let tau = pilots.len() as f64;
    Ok(Estimate {
        h_hat: ls.h_hat.scale_real(tau / (tau + noise_var)),
        method: Method::Mmse,
    })
}

/// Normalized squared error `||H - H_hat||^2 / ||H||^2`.
pub fn nmse(h_true: &ChannelRealization, h_hat: &CMatrix) -> Result<f64> {
    let h = h_true.matrix();
    let power = h.frob_norm_sq();
    if power == 0.0 {
        return Err(Error::Degenerate("true channel has zero norm".into()));
    }
    Ok(h.sub(h_hat)?.frob_norm_sq() / power)
}

/// How the squared error of a candidate is normalized by the true channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitnessNorm {
    /// `mean |H_ij - C_ij|^2 / max(mean |H_ij|^2, floor^2)`, i.e. NMSE with a floor.
    #[default]
    Aggregate,
    /// `mean |H_ij - C_ij|^2 / max(|H_ij|^2, floor^2)`: every entry normalized
    /// by its own magnitude.
    Elementwise,
}

impl FromStr for FitnessNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aggregate" => Ok(FitnessNorm::Aggregate),
            "elementwise" => Ok(FitnessNorm::Elementwise),
            other => Err(Error::config("fitness_norm", format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for FitnessNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitnessNorm::Aggregate => "aggregate",
            FitnessNorm::Elementwise => "elementwise",
        })
    }
}

/// Relative squared error of a candidate against the reference channel.
/// Lower is better; zero at the true channel.
pub fn fitness(
    h_true: &ChannelRealization,
    candidate: &CMatrix,
    floor: f64,
    norm: FitnessNorm,
) -> Result<f64> {
    let h = h_true.matrix();
    if h.shape() != candidate.shape() {
        return Err(Error::Shape(format!(
            "candidate is {}x{}, channel is {}x{}",
            candidate.rows(),
            candidate.cols(),
            h.rows(),
            h.cols()
        )));
    }
    Ok(ChannelObjective::new(h_true, floor, norm).score(
        candidate
            .as_slice()
            .iter()
            .map(|z| (z.re, z.im)),
    ))
}

/// The fitness above, evaluated directly on the interleaved real vector
/// the optimizers search over.
#[derive(Debug, Clone)]
pub struct ChannelObjective {
    reference: Vec<(f64, f64)>,
    weights: Vec<f64>,
}

impl ChannelObjective {
    pub fn new(h_true: &ChannelRealization, floor: f64, norm: FitnessNorm) -> Self {
        let h = h_true.matrix().as_slice();
        let floor_sq = floor * floor;
        let n = h.len() as f64;
        let weights = match norm {
            FitnessNorm::Aggregate => {
                let mean_power = h.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
                vec![1.0 / (n * mean_power.max(floor_sq)); h.len()]
            }
            FitnessNorm::Elementwise => h
                .iter()
                .map(|z| 1.0 / (n * z.norm_sqr().max(floor_sq)))
                .collect(),
        };
        Self {
            reference: h.iter().map(|z| (z.re, z.im)).collect(),
            weights,
        }
    }

    fn score(&self, candidate: impl Iterator<Item = (f64, f64)>) -> f64 {
        self.reference
            .iter()
            .zip(&self.weights)
            .zip(candidate)
            .map(|(((hr, hi), w), (cr, ci))| w * ((hr - cr).powi(2) + (hi - ci).powi(2)))
            .sum()
    }

    /// Scores an encoded candidate (see [`crate::optim::encode`]).
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), 2 * self.reference.len());
        self.score(x.chunks_exact(2).map(|p| (p[0], p[1])))
    }
}
