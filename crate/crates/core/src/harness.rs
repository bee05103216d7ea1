//! Monte Carlo experiment driver.
//!
//! Every run draws its channel and noise from a stream seeded by
//! `(master_seed, snr_index, run_index)`. The method is deliberately not part
//! of the seed, so all methods at a given grid point and run index see the
//! same channel, noise and initial swarm. Runs execute on the current rayon
//! pool and are reassembled in `(snr, method, run)` order, which makes every
//! output independent of the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{
    estimate_ls, estimate_mmse, nmse, ChannelObjective, FitnessNorm, Method, DEFAULT_FITNESS_FLOOR,
};
use crate::mat::CMatrix;
use crate::model::{draw_channel, make_pilots, transmit, ChannelRealization, ReceivedSignal, ScenarioConfig};
use crate::optim::{decode, encode, run_optimizer, HybridConfig, OptRun, OptimizerKind, StopRule};
use crate::rng::{derive_seed, substream, Purpose};
use crate::stats;

/// Seed tag for the trajectory study instance.
const TRAJECTORY_TAG: u64 = 0x7472_616a;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub snr_grid_db: Vec<f64>,
    pub methods: Vec<Method>,
    pub runs: usize,
    pub master_seed: u64,
    pub optimizer: HybridConfig,
    /// Initial swarm spread as a multiple of the per-component LS error
    /// standard deviation `sqrt(sigma^2 / tau)`.
    pub spread_factor: f64,
    pub fitness_floor: f64,
    pub fitness_norm: FitnessNorm,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let optimizer = HybridConfig::default();
        Self {
            scenario: ScenarioConfig::default(),
            snr_grid_db: vec![5.0, 10.0, 15.0, 20.0, 25.0],
            methods: Method::ALL.to_vec(),
            runs: optimizer.base.runs,
            master_seed: 0,
            optimizer,
            spread_factor: 0.2,
            fitness_floor: DEFAULT_FITNESS_FLOOR,
            fitness_norm: FitnessNorm::Aggregate,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.optimizer.validate()?;
        if self.snr_grid_db.is_empty() {
            return Err(Error::config("snr", "grid must not be empty"));
        }
        if self.snr_grid_db.iter().any(|s| s.is_nan()) {
            return Err(Error::config("snr", "values must be numbers"));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        if self.runs == 0 {
            return Err(Error::config("runs", "must be at least 1"));
        }
        if !(self.spread_factor >= 0.0) || !self.spread_factor.is_finite() {
            return Err(Error::config("spread_factor", "must be a finite non-negative number"));
        }
        if !(self.fitness_floor > 0.0) {
            return Err(Error::config("fitness_floor", "must be positive"));
        }
        Ok(())
    }

    pub fn run_seed(&self, snr_index: usize, run_index: usize) -> u64 {
        derive_seed(&[self.master_seed, snr_index as u64, run_index as u64])
    }

    /// Seed of the single instance used by [`trajectory_study`].
    pub fn trajectory_seed(&self) -> u64 {
        derive_seed(&[self.master_seed, TRAJECTORY_TAG])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub snr_db: f64,
    pub method: Method,
    pub run_index: usize,
    pub nmse: f64,
    /// Absent for the closed-form estimators.
    pub iterations_used: Option<usize>,
    pub converged: Option<bool>,
}

/// One drawn problem: true channel, received block and its LS estimate.
#[derive(Debug, Clone)]
pub struct Instance {
    pub channel: ChannelRealization,
    pub received: ReceivedSignal,
    pub ls: CMatrix,
    pilot_len: usize,
    pilots: crate::model::PilotMatrix,
}

impl Instance {
    pub fn draw(scenario: &ScenarioConfig, snr_db: f64, run_seed: u64) -> Result<Self> {
        let pilots = make_pilots(scenario.num_users, scenario.pilot_len)?;
        let mut rng = substream(run_seed, Purpose::World);
        let channel = draw_channel(scenario, &mut rng);
        let received = transmit(&channel, &pilots, snr_db, &mut rng)?;
        let ls = estimate_ls(&received, &pilots)?.h_hat;
        Ok(Self {
            channel,
            received,
            ls,
            pilot_len: scenario.pilot_len,
            pilots,
        })
    }

    pub fn objective(&self, cfg: &ExperimentConfig) -> ChannelObjective {
        ChannelObjective::new(&self.channel, cfg.fitness_floor, cfg.fitness_norm)
    }

    /// Initial swarm spread around the LS seed.
    pub fn spread(&self, cfg: &ExperimentConfig) -> f64 {
        cfg.spread_factor * (self.received.noise_var / self.pilot_len as f64).sqrt()
    }

    fn optimize(&self, cfg: &ExperimentConfig, optimizer: &HybridConfig, kind: OptimizerKind, run_seed: u64, log: bool) -> Result<OptRun> {
        let mut rng = substream(run_seed, Purpose::Optimizer);
        run_optimizer(
            &self.objective(cfg),
            &encode(&self.ls),
            optimizer,
            kind,
            self.spread(cfg),
            &mut rng,
            log,
        )
    }
}

/// One Monte Carlo run of one method.
pub fn run_single(
    cfg: &ExperimentConfig,
    snr_db: f64,
    method: Method,
    run_index: usize,
    run_seed: u64,
) -> Result<RunReport> {
    let inst = Instance::draw(&cfg.scenario, snr_db, run_seed)?;
    let (h_hat, iterations_used, converged) = match method {
        Method::Ls => (inst.ls.clone(), None, None),
        Method::Mmse => {
            let est = estimate_mmse(&inst.received, &inst.pilots, inst.received.noise_var)?;
            (est.h_hat, None, None)
        }
        Method::Pso | Method::Hybrid => {
            let kind = if method == Method::Pso {
                OptimizerKind::Pso
            } else {
                OptimizerKind::Hybrid
            };
            let run = inst.optimize(cfg, &cfg.optimizer, kind, run_seed, false)?;
            let (p, k) = inst.ls.shape();
            (decode(&run.best_position, p, k)?, Some(run.iterations_used), Some(run.converged))
        }
    };
    Ok(RunReport {
        snr_db,
        method,
        run_index,
        nmse: nmse(&inst.channel, &h_hat)?,
        iterations_used,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub snr_db: f64,
    pub method: Method,
    pub nmse_mean: f64,
    pub nmse_std: f64,
    pub iter_min: Option<usize>,
    pub iter_median: Option<f64>,
    pub iter_max: Option<usize>,
    pub runs: usize,
}

impl SummaryRow {
    /// Aggregates reports that all belong to one `(snr, method)` cell.
    pub fn from_reports(snr_db: f64, method: Method, reports: &[&RunReport]) -> Self {
        let nmse: Vec<f64> = reports.iter().map(|r| r.nmse).collect();
        let iters: Vec<usize> = reports.iter().filter_map(|r| r.iterations_used).collect();
        Self {
            snr_db,
            method,
            nmse_mean: stats::mean(&nmse),
            nmse_std: stats::sample_std(&nmse),
            iter_min: iters.iter().copied().min(),
            iter_median: stats::median(&iters),
            iter_max: iters.iter().copied().max(),
            runs: reports.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    /// Sorted by SNR grid position, then method order, then run index.
    pub reports: Vec<RunReport>,
    pub summary: Vec<SummaryRow>,
}

impl Sweep {
    pub fn cell(&self, snr_db: f64, method: Method) -> impl Iterator<Item = &RunReport> {
        self.reports
            .iter()
            .filter(move |r| r.snr_db == snr_db && r.method == method)
    }

    pub fn nmse_values(&self, snr_db: f64, method: Method) -> Vec<f64> {
        self.cell(snr_db, method).map(|r| r.nmse).collect()
    }

    pub fn summary_row(&self, snr_db: f64, method: Method) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.snr_db == snr_db && r.method == method)
    }
}

/// Full factorial SNR grid x methods x runs.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Sweep> {
    cfg.validate()?;
    let cells: Vec<(usize, f64, Method, usize)> = cfg
        .snr_grid_db
        .iter()
        .enumerate()
        .flat_map(|(si, &snr)| {
            cfg.methods
                .iter()
                .flat_map(move |&m| (0..cfg.runs).map(move |r| (si, snr, m, r)))
        })
        .collect();

    let reports = cells
        .par_iter()
        .map(|&(si, snr, method, run)| run_single(cfg, snr, method, run, cfg.run_seed(si, run)))
        .collect::<Result<Vec<_>>>()?;

    let summary = reports
        .chunks(cfg.runs)
        .map(|chunk| {
            let refs: Vec<&RunReport> = chunk.iter().collect();
            SummaryRow::from_reports(chunk[0].snr_db, chunk[0].method, &refs)
        })
        .collect();
    Ok(Sweep { reports, summary })
}

/// Paired PSO / hybrid runs for iteration-count statistics. The configured
/// method list is replaced by `[PSO, HYBRID]`.
pub fn convergence_study(cfg: &ExperimentConfig) -> Result<Sweep> {
    let cfg = ExperimentConfig {
        methods: vec![Method::Pso, Method::Hybrid],
        ..cfg.clone()
    };
    run_sweep(&cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub method: Method,
    pub iteration: usize,
    pub particle: usize,
    pub dim_a: f64,
    pub dim_b: f64,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionPoint {
    pub method: Method,
    pub iteration: usize,
    pub fitness_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStudy {
    pub points: Vec<TrajectoryPoint>,
    pub dispersion: Vec<DispersionPoint>,
}

impl TrajectoryStudy {
    pub fn dispersion_of(&self, method: Method) -> Vec<f64> {
        self.dispersion
            .iter()
            .filter(|d| d.method == method)
            .map(|d| d.fitness_std)
            .collect()
    }
}

/// Runs PSO and the hybrid on one shared instance with logging enabled and
/// early stopping switched off, so both logs span all `max_iter`
/// iterations.
pub fn trajectory_study(
    cfg: &ExperimentConfig,
    snr_db: f64,
    run_seed: u64,
    dims: (usize, usize),
) -> Result<TrajectoryStudy> {
    cfg.validate()?;
    let d = cfg.scenario.search_dim();
    if dims.0 >= d || dims.1 >= d {
        return Err(Error::config(
            "dims",
            format!("indices must be below the search dimension {d}"),
        ));
    }
    let inst = Instance::draw(&cfg.scenario, snr_db, run_seed)?;
    let mut optimizer = cfg.optimizer.clone();
    optimizer.base.stop_rule = StopRule::Disabled;

    let mut points = Vec::new();
    let mut dispersion = Vec::new();
    for (method, kind) in [(Method::Pso, OptimizerKind::Pso), (Method::Hybrid, OptimizerKind::Hybrid)] {
        let run = inst.optimize(cfg, &optimizer, kind, run_seed, true)?;
        for (iteration, snap) in run.trajectory.unwrap_or_default().iter().enumerate() {
            dispersion.push(DispersionPoint {
                method,
                iteration,
                fitness_std: snap.fitness_std(),
            });
            points.extend(snap.positions.iter().zip(&snap.fitness).enumerate().map(
                |(particle, (pos, &fitness))| TrajectoryPoint {
                    method,
                    iteration,
                    particle,
                    dim_a: pos[dims.0],
                    dim_b: pos[dims.1],
                    fitness,
                },
            ));
        }
    }
    Ok(TrajectoryStudy { points, dispersion })
}
