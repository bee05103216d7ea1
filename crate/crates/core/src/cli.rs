//! Command-line front end.
//!
//! Settings are layered: built-in defaults, then `--config FILE`, then
//! flags. Exit codes: 0 success, 1 runtime failure, 2 bad arguments or
//! configuration.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_dims, parse_f64_list, parse_methods, CliConfig};
use crate::error::Error;
use crate::harness::{convergence_study, run_sweep, trajectory_study};
use crate::report;

#[derive(Debug, Parser)]
#[command(
    name = "chanest",
    version,
    about = "MIMO channel estimation experiments: LS, LMMSE, PSO and hybrid GA-PSO"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// NMSE versus SNR for every method (writes sweep_raw.csv and sweep_summary.csv)
    Sweep(SweepArgs),
    /// Iterations to convergence for paired PSO and hybrid runs (writes convergence.csv and convergence_summary.csv)
    Convergence(CommonArgs),
    /// Per-iteration swarm positions and fitness spread (writes trajectory.csv and dispersion.csv)
    Trajectory(TrajectoryArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated methods out of ls, mmse, pso, hybrid [default: ls,mmse,pso,hybrid]
    #[arg(long, value_name = "LIST")]
    pub methods: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Two search-space indices to project positions onto [default: 0,1]
    #[arg(long, value_name = "A,B")]
    pub dims: Option<String>,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// INI config file; flags override its values
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed [default: 0]
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// SNR grid in dB, comma-separated (a single value for trajectory) [default: 5,10,15,20,25; trajectory: 15]
    #[arg(long, value_name = "LIST")]
    pub snr: Option<String>,
    /// Monte Carlo runs per SNR point [default: 12]
    #[arg(long, value_name = "N")]
    pub runs: Option<usize>,
    /// Maximum optimizer iterations [default: 10]
    #[arg(long, value_name = "N")]
    pub max_iter: Option<usize>,
    /// Convergence tolerance on global-best fitness [default: 0.01]
    #[arg(long, value_name = "X")]
    pub tolerance: Option<f64>,
    /// Worker threads; results do not depend on it [default: all cores]
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Output directory [default: .]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Receive antennas [default: 8]
    #[arg(long, value_name = "N")]
    pub rx: Option<usize>,
    /// Transmit antennas / users [default: 8]
    #[arg(long, value_name = "N")]
    pub tx: Option<usize>,
    /// Pilot symbols per sequence, a power of two [default: 8]
    #[arg(long, value_name = "N")]
    pub pilot_len: Option<usize>,
    /// Swarm size [default: 64]
    #[arg(long, value_name = "N")]
    pub population: Option<usize>,
    /// Initial inertia weight [default: 0.9]
    #[arg(long, value_name = "X")]
    pub inertia_start: Option<f64>,
    /// Final inertia weight [default: 0.4]
    #[arg(long, value_name = "X")]
    pub inertia_end: Option<f64>,
    /// Personal acceleration coefficient [default: 2]
    #[arg(long, value_name = "X")]
    pub c1: Option<f64>,
    /// Social acceleration coefficient [default: 2]
    #[arg(long, value_name = "X")]
    pub c2: Option<f64>,
    /// Fraction of the swarm mutated per generation [default: 0.05]
    #[arg(long, value_name = "X")]
    pub mutate_frac: Option<f64>,
    /// Fraction of the swarm reproduced per generation [default: 0.05]
    #[arg(long, value_name = "X")]
    pub reproduce_frac: Option<f64>,
    /// Variance of the Gaussian mutation [default: 0.02]
    #[arg(long, value_name = "X")]
    pub mutation_var: Option<f64>,
    /// Initial swarm spread in units of the LS error std [default: 0.2]
    #[arg(long, value_name = "X")]
    pub spread_factor: Option<f64>,
    /// improvement-stall, fitness-threshold or disabled [default: improvement-stall]
    #[arg(long, value_name = "RULE")]
    pub stop_rule: Option<String>,
    /// aggregate or elementwise [default: aggregate]
    #[arg(long, value_name = "MODE")]
    pub fitness_norm: Option<String>,
    /// Increase log output on stderr
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug)]
enum Failure {
    Config(Error),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Config(e),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl CommonArgs {
    fn resolve(&self) -> Result<CliConfig, Failure> {
        let mut cfg = CliConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(Error::Config {
                    field: "config".into(),
                    reason: format!("cannot read {}: {e}", path.display()),
                }))?;
            cfg.apply_ini(&text)?;
        }
        let exp = &mut cfg.experiment;
        let opt = &mut exp.optimizer;
        if let Some(v) = self.seed {
            exp.master_seed = v;
        }
        if let Some(v) = self.runs {
            exp.runs = v;
            opt.base.runs = v;
        }
        if let Some(v) = self.max_iter {
            opt.base.max_iter = v;
        }
        if let Some(v) = self.tolerance {
            opt.base.tolerance = v;
        }
        if let Some(v) = self.rx {
            exp.scenario.num_rx = v;
        }
        if let Some(v) = self.tx {
            exp.scenario.num_users = v;
        }
        if let Some(v) = self.pilot_len {
            exp.scenario.pilot_len = v;
        }
        if let Some(v) = self.population {
            opt.base.population = v;
        }
        if let Some(v) = self.inertia_start {
            opt.base.inertia_start = v;
        }
        if let Some(v) = self.inertia_end {
            opt.base.inertia_end = v;
        }
        if let Some(v) = self.c1 {
            opt.base.accel_personal = v;
        }
        if let Some(v) = self.c2 {
            opt.base.accel_social = v;
        }
        if let Some(v) = self.mutate_frac {
            opt.mutate_frac = v;
        }
        if let Some(v) = self.reproduce_frac {
            opt.reproduce_frac = v;
        }
        if let Some(v) = self.mutation_var {
            opt.mutation_sigma_sq = v;
        }
        if let Some(v) = &self.stop_rule {
            opt.base.stop_rule = v.parse()?;
        }
        if let Some(v) = self.spread_factor {
            exp.spread_factor = v;
        }
        if let Some(v) = &self.fitness_norm {
            exp.fitness_norm = v.parse()?;
        }
        if let Some(v) = self.threads {
            cfg.threads = Some(v);
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        cfg.verbosity = cfg.verbosity.max(self.verbose);
        Ok(cfg)
    }
}

/// Parses `args` (including the program name) and runs the chosen
/// subcommand. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            2
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn execute(command: &Command) -> Result<(), Failure> {
    let mut cfg = match command {
        Command::Sweep(a) => a.common.resolve()?,
        Command::Convergence(a) => a.resolve()?,
        Command::Trajectory(a) => a.common.resolve()?,
    };
    match command {
        Command::Sweep(a) => {
            if let Some(s) = &a.common.snr {
                cfg.experiment.snr_grid_db = parse_f64_list("snr", s)?;
            }
            if let Some(m) = &a.methods {
                cfg.experiment.methods = parse_methods(m)?;
            }
        }
        Command::Convergence(a) => {
            if let Some(s) = &a.snr {
                cfg.experiment.snr_grid_db = parse_f64_list("snr", s)?;
            }
        }
        Command::Trajectory(a) => {
            if let Some(s) = &a.common.snr {
                match parse_f64_list("snr", s)?.as_slice() {
                    [v] => cfg.trajectory_snr_db = *v,
                    _ => {
                        return Err(Failure::Config(Error::Config {
                            field: "snr".into(),
                            reason: "trajectory takes a single SNR value".into(),
                        }))
                    }
                }
            }
            if let Some(d) = &a.dims {
                cfg.trajectory_dims = parse_dims(d)?;
            }
        }
    }
    cfg.validate()?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::Runtime(format!("cannot start worker pool: {e}")))?;
    fs::create_dir_all(&cfg.output_dir)?;
    pool.install(|| match command {
        Command::Sweep(_) => sweep(&cfg),
        Command::Convergence(_) => convergence(&cfg),
        Command::Trajectory(_) => trajectory(&cfg),
    })
}

fn create(dir: &Path, name: &str, verbosity: u8) -> io::Result<BufWriter<File>> {
    let path = dir.join(name);
    if verbosity > 0 {
        eprintln!("writing {}", path.display());
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn sweep(cfg: &CliConfig) -> Result<(), Failure> {
    let result = run_sweep(&cfg.experiment)?;
    let dir = &cfg.output_dir;
    let mut w = create(dir, "sweep_raw.csv", cfg.verbosity)?;
    report::write_sweep_raw(&mut w, &result.reports)?;
    w.flush()?;
    let mut w = create(dir, "sweep_summary.csv", cfg.verbosity)?;
    report::write_sweep_summary(&mut w, &result.summary)?;
    w.flush()?;

    println!("{:>8}  {:<8}  {:>12}  {:>12}", "snr_db", "method", "nmse_mean", "nmse_std");
    for row in &result.summary {
        println!(
            "{:>8}  {:<8}  {:>12.4e}  {:>12.4e}",
            row.snr_db, row.method, row.nmse_mean, row.nmse_std
        );
    }
    Ok(())
}

fn convergence(cfg: &CliConfig) -> Result<(), Failure> {
    let result = convergence_study(&cfg.experiment)?;
    let dir = &cfg.output_dir;
    let mut w = create(dir, "convergence.csv", cfg.verbosity)?;
    report::write_convergence(&mut w, &result.reports)?;
    w.flush()?;
    let mut w = create(dir, "convergence_summary.csv", cfg.verbosity)?;
    report::write_convergence_summary(&mut w, &result.summary)?;
    w.flush()?;

    println!("{:>8}  {:<8}  {:>4}  {:>6}  {:>4}", "snr_db", "method", "min", "median", "max");
    for row in &result.summary {
        println!(
            "{:>8}  {:<8}  {:>4}  {:>6.1}  {:>4}",
            row.snr_db,
            row.method,
            row.iter_min.unwrap_or_default(),
            row.iter_median.unwrap_or_default(),
            row.iter_max.unwrap_or_default()
        );
    }
    Ok(())
}

fn trajectory(cfg: &CliConfig) -> Result<(), Failure> {
    let exp = &cfg.experiment;
    let study = trajectory_study(exp, cfg.trajectory_snr_db, exp.trajectory_seed(), cfg.trajectory_dims)?;
    let dir = &cfg.output_dir;
    let mut w = create(dir, "trajectory.csv", cfg.verbosity)?;
    report::write_trajectory(&mut w, &study.points)?;
    w.flush()?;
    let mut w = create(dir, "dispersion.csv", cfg.verbosity)?;
    report::write_dispersion(&mut w, &study.dispersion)?;
    w.flush()?;
    if cfg.verbosity > 0 {
        eprintln!(
            "{} trajectory rows, {} dispersion rows",
            study.points.len(),
            study.dispersion.len()
        );
    }
    Ok(())
}
