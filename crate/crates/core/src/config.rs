//! Run configuration shared by the CLI subcommands.
//!
//! Config files are flat INI: `[section]` headers, `key = value` lines,
//! `#` or `;` comments. Unknown sections and keys are rejected by name.
//!
//! ```ini
//! [scenario]
//! rx = 8
//! tx = 8
//! pilot_len = 8
//!
//! [experiment]
//! snr = 5, 10, 15, 20, 25
//! methods = ls, mmse, pso, hybrid
//! runs = 12
//! seed = 42
//!
//! [optimizer]
//! population = 64
//! inertia_start = 0.9
//! inertia_end = 0.4
//! c1 = 2
//! c2 = 2
//! max_iter = 10
//! tolerance = 0.01
//! stop_rule = improvement-stall
//! mutate_frac = 0.05
//! reproduce_frac = 0.05
//! mutation_var = 0.02
//! spread_factor = 0.2
//! fitness_norm = aggregate
//! fitness_floor = 1e-6
//!
//! [trajectory]
//! snr = 15
//! dims = 0, 1
//!
//! [output]
//! dir = results
//! threads = 4
//! ```

use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::Method;
use crate::harness::ExperimentConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub experiment: ExperimentConfig,
    pub output_dir: PathBuf,
    /// Worker threads; `None` lets rayon decide.
    pub threads: Option<usize>,
    pub verbosity: u8,
    pub trajectory_snr_db: f64,
    pub trajectory_dims: (usize, usize),
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentConfig::default(),
            output_dir: PathBuf::from("."),
            threads: None,
            verbosity: 0,
            trajectory_snr_db: 15.0,
            trajectory_dims: (0, 1),
        }
    }
}

pub(crate) fn parse_num<T: FromStr>(field: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(field, format!("cannot parse `{}`", value.trim())))
}

pub fn parse_f64_list(field: &str, value: &str) -> Result<Vec<f64>> {
    let out = value
        .split(',')
        .map(|s| parse_num::<f64>(field, s))
        .collect::<Result<Vec<_>>>()?;
    if out.iter().any(|x| x.is_nan()) {
        return Err(Error::config(field, "values must be numbers"));
    }
    Ok(out)
}

pub fn parse_methods(value: &str) -> Result<Vec<Method>> {
    let mut out = Vec::new();
    for m in value.split(',') {
        let m: Method = m.parse()?;
        if out.contains(&m) {
            return Err(Error::config("methods", format!("`{m}` listed twice")));
        }
        out.push(m);
    }
    Ok(out)
}

pub fn parse_dims(value: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = value.split(',').collect();
    match parts.as_slice() {
        [a, b] => Ok((parse_num("dims", a)?, parse_num("dims", b)?)),
        _ => Err(Error::config("dims", "expected two comma-separated indices")),
    }
}

impl CliConfig {
    pub fn from_ini(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_ini(text)?;
        Ok(cfg)
    }

    pub fn apply_ini(&mut self, text: &str) -> Result<()> {
        let mut section: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw
                .split(['#', ';'])
                .next()
                .unwrap_or_default()
                .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_ascii_lowercase();
                if !matches!(
                    name.as_str(),
                    "scenario" | "experiment" | "optimizer" | "trajectory" | "output"
                ) {
                    return Err(Error::config(name, "unknown config section"));
                }
                section = Some(name);
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", lineno + 1), "expected `key = value`")
            })?;
            let key = key.trim().to_ascii_lowercase();
            let Some(sec) = section.as_deref() else {
                return Err(Error::config(key, "key appears before any [section]"));
            };
            self.set(sec, &key, value.trim())?;
        }
        Ok(())
    }

    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let exp = &mut self.experiment;
        let opt = &mut exp.optimizer;
        match (section, key) {
            ("scenario", "rx") => exp.scenario.num_rx = parse_num(key, value)?,
            ("scenario", "tx") => exp.scenario.num_users = parse_num(key, value)?,
            ("scenario", "pilot_len") => exp.scenario.pilot_len = parse_num(key, value)?,

            ("experiment", "snr") => exp.snr_grid_db = parse_f64_list("snr", value)?,
            ("experiment", "methods") => exp.methods = parse_methods(value)?,
            ("experiment", "runs") => {
                exp.runs = parse_num(key, value)?;
                opt.base.runs = exp.runs;
            }
            ("experiment", "seed") => exp.master_seed = parse_num(key, value)?,

            ("optimizer", "population") => opt.base.population = parse_num(key, value)?,
            ("optimizer", "inertia_start") => opt.base.inertia_start = parse_num(key, value)?,
            ("optimizer", "inertia_end") => opt.base.inertia_end = parse_num(key, value)?,
            ("optimizer", "c1") => opt.base.accel_personal = parse_num(key, value)?,
            ("optimizer", "c2") => opt.base.accel_social = parse_num(key, value)?,
            ("optimizer", "max_iter") => opt.base.max_iter = parse_num(key, value)?,
            ("optimizer", "tolerance") => opt.base.tolerance = parse_num(key, value)?,
            ("optimizer", "stop_rule") => opt.base.stop_rule = value.parse()?,
            ("optimizer", "velocity_clamp") => {
                opt.base.velocity_clamp = match value.to_ascii_lowercase().as_str() {
                    "none" | "off" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            ("optimizer", "mutate_frac") => opt.mutate_frac = parse_num(key, value)?,
            ("optimizer", "reproduce_frac") => opt.reproduce_frac = parse_num(key, value)?,
            ("optimizer", "mutation_var") => opt.mutation_sigma_sq = parse_num(key, value)?,
            ("optimizer", "spread_factor") => exp.spread_factor = parse_num(key, value)?,
            ("optimizer", "fitness_norm") => exp.fitness_norm = value.parse()?,
            ("optimizer", "fitness_floor") => exp.fitness_floor = parse_num(key, value)?,

            ("trajectory", "snr") => self.trajectory_snr_db = parse_num("snr", value)?,
            ("trajectory", "dims") => self.trajectory_dims = parse_dims(value)?,

            ("output", "dir") => self.output_dir = PathBuf::from(value),
            ("output", "threads") => self.threads = Some(parse_num(key, value)?),

            _ => {
                return Err(Error::config(
                    format!("{section}.{key}"),
                    "unknown config key",
                ))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.experiment.validate()?;
        if self.threads == Some(0) {
            return Err(Error::config("threads", "must be at least 1"));
        }
        if self.trajectory_snr_db.is_nan() {
            return Err(Error::config("snr", "must be a number"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::FitnessNorm;
    use crate::optim::StopRule;

    #[test]
    fn module_doc_example_parses() {
        let doc = include_str!("config.rs");
        let ini: String = doc
            .lines()
            .skip_while(|l| !l.starts_with("//! ```ini"))
            .skip(1)
            .take_while(|l| !l.starts_with("//! ```"))
            .map(|l| l.trim_start_matches("//!").trim_start())
            .collect::<Vec<_>>()
            .join("\n");
        let cfg = CliConfig::from_ini(&ini).unwrap();
        assert_eq!(cfg.experiment.master_seed, 42);
        assert_eq!(cfg.threads, Some(4));
        assert_eq!(cfg.output_dir, PathBuf::from("results"));
        assert_eq!(cfg.experiment.fitness_norm, FitnessNorm::Aggregate);
        assert_eq!(cfg.experiment.optimizer.base.stop_rule, StopRule::ImprovementStall);
        // everything else in the example equals the defaults
        let mut defaults = CliConfig::default();
        defaults.experiment.master_seed = 42;
        defaults.threads = Some(4);
        defaults.output_dir = PathBuf::from("results");
        assert_eq!(cfg, defaults);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = CliConfig::from_ini("[optimizer]\nswarm_size = 10\n").unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "optimizer.swarm_size"));
        assert!(err.to_string().contains("optimizer.swarm_size"));

        let err = CliConfig::from_ini("[colony]\n").unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "colony"));

        let err = CliConfig::from_ini("runs = 3\n").unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "runs"));
    }

    #[test]
    fn bad_values_are_named() {
        let err = CliConfig::from_ini("[experiment]\nruns = many\n").unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "runs"));
        let err = CliConfig::from_ini("[experiment]\nmethods = ls, aco\n").unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "methods"));
        assert!(parse_dims("1,2,3").is_err());
        assert_eq!(parse_dims(" 4 , 7").unwrap(), (4, 7));
    }

    #[test]
    fn comments_and_overrides() {
        let cfg = CliConfig::from_ini(
            "# header\n[experiment]\nruns = 3 ; inline\nsnr = 0, 30\n[optimizer]\nvelocity_clamp = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment.runs, 3);
        assert_eq!(cfg.experiment.snr_grid_db, vec![0.0, 30.0]);
        assert_eq!(cfg.experiment.optimizer.base.velocity_clamp, Some(0.5));
    }
}
