//! CSV serialization of harness results.
//!
//! Floats are written with 17 significant digits so every value parses
//! back to the identical `f64`.

use std::io::{self, Write};

use crate::harness::{DispersionPoint, RunReport, SummaryRow, TrajectoryPoint};

pub const SWEEP_RAW_HEADER: &str = "snr_db,method,run,nmse,iterations,converged";
pub const SWEEP_SUMMARY_HEADER: &str =
    "snr_db,method,nmse_mean,nmse_std,iter_min,iter_median,iter_max,runs";
pub const CONVERGENCE_HEADER: &str = "snr_db,method,run,iterations,converged";
pub const CONVERGENCE_SUMMARY_HEADER: &str = "snr_db,method,iter_min,iter_median,iter_max,runs";
pub const TRAJECTORY_HEADER: &str = "method,iteration,particle,dim_a,dim_b,fitness";
pub const DISPERSION_HEADER: &str = "method,iteration,fitness_std";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_sweep_raw<W: Write>(mut w: W, reports: &[RunReport]) -> io::Result<()> {
    writeln!(w, "{SWEEP_RAW_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(r.snr_db),
            r.method,
            r.run_index,
            fmt_f64(r.nmse),
            opt(r.iterations_used),
            opt(r.converged)
        )?;
    }
    Ok(())
}

pub fn write_sweep_summary<W: Write>(mut w: W, rows: &[SummaryRow]) -> io::Result<()> {
    writeln!(w, "{SWEEP_SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(r.snr_db),
            r.method,
            fmt_f64(r.nmse_mean),
            fmt_f64(r.nmse_std),
            opt(r.iter_min),
            opt_f64(r.iter_median),
            opt(r.iter_max),
            r.runs
        )?;
    }
    Ok(())
}

pub fn write_convergence<W: Write>(mut w: W, reports: &[RunReport]) -> io::Result<()> {
    writeln!(w, "{CONVERGENCE_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(r.snr_db),
            r.method,
            r.run_index,
            opt(r.iterations_used),
            opt(r.converged)
        )?;
    }
    Ok(())
}

pub fn write_convergence_summary<W: Write>(mut w: W, rows: &[SummaryRow]) -> io::Result<()> {
    writeln!(w, "{CONVERGENCE_SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(r.snr_db),
            r.method,
            opt(r.iter_min),
            opt_f64(r.iter_median),
            opt(r.iter_max),
            r.runs
        )?;
    }
    Ok(())
}

pub fn write_trajectory<W: Write>(mut w: W, points: &[TrajectoryPoint]) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            p.method,
            p.iteration,
            p.particle,
            fmt_f64(p.dim_a),
            fmt_f64(p.dim_b),
            fmt_f64(p.fitness)
        )?;
    }
    Ok(())
}

pub fn write_dispersion<W: Write>(mut w: W, points: &[DispersionPoint]) -> io::Result<()> {
    writeln!(w, "{DISPERSION_HEADER}")?;
    for p in points {
        writeln!(w, "{},{},{}", p.method, p.iteration, fmt_f64(p.fitness_std))?;
    }
    Ok(())
}
