pub mod inpaint;
pub mod msi;
pub mod prox_curve;
pub mod replay;
pub mod synth;

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::Context;
use clap::{Args, ValueEnum};
use nnsr_core::{Config, SigmaSchedule};
use serde::{Deserialize, Serialize};

use crate::failure::{invalid, CmdResult, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Fixed,
    Proportional,
}

impl From<Schedule> for SigmaSchedule {
    fn from(s: Schedule) -> Self {
        match s {
            Schedule::Fixed => SigmaSchedule::Fixed,
            Schedule::Proportional => SigmaSchedule::Proportional,
        }
    }
}

/// Solver flags shared by every command that runs a solve.
#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct SolverArgs {
    /// λ = c / √max(m, n); σ follows as √2 λ.
    #[arg(long, default_value_t = 1.0)]
    pub lambda_c: f64,
    #[arg(long, default_value_t = 1.05)]
    pub mu: f64,
    /// Initial penalty; defaults to 1.25 / s_max(X).
    #[arg(long)]
    pub rho0: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Schedule::Proportional)]
    pub sigma_schedule: Schedule,
}

impl SolverArgs {
    pub fn config(&self, m: usize, n: usize) -> CmdResult<Config> {
        let cfg = Config {
            sigma_schedule: self.sigma_schedule.into(),
            rho0: self.rho0,
            mu: self.mu,
            tol: self.tol,
            max_iter: self.max_iter,
            ..Config::with_lambda_c(self.lambda_c, m, n)
        };
        invalid(cfg.validate())?;
        Ok(cfg)
    }
}

/// Worker count from `NNSR_THREADS`, if set.
pub fn threads_from_env() -> CmdResult<Option<usize>> {
    match std::env::var("NNSR_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::usage(format!("NNSR_THREADS={v:?} is not a positive integer"))),
        },
    }
}

pub fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}
