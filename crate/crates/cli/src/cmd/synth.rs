//! Synthetic recovery experiments: one solve, or a sweep along one axis.

use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use nnsr_core::rng::cell_seed;
use nnsr_core::solver::write_trace_csv;
use nnsr_core::synth::{
    run_instance_traced, run_sweep, write_report_csv, write_report_json, ReportRow, SweepAxis,
    SweepSpec, SyntheticSpec,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cmd::{create, threads_from_env, SolverArgs};
use crate::failure::{invalid, CmdResult, Failure};
use crate::manifest::{Recorder, FILE_NAME};

const DEFAULT_SWEEP_REPEATS: usize = 10;

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub rank: usize,
    /// Observation ratio.
    #[arg(long, default_value_t = 0.8)]
    pub gamma: f64,
    /// Outlier fraction.
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Outlier range width; values are uniform on [-β/2, β/2].
    #[arg(long, default_value_t = 100.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Repeats per cell: 10 for sweeps, 1 otherwise.
    #[arg(long)]
    pub repeats: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// One of gamma, alpha, beta, rank, lambda_c.
    #[arg(long)]
    pub sweep_axis: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sweep_values: Vec<f64>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Record wall time in the report (makes it non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

fn write_reports(rows: &[ReportRow], args: &SynthArgs, rec: &mut Recorder) -> anyhow::Result<()> {
    let csv_path = args.out_dir.join("report.csv");
    let mut out = create(&csv_path)?;
    write_report_csv(rows, &mut out)?;
    out.flush()?;
    rec.output(&csv_path);

    let json_path = args.out_dir.join("report.json");
    let mut out = create(&json_path)?;
    write_report_json(rows, &mut out)?;
    out.flush()?;
    rec.output(&json_path);
    Ok(())
}

pub fn run(args: &SynthArgs) -> CmdResult {
    let base = SyntheticSpec {
        m: args.m,
        n: args.n,
        rank: args.rank,
        gamma: args.gamma,
        alpha: args.alpha,
        beta: args.beta,
        seed: args.seed,
    };
    invalid(base.validate())?;
    let cfg = args.solver.config(args.m, args.n)?;
    let axis = match (&args.sweep_axis, args.sweep_values.is_empty()) {
        (None, true) => None,
        (Some(a), false) => Some(invalid(a.parse::<SweepAxis>())?),
        (None, false) => return Err(Failure::usage("--sweep-values needs --sweep-axis")),
        (Some(_), true) => return Err(Failure::usage("--sweep-axis needs --sweep-values")),
    };
    let default_repeats = if axis.is_some() { DEFAULT_SWEEP_REPEATS } else { 1 };
    let repeats = args.repeats.unwrap_or(default_repeats);
    if repeats == 0 {
        return Err(Failure::usage("--repeats must be at least 1"));
    }
    let threads = threads_from_env()?;

    let mut rec = Recorder::start("synth", Some(args.seed), args)?;
    rec.resolved = json!({ "solver": cfg, "repeats": repeats, "threads": threads });

    match axis {
        Some(axis) => {
            let sweep = SweepSpec {
                axis,
                values: args.sweep_values.clone(),
                repeats,
                base,
                solver: cfg,
                record_timing: args.timing,
            };
            invalid(sweep.validate())?;
            let rows = run_sweep(&sweep, threads)?;
            write_reports(&rows, args, &mut rec)?;
        }
        None => {
            let mut details = Vec::with_capacity(repeats);
            for repeat in 0..repeats {
                let spec = SyntheticSpec {
                    seed: cell_seed(args.seed, 0, repeat),
                    ..base
                };
                let (detail, trace) = run_instance_traced(&spec, &cfg, repeat, args.timing)?;
                if repeat == 0 {
                    let path = args.out_dir.join("trace.csv");
                    let mut out = create(&path)?;
                    write_trace_csv(&trace, &mut out)?;
                    out.flush()?;
                    rec.output(&path);
                }
                details.push(detail);
            }
            // A single cell is reported as a one-value gamma sweep at the base γ.
            let row = ReportRow::from_repeats(SweepAxis::Gamma, args.gamma, details, args.timing);
            write_reports(&[row], args, &mut rec)?;
        }
    }
    rec.finish(&args.out_dir.join(FILE_NAME))?;
    Ok(())
}
