//! Proximity operator curves on a grid, as CSV.

use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use nnsr_core::prox::{prox_how, prox_l1, prox_welsch};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cmd::create;
use crate::failure::{CmdResult, Failure};
use crate::manifest::{beside, Recorder};

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ProxCurveArgs {
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Defaults to √2 λ.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub xmin: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub xmax: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Grid points `xmin + k·step` up to `xmax`, snapped to 12 decimals so the
/// CSV shows `0.01` rather than `0.010000000000000009`.
fn grid(xmin: f64, xmax: f64, step: f64) -> Vec<f64> {
    let count = ((xmax - xmin) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|k| ((xmin + k as f64 * step) * 1e12).round() / 1e12 + 0.0)
        .collect()
}

pub fn run(args: &ProxCurveArgs) -> CmdResult {
    let sigma = args.sigma.unwrap_or(std::f64::consts::SQRT_2 * args.lambda);
    if !(args.step > 0.0 && args.step.is_finite()) {
        return Err(Failure::usage(format!("--step must be positive, got {}", args.step)));
    }
    if !(args.xmin < args.xmax) {
        return Err(Failure::usage(format!(
            "--xmin {} must be below --xmax {}",
            args.xmin, args.xmax
        )));
    }
    if !(args.lambda >= 0.0 && args.lambda.is_finite()) {
        return Err(Failure::usage(format!("--lambda must be non-negative, got {}", args.lambda)));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Failure::usage(format!("--sigma must be positive, got {sigma}")));
    }

    let mut rec = Recorder::start("prox-curve", None, args)?;
    rec.resolved = json!({ "lambda": args.lambda, "sigma": sigma });
    let mut out = create(&args.out)?;
    writeln!(out, "x,prox_how,prox_l1,prox_welsch")?;
    for x in grid(args.xmin, args.xmax, args.step) {
        writeln!(
            out,
            "{x},{},{},{}",
            prox_how(x, args.lambda, sigma),
            prox_l1(x, args.lambda),
            prox_welsch(x, sigma)
        )?;
    }
    out.flush()?;
    rec.output(&args.out);
    rec.finish(&beside(&args.out))?;
    Ok(())
}
