//! Image inpainting: degrade a grayscale image, recover it, score it.

use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};
use nnsr_core::imaging::{degrade, read_image, write_image, DegradeSpec, ImageMetrics, ImagePlane, MaskKind};
use nnsr_core::solver::nnsr_solve;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cmd::{create, SolverArgs};
use crate::failure::{invalid, CmdResult};
use crate::manifest::{beside, Recorder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskArg {
    Random,
    Stripe,
}

impl From<MaskArg> for MaskKind {
    fn from(m: MaskArg) -> Self {
        match m {
            MaskArg::Random => MaskKind::Random,
            MaskArg::Stripe => MaskKind::Stripe,
        }
    }
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct InpaintArgs {
    /// Binary PGM (P5) or PPM (P6).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = MaskArg::Random)]
    pub mask: MaskArg,
    /// Observed fraction for random masks.
    #[arg(long, default_value_t = 0.8)]
    pub gamma: f64,
    #[arg(long, default_value_t = 4)]
    pub stripe_width: usize,
    #[arg(long, default_value_t = 16)]
    pub stripe_period: usize,
    #[arg(long, default_value_t = 0.2)]
    pub outlier_frac: f64,
    /// Outliers are uniform on [-mag, mag].
    #[arg(long, default_value_t = 2.0)]
    pub outlier_mag: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Recovered image (PGM).
    #[arg(long)]
    pub out: PathBuf,
    /// Metrics JSON.
    #[arg(long)]
    pub metrics: PathBuf,
}

pub fn run(args: &InpaintArgs) -> CmdResult {
    let spec = DegradeSpec {
        mask_kind: args.mask.into(),
        gamma: args.gamma,
        stripe_width: args.stripe_width,
        stripe_period: args.stripe_period,
        outlier_frac: args.outlier_frac,
        outlier_mag: args.outlier_mag,
        seed: args.seed,
    };
    invalid(spec.validate())?;

    let mut rec = Recorder::start("inpaint", Some(args.seed), args)?;
    let original = read_image(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let (h, w) = (original.height(), original.width());
    let cfg = args.solver.config(h, w)?;
    let degraded = degrade::<f64>(&original, &spec)?;
    let result = nnsr_solve(&degraded.x, &degraded.mask, &cfg)?;

    let recovered = ImagePlane::from_matrix_clamped(&result.completed, original.source_depth())?.quantized();
    write_image(&recovered, &args.out)?;
    rec.output(&args.out);

    let metrics = ImageMetrics::single(&original, &recovered)?;
    let mut out = create(&args.metrics)?;
    serde_json::to_writer_pretty(&mut out, &metrics)?;
    writeln!(out)?;
    out.flush()?;
    rec.output(&args.metrics);

    let masked_columns = (0..w)
        .filter(|&c| (0..h).all(|r| !degraded.mask.is_observed(r, c)))
        .count();
    rec.resolved = json!({ "solver": cfg, "degrade": spec });
    rec.details = json!({
        "width": w,
        "height": h,
        "observed": degraded.mask.cardinality(),
        "masked_columns": masked_columns,
        "outlier_count": degraded.outlier_count,
        "iterations": result.iterations(),
        "converged": result.converged,
        "final_rel_e": result.final_rel_e(),
    });
    rec.finish(&beside(&args.out))?;
    Ok(())
}
