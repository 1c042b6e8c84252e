//! Multispectral restoration: stack bands, hide entries, add impulse noise,
//! recover, and score each band.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use nnsr_core::imaging::{
    density_from_snr_db, msi_stack, msi_unstack, read_image, salt_pepper, write_image, ImageMetrics,
    ImagePlane,
};
use nnsr_core::matrix::project_mask;
use nnsr_core::solver::nnsr_solve;
use nnsr_core::synth::bernoulli_mask;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cmd::{create, SolverArgs};
use crate::failure::{CmdResult, Failure};
use crate::manifest::{Recorder, FILE_NAME};

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct MsiArgs {
    /// Directory of equally sized PGM/PPM bands, taken in file-name order.
    #[arg(long)]
    pub band_dir: PathBuf,
    /// Fraction of entries removed from the observation.
    #[arg(long, default_value_t = 0.0)]
    pub missing_frac: f64,
    /// Salt-and-pepper SNR in dB (density 1/SNR); omit for no impulse noise.
    #[arg(long)]
    pub snr_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn band_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading band directory {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    files.retain(|p| {
        p.is_file()
            && p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("ppm"))
    });
    files.sort();
    if files.is_empty() {
        bail!("no .pgm or .ppm bands in {}", dir.display());
    }
    Ok(files)
}

pub fn run(args: &MsiArgs) -> CmdResult {
    if !(0.0..1.0).contains(&args.missing_frac) {
        return Err(Failure::usage(format!(
            "--missing-frac {} not in [0, 1)",
            args.missing_frac
        )));
    }
    let density = match args.snr_db {
        None => 0.0,
        Some(db) if db == f64::INFINITY => 0.0,
        Some(db) if db.is_finite() => density_from_snr_db(db),
        Some(db) => return Err(Failure::usage(format!("--snr-db {db} is not a number"))),
    };

    let mut rec = Recorder::start("msi", Some(args.seed), args)?;
    let files = band_files(&args.band_dir)?;
    let bands = files
        .iter()
        .map(|p| read_image(p).with_context(|| format!("reading band {}", p.display())))
        .collect::<anyhow::Result<Vec<ImagePlane>>>()?;
    let (w, h) = (bands[0].width(), bands[0].height());
    let depth = bands[0].source_depth();
    let clean = msi_stack::<f64>(&bands).context("stacking bands")?;
    let (rows, cols) = clean.shape();
    let cfg = args.solver.config(rows, cols)?;

    let noisy = salt_pepper(&clean, density, args.seed)?;
    let mask = bernoulli_mask(rows, cols, 1.0 - args.missing_frac, args.seed)?;
    let observed = project_mask(&noisy, &mask)?;
    let result = nnsr_solve(&observed, &mask, &cfg)?;

    let recovered: Vec<ImagePlane> = msi_unstack(&result.completed, w, h, depth)?
        .into_iter()
        .map(|b| b.quantized())
        .collect();
    let metrics = ImageMetrics::bands(&bands, &recovered)?;

    let band_dir = args.out_dir.join("recovered");
    std::fs::create_dir_all(&band_dir).with_context(|| format!("creating {}", band_dir.display()))?;
    for (b, plane) in recovered.iter().enumerate() {
        let path = band_dir.join(format!("band_{b:03}.pgm"));
        write_image(plane, &path)?;
        rec.output(&path);
    }

    let csv_path = args.out_dir.join("band_metrics.csv");
    let mut out = create(&csv_path)?;
    writeln!(out, "band,psnr_db,ssim")?;
    for m in &metrics.per_band {
        writeln!(out, "{},{},{}", m.band, m.psnr_db, m.ssim)?;
    }
    out.flush()?;
    rec.output(&csv_path);

    let json_path = args.out_dir.join("metrics.json");
    let mut out = create(&json_path)?;
    serde_json::to_writer_pretty(&mut out, &metrics)?;
    writeln!(out)?;
    out.flush()?;
    rec.output(&json_path);

    rec.resolved = json!({ "solver": cfg, "density": density });
    rec.details = json!({
        "bands": files,
        "width": w,
        "height": h,
        "observed": mask.cardinality(),
        "iterations": result.iterations(),
        "converged": result.converged,
        "final_rel_e": result.final_rel_e(),
    });
    rec.finish(&args.out_dir.join(FILE_NAME))?;
    Ok(())
}
