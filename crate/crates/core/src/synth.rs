//! Synthetic robust completion problems, RRE, and parameter sweeps.
//!
//! An instance is built as: Gaussian low-rank `M_t = U Vᵀ`, then `round(α m n)`
//! entries receive uniform outliers in `[-β/2, β/2]`, then a Bernoulli(γ) mask
//! hides entries. Outliers are injected before masking, so some land on
//! unobserved entries.

use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use num_traits::Float;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{fro_norm, project_mask, DenseMatrix, ObservationMask};
use crate::rng::{cell_seed, stream, STREAM_LOWRANK, STREAM_MASK, STREAM_OUTLIERS};
use crate::scalar::Scalar;
use crate::solver::{nnsr_solve, SolverConfig, TraceRecord};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SyntheticSpec {
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    /// Observation ratio in `(0, 1]`.
    pub gamma: f64,
    /// Outlier fraction in `[0, 1]`.
    pub alpha: f64,
    /// Width of the outlier range.
    pub beta: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::invalid(format!("dimensions {}x{}", self.m, self.n)));
        }
        if self.rank > self.m.min(self.n) {
            return Err(Error::invalid(format!(
                "rank {} exceeds min({}, {})",
                self.rank, self.m, self.n
            )));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::invalid(format!("gamma {} not in (0, 1]", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid(format!("alpha {} not in [0, 1]", self.alpha)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid(format!("beta {} must be non-negative", self.beta)));
        }
        Ok(())
    }

    pub fn outlier_count(&self) -> usize {
        (self.alpha * (self.m * self.n) as f64).round() as usize
    }
}

/// `U Vᵀ` with i.i.d. standard normal factors.
pub fn gen_lowrank<T: Scalar>(spec: &SyntheticSpec) -> Result<DenseMatrix<T>> {
    spec.validate()?;
    let mut rng = stream(spec.seed, STREAM_LOWRANK);
    let mut normal = || T::lit(rng.sample::<f64, _>(StandardNormal));
    let u = DMatrix::<T>::from_fn(spec.m, spec.rank, |_, _| normal());
    let v = DMatrix::<T>::from_fn(spec.n, spec.rank, |_, _| normal());
    DenseMatrix::from_nalgebra(u * v.transpose())
}

/// Each entry observed independently with probability `gamma`.
pub fn gen_mask(spec: &SyntheticSpec) -> Result<ObservationMask> {
    spec.validate()?;
    bernoulli_mask(spec.m, spec.n, spec.gamma, spec.seed)
}

/// Row-major Bernoulli(`gamma`) mask drawn from the mask substream of `seed`.
pub fn bernoulli_mask(rows: usize, cols: usize, gamma: f64, seed: u64) -> Result<ObservationMask> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma {gamma} not in [0, 1]")));
    }
    let mut rng = stream(seed, STREAM_MASK);
    ObservationMask::from_fn(rows, cols, |_, _| rng.gen::<f64>() < gamma)
}

/// Positions (row-major indices) and perturbations of injected outliers.
#[derive(Clone, Debug, PartialEq)]
pub struct Outliers {
    pub positions: Vec<usize>,
    pub values: Vec<f64>,
}

/// Adds uniform noise on `[-β/2, β/2]` to `round(α m n)` distinct entries.
pub fn inject_outliers<T: Scalar>(
    clean: &DenseMatrix<T>,
    spec: &SyntheticSpec,
) -> Result<(DenseMatrix<T>, Outliers)> {
    spec.validate()?;
    if clean.shape() != (spec.m, spec.n) {
        return Err(Error::shape(format!(
            "matrix {}x{} vs spec {}x{}",
            clean.rows(),
            clean.cols(),
            spec.m,
            spec.n
        )));
    }
    let total = spec.m * spec.n;
    let mut rng = stream(spec.seed, STREAM_OUTLIERS);
    let mut positions = sample(&mut rng, total, spec.outlier_count()).into_vec();
    positions.sort_unstable();
    let half = spec.beta / 2.0;
    let values: Vec<f64> = positions
        .iter()
        .map(|_| rng.gen_range(-half..=half))
        .collect();

    let mut data = clean.as_nalgebra().clone();
    for (&p, &v) in positions.iter().zip(&values) {
        let (i, j) = (p / spec.n, p % spec.n);
        data[(i, j)] += T::lit(v);
    }
    Ok((DenseMatrix::from_nalgebra(data)?, Outliers { positions, values }))
}

/// A generated problem: clean truth, corrupted-and-masked data, and mask.
#[derive(Clone, Debug)]
pub struct SyntheticInstance<T: Scalar> {
    pub truth: DenseMatrix<T>,
    /// Corrupted matrix projected onto the mask.
    pub observed: DenseMatrix<T>,
    pub mask: ObservationMask,
    pub outliers: Outliers,
}

pub fn generate<T: Scalar>(spec: &SyntheticSpec) -> Result<SyntheticInstance<T>> {
    let truth = gen_lowrank(spec)?;
    let (corrupted, outliers) = inject_outliers(&truth, spec)?;
    let mask = gen_mask(spec)?;
    let observed = project_mask(&corrupted, &mask)?;
    Ok(SyntheticInstance {
        truth,
        observed,
        mask,
        outliers,
    })
}

/// `‖truth - estimate‖²_F / ‖truth‖²_F`.
pub fn rre<T: Scalar>(truth: &DenseMatrix<T>, estimate: &DenseMatrix<T>) -> Result<T> {
    truth.check_same_shape(estimate, "rre")?;
    let denom = fro_norm(truth);
    if denom == T::zero() {
        return Err(Error::UndefinedMetric("RRE of an all-zero truth".to_string()));
    }
    let num = (truth.as_nalgebra() - estimate.as_nalgebra()).norm();
    Ok(Float::powi(num / denom, 2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Gamma,
    Alpha,
    Beta,
    Rank,
    /// `λ = c / √max(m, n)`, with `σ = √2 λ` following it.
    LambdaC,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Gamma => "gamma",
            SweepAxis::Alpha => "alpha",
            SweepAxis::Beta => "beta",
            SweepAxis::Rank => "rank",
            SweepAxis::LambdaC => "lambda_c",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(SweepAxis::Gamma),
            "alpha" => Ok(SweepAxis::Alpha),
            "beta" => Ok(SweepAxis::Beta),
            "rank" => Ok(SweepAxis::Rank),
            "lambda_c" | "lambda-c" | "c" => Ok(SweepAxis::LambdaC),
            other => Err(Error::invalid(format!("unknown sweep axis {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSpec<T: Scalar> {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub repeats: usize,
    pub base: SyntheticSpec,
    pub solver: SolverConfig<T>,
    /// Whether to measure wall time. Timings are the only non-reproducible
    /// part of a report, so they are off unless requested.
    pub record_timing: bool,
}

impl<T: Scalar> SweepSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::invalid("repeats must be at least 1"));
        }
        self.base.validate()?;
        self.solver.validate()?;
        for &v in &self.values {
            let (spec, cfg) = self.cell(v, 0, 0)?;
            spec.validate()?;
            cfg.validate()?;
        }
        Ok(())
    }

    /// Problem and solver settings of one cell repeat.
    pub fn cell(&self, value: f64, cell: usize, repeat: usize) -> Result<(SyntheticSpec, SolverConfig<T>)> {
        let mut spec = self.base;
        let mut cfg = self.solver;
        spec.seed = cell_seed(self.base.seed, cell, repeat);
        match self.axis {
            SweepAxis::Gamma => spec.gamma = value,
            SweepAxis::Alpha => spec.alpha = value,
            SweepAxis::Beta => spec.beta = value,
            SweepAxis::Rank => {
                if !(value >= 0.0 && value.fract() == 0.0) {
                    return Err(Error::invalid(format!("rank {value} is not a count")));
                }
                spec.rank = value as usize;
            }
            SweepAxis::LambdaC => {
                if !(value > 0.0) {
                    return Err(Error::invalid(format!("lambda c {value} must be positive")));
                }
                let fresh = SolverConfig::<T>::with_lambda_c(T::lit(value), spec.m, spec.n);
                cfg.lambda = fresh.lambda;
                cfg.sigma = fresh.sigma;
            }
        }
        Ok((spec, cfg))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RepeatDetail {
    pub repeat: usize,
    pub seed: u64,
    pub rre: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_rel_e: f64,
    pub max_lagrange_fro: f64,
    pub lagrange_bound: f64,
    pub x_norm: f64,
    /// Largest M or S step over the last [`TAIL_WINDOW`] iterations.
    pub tail_step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub mean_rre: f64,
    pub mean_iters: f64,
    pub mean_seconds: Option<f64>,
    pub repeats: Vec<RepeatDetail>,
}

pub const TAIL_WINDOW: usize = 10;

/// Solves one generated instance and scores it.
pub fn run_instance<T: Scalar>(
    spec: &SyntheticSpec,
    cfg: &SolverConfig<T>,
    repeat: usize,
    record_timing: bool,
) -> Result<RepeatDetail> {
    run_instance_traced(spec, cfg, repeat, record_timing).map(|(d, _)| d)
}

/// [`run_instance`] that also hands back the per-iteration trace.
pub fn run_instance_traced<T: Scalar>(
    spec: &SyntheticSpec,
    cfg: &SolverConfig<T>,
    repeat: usize,
    record_timing: bool,
) -> Result<(RepeatDetail, Vec<TraceRecord>)> {
    let inst = generate::<T>(spec)?;
    let start = Instant::now();
    let result = nnsr_solve(&inst.observed, &inst.mask, cfg)?;
    let seconds = start.elapsed().as_secs_f64();
    let score = rre(&inst.truth, &result.completed)?;
    let detail = RepeatDetail {
        repeat,
        seed: spec.seed,
        rre: score.to_f64_lossy(),
        iterations: result.iterations(),
        converged: result.converged,
        final_rel_e: result.final_rel_e(),
        max_lagrange_fro: result
            .trace
            .iter()
            .map(|r| r.lagrange_fro)
            .fold(0.0, f64::max),
        lagrange_bound: result.lagrange_bound.to_f64_lossy(),
        x_norm: result.x_norm.to_f64_lossy(),
        tail_step: result.tail_step(TAIL_WINDOW),
        seconds: record_timing.then_some(seconds),
    };
    Ok((detail, result.trace))
}

impl ReportRow {
    /// Averages the repeats of one cell.
    pub fn from_repeats(axis: SweepAxis, value: f64, repeats: Vec<RepeatDetail>, record_timing: bool) -> Self {
        let k = repeats.len() as f64;
        ReportRow {
            axis,
            value,
            mean_rre: repeats.iter().map(|r| r.rre).sum::<f64>() / k,
            mean_iters: repeats.iter().map(|r| r.iterations as f64).sum::<f64>() / k,
            mean_seconds: record_timing.then(|| repeats.iter().filter_map(|r| r.seconds).sum::<f64>() / k),
            repeats,
        }
    }
}

/// Runs every `(value, repeat)` cell and averages per value.
///
/// Cells run on a rayon pool of `threads` workers (default: available
/// parallelism); results are gathered in index order, so the report does not
/// depend on scheduling. Rows are sorted by axis value.
pub fn run_sweep<T: Scalar>(sweep: &SweepSpec<T>, threads: Option<usize>) -> Result<Vec<ReportRow>> {
    sweep.validate()?;
    if sweep.values.is_empty() {
        return Ok(Vec::new());
    }
    let jobs: Vec<(usize, usize)> = (0..sweep.values.len())
        .flat_map(|c| (0..sweep.repeats).map(move |r| (c, r)))
        .collect();
    let run = |&(cell, repeat): &(usize, usize)| -> Result<RepeatDetail> {
        let value = sweep.values[cell];
        let (spec, cfg) = sweep.cell(value, cell, repeat)?;
        run_instance(&spec, &cfg, repeat, sweep.record_timing).map_err(|e| Error::Cell {
            axis: sweep.axis.name().to_string(),
            value,
            repeat,
            source: Box::new(e),
        })
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let details: Vec<RepeatDetail> =
        pool.install(|| jobs.par_iter().map(run).collect::<Result<Vec<_>>>())?;

    let mut rows: Vec<ReportRow> = details
        .chunks(sweep.repeats)
        .zip(&sweep.values)
        .map(|(reps, &value)| ReportRow::from_repeats(sweep.axis, value, reps.to_vec(), sweep.record_timing))
        .collect();
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(rows)
}

pub const REPORT_CSV_HEADER: [&str; 5] = ["axis", "value", "mean_rre", "mean_iters", "mean_seconds"];

/// Report CSV: `axis,value,mean_rre,mean_iters,mean_seconds`. The seconds
/// column is empty when timing was not recorded.
pub fn write_report_csv<W: Write>(rows: &[ReportRow], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(REPORT_CSV_HEADER)?;
    for r in rows {
        wtr.write_record([
            r.axis.name().to_string(),
            format!("{}", r.value),
            format!("{:e}", r.mean_rre),
            format!("{}", r.mean_iters),
            r.mean_seconds.map(|s| format!("{s:.6}")).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_report_json<W: Write>(rows: &[ReportRow], writer: W) -> Result<()> {
    serde_json::to_writer_pretty(writer, rows)?;
    Ok(())
}
