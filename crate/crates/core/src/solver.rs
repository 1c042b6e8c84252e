//! NNSR: ADMM for robust matrix completion with the HOW implicit regularizer.
//!
//! Solves `min ‖M‖_φ(σ, 1/ρ) + λ φ(σ, λ/ρ)(S_Ω)  s.t.  X = M + S` by
//! alternating
//!
//! * `M ← sv_shrink(X - S + Λ/ρ)` with threshold `1/ρ`,
//! * `S_Ω ← prox_how(X - M + Λ/ρ)` with threshold `λ/ρ`, `S_Ωᶜ ← Λ/ρ - M`,
//! * `Λ ← Λ + ρ (X - M - S)`,
//! * `ρ ← μ ρ`,
//!
//! until `‖X - M - S‖_F / ‖X‖_F ≤ tol` or `max_iter` steps have run.

use std::io::Write;

use nalgebra::DMatrix;
use num_traits::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{fro_norm, project_mask, singular_values, DenseMatrix, ObservationMask};
use crate::prox::prox_how;
use crate::scalar::Scalar;
use crate::svt::{sv_shrink_with_values, ShrinkSpec};

/// How the kernel size of each prox call relates to its threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSchedule {
    /// Every prox call uses `σ` as configured.
    Fixed,
    /// Each prox call uses `σ_k = (σ/λ) · threshold_k`, i.e. `σ/ρ^k` for the
    /// sparse part and `σ/(λ ρ^k)` for the low-rank part.
    #[default]
    Proportional,
}

/// Scalars of the solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverConfig<T: Scalar> {
    /// Outlier weight `λ`.
    pub lambda: T,
    /// Kernel size `σ` paired with `λ`.
    pub sigma: T,
    pub sigma_schedule: SigmaSchedule,
    /// Initial penalty; `None` selects `1.25 / s_max(X_Ω)`.
    pub rho0: Option<T>,
    pub mu: T,
    pub tol: T,
    pub max_iter: usize,
    /// Floor for the denominator of relative errors.
    pub eps_guard: T,
}

impl<T: Scalar> SolverConfig<T> {
    /// Defaults for an `m x n` problem: `λ = 1/√max(m, n)`, `σ = √2 λ`,
    /// `μ = 1.05`, `tol = 1e-7`, `max_iter = 1000`.
    pub fn for_shape(m: usize, n: usize) -> Self {
        Self::with_lambda_c(T::one(), m, n)
    }

    /// Defaults with `λ = c / √max(m, n)`.
    pub fn with_lambda_c(c: T, m: usize, n: usize) -> Self {
        let lambda = c / Float::sqrt(T::count(m.max(n)));
        Self {
            lambda,
            sigma: Float::sqrt(T::lit(2.0)) * lambda,
            sigma_schedule: SigmaSchedule::default(),
            rho0: None,
            mu: T::lit(1.05),
            tol: T::lit(1e-7),
            max_iter: 1000,
            eps_guard: T::lit(1e-12),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| Float::is_finite(v) && v > T::zero();
        if !positive(self.lambda) {
            return Err(Error::invalid(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !positive(self.sigma) {
            return Err(Error::invalid(format!("sigma must be positive, got {}", self.sigma)));
        }
        if let Some(rho0) = self.rho0 {
            if !positive(rho0) {
                return Err(Error::invalid(format!("rho0 must be positive, got {rho0}")));
            }
        }
        if !(Float::is_finite(self.mu) && self.mu > T::one()) {
            return Err(Error::invalid(format!("mu must exceed 1, got {}", self.mu)));
        }
        if !positive(self.tol) {
            return Err(Error::invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if !positive(self.eps_guard) {
            return Err(Error::invalid("eps_guard must be positive"));
        }
        Ok(())
    }

    /// Kernel size of the singular value prox (threshold `1/ρ`).
    pub fn low_rank_sigma(&self, rho: T) -> T {
        match self.sigma_schedule {
            SigmaSchedule::Fixed => self.sigma,
            SigmaSchedule::Proportional => self.sigma / (self.lambda * rho),
        }
    }

    /// Kernel size of the elementwise prox (threshold `λ/ρ`).
    pub fn sparse_sigma(&self, rho: T) -> T {
        match self.sigma_schedule {
            SigmaSchedule::Fixed => self.sigma,
            SigmaSchedule::Proportional => self.sigma / rho,
        }
    }

    /// `1.25 / s_max(x)`, or the explicit `rho0` when set.
    pub fn initial_rho(&self, x_observed: &DenseMatrix<T>) -> Result<T> {
        if let Some(rho0) = self.rho0 {
            return Ok(rho0);
        }
        let s_max = singular_values(x_observed)?
            .first()
            .copied()
            .unwrap_or_else(T::zero);
        Ok(T::lit(1.25) / Float::max(s_max, self.eps_guard))
    }
}

/// Iterate `(M, S, Λ, ρ, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveState<T: Scalar> {
    pub m: DenseMatrix<T>,
    pub s: DenseMatrix<T>,
    pub lagrange: DenseMatrix<T>,
    pub rho: T,
    pub iter: usize,
}

impl<T: Scalar> SolveState<T> {
    /// `S = Λ = 0`, `M = 0`, `k = 0`.
    pub fn initial(rows: usize, cols: usize, rho0: T) -> Result<Self> {
        Ok(Self {
            m: DenseMatrix::zeros(rows, cols)?,
            s: DenseMatrix::zeros(rows, cols)?,
            lagrange: DenseMatrix::zeros(rows, cols)?,
            rho: rho0,
            iter: 0,
        })
    }
}

/// One row of the convergence trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    /// Iteration count after the step (1-based).
    pub iter: usize,
    /// Penalty used by this step.
    pub rho: f64,
    /// `‖X - M - S‖_F / ‖X‖_F`.
    pub rel_e: f64,
    /// `‖M^k - M^(k-1)‖_F / ‖M^(k-1)‖_F` (denominator floored at `eps_guard`).
    pub re_m: f64,
    /// Relative residual of the observed matrix; equal to `rel_e`.
    pub re_x: f64,
    pub lagrange_fro: f64,
    /// Singular values of `M` above `1e-8 s_max`.
    pub rank_est: usize,
    /// `‖M^k - M^(k-1)‖_F`, not exported to CSV.
    #[serde(skip)]
    pub m_step: f64,
    /// `‖S^k - S^(k-1)‖_F`, not exported to CSV.
    #[serde(skip)]
    pub s_step: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult<T: Scalar> {
    pub m: DenseMatrix<T>,
    pub s: DenseMatrix<T>,
    /// Recovered matrix: `M` on every entry.
    pub completed: DenseMatrix<T>,
    pub trace: Vec<TraceRecord>,
    /// Final iterate, including `Λ` and `ρ`.
    pub state: SolveState<T>,
    /// `‖X_Ω‖_F`, the normalizer of `rel_e`.
    pub x_norm: T,
    /// `λ √|Ω|`, the bound `‖Λ^k‖_F` stays under when the bias bound applies.
    pub lagrange_bound: T,
    pub converged: bool,
}

impl<T: Scalar> SolveResult<T> {
    pub fn iterations(&self) -> usize {
        self.state.iter
    }

    pub fn final_rel_e(&self) -> f64 {
        self.trace.last().map_or(0.0, |r| r.rel_e)
    }

    /// Iterations whose multiplier norm exceeds `λ √|Ω|` (relative slack `rel_slack`).
    pub fn lagrange_bound_violations(&self, rel_slack: f64) -> Vec<usize> {
        let bound = self.lagrange_bound.to_f64_lossy() * (1.0 + rel_slack);
        self.trace
            .iter()
            .filter(|r| r.lagrange_fro > bound)
            .map(|r| r.iter)
            .collect()
    }

    /// Largest `‖M^{k+1}-M^k‖_F` or `‖S^{k+1}-S^k‖_F` over the last `window` iterations.
    pub fn tail_step(&self, window: usize) -> f64 {
        let start = self.trace.len().saturating_sub(window);
        self.trace[start..]
            .iter()
            .map(|r| r.m_step.max(r.s_step))
            .fold(0.0, f64::max)
    }
}

struct StepOutput<T: Scalar> {
    state: SolveState<T>,
    shrunk: Vec<T>,
}

fn finite_or_diverged<T: Scalar>(data: DMatrix<T>, iter: usize, what: &str) -> Result<DenseMatrix<T>> {
    DenseMatrix::from_nalgebra(data).map_err(|e| Error::Divergence {
        iter,
        reason: format!("{what}: {e}"),
    })
}

fn m_update<T: Scalar>(
    x: &DenseMatrix<T>,
    s: &DenseMatrix<T>,
    lagrange: &DenseMatrix<T>,
    rho: T,
    sigma: T,
    iter: usize,
) -> Result<(DenseMatrix<T>, Vec<T>)> {
    let inv_rho = T::one() / rho;
    let y = x.as_nalgebra() - s.as_nalgebra() + lagrange.as_nalgebra() * inv_rho;
    let y = finite_or_diverged(y, iter, "low-rank update input")?;
    sv_shrink_with_values(&y, &ShrinkSpec::how(inv_rho, sigma)).map_err(|e| match e {
        Error::Numeric(_) | Error::Invariant(_) => Error::SolveFailed {
            iter,
            source: Box::new(e),
        },
        other => other,
    })
}

fn s_update<T: Scalar>(
    x: &DenseMatrix<T>,
    mask: &ObservationMask,
    m: &DenseMatrix<T>,
    lagrange: &DenseMatrix<T>,
    rho: T,
    cfg: &SolverConfig<T>,
    iter: usize,
) -> Result<DenseMatrix<T>> {
    let inv_rho = T::one() / rho;
    let threshold = cfg.lambda * inv_rho;
    let sigma = cfg.sparse_sigma(rho);
    let s = DMatrix::from_fn(x.rows(), x.cols(), |i, j| {
        let carry = lagrange.get(i, j) * inv_rho;
        if mask.is_observed(i, j) {
            prox_how(x.get(i, j) - m.get(i, j) + carry, threshold, sigma)
        } else {
            carry - m.get(i, j)
        }
    });
    finite_or_diverged(s, iter, "sparse update")
}

fn step_inner<T: Scalar>(
    state: &SolveState<T>,
    x: &DenseMatrix<T>,
    mask: &ObservationMask,
    cfg: &SolverConfig<T>,
) -> Result<StepOutput<T>> {
    let iter = state.iter + 1;
    let rho = state.rho;
    let (m, shrunk) = m_update(x, &state.s, &state.lagrange, rho, cfg.low_rank_sigma(rho), iter)?;
    let s = s_update(x, mask, &m, &state.lagrange, rho, cfg, iter)?;
    let lagrange = state.lagrange.as_nalgebra()
        + (x.as_nalgebra() - m.as_nalgebra() - s.as_nalgebra()) * rho;
    let lagrange = finite_or_diverged(lagrange, iter, "multiplier update")?;
    let next_rho = cfg.mu * rho;
    if !Float::is_finite(next_rho) {
        return Err(Error::Divergence {
            iter,
            reason: "penalty overflow".to_string(),
        });
    }
    Ok(StepOutput {
        state: SolveState {
            m,
            s,
            lagrange,
            rho: next_rho,
            iter,
        },
        shrunk,
    })
}

fn check_inputs<T: Scalar>(
    state: &SolveState<T>,
    x: &DenseMatrix<T>,
    mask: &ObservationMask,
) -> Result<()> {
    mask.check_matches(x)?;
    for (what, a) in [("M", &state.m), ("S", &state.s), ("Lambda", &state.lagrange)] {
        if a.shape() != x.shape() {
            return Err(Error::shape(format!(
                "state {what} is {}x{}, data is {}x{}",
                a.rows(),
                a.cols(),
                x.rows(),
                x.cols()
            )));
        }
    }
    if !(Float::is_finite(state.rho) && state.rho > T::zero()) {
        return Err(Error::invalid(format!("rho must be positive, got {}", state.rho)));
    }
    Ok(())
}

/// One ADMM iteration. `x` is used as given; callers should pass `X_Ω`.
pub fn step<T: Scalar>(
    state: &SolveState<T>,
    x: &DenseMatrix<T>,
    mask: &ObservationMask,
    cfg: &SolverConfig<T>,
) -> Result<SolveState<T>> {
    cfg.validate()?;
    check_inputs(state, x, mask)?;
    step_inner(state, x, mask, cfg).map(|o| o.state)
}

/// Runs the solver on `X_Ω` from the zero initialization.
pub fn nnsr_solve<T: Scalar>(
    x: &DenseMatrix<T>,
    mask: &ObservationMask,
    cfg: &SolverConfig<T>,
) -> Result<SolveResult<T>> {
    cfg.validate()?;
    let x = project_mask(x, mask)?;
    let rho0 = cfg.initial_rho(&x)?;
    let mut state = SolveState::initial(x.rows(), x.cols(), rho0)?;

    let x_norm = fro_norm(&x);
    let denom = Float::max(x_norm, cfg.eps_guard);
    let lagrange_bound = cfg.lambda * Float::sqrt(T::count(mask.cardinality()));
    let rank_floor = T::lit(1e-8);
    let mut trace = Vec::with_capacity(cfg.max_iter.min(4096));
    let mut converged = false;

    while state.iter < cfg.max_iter {
        let rho = state.rho;
        let StepOutput { state: next, shrunk } = step_inner(&state, &x, mask, cfg)?;

        let residual = x.as_nalgebra() - next.m.as_nalgebra() - next.s.as_nalgebra();
        let rel_e = (residual.norm() / denom).to_f64_lossy();
        let m_step = (next.m.as_nalgebra() - state.m.as_nalgebra()).norm();
        let s_step = (next.s.as_nalgebra() - state.s.as_nalgebra()).norm();
        let prev_m_norm = Float::max(fro_norm(&state.m), cfg.eps_guard);
        let s_max = shrunk.first().copied().unwrap_or_else(T::zero);
        let rank_est = shrunk
            .iter()
            .filter(|v| **v > rank_floor * s_max && **v > T::zero())
            .count();
        trace.push(TraceRecord {
            iter: next.iter,
            rho: rho.to_f64_lossy(),
            rel_e,
            re_m: (m_step / prev_m_norm).to_f64_lossy(),
            re_x: rel_e,
            lagrange_fro: fro_norm(&next.lagrange).to_f64_lossy(),
            rank_est,
            m_step: m_step.to_f64_lossy(),
            s_step: s_step.to_f64_lossy(),
        });
        state = next;
        if rel_e <= cfg.tol.to_f64_lossy() {
            converged = true;
            break;
        }
    }

    Ok(SolveResult {
        m: state.m.clone(),
        s: state.s.clone(),
        completed: state.m.clone(),
        trace,
        state,
        x_norm,
        lagrange_bound,
        converged,
    })
}

/// Primal feasibility and prox fixed-point gaps of an iterate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KktResiduals<T: Scalar> {
    /// `‖X - M - S‖_F`.
    pub feasibility: T,
    /// `‖M - sv_shrink(X - S + Λ/ρ)‖_F`.
    pub m_fixedpoint: T,
    /// `‖S_Ω - prox_how(X_Ω - M_Ω + Λ_Ω/ρ)‖_F`.
    pub s_fixedpoint: T,
}

pub fn kkt_residuals<T: Scalar>(
    state: &SolveState<T>,
    x: &DenseMatrix<T>,
    mask: &ObservationMask,
    cfg: &SolverConfig<T>,
) -> Result<KktResiduals<T>> {
    cfg.validate()?;
    check_inputs(state, x, mask)?;
    let feasibility =
        (x.as_nalgebra() - state.m.as_nalgebra() - state.s.as_nalgebra()).norm();
    let (m_fixed, _) = m_update(
        x,
        &state.s,
        &state.lagrange,
        state.rho,
        cfg.low_rank_sigma(state.rho),
        state.iter,
    )?;
    let m_fixedpoint = (state.m.as_nalgebra() - m_fixed.as_nalgebra()).norm();

    let s_fixed = s_update(x, mask, &state.m, &state.lagrange, state.rho, cfg, state.iter)?;
    let mut acc = T::zero();
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            if mask.is_observed(i, j) {
                let d = state.s.get(i, j) - s_fixed.get(i, j);
                acc += d * d;
            }
        }
    }
    Ok(KktResiduals {
        feasibility,
        m_fixedpoint,
        s_fixedpoint: Float::sqrt(acc),
    })
}

pub const TRACE_CSV_HEADER: [&str; 7] =
    ["iter", "rho", "rel_e", "re_m", "re_x", "lagrange_fro", "rank_est"];

/// Writes the trace as CSV with header `iter,rho,rel_e,re_m,re_x,lagrange_fro,rank_est`.
pub fn write_trace_csv<W: Write>(trace: &[TraceRecord], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(TRACE_CSV_HEADER)?;
    for r in trace {
        wtr.write_record([
            r.iter.to_string(),
            format!("{:e}", r.rho),
            format!("{:e}", r.rel_e),
            format!("{:e}", r.re_m),
            format!("{:e}", r.re_x),
            format!("{:e}", r.lagrange_fro),
            r.rank_est.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
