//! Robust low-rank matrix completion with the hybrid ordinary-Welsch (HOW)
//! loss.
//!
//! The HOW loss is quadratic inside `[-λ, λ]` and a shifted Welsch bump
//! outside. Its implicit regularizer has no closed form, but its proximity
//! operator does, and the NNSR solver uses that operator both on singular
//! values (low-rank part) and elementwise (outlier part) inside an ADMM loop.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the common `f64` instantiation.

pub mod error;
pub mod imaging;
pub mod matrix;
pub mod prox;
pub mod rng;
pub mod scalar;
pub mod solver;
pub mod svt;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::{DenseMatrix, ObservationMask, SvdFactors};
pub use prox::HowParams;
pub use scalar::Scalar;
pub use solver::{SigmaSchedule, SolveResult, SolveState, SolverConfig, TraceRecord};
pub use svt::{ShrinkKind, ShrinkSpec};

pub type Matrix = DenseMatrix<f64>;
pub type Matrix32 = DenseMatrix<f32>;
pub type Svd = SvdFactors<f64>;
pub type Config = SolverConfig<f64>;
pub type State = SolveState<f64>;
pub type Outcome = SolveResult<f64>;
pub type How = HowParams<f64>;
pub type Shrink = ShrinkSpec<f64>;
