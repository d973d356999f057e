//! Simulation and exact computation for multiparameter Skellam processes.
//!
//! The crate is organised bottom-up:
//!
//! - [`special_fn`]: log-gamma with sign, modified Bessel `I_n`, the generalized
//!   Wright function `2Psi3` and the fractional Poisson pmf.
//! - [`mpp`]: the multiparameter Poisson process on rectangular grids.
//! - [`gmsp`]: the generalized multiparameter Skellam process, its compound
//!   representations and triangular-array approximation.
//! - [`integrals`]: Riemann integrals of multiparameter paths over rectangles.
//! - [`altskellam`]: the Skellam process indexed by one time per jump.
//! - [`fractional`]: stable / inverse-stable subordinators and the fractional
//!   two-parameter Skellam process.
//! - [`stats`]: chi-square, Kolmogorov-Smirnov, total variation and empirical CFs.
//! - [`verify`]: named statistical identity checks built on the above.
//! - [`cli`]: the `skellam-lab` command-line front end.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod altskellam;
pub mod cli;
pub mod data;
pub mod error;
pub mod fractional;
pub mod gmsp;
pub mod integrals;
pub mod mpp;
pub mod rng;
pub mod special_fn;
pub mod stats;
pub mod verify;

pub use data::{CfTable, Jump, LatticePmf, SampleBatch};
pub use error::{Error, Result};
pub use num_complex::Complex64;
