//! Numerical laboratory for degree-two U- and V-statistics built from
//! heavy-tailed R^2 data, their quadratic-form-of-Gaussians reference
//! laws, and the Monte Carlo machinery that measures how fast one
//! approximates the other.
//!
//! The crate is organized along the experiment's data flow:
//!
//! - [`construction`]: the scale schedule `sigma_n`, the three-point law,
//!   and the heavy-tailed / Gaussian-surrogate samplers.
//! - [`statistics`]: the kernels and the statistics `pstar`, `n v_n`,
//!   `sqrt(n(n-1)) u_n`, `R_n`, each with an O(n) reduced path and an
//!   O(n^2) kernel-sum oracle path.
//! - [`refdist`]: CDFs of `sigma xi + chi2_1` and its centered variant,
//!   via calibrated Gauss–Hermite quadrature.
//! - [`montecarlo`]: deterministic parallel replication, empirical CDFs,
//!   Kolmogorov distances with DKW error bars.
//! - [`analysis`]: inequality calculators, log-log rate fitting, and the
//!   end-to-end experiment pipeline.
//!
//! Everything downstream of a 64-bit seed is reproducible bit-for-bit,
//! independent of thread count.

pub mod analysis;
pub mod construction;
pub mod erf;
mod error;
pub mod montecarlo;
pub mod quadrature;
pub mod refdist;
pub mod rng;
pub mod statistics;
pub mod sum;

pub use construction::{ConstructionParams, LawTag, SampleMatrix, ThreePointLaw};
pub use error::{Error, Result};
pub use montecarlo::{DistanceEstimate, EmpiricalCdf};
pub use refdist::ReferenceCdf;
pub use statistics::{EvalPath, StatisticKind, StatisticValue};
