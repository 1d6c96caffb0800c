//! Learning-based information-theoretic stealth attacks on linearized
//! power-system state estimation.
//!
//! The crate covers the whole pipeline:
//!
//! - [`grid`]: MATPOWER case ingestion and the DC measurement Jacobian `H`.
//! - [`gaussian`]: state, measurement and attack covariances; the stealth
//!   cost `f(Σ_AA)` and its split into mutual information plus KL divergence.
//! - [`learning`]: sample covariances from `K` training realizations, Wishart
//!   sampling and Monte Carlo estimates of the ergodic cost.
//! - [`bound`]: digamma-based expected log-determinants, extreme Wishart
//!   eigenvalue bounds, the box-constrained allocation program, and the
//!   resulting upper bound on the ergodic cost.
//! - [`detection`]: the operator's likelihood ratio test and empirical error
//!   exponents.
//! - [`experiment`]: reproducible sweeps over `K` that emit plot-ready CSV.
//!
//! ```
//! use stealthbound::{bound, gaussian, grid};
//!
//! let h = grid::build_dc_jacobian(&grid::ieee30(), Default::default()).unwrap().h;
//! let sxx = gaussian::toeplitz_covariance(h.ncols(), 0.8).unwrap();
//! let sigma = gaussian::sigma_from_snr(&h, &sxx, 20.0).unwrap();
//! let r = bound::ergodic_upper_bound(&h, &sxx, sigma, 1000, bound::FormulaTag::Paper).unwrap();
//! assert!(r.value > r.optimal_cost);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bound;
pub mod detection;
pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod grid;
pub mod learning;
pub mod linalg;
pub mod mc;

pub use error::{Error, ParseError, Result};
