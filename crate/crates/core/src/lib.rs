//! Simultaneous inference for high-dimensional mean vectors under heavy tails.
//!
//! The building blocks are the element-wise truncated sample mean, a
//! permutation half-sampling procedure that estimates the sup-norm cutoff
//! without touching the covariance matrix, and an exact solver for the
//! resulting simultaneous confidence box. Monte Carlo helpers (Gaussian
//! reference maxima, two-sample Kolmogorov distance, synthetic data) support
//! checking the Gaussian approximation empirically.
//!
//! Core routines are generic over the floating-point scalar (`f32` or `f64`);
//! the aliases at the crate root fix the common `f64` instantiation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod datagen;
pub mod diagnostics;
pub mod error;
pub mod gaussian;
pub mod ks;
pub mod quantile;
pub mod resampling;
pub mod scalar;
pub mod sci;
pub mod seed;
pub mod truncation;

pub use data::DataMatrix;
pub use datagen::{generate, DistributionFamily, DistributionSpec};
pub use diagnostics::{theory_diagnostics, GaDiagnostics, TheoryDiagnostics};
pub use error::{Error, Result};
pub use gaussian::{oracle_cutoff, sample_gaussian_max, CovarianceKind, CovarianceModel};
pub use ks::ks_two_sample;
pub use quantile::upper_quantile;
pub use resampling::{
    empirical_quantile, half_sample_diffs, resample_distribution, ResampleDistribution,
    ResamplePlan,
};
pub use scalar::Scalar;
pub use sci::{
    build_sci, huber_estimate, score_function, solve_level, test_mean, SciResult, Side,
    TestDecision,
};
pub use truncation::{
    estimate_moment_bound, select_kappa, truncate_scalar, truncated_mean, EstimateKind,
    MeanEstimate, TruncationSpec,
};

/// Observation matrix in double precision.
pub type Matrix = DataMatrix<f64>;
/// Observation matrix in single precision.
pub type Matrix32 = DataMatrix<f32>;
pub type Truncation = TruncationSpec<f64>;
pub type Truncation32 = TruncationSpec<f32>;
pub type Intervals = SciResult<f64>;
pub type Intervals32 = SciResult<f32>;
pub type Resampled = ResampleDistribution<f64>;
pub type Resampled32 = ResampleDistribution<f32>;
pub type Estimate = MeanEstimate<f64>;
pub type Decision = TestDecision<f64>;
