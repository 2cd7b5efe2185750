//! Confidence intervals for linear associations in spatial regression that
//! stay valid under model misspecification and nonrandom source/target
//! locations.
//!
//! The estimand is the coefficient vector of the best linear approximation to
//! the response surface over a fixed set of target locations. The interval
//! construction transports observed responses to the targets through a
//! nearest-neighbor weight matrix, bounds the resulting bias by an exact
//! Wasserstein-1 computation under a user-supplied Lipschitz constant, and
//! calibrates the Gaussian randomness term with a root-finding step that is
//! never wider than the naive two-sided union interval.
//!
//! Modules follow the pipeline:
//!
//! - [`geometry`]: Euclidean and great-circle metrics over location sets.
//! - [`dataset`]: source/target data model and validation.
//! - [`weights`]: nearest-neighbor weight matrices and contrast vectors.
//! - [`transport`]: exact discrete Wasserstein-1 and the worst-case bias bound.
//! - [`variance`]: noise-variance estimation (Lipschitz-constrained QP and a
//!   scalable nearest-neighbor differencing estimator).
//! - [`interval`]: calibration and interval assembly, end to end.
//! - [`regression`]: estimands, point estimates, and baseline interval methods.
//! - [`harness`]: simulation generators and coverage experiments.
//! - [`cli`]: CSV ingestion, run configuration, and JSON result documents.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod interval;
pub mod regression;
pub mod transport;
pub mod variance;
pub mod weights;

pub(crate) mod linalg;
pub(crate) mod rng;
pub mod special;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
