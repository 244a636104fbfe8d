//! Numerical toolkit for statistical distances and speed limits of unitary
//! quantum evolution.
//!
//! A bounded Hermitian generator `K` drives the evolution
//! `|psi_theta> = exp(-i K theta / hbar) |psi_0>`. This crate computes the
//! overlap, the Wootters angle and the statistical distance between the
//! initial and evolved states, the rate of change of that distance, two upper
//! bounds on the rate (one from the standard deviation of `K`, one from its
//! expectation value above the ground state), and the resulting minimum-time
//! bounds for reaching an orthogonal state. A randomized harness sweeps seeded
//! ensembles of generators and states to check every inequality at scale and
//! to tabulate the sign of the overlap derivative, which is negative at small
//! `theta` for every non-stationary state.
//!
//! Campaigns run in parallel with the default `parallel` feature; disable
//! default features for a fully sequential build.

pub mod bounds;
mod error;
pub mod evolution;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod speed_limits;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Config, Generator};

pub use num_complex::Complex64;
