//! Solver library for the q-th-powered ℓp-norm Weber location problem:
//! find a point minimizing `Σ_i ξ_i ‖y − x_i‖_p^q` over fixed data points
//! `x_i` with positive weights `ξ_i`, for `1 ≤ q ≤ p` and `1 ≤ p < 2`.
//!
//! For these exponents the objective is convex but its gradient blows up on
//! the union of axis-aligned hyperplanes `{y : y⁽ᵗ⁾ = x_i⁽ᵗ⁾}` — a continuum,
//! not a finite set — so a plain Weiszfeld fixed-point iteration can stall or
//! overflow whenever an iterate shares a coordinate with a data point. This
//! crate implements a de-singularity subgradient scheme around that set:
//!
//! * [`problem`] — problem construction, cost, gradient, and detection of the
//!   singular coordinate pattern of an iterate ([`SingularityProfile`]).
//! * [`desing`] — the subgradient with singular terms removed, the per-case
//!   optimality certificate, and the descent direction at singular points.
//! * [`solver`] — the full iteration: reweighted fixed-point steps at
//!   nonsingular iterates, certified descent steps with a geometric line
//!   search at singular ones, plus stopping rules and diagnostics.
//! * [`oracle`] — independent reference minimizers (coordinate-wise weighted
//!   median, refined grid search, the classic Euclidean Weiszfeld iteration)
//!   and a finite-difference gradient, used for validation and as baselines.
//!
//! The crate is `no_std` compatible (requires `alloc`); disable the default
//! `std` feature for embedded use. All types are plain data and all
//! operations are pure functions, so instances can be shared freely across
//! threads.
//!
//! ```
//! use weber_core::{ProblemInstance, SolverConfig, solver::solve};
//!
//! let inst = ProblemInstance::build(
//!     vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
//!     vec![1.0, 1.0, 1.0],
//!     1.0,
//!     1.0,
//! )
//! .unwrap();
//! let result = solve(&inst, &[5.0, 5.0], &SolverConfig::default()).unwrap();
//! assert!((result.cost - 2.0).abs() < 1e-9);
//! ```

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod desing;
pub mod error;
pub mod oracle;
pub mod params;
pub mod problem;
pub mod solver;
pub mod vecops;

pub use desing::{certify, descent_direction, signed_power, CertificateCase, OptimalityCertificate};
pub use error::Error;
pub use params::PowerNormParams;
pub use problem::{ProblemInstance, SingularityProfile, DEFAULT_EPS_SING};
pub use solver::{
    convergence_rate, singular_step, solve, weiszfeld_step, SolveResult, SolveStatus, SolverConfig,
};

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
