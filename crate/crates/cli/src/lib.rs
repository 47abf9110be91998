//! Command-line surface and evaluation harness for the powered ℓp-norm
//! location solver in [`weber_core`]: CSV instance and price-series formats,
//! an online portfolio-selection backtest driven by the solver's median
//! predictions, and seeded parameter sweeps over `(q, p)` grids.

pub mod backtest;
pub mod error;
pub mod io;
pub mod report;
pub mod sweep;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
