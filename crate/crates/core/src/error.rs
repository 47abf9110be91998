//! Error type shared by all solver modules.

use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// No data points supplied.
    EmptyInstance,
    /// A weight was zero, negative, or not finite.
    NonPositiveWeight { index: usize, weight: f64 },
    /// A data point or query coordinate was NaN or infinite.
    NonFiniteData,
    /// An exponent lies outside the supported range 1 ≤ q ≤ p < 2.
    ParamOutOfRange { name: &'static str, value: f64 },
    /// Vector length does not match the instance dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// The query point shares a coordinate with a data point, so the plain
    /// gradient (or fixed-point step) is undefined there.
    SingularPoint,
    /// A singular term survived into a de-singularized sum; indicates an
    /// inconsistent singularity profile for the evaluation point.
    UnexpectedSingularTerm { point: usize, dim: usize },
    /// Asked for a descent direction at a certified minimum.
    AtMinimum,
    /// The geometric line search exhausted its trial budget without finding
    /// a step that lowers the cost; the decrease is below machine resolution.
    LineSearchExhausted { trials: usize },
    /// An iterate or cost overflowed to NaN/infinity.
    NonFiniteIterate { iteration: usize },
    /// Convergence-rate measurement needs at least four iterates.
    TrajectoryTooShort { len: usize },
    /// Empty input slice.
    EmptyInput,
    /// Operation requires different exponents (e.g. the ℓ1 median oracle
    /// only applies to p = q = 1).
    WrongParams { expected: &'static str },
    /// The Euclidean Weiszfeld iterate landed exactly on a data point.
    HitDataPoint { index: usize },
    /// A finite-difference stencil point crossed the singular set.
    SingularStencil { dim: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyInstance => write!(f, "instance has no data points"),
            Error::NonPositiveWeight { index, weight } => {
                write!(f, "weight {weight} at index {index} is not a positive finite number")
            }
            Error::NonFiniteData => write!(f, "input contains NaN or infinite coordinates"),
            Error::ParamOutOfRange { name, value } => {
                write!(f, "parameter {name}={value} outside supported range 1 <= q <= p < 2")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::SingularPoint => {
                write!(f, "point lies on the singular set; use the de-singularity subgradient")
            }
            Error::UnexpectedSingularTerm { point, dim } => write!(
                f,
                "singular term for point {point}, dimension {dim} not excluded by the profile"
            ),
            Error::AtMinimum => write!(f, "no descent direction exists at a certified minimum"),
            Error::LineSearchExhausted { trials } => {
                write!(f, "line search found no decrease after {trials} trials")
            }
            Error::NonFiniteIterate { iteration } => {
                write!(f, "iterate became non-finite at iteration {iteration}")
            }
            Error::TrajectoryTooShort { len } => {
                write!(f, "trajectory of length {len} too short for a convergence rate")
            }
            Error::EmptyInput => write!(f, "empty input"),
            Error::WrongParams { expected } => write!(f, "operation requires {expected}"),
            Error::HitDataPoint { index } => {
                write!(f, "iterate hit data point {index} exactly")
            }
            Error::SingularStencil { dim } => {
                write!(f, "finite-difference stencil crosses the singular set in dimension {dim}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
