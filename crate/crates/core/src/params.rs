//! Exponent pair (p, q) of the powered ℓp-norm objective.

use crate::error::Error;
use crate::Result;

/// Validated exponents of the objective `Σ_i ξ_i ‖y − x_i‖_p^q`.
///
/// `p` is the norm exponent, `q` the power applied to each distance, and `r`
/// the conjugate exponent of `p` (`1/r + 1/p = 1`, `r = ∞` for `p = 1`). The
/// conjugate norm `‖·‖_r` governs the optimality test at a data point when
/// `q = 1`. The supported range is `1 ≤ q ≤ p < 2`; the Euclidean case
/// `p = 2` is served only by [`crate::oracle::l2_weiszfeld`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerNormParams {
    p: f64,
    q: f64,
    r: f64,
}

impl PowerNormParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !p.is_finite() || !(1.0..2.0).contains(&p) {
            return Err(Error::ParamOutOfRange { name: "p", value: p });
        }
        if !q.is_finite() || q < 1.0 || q > p {
            return Err(Error::ParamOutOfRange { name: "q", value: q });
        }
        let r = if p > 1.0 { p / (p - 1.0) } else { f64::INFINITY };
        Ok(Self { p, q, r })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Conjugate exponent of `p`; `+∞` when `p = 1`.
    pub fn r(&self) -> f64 {
        self.r
    }
}
