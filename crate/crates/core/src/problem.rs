//! Problem representation, cost and gradient evaluation, and detection of
//! the singular coordinate pattern of a query point.

use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;

use crate::error::Error;
use crate::params::PowerNormParams;
use crate::vecops::{all_finite, lp_norm};
use crate::Result;

/// Default relative tolerance for deciding that a coordinate of `y` matches
/// a data-point coordinate. Fixed-point iterates can land within rounding
/// distance of a singular hyperplane, where `|y⁽ᵗ⁾ − x_i⁽ᵗ⁾|^(p−2)` overflows;
/// near-coincidence therefore routes to the singular branch. Pass `0.0` for
/// exact equality.
pub const DEFAULT_EPS_SING: f64 = 1e-12;

/// A weighted point set with validated exponents.
///
/// Construction merges exact duplicate points (summing their weights), so the
/// stored points are pairwise distinct. The instance is immutable afterwards
/// and safe to share across threads; every operation on it is a pure function.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    eta: Vec<f64>,
    params: PowerNormParams,
    dim: usize,
    collinear: bool,
}

/// Which coordinates of a query point `y` coincide with which data points.
///
/// `u[i]` lists the dimensions `t` with `y⁽ᵗ⁾ = x_i⁽ᵗ⁾`; `v[t]` lists the data
/// points `i` matching in dimension `t`. The two families are transposes of
/// the same relation. `y` is singular exactly when some `v[t]` is nonempty.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularityProfile {
    pub is_singular: bool,
    /// Per data point: matching dimensions (sorted).
    pub u: Vec<Vec<usize>>,
    /// Per dimension: matching data points (sorted).
    pub v: Vec<Vec<usize>>,
    /// Dimensions `t` with `v[t]` nonempty (sorted).
    pub singular_dims: Vec<usize>,
    /// Set to `Some(l)` when `y` matches `x_l` in every dimension.
    pub coincident_point: Option<usize>,
}

impl ProblemInstance {
    /// Builds an instance from raw points and weights.
    ///
    /// Exact duplicate points are merged with their weights summed (the
    /// objective is unchanged by this), weights must be positive and finite,
    /// and the exponents must satisfy `1 ≤ q ≤ p < 2`. Collinearity of the
    /// merged point set is recorded as a warning flag, not an error: for
    /// `p = 1` the minimizer may then be non-unique, but any returned
    /// minimizer is still valid.
    pub fn build(points: Vec<Vec<f64>>, weights: Vec<f64>, p: f64, q: f64) -> Result<Self> {
        let params = PowerNormParams::new(p, q)?;
        if points.is_empty() {
            return Err(Error::EmptyInstance);
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::EmptyInstance);
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::NonPositiveWeight { index: i, weight: w });
            }
        }
        for x in &points {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
            if !all_finite(x) {
                return Err(Error::NonFiniteData);
            }
        }

        let mut merged: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        let mut merged_w: Vec<f64> = Vec::with_capacity(points.len());
        for (x, w) in points.into_iter().zip(weights) {
            match merged.iter().position(|m| m == &x) {
                Some(j) => merged_w[j] += w,
                None => {
                    merged.push(x);
                    merged_w.push(w);
                }
            }
        }

        let q = params.q();
        let eta: Vec<f64> = merged_w.iter().map(|w| w.powf(1.0 / q)).collect();
        let collinear = is_collinear(&merged);

        Ok(Self {
            points: merged,
            weights: merged_w,
            eta,
            params,
            dim,
            collinear,
        })
    }

    /// Number of (merged) data points.
    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> PowerNormParams {
        self.params
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Reweighted multiplicities `η_i = ξ_i^(1/q)`.
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// True when all points lie on one line (`m ≥ 2`, `d ≥ 2`). Warning only.
    pub fn is_collinear(&self) -> bool {
        self.collinear
    }

    fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        Ok(())
    }

    /// Objective value `Σ_i ξ_i ‖y − x_i‖_p^q`. Defined for every finite `y`.
    pub fn cost(&self, y: &[f64]) -> Result<f64> {
        self.check_dim(y)?;
        let p = self.params.p();
        let q = self.params.q();
        let mut total = 0.0;
        let mut diff = vec![0.0; self.dim];
        for (x, &w) in self.points.iter().zip(&self.weights) {
            for t in 0..self.dim {
                diff[t] = y[t] - x[t];
            }
            let n = lp_norm(&diff, p);
            total += if q == 1.0 { w * n } else { w * n.powf(q) };
        }
        Ok(total)
    }

    /// Gradient of the objective at a nonsingular point, component-wise
    ///
    /// `(∇C)⁽ᵗ⁾ = Σ_i q ξ_i ‖y−x_i‖_p^(q−p) |y⁽ᵗ⁾−x_i⁽ᵗ⁾|^(p−2) (y⁽ᵗ⁾−x_i⁽ᵗ⁾)`.
    ///
    /// Fails with [`Error::SingularPoint`] when `y` lies within the default
    /// singularity band; use the de-singularity subgradient there instead.
    pub fn gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        let profile = self.singularity_profile(y, DEFAULT_EPS_SING)?;
        if profile.is_singular {
            return Err(Error::SingularPoint);
        }
        let p = self.params.p();
        let q = self.params.q();
        let mut grad = vec![0.0; self.dim];
        let mut diff = vec![0.0; self.dim];
        for (x, &w) in self.points.iter().zip(&self.weights) {
            for t in 0..self.dim {
                diff[t] = y[t] - x[t];
            }
            let norm_pow = lp_norm(&diff, p).powf(q - p);
            for t in 0..self.dim {
                grad[t] += q * w * norm_pow * diff[t].abs().powf(p - 2.0) * diff[t];
            }
        }
        Ok(grad)
    }

    /// Records which coordinates of `y` coincide with data-point coordinates.
    ///
    /// A coordinate matches when `|y⁽ᵗ⁾ − x_i⁽ᵗ⁾| ≤ eps_sing · max(1, |x_i⁽ᵗ⁾|)`;
    /// `eps_sing = 0` means exact equality.
    pub fn singularity_profile(&self, y: &[f64], eps_sing: f64) -> Result<SingularityProfile> {
        self.check_dim(y)?;
        if !(eps_sing >= 0.0) {
            return Err(Error::ParamOutOfRange {
                name: "eps_sing",
                value: eps_sing,
            });
        }
        let m = self.points.len();
        let d = self.dim;
        let mut u: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut v: Vec<Vec<usize>> = vec![Vec::new(); d];
        let mut coincident = None;
        for (i, x) in self.points.iter().enumerate() {
            for t in 0..d {
                if (y[t] - x[t]).abs() <= eps_sing * x[t].abs().max(1.0) {
                    u[i].push(t);
                    v[t].push(i);
                }
            }
            if u[i].len() == d && coincident.is_none() {
                coincident = Some(i);
            }
        }
        let singular_dims: Vec<usize> = (0..d).filter(|&t| !v[t].is_empty()).collect();
        Ok(SingularityProfile {
            is_singular: !singular_dims.is_empty(),
            u,
            v,
            singular_dims,
            coincident_point: coincident,
        })
    }
}

/// Rank of the centered point matrix ≤ 1, checked only for `m ≥ 2`, `d ≥ 2`.
fn is_collinear(points: &[Vec<f64>]) -> bool {
    let m = points.len();
    if m < 2 || points[0].len() < 2 {
        return false;
    }
    let base = &points[0];
    let dirs: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|x| x.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let v = &dirs[0];
    let v_sq: f64 = v.iter().map(|a| a * a).sum();
    for u in &dirs[1..] {
        let u_sq: f64 = u.iter().map(|a| a * a).sum();
        let uv: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
        // Gram determinant ‖u‖²‖v‖² − (u·v)² vanishes iff u ∥ v.
        if (u_sq * v_sq - uv * uv).abs() > 1e-12 * u_sq * v_sq {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn inst(points: Vec<Vec<f64>>, weights: Vec<f64>, p: f64, q: f64) -> ProblemInstance {
        ProblemInstance::build(points, weights, p, q).unwrap()
    }

    #[test]
    fn build_identity_weights() {
        let i = inst(vec![vec![0.0, 0.0], vec![3.0, 4.0]], vec![1.0, 1.0], 1.0, 1.0);
        assert_eq!(i.m(), 2);
        assert_eq!(i.eta(), &[1.0, 1.0]);
    }

    #[test]
    fn build_merges_duplicates_and_sums_weights() {
        let i = inst(
            vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0]],
            vec![1.0, 2.0, 1.0],
            1.5,
            1.5,
        );
        assert_eq!(i.m(), 2);
        assert_eq!(i.weights(), &[3.0, 1.0]);
        // η_i^q = ξ_i
        for (w, e) in i.weights().iter().zip(i.eta()) {
            assert!((e.powf(1.5) - w).abs() <= 1e-12 * w);
        }
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(matches!(
            ProblemInstance::build(vec![vec![0.0]], vec![1.0], 2.0, 1.0),
            Err(Error::ParamOutOfRange { name: "p", .. })
        ));
        assert!(matches!(
            ProblemInstance::build(vec![vec![0.0]], vec![0.0], 1.0, 1.0),
            Err(Error::NonPositiveWeight { index: 0, .. })
        ));
        assert!(matches!(
            ProblemInstance::build(vec![], vec![], 1.0, 1.0),
            Err(Error::EmptyInstance)
        ));
        assert!(matches!(
            ProblemInstance::build(vec![vec![0.0, f64::NAN]], vec![1.0], 1.0, 1.0),
            Err(Error::NonFiniteData)
        ));
    }

    #[test]
    fn collinearity_is_a_flag_not_an_error() {
        let line = inst(
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]],
            vec![1.0; 3],
            1.0,
            1.0,
        );
        assert!(line.is_collinear());
        let tri = inst(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![1.0; 3],
            1.0,
            1.0,
        );
        assert!(!tri.is_collinear());
    }

    #[test]
    fn cost_hand_values() {
        let i = inst(vec![vec![0.0, 0.0], vec![3.0, 4.0]], vec![1.0, 1.0], 1.0, 1.0);
        assert_eq!(i.cost(&[0.0, 0.0]).unwrap(), 7.0);

        // ‖(−1,−1)‖_1.5^1.5 = 2, times ξ = 2.
        let j = inst(vec![vec![1.0, 1.0]], vec![2.0], 1.5, 1.5);
        assert!((j.cost(&[0.0, 0.0]).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cost_translation_invariance() {
        let pts = vec![vec![0.5, -1.0], vec![2.0, 3.0], vec![-4.0, 0.25]];
        let ws = vec![1.0, 2.0, 0.5];
        let i = inst(pts.clone(), ws.clone(), 1.5, 1.2);
        let c = vec![10.0, -7.0];
        let shifted: Vec<Vec<f64>> = pts
            .iter()
            .map(|x| x.iter().zip(&c).map(|(a, b)| a + b).collect())
            .collect();
        let j = inst(shifted, ws, 1.5, 1.2);
        let y = [0.3, 0.7];
        let y_shift = [0.3 + c[0], 0.7 + c[1]];
        let a = i.cost(&y).unwrap();
        let b = j.cost(&y_shift).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn cost_dimension_mismatch() {
        let i = inst(vec![vec![0.0, 0.0]], vec![1.0], 1.0, 1.0);
        assert!(matches!(
            i.cost(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn gradient_sign_vector_for_l1() {
        let i = inst(vec![vec![0.0, 0.0]], vec![1.0], 1.0, 1.0);
        let g = i.gradient(&[2.0, 3.0]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12);
        assert!((g[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_symbolic_differentiation() {
        // C(y) = (y1^1.5 + y2^1.5) for y > 0; ∇C(1,1) = 1.5 · (1, 1).
        let i = inst(vec![vec![0.0, 0.0]], vec![1.0], 1.5, 1.5);
        let g = i.gradient(&[1.0, 1.0]).unwrap();
        assert!((g[0] - 1.5).abs() < 1e-12);
        assert!((g[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn gradient_refuses_singular_points() {
        let i = inst(vec![vec![1.0, 5.0], vec![0.0, 2.0]], vec![1.0, 1.0], 1.5, 1.0);
        assert!(matches!(i.gradient(&[1.0, 7.0]), Err(Error::SingularPoint)));
    }

    #[test]
    fn profile_examples() {
        let i = inst(vec![vec![1.0, 5.0], vec![0.0, 2.0]], vec![1.0, 1.0], 1.0, 1.0);

        let s = i.singularity_profile(&[1.0, 2.0], 0.0).unwrap();
        assert!(s.is_singular);
        assert_eq!(s.u, vec![vec![0], vec![1]]);
        assert_eq!(s.v, vec![vec![0], vec![1]]);
        assert_eq!(s.singular_dims, vec![0, 1]);
        assert_eq!(s.coincident_point, None);

        let ns = i.singularity_profile(&[9.0, 9.0], 0.0).unwrap();
        assert!(!ns.is_singular);
        assert!(ns.u.iter().all(|u| u.is_empty()));
        assert!(ns.v.iter().all(|v| v.is_empty()));

        let c = i.singularity_profile(&[1.0, 5.0], 0.0).unwrap();
        assert_eq!(c.u[0], vec![0, 1]);
        assert_eq!(c.coincident_point, Some(0));
    }

    #[test]
    fn profile_exact_mode_flips_on_any_perturbation() {
        let i = inst(vec![vec![1.0, 5.0], vec![0.0, 2.0]], vec![1.0, 1.0], 1.0, 1.0);
        let s = i.singularity_profile(&[1.0 + 1e-15, 2.0], 0.0).unwrap();
        assert!(s.v[0].is_empty());
        assert_eq!(s.v[1], vec![1]);
    }

    #[test]
    fn profile_relative_band() {
        let i = inst(vec![vec![1.0, 1e6]], vec![1.0], 1.5, 1.0);
        // Within 1e-12·1e6 of the second coordinate.
        let s = i.singularity_profile(&[5.0, 1e6 + 1e-7], 1e-12).unwrap();
        assert_eq!(s.v[1], vec![0]);
        assert!(s.v[0].is_empty());
    }

    #[test]
    fn gradient_non_lipschitz_witness() {
        // Single point at the origin: C(y) = ‖y‖_p^q. For y = ε·1 the
        // difference-quotient ratio against y/2 grows like ε^(q−2), with
        // closed form (2 − 2^(2−q)) q d^((q−p)/p) ε^(q−2).
        let d = 3;
        for &(p, q) in &[(1.5, 1.5), (1.8, 1.2)] {
            let i = inst(vec![vec![0.0; d]], vec![1.0], p, q);
            let mut eps = 1e-1;
            let mut prev: Option<f64> = None;
            while eps >= 1e-6 {
                let y1 = vec![eps; d];
                let y2 = vec![eps / 2.0; d];
                let g1 = i.gradient(&y1).unwrap();
                let g2 = i.gradient(&y2).unwrap();
                let num = crate::vecops::l2_dist(&g1, &g2);
                let den = crate::vecops::l2_dist(&y1, &y2);
                let ratio = num / den;
                let closed = (2.0 - 2f64.powf(2.0 - q))
                    * q
                    * (d as f64).powf((q - p) / p)
                    * eps.powf(q - 2.0);
                assert!((ratio - closed).abs() <= 1e-9 * closed);
                if let Some(prev) = prev {
                    assert!(ratio > prev, "ratio must grow as eps shrinks");
                }
                prev = Some(ratio);
                eps /= 2.0;
            }
        }
    }
}
