//! Independent reference minimizers and numerical oracles: coordinate-wise
//! weighted medians for the `p = q = 1` case, a refined grid search, the
//! classic Euclidean Weiszfeld iteration, and a central-difference gradient.
//! These exist to validate the solver and to serve as baselines; none of
//! them is a general-purpose optimizer.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::problem::{ProblemInstance, DEFAULT_EPS_SING};
use crate::vecops::{all_finite, l2_dist, l2_norm};
use crate::Result;

/// Smallest value whose cumulative weight reaches half the total
/// (lower-endpoint convention on tie intervals, for determinism).
pub fn weighted_coordinate_median(values: &[f64], weights: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            got: weights.len(),
        });
    }
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::NonPositiveWeight { index: i, weight: w });
        }
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total: f64 = weights.iter().sum();
    let mut cum = 0.0;
    for &i in &idx {
        cum += weights[i];
        if cum >= total / 2.0 {
            return Ok(values[i]);
        }
    }
    Ok(values[*idx.last().unwrap()])
}

/// Exact minimizer for `p = q = 1`: the objective separates per coordinate
/// into weighted one-dimensional absolute-deviation problems, each solved by
/// the weighted median.
pub fn l1_median_oracle(instance: &ProblemInstance) -> Result<Vec<f64>> {
    if instance.params().p() != 1.0 || instance.params().q() != 1.0 {
        return Err(Error::WrongParams { expected: "p = q = 1" });
    }
    let d = instance.dim();
    let mut out = Vec::with_capacity(d);
    let mut column = vec![0.0; instance.m()];
    for t in 0..d {
        for (i, x) in instance.points().iter().enumerate() {
            column[i] = x[t];
        }
        out.push(weighted_coordinate_median(&column, instance.weights())?);
    }
    Ok(out)
}

/// Bounding box and refinement schedule for the brute-force grid oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points_per_dim: usize,
    pub refine_levels: usize,
    /// Box shrink factor per level, in (0, 1).
    pub shrink: f64,
}

impl GridSearchSpec {
    /// Data bounding box inflated by 50%, 41 points per dimension, 6 levels,
    /// shrink 0.3. Sized for low-dimensional test instances.
    pub fn for_instance(instance: &ProblemInstance) -> Self {
        let d = instance.dim();
        let mut lower = vec![f64::INFINITY; d];
        let mut upper = vec![f64::NEG_INFINITY; d];
        for x in instance.points() {
            for t in 0..d {
                lower[t] = lower[t].min(x[t]);
                upper[t] = upper[t].max(x[t]);
            }
        }
        for t in 0..d {
            let pad = 0.5 * (upper[t] - lower[t]).max(1.0);
            lower[t] -= pad;
            upper[t] += pad;
        }
        Self {
            lower,
            upper,
            points_per_dim: 41,
            refine_levels: 6,
            shrink: 0.3,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() || self.lower.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: self.lower.len(),
                got: self.upper.len(),
            });
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| !(u > l)) {
            return Err(Error::ParamOutOfRange { name: "grid box", value: 0.0 });
        }
        if self.points_per_dim < 3 {
            return Err(Error::ParamOutOfRange {
                name: "points_per_dim",
                value: self.points_per_dim as f64,
            });
        }
        if self.refine_levels < 1 {
            return Err(Error::ParamOutOfRange {
                name: "refine_levels",
                value: self.refine_levels as f64,
            });
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::ParamOutOfRange { name: "shrink", value: self.shrink });
        }
        Ok(())
    }
}

/// Brute-force minimization: evaluates the cost on a grid, recenters the box
/// on the best point, shrinks it, and repeats. Returns the best point and
/// cost seen. Cost grows as `points_per_dim^d · refine_levels`, so this is
/// meant for `d ≤ 3`.
pub fn grid_refine_minimize(
    instance: &ProblemInstance,
    spec: &GridSearchSpec,
) -> Result<(Vec<f64>, f64)> {
    spec.validate()?;
    if spec.lower.len() != instance.dim() {
        return Err(Error::DimensionMismatch {
            expected: instance.dim(),
            got: spec.lower.len(),
        });
    }
    let d = instance.dim();
    let n = spec.points_per_dim;
    let mut lower = spec.lower.clone();
    let mut upper = spec.upper.clone();
    let mut best_point = vec![0.0; d];
    for t in 0..d {
        best_point[t] = 0.5 * (lower[t] + upper[t]);
    }
    let mut best_cost = instance.cost(&best_point)?;

    let mut index = vec![0usize; d];
    let mut y = vec![0.0; d];
    for _ in 0..spec.refine_levels {
        index.iter_mut().for_each(|i| *i = 0);
        loop {
            for t in 0..d {
                let step = (upper[t] - lower[t]) / (n - 1) as f64;
                y[t] = lower[t] + index[t] as f64 * step;
            }
            let c = instance.cost(&y)?;
            if c < best_cost {
                best_cost = c;
                best_point.copy_from_slice(&y);
            }
            // Mixed-radix increment over the d-dimensional grid.
            let mut t = 0;
            loop {
                if t == d {
                    break;
                }
                index[t] += 1;
                if index[t] < n {
                    break;
                }
                index[t] = 0;
                t += 1;
            }
            if t == d {
                break;
            }
        }
        for t in 0..d {
            let half = 0.5 * (upper[t] - lower[t]) * spec.shrink;
            lower[t] = best_point[t] - half;
            upper[t] = best_point[t] + half;
        }
    }
    Ok((best_point, best_cost))
}

/// Classic Euclidean (`p = 2`, `q = 1`) Weiszfeld iteration, used as the
/// baseline predictor. Iterates must stay off the data points: an exact hit
/// is surfaced as [`Error::HitDataPoint`] for the caller to restart from a
/// perturbed start.
pub fn l2_weiszfeld(
    points: &[Vec<f64>],
    weights: &[f64],
    y0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(Error::EmptyInstance);
    }
    if points.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: weights.len(),
        });
    }
    let d = points[0].len();
    if y0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: y0.len() });
    }
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::NonPositiveWeight { index: i, weight: w });
        }
    }
    for (i, x) in points.iter().enumerate() {
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
        if !all_finite(x) {
            return Err(Error::NonFiniteData);
        }
        for other in &points[i + 1..] {
            if x == other {
                return Err(Error::WrongParams { expected: "pairwise distinct points" });
            }
        }
    }
    if points.len() == 1 {
        return Ok(points[0].clone());
    }
    if !(tol > 0.0) {
        return Err(Error::ParamOutOfRange { name: "tol", value: tol });
    }

    let mut y = y0.to_vec();
    for _ in 0..max_iter {
        let mut num = vec![0.0; d];
        let mut den = 0.0;
        for (i, (x, &w)) in points.iter().zip(weights).enumerate() {
            let dist = l2_dist(&y, x);
            if dist == 0.0 {
                return Err(Error::HitDataPoint { index: i });
            }
            let c = w / dist;
            for t in 0..d {
                num[t] += c * x[t];
            }
            den += c;
        }
        let y_next: Vec<f64> = num.iter().map(|v| v / den).collect();
        let step = l2_dist(&y_next, &y);
        let done = step <= tol * (1.0 + l2_norm(&y));
        y = y_next;
        if done {
            break;
        }
    }
    Ok(y)
}

/// Central-difference gradient `(C(y+h·e_t) − C(y−h·e_t)) / (2h)`.
///
/// Every stencil point must be off the singular set, otherwise the quotient
/// straddles a non-differentiable hyperplane and is meaningless.
pub fn finite_diff_gradient(instance: &ProblemInstance, y: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::ParamOutOfRange { name: "h", value: h });
    }
    let center = instance.singularity_profile(y, DEFAULT_EPS_SING)?;
    if center.is_singular {
        return Err(Error::SingularStencil {
            dim: center.singular_dims[0],
        });
    }
    let d = instance.dim();
    let mut grad = vec![0.0; d];
    let mut probe = y.to_vec();
    for t in 0..d {
        probe[t] = y[t] + h;
        if instance.singularity_profile(&probe, DEFAULT_EPS_SING)?.is_singular {
            return Err(Error::SingularStencil { dim: t });
        }
        let plus = instance.cost(&probe)?;
        probe[t] = y[t] - h;
        if instance.singularity_profile(&probe, DEFAULT_EPS_SING)?.is_singular {
            return Err(Error::SingularStencil { dim: t });
        }
        let minus = instance.cost(&probe)?;
        probe[t] = y[t];
        grad[t] = (plus - minus) / (2.0 * h);
    }
    Ok(grad)
}
