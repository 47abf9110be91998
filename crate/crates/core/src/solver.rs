//! The full solver iteration: reweighted fixed-point steps at nonsingular
//! iterates, certified subgradient descent with a geometric line search at
//! singular iterates, stopping rules, and diagnostics.

use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;

use crate::desing::{certify_at, descent_direction, OptimalityCertificate};
use crate::error::Error;
use crate::problem::{ProblemInstance, SingularityProfile, DEFAULT_EPS_SING};
use crate::vecops::{all_finite, l2_dist, l2_norm, lp_norm};
use crate::Result;

/// Tuning knobs of [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Line-search reduction factor, `0 < rho < 1`.
    pub rho: f64,
    /// Relative step tolerance: stop when `‖y_{k+1}−y_k‖₂/‖y_k‖₂ ≤ tol`.
    pub tol: f64,
    /// Relative cost tolerance: stop when `|C_{k+1}−C_k|/|C_k| ≤ tol2`.
    pub tol2: f64,
    /// Threshold for the "subgradient is zero" / fixed-point optimality tests.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Trial budget of one singular-point line search.
    pub max_linesearch: usize,
    /// Coordinate-coincidence tolerance used to route iterates; see
    /// [`DEFAULT_EPS_SING`].
    pub eps_sing: f64,
    /// Capture radius (relative, per coordinate) for snapping singular-branch
    /// iterates onto the hyperplanes they hover around; `0` disables.
    ///
    /// Descent steps at singular points share one step length across all
    /// coordinates, so a coordinate oscillating within rounding distance of
    /// its own optimal hyperplane can throttle progress in every other
    /// coordinate indefinitely. Setting such coordinates exactly onto the
    /// hyperplane (only when that does not increase the cost) lets the
    /// optimality test absorb them and keeps the remaining coordinates moving.
    pub snap_band: f64,
    pub record_trajectory: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 0.1,
            tol: 1e-4,
            tol2: 1e-14,
            grad_tol: 1e-10,
            max_iter: 1000,
            max_linesearch: 200,
            eps_sing: DEFAULT_EPS_SING,
            snap_band: 1e-7,
            record_trajectory: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::ParamOutOfRange { name: "rho", value: self.rho });
        }
        if !(self.tol > 0.0) {
            return Err(Error::ParamOutOfRange { name: "tol", value: self.tol });
        }
        if !(self.tol2 > 0.0) {
            return Err(Error::ParamOutOfRange { name: "tol2", value: self.tol2 });
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::ParamOutOfRange { name: "grad_tol", value: self.grad_tol });
        }
        if self.max_iter == 0 {
            return Err(Error::ParamOutOfRange { name: "max_iter", value: 0.0 });
        }
        if !(self.eps_sing >= 0.0) {
            return Err(Error::ParamOutOfRange { name: "eps_sing", value: self.eps_sing });
        }
        if !(self.snap_band >= 0.0) {
            return Err(Error::ParamOutOfRange { name: "snap_band", value: self.snap_band });
        }
        Ok(())
    }
}

/// Copy of `y` with every coordinate within the relative `band` of some
/// data-point coordinate set exactly onto the nearest one. `None` when no
/// coordinate moves.
fn snap_to_hyperplanes(instance: &ProblemInstance, y: &[f64], band: f64) -> Option<Vec<f64>> {
    let mut snapped = y.to_vec();
    let mut moved = false;
    for t in 0..y.len() {
        let mut best: Option<(f64, f64)> = None; // (|gap|, value)
        for x in instance.points() {
            let gap = (y[t] - x[t]).abs();
            if gap <= band * x[t].abs().max(1.0) && best.map_or(true, |(g, _)| gap < g) {
                best = Some((gap, x[t]));
            }
        }
        if let Some((gap, v)) = best {
            if gap > 0.0 {
                snapped[t] = v;
                moved = true;
            }
        }
    }
    moved.then_some(snapped)
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Relative step fell below `tol`.
    ConvergedStep,
    /// Relative cost change fell below `tol2`.
    ConvergedCost,
    /// The minimality test (fixed point / subgradient case) passed.
    OptimalCertified,
    MaxIterReached,
    /// A singular-point line search found no decrease within its budget;
    /// the cost decrease is below machine resolution, so this is practically
    /// convergence. The best iterate is still reported.
    LineSearchExhausted,
}

impl SolveStatus {
    pub fn is_converged(&self) -> bool {
        matches!(
            self,
            SolveStatus::ConvergedStep | SolveStatus::ConvergedCost | SolveStatus::OptimalCertified
        )
    }
}

/// Which update produced an iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Initial,
    Weiszfeld,
    SingularDescent,
}

/// One recorded iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub y: Vec<f64>,
    pub cost: f64,
    pub k: usize,
    pub singular: SingularityProfile,
    pub step_kind: StepKind,
}

/// Result of [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub minimizer: Vec<f64>,
    pub cost: f64,
    /// Number of accepted iterate updates.
    pub iterations: usize,
    pub status: SolveStatus,
    /// Iterations whose current point lay on (or within `eps_sing` of) the
    /// singular set.
    pub singular_hits: usize,
    pub trajectory: Option<Vec<IterateState>>,
    /// Averaged successive-distance contraction toward the final iterate;
    /// recorded trajectories of length ≥ 4 only.
    pub convergence_rate: Option<f64>,
}

/// One reweighted fixed-point step at a nonsingular point, component-wise
///
/// `T(y)⁽ᵗ⁾ = Σ_i ξ_i ‖y−x_i‖_p^(q−p) |y⁽ᵗ⁾−x_i⁽ᵗ⁾|^(p−2) x_i⁽ᵗ⁾ /
///            Σ_i ξ_i ‖y−x_i‖_p^(q−p) |y⁽ᵗ⁾−x_i⁽ᵗ⁾|^(p−2)`.
///
/// The step never increases the cost, with equality only at a fixed point —
/// and a nonsingular fixed point is exactly a minimizer.
pub fn weiszfeld_step(instance: &ProblemInstance, y: &[f64]) -> Result<Vec<f64>> {
    let profile = instance.singularity_profile(y, DEFAULT_EPS_SING)?;
    weiszfeld_step_at(instance, y, &profile)
}

/// [`weiszfeld_step`] with a caller-supplied singularity profile.
pub fn weiszfeld_step_at(
    instance: &ProblemInstance,
    y: &[f64],
    profile: &SingularityProfile,
) -> Result<Vec<f64>> {
    if profile.is_singular {
        return Err(Error::SingularPoint);
    }
    let p = instance.params().p();
    let q = instance.params().q();
    let d = instance.dim();
    let mut num = vec![0.0; d];
    let mut den = vec![0.0; d];
    let mut diff = vec![0.0; d];
    for (x, &w) in instance.points().iter().zip(instance.weights()) {
        for t in 0..d {
            diff[t] = y[t] - x[t];
        }
        let norm_pow = lp_norm(&diff, p).powf(q - p);
        for t in 0..d {
            let c = w * norm_pow * diff[t].abs().powf(p - 2.0);
            num[t] += c * x[t];
            den[t] += c;
        }
    }
    Ok(num.iter().zip(&den).map(|(n, dn)| n / dn).collect())
}

/// Outcome of one singular-point descent step.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularStepOutcome {
    pub point: Vec<f64>,
    /// Accepted step length.
    pub lambda: f64,
    /// Cost evaluations spent: the accepted trial's index plus one.
    pub trials: usize,
}

/// Descent step at a singular, non-minimum point.
///
/// Starts the line search at `λ₀ = ‖𝒟‖_p` and shrinks geometrically
/// (`λ_{w+1} = rho · λ_w`) until `C(y − λ𝒟) < C(y)`; such a step exists
/// whenever the certificate says the point is not a minimum. The restriction
/// `λ ↦ C(y − λ𝒟)` is convex, so its values along the ladder are unimodal;
/// the search keeps shrinking past the first decrease while the next rung
/// still improves and returns the ladder's best step. Accepting the first
/// decrease instead can lock the iteration into a stable cycle where one
/// coordinate oscillates across its optimal hyperplane and throttles every
/// other coordinate's progress.
pub fn singular_step(
    instance: &ProblemInstance,
    y: &[f64],
    cert: &OptimalityCertificate,
    config: &SolverConfig,
) -> Result<SingularStepOutcome> {
    let dir = descent_direction(instance, y, cert)?;
    let cost0 = instance.cost(y)?;
    let lambda0 = lp_norm(&dir, instance.params().p());
    if !lambda0.is_finite() || lambda0 <= 0.0 {
        return Err(Error::NonFiniteIterate { iteration: 0 });
    }
    let point_at = |lambda: f64| -> Vec<f64> {
        y.iter().zip(&dir).map(|(a, d)| a - lambda * d).collect()
    };

    let mut lambda = lambda0;
    let mut accepted: Option<(Vec<f64>, f64, f64)> = None;
    let mut trials = 0;
    while trials <= config.max_linesearch {
        let candidate = point_at(lambda);
        let c = instance.cost(&candidate)?;
        trials += 1;
        if c < cost0 {
            accepted = Some((candidate, lambda, c));
            break;
        }
        lambda *= config.rho;
    }
    let (mut point, mut lambda, mut best_cost) = accepted.ok_or(Error::LineSearchExhausted {
        trials: config.max_linesearch + 1,
    })?;

    // Refine down the ladder while it keeps improving.
    while trials <= config.max_linesearch {
        let next_lambda = lambda * config.rho;
        let candidate = point_at(next_lambda);
        let c = instance.cost(&candidate)?;
        trials += 1;
        if c >= best_cost {
            break;
        }
        point = candidate;
        lambda = next_lambda;
        best_cost = c;
    }

    Ok(SingularStepOutcome { point, lambda, trials })
}

/// Runs the combined iteration from `y0`.
///
/// Each pass classifies the current iterate: off the singular set it applies
/// [`weiszfeld_step`] (declaring a certified optimum when the step is a fixed
/// point up to `grad_tol·(1+‖y‖₂)`); on it, the point is first tested for
/// minimality and otherwise advanced by [`singular_step`]. Stops on the
/// relative step rule (`tol`), the relative cost rule (`tol2`), a certified
/// optimum, an exhausted line search, or `max_iter`. The cost sequence is
/// non-increasing throughout.
pub fn solve(instance: &ProblemInstance, y0: &[f64], config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    if y0.len() != instance.dim() {
        return Err(Error::DimensionMismatch {
            expected: instance.dim(),
            got: y0.len(),
        });
    }
    if !all_finite(y0) {
        return Err(Error::NonFiniteData);
    }

    let mut y = y0.to_vec();
    let mut cost = instance.cost(&y)?;
    let mut singular_hits = 0usize;
    let mut iterations = 0usize;
    let mut status = SolveStatus::MaxIterReached;
    let mut trajectory: Option<Vec<IterateState>> = if config.record_trajectory {
        Some(Vec::new())
    } else {
        None
    };

    let record = |traj: &mut Option<Vec<IterateState>>,
                      y: &[f64],
                      cost: f64,
                      k: usize,
                      profile: &SingularityProfile,
                      kind: StepKind| {
        if let Some(t) = traj {
            t.push(IterateState {
                y: y.to_vec(),
                cost,
                k,
                singular: profile.clone(),
                step_kind: kind,
            });
        }
    };

    let profile0 = instance.singularity_profile(&y, config.eps_sing)?;
    record(&mut trajectory, &y, cost, 0, &profile0, StepKind::Initial);

    for k in 0..config.max_iter {
        let mut profile = instance.singularity_profile(&y, config.eps_sing)?;
        let (y_next, kind) = if profile.is_singular {
            singular_hits += 1;
            if config.snap_band > 0.0 {
                if let Some(snapped) = snap_to_hyperplanes(instance, &y, config.snap_band) {
                    let snapped_cost = instance.cost(&snapped)?;
                    if snapped_cost <= cost {
                        y = snapped;
                        cost = snapped_cost;
                        profile = instance.singularity_profile(&y, config.eps_sing)?;
                    }
                }
            }
            let cert = certify_at(instance, &y, config.grad_tol, &profile)?;
            if cert.is_minimum {
                status = SolveStatus::OptimalCertified;
                break;
            }
            match singular_step(instance, &y, &cert, config) {
                Ok(out) => (out.point, StepKind::SingularDescent),
                Err(Error::LineSearchExhausted { .. }) => {
                    status = SolveStatus::LineSearchExhausted;
                    break;
                }
                Err(e) => return Err(e),
            }
        } else {
            let y_next = weiszfeld_step_at(instance, &y, &profile)?;
            if l2_dist(&y_next, &y) <= config.grad_tol * (1.0 + l2_norm(&y)) {
                // Fixed point of the nonsingular update: certified minimizer.
                y = y_next;
                cost = instance.cost(&y)?;
                iterations = k + 1;
                let p_final = instance.singularity_profile(&y, config.eps_sing)?;
                record(&mut trajectory, &y, cost, k + 1, &p_final, StepKind::Weiszfeld);
                status = SolveStatus::OptimalCertified;
                break;
            }
            (y_next, StepKind::Weiszfeld)
        };

        if !all_finite(&y_next) {
            return Err(Error::NonFiniteIterate { iteration: k });
        }
        let cost_next = instance.cost(&y_next)?;
        if !cost_next.is_finite() {
            return Err(Error::NonFiniteIterate { iteration: k });
        }

        let rel_step = l2_dist(&y_next, &y) / l2_norm(&y).max(1e-300);
        let rel_cost = (cost_next - cost).abs() / cost.abs().max(1e-300);

        y = y_next;
        cost = cost_next;
        iterations = k + 1;
        let profile_next = instance.singularity_profile(&y, config.eps_sing)?;
        record(&mut trajectory, &y, cost, k + 1, &profile_next, kind);

        if rel_step <= config.tol {
            status = SolveStatus::ConvergedStep;
            break;
        }
        if rel_cost <= config.tol2 {
            status = SolveStatus::ConvergedCost;
            break;
        }
    }

    let rate = trajectory.as_ref().and_then(|t| {
        let pts: Vec<Vec<f64>> = t.iter().map(|s| s.y.clone()).collect();
        convergence_rate(&pts).ok()
    });

    Ok(SolveResult {
        minimizer: y,
        cost,
        iterations,
        status,
        singular_hits,
        trajectory,
        convergence_rate: rate,
    })
}

/// Averaged ratio of successive distances to the final iterate:
///
/// `(1/(Iter−2)) Σ_{o=3}^{Iter} ‖y_{o−1} − y_Iter‖₂ / ‖y_{o−2} − y_Iter‖₂`.
///
/// Values below one indicate (at least) linear convergence. Zero-denominator
/// terms are skipped and the divisor reduced accordingly; if every term is
/// skipped the rate is reported as 0.
pub fn convergence_rate(points: &[Vec<f64>]) -> Result<f64> {
    let n = points.len();
    if n < 4 {
        return Err(Error::TrajectoryTooShort { len: n });
    }
    let last = &points[n - 1];
    let mut sum = 0.0;
    let mut terms = 0usize;
    for o in 3..n {
        let num = l2_dist(&points[o - 1], last);
        let den = l2_dist(&points[o - 2], last);
        if den > 0.0 {
            sum += num / den;
            terms += 1;
        }
    }
    Ok(if terms == 0 { 0.0 } else { sum / terms as f64 })
}
