//! De-singularity subgradient, per-case optimality certificates, and the
//! descent direction at singular points.
//!
//! On the singular set the objective is not differentiable, but removing
//! exactly the offending terms yields a computable representative of the
//! subdifferential. Writing `U_i(y)` for the dimensions where `y` matches
//! `x_i` and `V_t(y)` for the points matching in dimension `t`:
//!
//! * de-singularized value
//!   `D(y) = Σ_i ξ_i (Σ_{t∉U_i} |y⁽ᵗ⁾−x_i⁽ᵗ⁾|^p)^(q/p)`,
//! * de-singularity subgradient, component-wise
//!   `(∇D)⁽ᵗ⁾ = Σ_{i∉V_t} q ξ_i ‖y−x_i‖_p^(q−p) |y⁽ᵗ⁾−x_i⁽ᵗ⁾|^(p−2) (y⁽ᵗ⁾−x_i⁽ᵗ⁾)`.
//!
//! Both coincide with the plain cost and gradient off the singular set. The
//! subdifferential at a singular `y` splits into four cases by `(p, q)` and
//! by whether `y` equals a data point; [`certify`] evaluates the matching
//! minimality test and [`descent_direction`] produces a direction that is
//! guaranteed to admit a cost-reducing step when the test fails.

use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;

use crate::error::Error;
use crate::problem::{ProblemInstance, SingularityProfile, DEFAULT_EPS_SING};
use crate::vecops::{l2_norm, lp_norm};
use crate::Result;

/// Which branch of the subgradient characterization applies at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateCase {
    /// `y` off the singular set: plain gradient test.
    NonsingularGradient,
    /// `p = q = 1`: the subdifferential is a box around ∇D with
    /// per-coordinate radii `a⁽ᵗ⁾ = Σ_{i∈V_t} η_i`.
    P1Q1Box,
    /// `q = 1`, `1 < p < 2`, singular but not at a data point: ∇D is the
    /// whole subdifferential.
    Q1InteriorSingular,
    /// `q = 1`, `1 < p < 2`, `y = x_l`: ball case, minimal iff
    /// `‖∇D(x_l)‖_r ≤ η_l` in the conjugate norm.
    Q1AtDataPoint,
    /// `1 < q ≤ p`: ∇D is the whole subdifferential.
    GeneralPq,
}

/// Numeric evidence of the conjugate-norm test at a data point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateNormTest {
    /// `‖∇D(x_l)‖_r`.
    pub norm_r: f64,
    /// `η_l` (equals `ξ_l` since this case has `q = 1`).
    pub threshold: f64,
}

/// Outcome of the minimality test at a point, with the evidence used.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityCertificate {
    pub case: CertificateCase,
    /// `∇D(y)`; equals the plain gradient at nonsingular points.
    pub desing_subgrad: Vec<f64>,
    /// Box radii `a⁽ᵗ⁾` (only for [`CertificateCase::P1Q1Box`]).
    pub bounds_a: Option<Vec<f64>>,
    /// Conjugate-norm evidence (only for [`CertificateCase::Q1AtDataPoint`]).
    pub conj_test: Option<ConjugateNormTest>,
    pub is_minimum: bool,
}

impl ProblemInstance {
    /// De-singularized objective value; equals [`ProblemInstance::cost`]
    /// off the singular set. Uses the default coincidence tolerance.
    pub fn desing_value(&self, y: &[f64]) -> Result<f64> {
        let profile = self.singularity_profile(y, DEFAULT_EPS_SING)?;
        self.desing_value_at(y, &profile)
    }

    /// De-singularized objective value for a precomputed profile.
    pub fn desing_value_at(&self, y: &[f64], profile: &SingularityProfile) -> Result<f64> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        let p = self.params().p();
        let q = self.params().q();
        let d = self.dim();
        let mut total = 0.0;
        let mut excluded = vec![false; d];
        for (i, (x, &w)) in self.points().iter().zip(self.weights()).enumerate() {
            for &t in &profile.u[i] {
                excluded[t] = true;
            }
            let mut sum_p = 0.0;
            for t in 0..d {
                if !excluded[t] {
                    sum_p += (y[t] - x[t]).abs().powf(p);
                }
            }
            total += w * sum_p.powf(q / p);
            for &t in &profile.u[i] {
                excluded[t] = false;
            }
        }
        Ok(total)
    }

    /// De-singularity subgradient; equals [`ProblemInstance::gradient`] off
    /// the singular set. Uses the default coincidence tolerance.
    pub fn desing_subgradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        let profile = self.singularity_profile(y, DEFAULT_EPS_SING)?;
        self.desing_subgradient_at(y, &profile)
    }

    /// De-singularity subgradient for a precomputed profile.
    ///
    /// Every term with `i ∈ V_t(y)` is dropped, so no `0^(p−2)` factor can
    /// arise; a zero base slipping through anyway means the profile does not
    /// describe `y` and is reported as an error instead of producing
    /// infinities.
    pub fn desing_subgradient_at(
        &self,
        y: &[f64],
        profile: &SingularityProfile,
    ) -> Result<Vec<f64>> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        let p = self.params().p();
        let q = self.params().q();
        let d = self.dim();
        let m = self.m();

        // Full-norm factors ‖y − x_i‖_p^(q−p); a point fully coincident with
        // y never appears in any retained term, so its factor is unused.
        let mut diff = vec![0.0; d];
        let mut norm_pow = vec![0.0; m];
        for (i, x) in self.points().iter().enumerate() {
            if profile.u[i].len() == d {
                norm_pow[i] = f64::NAN;
                continue;
            }
            for t in 0..d {
                diff[t] = y[t] - x[t];
            }
            norm_pow[i] = lp_norm(&diff, p).powf(q - p);
        }

        let mut grad = vec![0.0; d];
        let mut in_v = vec![false; m];
        for t in 0..d {
            for &i in &profile.v[t] {
                in_v[i] = true;
            }
            let mut acc = 0.0;
            for (i, (x, &w)) in self.points().iter().zip(self.weights()).enumerate() {
                if in_v[i] {
                    continue;
                }
                let dt = y[t] - x[t];
                if dt == 0.0 {
                    return Err(Error::UnexpectedSingularTerm { point: i, dim: t });
                }
                acc += q * w * norm_pow[i] * dt.abs().powf(p - 2.0) * dt;
            }
            grad[t] = acc;
            for &i in &profile.v[t] {
                in_v[i] = false;
            }
        }
        Ok(grad)
    }
}

/// Element-wise signed power: `sign(w⁽ᵗ⁾) · |w⁽ᵗ⁾|^e`, with zero mapped to
/// zero. Requires `e > 0`.
pub fn signed_power(w: &[f64], e: f64) -> Vec<f64> {
    debug_assert!(e > 0.0);
    w.iter()
        .map(|&x| if x == 0.0 { 0.0 } else { x.signum() * x.abs().powf(e) })
        .collect()
}

/// Conjugate norm ‖v‖_r (finite `r > 1`).
fn conj_norm(v: &[f64], r: f64) -> f64 {
    lp_norm(v, r)
}

/// Tests whether `y` is a minimizer, using the default coincidence tolerance.
///
/// The test depends on the active subgradient case:
/// nonsingular → `‖∇C‖₂ ≤ grad_tol`; `p = q = 1` → `|∇D⁽ᵗ⁾| ≤ a⁽ᵗ⁾` for all
/// `t`; `q = 1`, `1 < p < 2` at a data point `x_l` → `‖∇D‖_r ≤ η_l`, and
/// elsewhere on the singular set → `‖∇D‖₂ ≤ grad_tol`; `1 < q ≤ p` →
/// `‖∇D‖₂ ≤ grad_tol`.
pub fn certify(
    instance: &ProblemInstance,
    y: &[f64],
    grad_tol: f64,
) -> Result<OptimalityCertificate> {
    let profile = instance.singularity_profile(y, DEFAULT_EPS_SING)?;
    certify_at(instance, y, grad_tol, &profile)
}

/// [`certify`] with a caller-supplied singularity profile.
pub fn certify_at(
    instance: &ProblemInstance,
    y: &[f64],
    grad_tol: f64,
    profile: &SingularityProfile,
) -> Result<OptimalityCertificate> {
    if !(grad_tol > 0.0) {
        return Err(Error::ParamOutOfRange {
            name: "grad_tol",
            value: grad_tol,
        });
    }
    let p = instance.params().p();
    let q = instance.params().q();
    let grad = instance.desing_subgradient_at(y, profile)?;

    if !profile.is_singular {
        let is_minimum = l2_norm(&grad) <= grad_tol;
        return Ok(OptimalityCertificate {
            case: CertificateCase::NonsingularGradient,
            desing_subgrad: grad,
            bounds_a: None,
            conj_test: None,
            is_minimum,
        });
    }

    if p == 1.0 && q == 1.0 {
        let a: Vec<f64> = profile
            .v
            .iter()
            .map(|vt| vt.iter().map(|&i| instance.eta()[i]).sum())
            .collect();
        // grad_tol absorbs rounding noise in components whose exact value
        // is zero (flat tie intervals have a = 0 there).
        let is_minimum = grad.iter().zip(&a).all(|(g, at)| g.abs() <= *at + grad_tol);
        return Ok(OptimalityCertificate {
            case: CertificateCase::P1Q1Box,
            desing_subgrad: grad,
            bounds_a: Some(a),
            conj_test: None,
            is_minimum,
        });
    }

    if q == 1.0 {
        if let Some(l) = profile.coincident_point {
            let test = ConjugateNormTest {
                norm_r: conj_norm(&grad, instance.params().r()),
                threshold: instance.eta()[l],
            };
            let is_minimum = test.norm_r <= test.threshold;
            return Ok(OptimalityCertificate {
                case: CertificateCase::Q1AtDataPoint,
                desing_subgrad: grad,
                bounds_a: None,
                conj_test: Some(test),
                is_minimum,
            });
        }
        let is_minimum = l2_norm(&grad) <= grad_tol;
        return Ok(OptimalityCertificate {
            case: CertificateCase::Q1InteriorSingular,
            desing_subgrad: grad,
            bounds_a: None,
            conj_test: None,
            is_minimum,
        });
    }

    let is_minimum = l2_norm(&grad) <= grad_tol;
    Ok(OptimalityCertificate {
        case: CertificateCase::GeneralPq,
        desing_subgrad: grad,
        bounds_a: None,
        conj_test: None,
        is_minimum,
    })
}

/// Direction `𝒟` whose negative admits a cost-reducing step at a
/// non-minimum point: at a data point with `q = 1`, `1 < p < 2` the
/// element-wise signed power `(∇D)^(r/p)`; in the `p = q = 1` box case the
/// component-wise residual of `∇D` beyond the box radii; everywhere else
/// `∇D` itself.
///
/// The box residual `sign(∇D⁽ᵗ⁾)·max(|∇D⁽ᵗ⁾| − a⁽ᵗ⁾, 0)` is the minimal-norm
/// subgradient. `∇D` itself is not a reliable direction there: components
/// sitting inside their bounds contribute `a⁽ᵗ⁾|∇D⁽ᵗ⁾| − (∇D⁽ᵗ⁾)² > 0` to the
/// one-sided derivative and can outweigh the violating ones, leaving
/// `−∇D` an ascent direction at a non-minimum point. The residual makes the
/// derivative `−Σ_t max(|∇D⁽ᵗ⁾| − a⁽ᵗ⁾, 0)²`, strictly negative whenever the
/// box test fails.
pub fn descent_direction(
    instance: &ProblemInstance,
    _y: &[f64],
    cert: &OptimalityCertificate,
) -> Result<Vec<f64>> {
    if cert.is_minimum {
        return Err(Error::AtMinimum);
    }
    match cert.case {
        CertificateCase::Q1AtDataPoint => {
            let e = instance.params().r() / instance.params().p();
            Ok(signed_power(&cert.desing_subgrad, e))
        }
        CertificateCase::P1Q1Box => {
            let a = cert
                .bounds_a
                .as_ref()
                .expect("box certificate always carries its radii");
            Ok(cert
                .desing_subgrad
                .iter()
                .zip(a)
                .map(|(&g, &at)| g.signum() * (g.abs() - at).max(0.0))
                .collect())
        }
        _ => Ok(cert.desing_subgrad.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn tri(p: f64, q: f64, w0: f64) -> ProblemInstance {
        ProblemInstance::build(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![w0, 1.0, 1.0],
            p,
            q,
        )
        .unwrap()
    }

    #[test]
    fn desing_value_equals_cost_off_singular_set() {
        let i = tri(1.5, 1.2, 1.0);
        let y = [0.3, 0.7];
        let dv = i.desing_value(&y).unwrap();
        let c = i.cost(&y).unwrap();
        assert!((dv - c).abs() <= 1e-14 * c);
    }

    #[test]
    fn desing_value_removes_singular_terms() {
        // At (0,0): the first point removes both coordinates, the others one
        // each, leaving |−1| + |−1| = 2.
        let i = tri(1.0, 1.0, 1.0);
        assert_eq!(i.desing_value(&[0.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn desing_value_zero_at_lone_point() {
        let i = ProblemInstance::build(vec![vec![2.0, -3.0]], vec![5.0], 1.5, 1.5).unwrap();
        assert_eq!(i.desing_value(&[2.0, -3.0]).unwrap(), 0.0);
    }

    #[test]
    fn desing_subgradient_matches_gradient_off_singular_set() {
        let i = ProblemInstance::build(vec![vec![0.0, 0.0]], vec![1.0], 1.0, 1.0).unwrap();
        let y = [2.0, 3.0];
        assert_eq!(i.desing_subgradient(&y).unwrap(), i.gradient(&y).unwrap());
        assert_eq!(i.desing_subgradient(&y).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn desing_subgradient_excludes_per_dimension() {
        // V_1 = {0,2}, V_2 = {0,1}: each component keeps one term of slope −1.
        let i = tri(1.0, 1.0, 1.0);
        let g = i.desing_subgradient(&[0.0, 0.0]).unwrap();
        assert!((g[0] + 1.0).abs() < 1e-12);
        assert!((g[1] + 1.0).abs() < 1e-12);

        let j = tri(1.5, 1.0, 1.0);
        let g = j.desing_subgradient(&[0.0, 0.0]).unwrap();
        assert!((g[0] + 1.0).abs() < 1e-12);
        assert!((g[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn signed_power_examples() {
        assert_eq!(signed_power(&[-2.0, 3.0], 2.0), vec![-4.0, 9.0]);
        let w = [0.5, -1.25, 0.0, 7.0];
        assert_eq!(signed_power(&w, 1.0), w.to_vec());
        let c = signed_power(&[0.0, -8.0], 1.0 / 3.0);
        assert_eq!(c[0], 0.0);
        assert!((c[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn certify_box_case_at_l1_median() {
        let i = tri(1.0, 1.0, 1.0);
        let cert = certify(&i, &[0.0, 0.0], 1e-10).unwrap();
        assert_eq!(cert.case, CertificateCase::P1Q1Box);
        assert_eq!(cert.bounds_a, Some(vec![2.0, 2.0]));
        assert_eq!(cert.desing_subgrad, vec![-1.0, -1.0]);
        assert!(cert.is_minimum);
    }

    #[test]
    fn certify_conjugate_norm_at_data_point() {
        // r = 3: ‖(−1,−1)‖₃ = 2^(1/3) ≈ 1.2599.
        let heavy = tri(1.5, 1.0, 10.0);
        let cert = certify(&heavy, &[0.0, 0.0], 1e-10).unwrap();
        assert_eq!(cert.case, CertificateCase::Q1AtDataPoint);
        let t = cert.conj_test.unwrap();
        assert!((t.norm_r - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(t.threshold, 10.0);
        assert!(cert.is_minimum);

        let light = tri(1.5, 1.0, 0.1);
        let cert = certify(&light, &[0.0, 0.0], 1e-10).unwrap();
        assert!(!cert.is_minimum);
    }

    #[test]
    fn certify_nonsingular_case() {
        let i = tri(1.5, 1.2, 1.0);
        let cert = certify(&i, &[0.4, 0.3], 1e-10).unwrap();
        assert_eq!(cert.case, CertificateCase::NonsingularGradient);
        assert!(!cert.is_minimum);
        assert_eq!(cert.desing_subgrad, i.gradient(&[0.4, 0.3]).unwrap());
    }

    #[test]
    fn certify_dispatch_switches_off_singular_set() {
        let i = tri(1.5, 1.5, 1.0);
        let on = certify(&i, &[0.0, 0.5], 1e-10).unwrap();
        assert_eq!(on.case, CertificateCase::GeneralPq);
        // More than eps_sing away from every hyperplane: nonsingular case.
        let off = certify(&i, &[1e-6, 0.5], 1e-10).unwrap();
        assert_eq!(off.case, CertificateCase::NonsingularGradient);
    }

    #[test]
    fn descent_direction_signed_power_branch() {
        // r/p = 2 at p = 1.5: direction (−1,−1)² kept signed → (−1,−1), and
        // stepping y − λ𝒟 = (λ, λ) must reduce the cost for some λ > 0.
        let i = tri(1.5, 1.0, 0.1);
        let cert = certify(&i, &[0.0, 0.0], 1e-10).unwrap();
        let dir = descent_direction(&i, &[0.0, 0.0], &cert).unwrap();
        assert!((dir[0] + 1.0).abs() < 1e-12 && (dir[1] + 1.0).abs() < 1e-12);
        let c0 = i.cost(&[0.0, 0.0]).unwrap();
        assert!((c0 - 2.0).abs() < 1e-12);
        let lam = 1e-3;
        assert!(i.cost(&[lam, lam]).unwrap() < c0);
    }

    #[test]
    fn descent_direction_passthrough_branch() {
        let i = tri(1.5, 1.5, 1.0);
        let y = [0.0, 0.5];
        let cert = certify(&i, &y, 1e-10).unwrap();
        assert!(!cert.is_minimum);
        let dir = descent_direction(&i, &y, &cert).unwrap();
        assert_eq!(dir, cert.desing_subgrad);
    }

    #[test]
    fn descent_direction_negative_one_sided_slope_for_l1() {
        let i = ProblemInstance::build(
            vec![vec![0.0, 0.0], vec![4.0, 1.0], vec![5.0, -2.0]],
            vec![1.0, 1.0, 1.0],
            1.0,
            1.0,
        )
        .unwrap();
        let y = [0.0, 0.5]; // shares only x-coordinate with the first point
        let cert = certify(&i, &y, 1e-10).unwrap();
        assert!(!cert.is_minimum);
        let dir = descent_direction(&i, &y, &cert).unwrap();
        // Box residual of ∇D = (−2, 1) with radii a = (1, 0).
        assert_eq!(dir, vec![-1.0, 1.0]);
        let c0 = i.cost(&y).unwrap();
        let lam = 1e-6;
        let stepped: Vec<f64> = y.iter().zip(&dir).map(|(a, d)| a - lam * d).collect();
        let slope = (i.cost(&stepped).unwrap() - c0) / lam;
        assert!(slope < 0.0);
    }

    #[test]
    fn descent_direction_rejects_minimum() {
        let i = tri(1.0, 1.0, 1.0);
        let cert = certify(&i, &[0.0, 0.0], 1e-10).unwrap();
        assert!(matches!(
            descent_direction(&i, &[0.0, 0.0], &cert),
            Err(Error::AtMinimum)
        ));
    }
}
