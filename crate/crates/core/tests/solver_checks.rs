//! Cross-module checks: solver against the independent oracles, descent and
//! boundedness along trajectories, and behaviour of the fixed-point map near
//! the singular set.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use weber_core::oracle::{grid_refine_minimize, l1_median_oracle, GridSearchSpec};
use weber_core::vecops::{l2_dist, l2_norm, lp_norm};
use weber_core::{
    certify, singular_step, solve, weiszfeld_step, ProblemInstance, SolveStatus, SolverConfig,
};

fn integer_instance(rng: &mut ChaCha8Rng, m: usize, d: usize, p: f64, q: f64) -> ProblemInstance {
    loop {
        let points: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..d).map(|_| rng.random_range(-5..=5) as f64).collect())
            .collect();
        let weights: Vec<f64> = (0..m).map(|_| rng.random_range(1..=4) as f64).collect();
        let inst = ProblemInstance::build(points, weights, p, q).unwrap();
        if inst.m() >= 2 {
            return inst;
        }
    }
}

fn mean_point(inst: &ProblemInstance) -> Vec<f64> {
    let d = inst.dim();
    let mut mean = vec![0.0; d];
    for x in inst.points() {
        for t in 0..d {
            mean[t] += x[t];
        }
    }
    mean.iter_mut().for_each(|v| *v /= inst.m() as f64);
    mean
}

/// Tight tolerances for oracle comparisons; the defaults target practical
/// convergence, not 1e-6 cost agreement on piecewise-linear objectives.
fn tight_config() -> SolverConfig {
    SolverConfig {
        tol: 1e-13,
        tol2: 1e-16,
        max_iter: 5000,
        ..SolverConfig::default()
    }
}

#[test]
fn solve_matches_l1_median_oracle_on_100_integer_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let m = rng.random_range(2..=20);
        let d = rng.random_range(1..=5);
        let inst = integer_instance(&mut rng, m, d, 1.0, 1.0);
        let res = solve(&inst, &mean_point(&inst), &tight_config()).unwrap();
        let oracle_cost = inst.cost(&l1_median_oracle(&inst).unwrap()).unwrap();
        assert!(
            res.cost <= oracle_cost + 1e-6,
            "solver cost {} worse than oracle {} ({:?})",
            res.cost,
            oracle_cost,
            res.status
        );
        // The oracle is exact, so the solver can also never beat it.
        assert!(res.cost >= oracle_cost - 1e-9);
    }
}

#[test]
fn certified_minima_survive_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for &(q, p) in &[(1.0, 1.0), (1.0, 1.5), (1.2, 1.5), (1.5, 1.5)] {
        for _ in 0..4 {
            let inst = integer_instance(&mut rng, 6, 2, p, q);
            let res = solve(&inst, &mean_point(&inst), &tight_config()).unwrap();
            let cert = certify(&inst, &res.minimizer, 1e-7).unwrap();
            if cert.is_minimum {
                let spec = GridSearchSpec::for_instance(&inst);
                let (_, grid_cost) = grid_refine_minimize(&inst, &spec).unwrap();
                assert!(
                    grid_cost >= res.cost - 1e-6,
                    "grid found cost {} below certified {} (p={p}, q={q})",
                    grid_cost,
                    res.cost
                );
            }
        }
    }
}

#[test]
fn non_minimum_singular_points_admit_descent() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let cfg = SolverConfig::default();
    let mut exercised = 0;
    for &(q, p) in &[(1.0, 1.0), (1.0, 1.5), (1.2, 1.5), (1.5, 1.5), (1.0, 1.9)] {
        for _ in 0..10 {
            let inst = integer_instance(&mut rng, 8, 3, p, q);
            // A point sharing exactly one coordinate with a data point.
            let mut y = vec![
                inst.points()[0][0],
                rng.random_range(-50..=50) as f64 / 7.0,
                rng.random_range(-50..=50) as f64 / 7.0,
            ];
            if inst
                .singularity_profile(&y, 0.0)
                .unwrap()
                .coincident_point
                .is_some()
            {
                y[1] += 0.37;
            }
            let cert = certify(&inst, &y, 1e-10).unwrap();
            if cert.is_minimum {
                continue;
            }
            let out = singular_step(&inst, &y, &cert, &cfg).unwrap();
            assert!(inst.cost(&out.point).unwrap() < inst.cost(&y).unwrap());
            assert!(out.trials <= cfg.max_linesearch);
            exercised += 1;
        }
    }
    assert!(exercised > 30, "too few singular descents exercised: {exercised}");
}

#[test]
fn trajectories_descend_and_stay_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for &(q, p) in &[(1.0, 1.0), (1.0, 1.3), (1.2, 1.5), (1.7, 1.9)] {
        let inst = integer_instance(&mut rng, 10, 4, p, q);
        let y0 = vec![6.0, -6.0, 6.0, -6.0];
        let cfg = SolverConfig {
            record_trajectory: true,
            ..SolverConfig::default()
        };
        let res = solve(&inst, &y0, &cfg).unwrap();
        let traj = res.trajectory.as_ref().unwrap();
        let c0 = inst.cost(&y0).unwrap();
        let min_w = inst.weights().iter().cloned().fold(f64::INFINITY, f64::min);
        for w in traj.windows(2) {
            assert!(w[1].cost <= w[0].cost * (1.0 + 1e-12));
        }
        // Sub-level boundedness: ξ_i ‖y_k − x_i‖_p^q ≤ C(y_k) ≤ C(y_0).
        let x0 = &inst.points()[0];
        for state in traj {
            let diff: Vec<f64> = state.y.iter().zip(x0).map(|(a, b)| a - b).collect();
            let dist_pq = lp_norm(&diff, p).powf(q);
            assert!(dist_pq <= c0 / min_w + 1e-9);
        }
    }
}

#[test]
fn solution_map_is_scale_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(67);
    let inst = integer_instance(&mut rng, 8, 3, 1.5, 1.2);
    let y0 = vec![2.5, -1.5, 0.5];
    let res = solve(&inst, &y0, &tight_config()).unwrap();

    let s = 3.0;
    let scaled_pts: Vec<Vec<f64>> = inst
        .points()
        .iter()
        .map(|x| x.iter().map(|a| a * s).collect())
        .collect();
    let scaled =
        ProblemInstance::build(scaled_pts, inst.weights().to_vec(), 1.5, 1.2).unwrap();
    let y0s: Vec<f64> = y0.iter().map(|a| a * s).collect();
    let res_s = solve(&scaled, &y0s, &tight_config()).unwrap();

    let expect: Vec<f64> = res.minimizer.iter().map(|a| a * s).collect();
    assert!(l2_dist(&res_s.minimizer, &expect) <= 1e-5 * (1.0 + l2_norm(&expect)));
    assert!((res_s.cost - s.powf(1.2) * res.cost).abs() <= 1e-6 * (1.0 + res_s.cost));
}

#[test]
fn singular_start_descends_on_first_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(83);
    for &(q, p) in &[(1.0, 1.0), (1.0, 1.5), (1.3, 1.7), (1.9, 1.9)] {
        for _ in 0..5 {
            let inst = integer_instance(&mut rng, 5, 10, p, q);
            let y0 = inst.points()[0].clone();
            let cert = certify(&inst, &y0, 1e-10).unwrap();
            if cert.is_minimum {
                continue;
            }
            let cfg = SolverConfig {
                record_trajectory: true,
                ..SolverConfig::default()
            };
            let res = solve(&inst, &y0, &cfg).unwrap();
            let traj = res.trajectory.unwrap();
            assert!(res.singular_hits >= 1);
            assert!(traj.len() >= 2);
            assert!(traj[1].cost < traj[0].cost);
        }
    }
}

#[test]
fn weiszfeld_map_extends_continuously_to_data_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(97);
    for _ in 0..10 {
        let p = 1.0 + rng.random_range(1..=9) as f64 / 10.0;
        let q = 1.0 + rng.random::<f64>() * (p - 1.0);
        let points: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..3).map(|_| rng.random::<f64>() * 8.0 - 4.0).collect())
            .collect();
        let weights: Vec<f64> = (0..6).map(|_| 0.5 + rng.random::<f64>()).collect();
        let inst = ProblemInstance::build(points, weights, p, q).unwrap();
        let x = inst.points()[rng.random_range(0..inst.m())].clone();

        // Approach along a direction with no zero component, so each probe
        // stays off the singular set.
        let u: Vec<f64> = (0..3)
            .map(|_| {
                let v = 0.2 + rng.random::<f64>();
                if rng.random::<bool>() {
                    v
                } else {
                    -v
                }
            })
            .collect();
        let mut dists = Vec::new();
        for &off in &[1e-4, 1e-6, 1e-8, 1e-10] {
            let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + off * b).collect();
            let t = weiszfeld_step(&inst, &y).unwrap();
            dists.push(l2_dist(&t, &x));
        }
        for w in dists.windows(2) {
            assert!(
                w[1] <= w[0] * (1.0 + 1e-9),
                "distance to the data point must shrink with the offset: {dists:?}"
            );
        }
        // The contraction is O(off^(2−q)), slow for q near 2, so assert a
        // clear overall decrease rather than an absolute limit.
        assert!(
            dists[3] < 0.5 * dists[0],
            "map value must approach the data point: {dists:?}"
        );
    }
}

#[test]
fn converged_runs_report_contraction_rates_below_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    let mut measured = 0;
    for _ in 0..20 {
        let inst = integer_instance(&mut rng, 5, 20, 1.2, 1.0);
        let cfg = SolverConfig {
            record_trajectory: true,
            ..SolverConfig::default()
        };
        let res = solve(&inst, &mean_point(&inst), &cfg).unwrap();
        if let Some(rate) = res.convergence_rate {
            assert!(rate >= 0.0 && rate < 1.0, "rate {rate} outside [0, 1)");
            measured += 1;
        }
        assert!(matches!(
            res.status,
            SolveStatus::ConvergedStep | SolveStatus::ConvergedCost | SolveStatus::OptimalCertified
        ));
    }
    assert!(measured >= 10, "too few runs produced a measurable rate");
}
