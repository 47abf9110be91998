//! Plain-text reports: solve results as key/value lines (plus an optional
//! trajectory table) and backtest outputs as a per-period CSV plus a
//! key/value summary.

use std::fmt::Write as _;

use weber_core::solver::{SolveResult, SolveStatus, StepKind};

use crate::backtest::BacktestResult;

pub fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::ConvergedStep => "converged_step",
        SolveStatus::ConvergedCost => "converged_cost",
        SolveStatus::OptimalCertified => "optimal_certified",
        SolveStatus::MaxIterReached => "max_iter_reached",
        SolveStatus::LineSearchExhausted => "line_search_exhausted",
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Key/value report; `with_trajectory` appends a `k,step,singular,cost,y...`
/// table when the run recorded one.
pub fn format_solve_report(result: &SolveResult, with_trajectory: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "status: {}", status_name(result.status));
    let _ = writeln!(out, "iterations: {}", result.iterations);
    let _ = writeln!(out, "singular_hits: {}", result.singular_hits);
    let _ = writeln!(out, "cost: {:.12e}", result.cost);
    if let Some(rate) = result.convergence_rate {
        let _ = writeln!(out, "convergence_rate: {rate:.4}");
    }
    let _ = writeln!(out, "minimizer: {}", join(&result.minimizer));
    if with_trajectory {
        if let Some(traj) = &result.trajectory {
            let _ = writeln!(out, "trajectory:");
            let _ = writeln!(out, "k,step,singular,cost,y");
            for state in traj {
                let kind = match state.step_kind {
                    StepKind::Initial => "initial",
                    StepKind::Weiszfeld => "weiszfeld",
                    StepKind::SingularDescent => "singular_descent",
                };
                let _ = writeln!(
                    out,
                    "{},{},{},{:.12e},{}",
                    state.k,
                    kind,
                    state.singular.is_singular,
                    state.cost,
                    join(&state.y)
                );
            }
        }
    }
    out
}

/// Per-period CSV: `period,b_1..b_d,return,wealth`.
pub fn format_backtest_csv(result: &BacktestResult) -> String {
    let d = result.portfolios.first().map_or(0, Vec::len);
    let mut out = String::from("period");
    for j in 1..=d {
        let _ = write!(out, ",b_{j}");
    }
    out.push_str(",return,wealth\n");
    let mut wealth = 1.0;
    for (t, (b, r)) in result.portfolios.iter().zip(&result.period_returns).enumerate() {
        wealth *= r;
        let _ = write!(out, "{}", t + 1);
        for v in b {
            let _ = write!(out, ",{v:.10}");
        }
        let _ = writeln!(out, ",{r:.10},{wealth:.10}");
    }
    out
}

pub fn format_backtest_summary(
    result: &BacktestResult,
    p: f64,
    q: f64,
    window: usize,
    epsilon: f64,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p: {p}");
    let _ = writeln!(out, "q: {q}");
    let _ = writeln!(out, "window: {window}");
    let _ = writeln!(out, "epsilon: {epsilon}");
    let _ = writeln!(out, "periods: {}", result.period_returns.len());
    let _ = writeln!(out, "cw: {:.4}", result.cumulative_wealth);
    let _ = writeln!(out, "sr: {:.4}", result.sharpe_ratio);
    let _ = writeln!(out, "sr_degenerate: {}", result.sharpe_degenerate);
    let _ = writeln!(out, "solves: {}", result.solver_stats.solves);
    let _ = writeln!(out, "mean_iterations: {:.2}", result.solver_stats.mean_iterations());
    let _ = writeln!(out, "max_iterations: {}", result.solver_stats.max_iterations);
    let _ = writeln!(out, "total_singular_hits: {}", result.solver_stats.total_singular_hits);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use weber_core::solver::{solve, SolverConfig};
    use weber_core::ProblemInstance;

    #[test]
    fn solve_report_has_expected_keys() {
        let inst = ProblemInstance::build(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![1.0; 3],
            1.0,
            1.0,
        )
        .unwrap();
        let cfg = SolverConfig { record_trajectory: true, ..SolverConfig::default() };
        let res = solve(&inst, &[5.0, 5.0], &cfg).unwrap();
        let report = format_solve_report(&res, true);
        for key in ["status:", "iterations:", "singular_hits:", "cost:", "minimizer:"] {
            assert!(report.contains(key), "missing {key} in {report}");
        }
        assert!(report.contains("trajectory:"));
        assert!(report.lines().count() > 6);
    }
}
