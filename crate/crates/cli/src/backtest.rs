//! Online portfolio-selection backtest: a powered ℓp-norm median of the
//! recent price window predicts next-period price relatives, a
//! passive-aggressive mean-reversion rule updates the portfolio, and the run
//! is scored by cumulative wealth and Sharpe ratio.

use weber_core::oracle::l2_weiszfeld;
use weber_core::solver::{solve, SolverConfig};
use weber_core::{PowerNormParams, ProblemInstance};

use crate::{Error, Result};

/// Sampling frequency of a series; descriptive only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodTag {
    Daily,
    Weekly,
    Monthly,
}

/// A `T × d` matrix of positive per-period, per-asset price relatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceRelativeSeries {
    relatives: Vec<Vec<f64>>,
    asset_names: Option<Vec<String>>,
    period_tag: PeriodTag,
}

impl PriceRelativeSeries {
    pub fn new(
        relatives: Vec<Vec<f64>>,
        asset_names: Option<Vec<String>>,
        period_tag: PeriodTag,
    ) -> Result<Self> {
        if relatives.len() < 2 {
            return Err(Error::Invalid("need at least 2 periods".into()));
        }
        let d = relatives[0].len();
        if d < 2 {
            return Err(Error::Invalid("need at least 2 assets".into()));
        }
        for (i, row) in relatives.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Invalid(format!(
                    "period {} has {} assets, expected {d}",
                    i + 1,
                    row.len()
                )));
            }
            if row.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return Err(Error::Invalid(format!("period {} has a nonpositive relative", i + 1)));
            }
        }
        if let Some(names) = &asset_names {
            if names.len() != d {
                return Err(Error::Invalid(format!(
                    "{} asset names for {d} assets",
                    names.len()
                )));
            }
        }
        Ok(Self { relatives, asset_names, period_tag })
    }

    pub fn periods(&self) -> usize {
        self.relatives.len()
    }

    pub fn assets(&self) -> usize {
        self.relatives[0].len()
    }

    pub fn relatives(&self) -> &[Vec<f64>] {
        &self.relatives
    }

    pub fn asset_names(&self) -> Option<&[String]> {
        self.asset_names.as_deref()
    }

    pub fn period_tag(&self) -> PeriodTag {
        self.period_tag
    }

    /// Price paths reconstructed by cumulative product, with an all-ones
    /// starting price vector prepended (length `T + 1`).
    pub fn prices(&self) -> Vec<Vec<f64>> {
        let d = self.assets();
        let mut prices = Vec::with_capacity(self.periods() + 1);
        prices.push(vec![1.0; d]);
        for row in &self.relatives {
            let last = prices.last().unwrap();
            prices.push(last.iter().zip(row).map(|(p, r)| p * r).collect());
        }
        prices
    }
}

/// How next-period relatives are predicted from the price window.
#[derive(Debug, Clone, PartialEq)]
pub enum MedianPredictor {
    /// Powered ℓp-norm median of the window (unit weights), via the solver.
    PowerNorm { params: PowerNormParams, solver: SolverConfig },
    /// Classic Euclidean median (`q = 1`, `p = 2`) baseline.
    Euclidean { tol: f64, max_iter: usize },
}

impl MedianPredictor {
    pub fn power_norm(p: f64, q: f64) -> Result<Self> {
        Ok(MedianPredictor::PowerNorm {
            params: PowerNormParams::new(p, q)?,
            solver: SolverConfig::default(),
        })
    }

    pub fn euclidean() -> Self {
        MedianPredictor::Euclidean { tol: 1e-10, max_iter: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestConfig {
    /// Number of recent price vectors fed to the median (≥ 2).
    pub window_m: usize,
    pub predictor: MedianPredictor,
    /// Reversion threshold of the portfolio update.
    pub epsilon: f64,
    /// Starting portfolio; uniform when `None`.
    pub initial_portfolio: Option<Vec<f64>>,
}

impl BacktestConfig {
    pub fn new(window_m: usize, predictor: MedianPredictor, epsilon: f64) -> Self {
        Self { window_m, predictor, epsilon, initial_portfolio: None }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.window_m < 2 {
            return Err(Error::Invalid(format!("window must be >= 2, got {}", self.window_m)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Invalid(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if let Some(b) = &self.initial_portfolio {
            if b.len() != d {
                return Err(Error::Invalid(format!(
                    "initial portfolio has {} entries for {d} assets",
                    b.len()
                )));
            }
            let sum: f64 = b.iter().sum();
            if b.iter().any(|v| *v < 0.0) || (sum - 1.0).abs() > 1e-12 {
                return Err(Error::Invalid("initial portfolio must lie on the simplex".into()));
            }
        }
        Ok(())
    }
}

/// One window prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Predicted next-period price relatives (median ⊘ last price).
    pub x_hat: Vec<f64>,
    /// The window median itself (price scale).
    pub median: Vec<f64>,
    pub iterations: usize,
    pub singular_hits: usize,
}

/// Aggregate solver effort over a backtest.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub solves: usize,
    pub total_iterations: usize,
    pub total_singular_hits: usize,
    pub max_iterations: usize,
}

impl SolverStats {
    fn absorb(&mut self, prediction: &Prediction) {
        self.solves += 1;
        self.total_iterations += prediction.iterations;
        self.total_singular_hits += prediction.singular_hits;
        self.max_iterations = self.max_iterations.max(prediction.iterations);
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.solves == 0 {
            0.0
        } else {
            self.total_iterations as f64 / self.solves as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestResult {
    /// Portfolio held in each period (`T` rows, simplex vectors).
    pub portfolios: Vec<Vec<f64>>,
    /// Realized growth factor `b_t · r_t` per period.
    pub period_returns: Vec<f64>,
    pub cumulative_wealth: f64,
    pub sharpe_ratio: f64,
    /// Set when every period return was identical (zero variance).
    pub sharpe_degenerate: bool,
    pub solver_stats: SolverStats,
}

/// Powered ℓp-norm median of the window rows (unit weights), returned with
/// the predicted relatives `median ⊘ last_price`. `warm_start` overrides the
/// default start at the window mean.
pub fn predict_price_relatives(
    price_window: &[Vec<f64>],
    last_price: &[f64],
    params: PowerNormParams,
    solver_config: &SolverConfig,
    warm_start: Option<&[f64]>,
) -> Result<Prediction> {
    let m = price_window.len();
    if m < 2 {
        return Err(Error::Invalid("prediction window must have at least 2 rows".into()));
    }
    let instance = ProblemInstance::build(
        price_window.to_vec(),
        vec![1.0; m],
        params.p(),
        params.q(),
    )?;
    let y0: Vec<f64> = match warm_start {
        Some(w) => w.to_vec(),
        None => mean_row(price_window),
    };
    let result = solve(&instance, &y0, solver_config)?;
    let x_hat = result
        .minimizer
        .iter()
        .zip(last_price)
        .map(|(m, p)| m / p)
        .collect();
    Ok(Prediction {
        x_hat,
        median: result.minimizer,
        iterations: result.iterations,
        singular_hits: result.singular_hits,
    })
}

/// Euclidean-median (`q = 1`, `p = 2`) prediction used as the baseline row.
/// Duplicate window rows are merged first; an iterate landing exactly on a
/// data point restarts from a slightly perturbed start.
pub fn predict_euclidean(
    price_window: &[Vec<f64>],
    last_price: &[f64],
    tol: f64,
    max_iter: usize,
    warm_start: Option<&[f64]>,
) -> Result<Prediction> {
    let d = last_price.len();
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for row in price_window {
        match points.iter().position(|p| p == row) {
            Some(i) => weights[i] += 1.0,
            None => {
                points.push(row.clone());
                weights.push(1.0);
            }
        }
    }
    let mut y0 = match warm_start {
        Some(w) => w.to_vec(),
        None => mean_row(price_window),
    };
    let mut median = None;
    for attempt in 0..8 {
        match l2_weiszfeld(&points, &weights, &y0, tol, max_iter) {
            Ok(point) => {
                median = Some(point);
                break;
            }
            Err(weber_core::Error::HitDataPoint { .. }) => {
                for t in 0..d {
                    y0[t] += (1.0 + y0[t].abs()) * 1e-7 * (attempt + 1) as f64;
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    let median = median.ok_or(weber_core::Error::HitDataPoint { index: 0 })?;
    let x_hat = median.iter().zip(last_price).map(|(m, p)| m / p).collect();
    Ok(Prediction { x_hat, median, iterations: 0, singular_hits: 0 })
}

fn mean_row(rows: &[Vec<f64>]) -> Vec<f64> {
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for row in rows {
        for t in 0..d {
            mean[t] += row[t];
        }
    }
    mean.iter_mut().for_each(|v| *v /= rows.len() as f64);
    mean
}

/// Euclidean projection onto the probability simplex (sort-based rule).
pub fn simplex_project(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Passive-aggressive mean-reversion update: step toward the mean-centered
/// prediction until the expected return reaches `epsilon`, then project back
/// onto the simplex. A constant prediction leaves the portfolio unchanged.
pub fn reversion_update(b: &[f64], x_hat: &[f64], epsilon: f64) -> Vec<f64> {
    let d = x_hat.len();
    let mean: f64 = x_hat.iter().sum::<f64>() / d as f64;
    let centered: Vec<f64> = x_hat.iter().map(|x| x - mean).collect();
    let denom: f64 = centered.iter().map(|c| c * c).sum();
    if denom == 0.0 {
        return b.to_vec();
    }
    let expected: f64 = b.iter().zip(x_hat).map(|(bi, xi)| bi * xi).sum();
    let tau = ((epsilon - expected) / denom).max(0.0);
    let stepped: Vec<f64> = b.iter().zip(&centered).map(|(bi, ci)| bi + tau * ci).collect();
    simplex_project(&stepped)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sharpe {
    pub value: f64,
    /// All returns identical; the value is 0 by convention.
    pub degenerate: bool,
}

/// Mean over sample standard deviation (`n − 1` divisor), zero risk-free
/// rate.
pub fn sharpe_ratio(returns: &[f64]) -> Result<Sharpe> {
    let n = returns.len();
    if n < 2 {
        return Err(Error::TooFewReturns);
    }
    let mean: f64 = returns.iter().sum::<f64>() / n as f64;
    let var: f64 = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1) as f64;
    if var <= 0.0 {
        return Ok(Sharpe { value: 0.0, degenerate: true });
    }
    Ok(Sharpe { value: mean / var.sqrt(), degenerate: false })
}

/// Runs the backtest over every period of the series.
///
/// Prices are reconstructed from the relatives with an all-ones starting
/// vector. The portfolio starts at `initial_portfolio` and is held until a
/// full window of observed prices exists; from then on each period first
/// predicts relatives from the median of the trailing `window_m` prices
/// (warm-started at the previous median), updates the portfolio, and then
/// realizes that period's return. Wealth is the running product of realized
/// returns; the Sharpe ratio is computed on `returns − 1`.
pub fn run_backtest(series: &PriceRelativeSeries, config: &BacktestConfig) -> Result<BacktestResult> {
    let d = series.assets();
    let t_max = series.periods();
    config.validate(d)?;
    let m = config.window_m;
    if t_max < m {
        return Err(Error::Invalid(format!(
            "series has {t_max} periods, need at least window {m}"
        )));
    }

    let prices = series.prices();
    let mut b = config
        .initial_portfolio
        .clone()
        .unwrap_or_else(|| vec![1.0 / d as f64; d]);
    let mut portfolios = Vec::with_capacity(t_max);
    let mut period_returns = Vec::with_capacity(t_max);
    let mut wealth = 1.0;
    let mut stats = SolverStats::default();
    let mut warm: Option<Vec<f64>> = None;

    for s in 1..=t_max {
        if s > m {
            // Window of observed prices p_{s−m} … p_{s−1}.
            let window = &prices[s - m..s];
            let last_price = &prices[s - 1];
            let prediction = match &config.predictor {
                MedianPredictor::PowerNorm { params, solver } => {
                    predict_price_relatives(window, last_price, *params, solver, warm.as_deref())?
                }
                MedianPredictor::Euclidean { tol, max_iter } => {
                    predict_euclidean(window, last_price, *tol, *max_iter, warm.as_deref())?
                }
            };
            stats.absorb(&prediction);
            b = reversion_update(&b, &prediction.x_hat, config.epsilon);
            warm = Some(prediction.median);
        }
        let r = &series.relatives()[s - 1];
        let ret: f64 = b.iter().zip(r).map(|(bi, ri)| bi * ri).sum();
        wealth *= ret;
        portfolios.push(b.clone());
        period_returns.push(ret);
    }

    let excess: Vec<f64> = period_returns.iter().map(|r| r - 1.0).collect();
    let sharpe = sharpe_ratio(&excess)?;

    Ok(BacktestResult {
        portfolios,
        period_returns,
        cumulative_wealth: wealth,
        sharpe_ratio: sharpe.value,
        sharpe_degenerate: sharpe.degenerate,
        solver_stats: stats,
    })
}
