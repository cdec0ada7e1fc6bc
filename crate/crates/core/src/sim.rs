//! Event-stream simulation by Ogata's modified thinning, and next-event /
//! daily-aggregate forecasting from a fitted intensity.
//!
//! Between events the exponential-kernel intensity only decays, so the
//! intensity immediately after the current time is a valid upper bound:
//! candidate gaps are drawn from an exponential at that bound and accepted
//! with probability `lambda(candidate) / bound`. Rejected candidates still
//! advance the clock (the bound is refreshed there), which keeps the
//! procedure exact.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, EventSeries};
use crate::hawkes::{HawkesError, HawkesParams};
use crate::rngutil::rng_for;
use crate::stats;

/// Hard cap on events generated per simulation call; bounds runaway
/// supercritical runs.
pub const DEFAULT_EVENT_CAP: usize = 10_000_000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("simulation exceeded the event cap of {cap} events")]
    Overflow { cap: usize },
    #[error("{0}")]
    Argument(String),
    #[error(transparent)]
    Hawkes(#[from] HawkesError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Monte Carlo estimate of the waiting time to the next event.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NextEventForecast {
    /// Raw waiting-time samples, hours.
    pub samples: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    pub quantiles: WaitingQuantiles,
}

/// The 10%/50%/90% waiting-time quantiles, hours.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WaitingQuantiles {
    pub p10: f64,
    pub p50: f64,
    pub p90: f64,
}

/// How a daily expected count was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastMethod {
    /// Compensator increment over the day using realized history
    /// (in-sample integration).
    Compensator,
    /// Mean simulated count using only history before the day starts
    /// (genuine out-of-sample forecast).
    MonteCarlo,
}

/// Expected event count for one day window.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DailyForecast {
    pub day_index: usize,
    pub expected_count: f64,
    pub method: ForecastMethod,
}

/// Exponential draw that is always strictly positive.
fn exp_draw(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.gen(); // [0, 1)
    -(1.0 - u).ln() / rate
}

struct Thinning {
    mu: f64,
    alpha: f64,
    beta: f64,
    /// Excitation sum at the current clock, including the jump of any
    /// event at exactly the current time.
    excitation: f64,
    clock: f64,
}

impl Thinning {
    fn new(params: &HawkesParams, history: &EventSeries, t_start: f64) -> Self {
        let mut excitation = 0.0;
        for &ti in history.times() {
            if ti <= t_start {
                excitation += (-params.beta() * (t_start - ti)).exp();
            }
        }
        Thinning {
            mu: params.mu(),
            alpha: params.alpha(),
            beta: params.beta(),
            excitation,
            clock: t_start,
        }
    }

    /// Advances to the next accepted event, or to `t_end` if none occurs
    /// before it (returning `None`). `iteration_cap` bounds the candidate
    /// draws.
    fn next_event(
        &mut self,
        rng: &mut ChaCha8Rng,
        t_end: f64,
        iteration_cap: usize,
    ) -> Result<Option<f64>, SimError> {
        for _ in 0..iteration_cap {
            let bound = self.mu + self.alpha * self.excitation;
            let candidate = self.clock + exp_draw(rng, bound);
            if candidate > t_end {
                return Ok(None);
            }
            if candidate <= self.clock {
                continue; // zero-length draw; re-sample
            }
            let decayed = self.excitation * (-self.beta * (candidate - self.clock)).exp();
            let lambda = self.mu + self.alpha * decayed;
            debug_assert!(
                lambda <= bound * (1.0 + 1e-12),
                "thinning bound violated: {lambda} > {bound}"
            );
            let accept = rng.gen::<f64>() * bound <= lambda;
            self.clock = candidate;
            self.excitation = decayed;
            if accept {
                self.excitation += 1.0;
                return Ok(Some(candidate));
            }
        }
        Err(SimError::Overflow {
            cap: iteration_cap,
        })
    }
}

/// Simulates events on `(t_start, t_end]` given `history` (all at or
/// before `t_start`), deterministic per seed. Uses the default event cap.
pub fn simulate(
    params: &HawkesParams,
    history: &EventSeries,
    t_start: f64,
    t_end: f64,
    seed: u64,
) -> Result<EventSeries, SimError> {
    simulate_with_cap(params, history, t_start, t_end, seed, DEFAULT_EVENT_CAP)
}

/// [`simulate`] with an explicit event cap (needed for supercritical
/// parameter sets, where the run can otherwise grow without bound).
pub fn simulate_with_cap(
    params: &HawkesParams,
    history: &EventSeries,
    t_start: f64,
    t_end: f64,
    seed: u64,
    event_cap: usize,
) -> Result<EventSeries, SimError> {
    if !(t_end > t_start) || t_start < 0.0 {
        return Err(SimError::Argument(format!(
            "need 0 <= t_start < t_end, got [{t_start}, {t_end}]"
        )));
    }
    if let Some(last) = history.last() {
        if t_start < last {
            return Err(SimError::Argument(format!(
                "t_start {t_start} precedes the last history event {last}"
            )));
        }
    }
    let mut rng = rng_for(seed, 0);
    let mut state = Thinning::new(params, history, t_start);
    let mut events = Vec::new();
    while let Some(t) = state.next_event(&mut rng, t_end, usize::MAX)? {
        events.push(t);
        if events.len() > event_cap {
            return Err(SimError::Overflow { cap: event_cap });
        }
    }
    Ok(EventSeries::new(events, t_end)?)
}

/// Iteration budget for a single next-event draw; the intensity never
/// falls below `mu`, so this is effectively unreachable.
const NEXT_EVENT_ITERATION_CAP: usize = 100_000_000;

/// Monte Carlo forecast of the waiting time from `now` to the next event.
///
/// Samples use per-index derived seeds (see [`crate::rngutil`]), so the
/// result is identical however the samples are scheduled.
pub fn forecast_next_event(
    params: &HawkesParams,
    history: &EventSeries,
    now: f64,
    n_samples: usize,
    seed: u64,
) -> Result<NextEventForecast, SimError> {
    if n_samples == 0 {
        return Err(SimError::Argument("n_samples must be at least 1".into()));
    }
    if let Some(last) = history.last() {
        if now < last {
            return Err(SimError::Argument(format!(
                "now {now} precedes the last history event {last}"
            )));
        }
    }
    use rayon::prelude::*;
    let samples: Result<Vec<f64>, SimError> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let mut state = Thinning::new(params, history, now);
            let event = state
                .next_event(&mut rng, f64::INFINITY, NEXT_EVENT_ITERATION_CAP)?
                .expect("unbounded window always yields an event");
            Ok(event - now)
        })
        .collect();
    let samples = samples?;

    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let quantiles = WaitingQuantiles {
        p10: stats::quantile_sorted(&sorted, 0.1),
        p50: stats::quantile_sorted(&sorted, 0.5),
        p90: stats::quantile_sorted(&sorted, 0.9),
    };
    Ok(NextEventForecast {
        mean: stats::mean(&samples),
        median: quantiles.p50,
        quantiles,
        samples,
    })
}

/// Expected event count over `(day_start, day_end]`.
///
/// Compensator mode integrates the intensity against realized history in
/// `series` (matching in-sample daily aggregation); Monte Carlo mode uses
/// only events before `day_start` and simulates forward. `day_index` is
/// the window's label in whole days from the series origin.
#[allow(clippy::too_many_arguments)]
pub fn forecast_daily(
    params: &HawkesParams,
    series: &EventSeries,
    day_start: f64,
    day_end: f64,
    method: ForecastMethod,
    n_samples: usize,
    seed: u64,
) -> Result<DailyForecast, SimError> {
    if !(day_end > day_start) {
        return Err(SimError::Argument(format!(
            "need day_start < day_end, got [{day_start}, {day_end}]"
        )));
    }
    let day_index = (day_start / 24.0).floor().max(0.0) as usize;
    let expected_count = match method {
        ForecastMethod::Compensator => {
            let hi = crate::hawkes::compensator(params, series, day_end)?;
            let lo = crate::hawkes::compensator(params, series, day_start)?;
            hi - lo
        }
        ForecastMethod::MonteCarlo => {
            if n_samples == 0 {
                return Err(SimError::Argument(
                    "monte_carlo mode needs n_samples >= 1".into(),
                ));
            }
            let history = series.before(day_start);
            use rayon::prelude::*;
            let counts: Result<Vec<f64>, SimError> = (0..n_samples)
                .into_par_iter()
                .map(|i| {
                    let run = simulate(
                        params,
                        &history,
                        day_start,
                        day_end,
                        crate::rngutil::derive_seed(seed, i as u64),
                    )?;
                    Ok(run.len() as f64)
                })
                .collect();
            stats::mean(&counts?)
        }
    };
    Ok(DailyForecast {
        day_index,
        expected_count,
        method,
    })
}

/// Daily forecasts for every whole `day_hours` window covering
/// `[0, horizon]` of `series`.
pub fn forecast_daily_series(
    params: &HawkesParams,
    series: &EventSeries,
    day_hours: f64,
    method: ForecastMethod,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<DailyForecast>, SimError> {
    if !(day_hours > 0.0) {
        return Err(SimError::Argument("day_hours must be positive".into()));
    }
    let n_days = (series.horizon() / day_hours).floor() as usize;
    let mut out = Vec::with_capacity(n_days);
    for d in 0..n_days {
        let start = d as f64 * day_hours;
        let end = start + day_hours;
        let mut f = forecast_daily(
            params,
            series,
            start,
            end,
            method,
            n_samples,
            crate::rngutil::derive_seed(seed, d as u64),
        )?;
        f.day_index = d;
        out.push(f);
    }
    Ok(out)
}

/// RMSE between forecast expected counts and observed daily totals,
/// counts/day.
pub fn score_daily_rmse(forecasts: &[DailyForecast], observed: &[f64]) -> Result<f64, SimError> {
    if forecasts.is_empty() || forecasts.len() != observed.len() {
        return Err(SimError::Argument(format!(
            "length mismatch: {} forecasts vs {} observations",
            forecasts.len(),
            observed.len()
        )));
    }
    let sum_sq: f64 = forecasts
        .iter()
        .zip(observed.iter())
        .map(|(f, &o)| (f.expected_count - o) * (f.expected_count - o))
        .sum();
    Ok((sum_sq / forecasts.len() as f64).sqrt())
}

/// Rolling next-event evaluation: at each event in the final
/// `eval_fraction` of the series, forecast the Monte Carlo mean waiting
/// time and score it against the realized gap to the following event.
#[derive(Debug, Clone, Serialize)]
pub struct NextEventEval {
    pub rmse_hours: f64,
    pub n_evaluated: usize,
}

pub fn evaluate_next_event_rmse(
    params: &HawkesParams,
    series: &EventSeries,
    eval_fraction: f64,
    n_samples: usize,
    seed: u64,
) -> Result<NextEventEval, SimError> {
    if !(0.0 < eval_fraction && eval_fraction < 1.0) {
        return Err(SimError::Argument(
            "eval_fraction must lie in (0, 1)".into(),
        ));
    }
    let times = series.times();
    if times.len() < 2 {
        return Err(SimError::Argument(
            "need at least 2 events to evaluate gaps".into(),
        ));
    }
    let first_eval = ((times.len() as f64) * (1.0 - eval_fraction)).floor() as usize;
    let first_eval = first_eval.min(times.len() - 2);
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for i in first_eval..times.len() - 1 {
        let now = times[i];
        let history = series.before(now + crate::data::TIE_JITTER_HOURS * 0.5);
        let forecast = forecast_next_event(
            params,
            &history,
            now,
            n_samples,
            crate::rngutil::derive_seed(seed, i as u64),
        )?;
        let realized = times[i + 1] - now;
        sum_sq += (forecast.mean - realized) * (forecast.mean - realized);
        count += 1;
    }
    Ok(NextEventEval {
        rmse_hours: (sum_sq / count as f64).sqrt(),
        n_evaluated: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty() -> EventSeries {
        EventSeries::new(vec![], 0.0).unwrap()
    }

    fn params(mu: f64, alpha: f64, beta: f64) -> HawkesParams {
        HawkesParams::new(mu, alpha, beta).unwrap()
    }

    #[test]
    fn same_seed_same_events() {
        let p = params(0.5, 1.0, 2.0);
        let a = simulate(&p, &empty(), 0.0, 200.0, 4).unwrap();
        let b = simulate(&p, &empty(), 0.0, 200.0, 4).unwrap();
        assert_eq!(a, b);
        let c = simulate(&p, &empty(), 0.0, 200.0, 5).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn events_lie_in_window_strictly_increasing() {
        let p = params(0.5, 1.0, 2.0);
        let s = simulate(&p, &empty(), 10.0, 50.0, 1).unwrap();
        assert!(s.len() > 0);
        assert!(s.times().iter().all(|&t| t > 10.0 && t <= 50.0));
        for w in s.times().windows(2) {
            assert!(w[1] > w[0]);
        }
        assert_eq!(s.horizon(), 50.0);
    }

    #[test]
    fn poisson_limit_rate_within_two_percent() {
        // alpha -> 0: homogeneous Poisson with rate mu.
        let p = params(2.0, 1e-12, 1.0);
        let s = simulate(&p, &empty(), 0.0, 60_000.0, 12).unwrap();
        let rate = s.len() as f64 / s.horizon();
        assert!((rate - 2.0).abs() / 2.0 < 0.02, "rate {rate}");
    }

    #[test]
    fn long_run_rate_matches_branching_identity() {
        // Stationary mean rate mu / (1 - n).
        let p = params(0.5, 1.0, 2.0); // n = 0.5 -> rate 1.0
        let s = simulate(&p, &empty(), 0.0, 10_000.0, 3).unwrap();
        let rate = s.len() as f64 / s.horizon();
        assert!((rate - 1.0).abs() < 0.05, "rate {rate}");
    }

    #[test]
    fn supercritical_needs_cap() {
        let p = params(5.0, 3.0, 1.0); // n = 3: explosive
        let result = simulate_with_cap(&p, &empty(), 0.0, 1000.0, 1, 10_000);
        assert!(matches!(result, Err(SimError::Overflow { cap: 10_000 })));
    }

    #[test]
    fn history_before_start_is_required() {
        let p = params(0.5, 1.0, 2.0);
        let history = EventSeries::new(vec![5.0], 5.0).unwrap();
        assert!(matches!(
            simulate(&p, &history, 4.0, 10.0, 1),
            Err(SimError::Argument(_))
        ));
        assert!(simulate(&p, &history, 5.0, 10.0, 1).is_ok());
    }

    #[test]
    fn next_event_poisson_limit_mean_waiting_time() {
        let p = params(0.8, 1e-12, 1.0);
        let f = forecast_next_event(&p, &empty(), 0.0, 100_000, 21).unwrap();
        let expected = 1.0 / 0.8;
        assert!(
            (f.mean - expected).abs() / expected < 0.03,
            "mean waiting {} vs {expected}",
            f.mean
        );
        assert!(f.samples.iter().all(|&w| w > 0.0));
        assert!(f.quantiles.p10 <= f.quantiles.p50 && f.quantiles.p50 <= f.quantiles.p90);
    }

    #[test]
    fn burst_shortens_expected_wait() {
        let p = params(0.5, 1.5, 2.0);
        let calm = forecast_next_event(&p, &empty(), 0.0, 20_000, 8).unwrap();
        let burst_history = EventSeries::new(vec![9.7, 9.8, 9.9, 10.0], 10.0).unwrap();
        let excited = forecast_next_event(&p, &burst_history, 10.0, 20_000, 8).unwrap();
        assert!(
            excited.mean < calm.mean,
            "burst mean {} vs calm mean {}",
            excited.mean,
            calm.mean
        );
        assert!(excited.mean < 1.0 / p.mu());
    }

    #[test]
    fn single_sample_reproducible() {
        let p = params(0.5, 1.0, 2.0);
        let a = forecast_next_event(&p, &empty(), 0.0, 1, 99).unwrap();
        let b = forecast_next_event(&p, &empty(), 0.0, 1, 99).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.mean, a.samples[0]);
    }

    #[test]
    fn daily_forecast_no_events_is_mu_times_window() {
        // Without self-excitation both modes reduce to the baseline rate
        // times the window length.
        let p = params(0.4, 1e-12, 2.0);
        let s = EventSeries::new(vec![], 240.0).unwrap();
        for method in [ForecastMethod::Compensator, ForecastMethod::MonteCarlo] {
            let f = forecast_daily(&p, &s, 24.0, 48.0, method, 4000, 5).unwrap();
            let expected = 0.4 * 24.0;
            let tol = if method == ForecastMethod::Compensator { 1e-9 } else { 0.5 };
            assert!(
                (f.expected_count - expected).abs() <= tol,
                "{method:?}: {} vs {expected}",
                f.expected_count
            );
            assert_eq!(f.day_index, 1);
        }
    }

    #[test]
    fn monte_carlo_agrees_with_compensator_on_average() {
        // In-sample compensator increments and genuine Monte Carlo
        // forecasts estimate the same daily expectation on stationary
        // data; their 100-day averages should be close.
        let p = params(0.5, 1.0, 2.0);
        let s = simulate(&p, &empty(), 0.0, 2400.0, 31).unwrap();
        let comp =
            forecast_daily_series(&p, &s, 24.0, ForecastMethod::Compensator, 0, 0).unwrap();
        let mc =
            forecast_daily_series(&p, &s, 24.0, ForecastMethod::MonteCarlo, 400, 77).unwrap();
        let comp_mean = stats::mean(&comp.iter().map(|d| d.expected_count).collect::<Vec<_>>());
        let mc_mean = stats::mean(&mc.iter().map(|d| d.expected_count).collect::<Vec<_>>());
        assert!(
            (comp_mean - mc_mean).abs() / comp_mean < 0.10,
            "compensator mean {comp_mean} vs monte carlo mean {mc_mean}"
        );
    }

    #[test]
    fn compensator_days_telescope_to_full_horizon() {
        let p = params(0.5, 1.0, 2.0);
        let s = simulate(&p, &empty(), 0.0, 240.0, 17).unwrap();
        let days =
            forecast_daily_series(&p, &s, 24.0, ForecastMethod::Compensator, 0, 0).unwrap();
        let total: f64 = days.iter().map(|d| d.expected_count).sum();
        let lambda_total = crate::hawkes::compensator(&p, &s, 240.0).unwrap();
        assert!((total - lambda_total).abs() < 1e-9 * lambda_total.max(1.0));
    }

    #[test]
    fn monte_carlo_mode_rejects_zero_samples() {
        let p = params(0.5, 1.0, 2.0);
        let s = EventSeries::new(vec![], 48.0).unwrap();
        assert!(matches!(
            forecast_daily(&p, &s, 0.0, 24.0, ForecastMethod::MonteCarlo, 0, 1),
            Err(SimError::Argument(_))
        ));
    }

    #[test]
    fn rmse_scoring() {
        let f = |e: f64| DailyForecast {
            day_index: 0,
            expected_count: e,
            method: ForecastMethod::Compensator,
        };
        let exact = score_daily_rmse(&[f(3.0), f(4.0)], &[3.0, 4.0]).unwrap();
        assert_eq!(exact, 0.0);
        let off = score_daily_rmse(&[f(1.0), f(2.0)], &[2.0, 4.0]).unwrap();
        assert!((off - 2.5_f64.sqrt()).abs() < 1e-12);
        assert!(score_daily_rmse(&[f(1.0)], &[1.0, 2.0]).is_err());
        assert!(score_daily_rmse(&[], &[]).is_err());
    }

    #[test]
    fn rolling_next_event_eval_runs() {
        let p = params(0.5, 1.0, 2.0);
        let s = simulate(&p, &empty(), 0.0, 120.0, 2).unwrap();
        let eval = evaluate_next_event_rmse(&p, &s, 0.2, 200, 7).unwrap();
        assert!(eval.n_evaluated >= 1);
        assert!(eval.rmse_hours.is_finite() && eval.rmse_hours > 0.0);
    }
}
