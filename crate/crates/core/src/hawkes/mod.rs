//! Exponential-kernel self-exciting point process.
//!
//! Conditional intensity given the event history `{T_i}`:
//!
//! ```text
//! lambda(t) = mu + sum_{T_i < t} alpha * exp(-beta (t - T_i))
//! ```
//!
//! with baseline rate `mu > 0`, post-event jump `alpha > 0`, and decay
//! rate `beta > 0`. Two derived summaries: the branching ratio
//! `n = alpha / beta` (expected direct offspring per event; `n < 1` is
//! subcritical) and the half-life `ln 2 / beta` (time for the boost to
//! halve).
//!
//! For this kernel both the event-time intensities and the compensator
//! `Lambda(t) = integral_0^t lambda(s) ds` admit O(N) recursions, so the
//! log-likelihood
//!
//! ```text
//! l = sum_i log lambda(T_i) - Lambda(T)
//! ```
//!
//! and its analytic gradient evaluate in a single pass over the series.

mod fit;

pub use fit::{fit_mle, FitOptions, FitResult};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::EventSeries;

/// Errors from intensity/likelihood evaluation and fitting.
#[derive(Debug, Error)]
pub enum HawkesError {
    #[error("parameters must be strictly positive and finite: mu={mu}, alpha={alpha}, beta={beta}")]
    InvalidParams { mu: f64, alpha: f64, beta: f64 },
    #[error("time {t} outside the observation window [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },
    #[error("{0}")]
    Argument(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("need at least {needed} events to fit, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("all {restarts} restarts diverged; best-effort parameters attached")]
    NonConvergence {
        restarts: usize,
        best_effort: Box<FitResult>,
    },
}

/// Parameters of the exponential-kernel process. All strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HawkesParams {
    mu: f64,
    alpha: f64,
    beta: f64,
}

impl HawkesParams {
    pub fn new(mu: f64, alpha: f64, beta: f64) -> Result<Self, HawkesError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(mu) && ok(alpha) && ok(beta)) {
            return Err(HawkesError::InvalidParams { mu, alpha, beta });
        }
        Ok(HawkesParams { mu, alpha, beta })
    }

    /// Baseline (background) rate, events/hour.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Intensity jump immediately after an event.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Exponential decay rate of the excitation, 1/hour.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Expected number of directly triggered events per event.
    pub fn branching_ratio(&self) -> f64 {
        self.alpha / self.beta
    }

    /// Time for the post-event boost to halve, hours.
    pub fn half_life(&self) -> f64 {
        std::f64::consts::LN_2 / self.beta
    }

    /// True when the process is subcritical (branching ratio < 1).
    pub fn is_stable(&self) -> bool {
        self.branching_ratio() < 1.0
    }
}

/// Branching ratio `alpha / beta`.
pub fn branching_ratio(params: &HawkesParams) -> f64 {
    params.branching_ratio()
}

/// Excitation half-life `ln 2 / beta`, hours.
pub fn half_life(params: &HawkesParams) -> f64 {
    params.half_life()
}

fn check_range(t: f64, series: &EventSeries) -> Result<(), HawkesError> {
    if !t.is_finite() || t < 0.0 || t > series.horizon() {
        return Err(HawkesError::OutOfRange {
            t,
            horizon: series.horizon(),
        });
    }
    Ok(())
}

/// Conditional intensity at `t`, with history truncated beyond
/// `truncation_half_lives` half-lives (pass `f64::INFINITY` for the full
/// sum). Events at exactly `t` do not contribute (left limit).
pub fn intensity(
    params: &HawkesParams,
    series: &EventSeries,
    t: f64,
    truncation_half_lives: f64,
) -> Result<f64, HawkesError> {
    check_range(t, series)?;
    if !(truncation_half_lives > 0.0) {
        return Err(HawkesError::Argument(format!(
            "truncation_half_lives must be positive, got {truncation_half_lives}"
        )));
    }
    let cutoff = truncation_half_lives * params.half_life();
    let times = series.times();
    let upto = times.partition_point(|&x| x < t);
    let from = if cutoff.is_finite() {
        times[..upto].partition_point(|&x| t - x > cutoff)
    } else {
        0
    };
    let mut excitation = 0.0;
    for &ti in &times[from..upto] {
        excitation += (-params.beta * (t - ti)).exp();
    }
    Ok(params.mu + params.alpha * excitation)
}

/// Running excitation state `A_i = sum_{j<i} exp(-beta (T_i - T_j))` for
/// every event, via the one-pass recursion
/// `A_1 = 0, A_i = exp(-beta dt_i) (1 + A_{i-1})`.
fn excitation_at_events(beta: f64, times: &[f64]) -> Vec<f64> {
    let mut a = Vec::with_capacity(times.len());
    let mut prev = 0.0;
    for (i, &t) in times.iter().enumerate() {
        let ai = if i == 0 {
            0.0
        } else {
            (-beta * (t - times[i - 1])).exp() * (1.0 + prev)
        };
        a.push(ai);
        prev = ai;
    }
    a
}

/// Intensities `lambda(T_i)` at every event time, O(N).
pub fn intensities_at_events(params: &HawkesParams, series: &EventSeries) -> Vec<f64> {
    excitation_at_events(params.beta, series.times())
        .into_iter()
        .map(|a| params.mu + params.alpha * a)
        .collect()
}

/// Compensator `Lambda(t) = mu t + (alpha/beta) sum_{T_i < t} (1 - exp(-beta (t - T_i)))`.
///
/// Closed form, never truncated; monotone non-decreasing with
/// `Lambda(0) = 0`.
pub fn compensator(params: &HawkesParams, series: &EventSeries, t: f64) -> Result<f64, HawkesError> {
    check_range(t, series)?;
    let upto = series.times().partition_point(|&x| x < t);
    let mut kernel_mass = 0.0;
    for &ti in &series.times()[..upto] {
        kernel_mass += 1.0 - (-params.beta * (t - ti)).exp();
    }
    Ok(params.mu * t + params.branching_ratio() * kernel_mass)
}

/// Log-likelihood `l = sum_i log lambda(T_i) - Lambda(T)` over the full
/// observation window, O(N).
pub fn log_likelihood(params: &HawkesParams, series: &EventSeries) -> Result<f64, HawkesError> {
    let times = series.times();
    let horizon = series.horizon();
    let ratio = params.branching_ratio();

    let mut log_sum = 0.0;
    let mut prev_a = 0.0;
    let mut tail = 0.0; // sum_i (1 - exp(-beta (T - T_i)))
    for (i, &t) in times.iter().enumerate() {
        let a = if i == 0 {
            0.0
        } else {
            (-params.beta * (t - times[i - 1])).exp() * (1.0 + prev_a)
        };
        log_sum += (params.mu + params.alpha * a).ln();
        tail += 1.0 - (-params.beta * (horizon - t)).exp();
        prev_a = a;
    }
    let ll = log_sum - params.mu * horizon - ratio * tail;
    if ll.is_nan() {
        return Err(HawkesError::Numeric(
            "log-likelihood evaluated to NaN".to_string(),
        ));
    }
    Ok(ll)
}

/// Analytic gradient `(dl/dmu, dl/dalpha, dl/dbeta)`.
///
/// Extends the intensity recursion with
/// `B_i = sum_{j<i} (T_i - T_j) exp(-beta (T_i - T_j))`, which satisfies
/// `B_i = exp(-beta dt_i) (dt_i (1 + A_{i-1}) + B_{i-1})`.
pub fn log_likelihood_grad(
    params: &HawkesParams,
    series: &EventSeries,
) -> Result<[f64; 3], HawkesError> {
    let times = series.times();
    let horizon = series.horizon();
    let (mu, alpha, beta) = (params.mu, params.alpha, params.beta);

    let mut inv_sum = 0.0; // sum_i 1 / lambda_i
    let mut a_over_lambda = 0.0; // sum_i A_i / lambda_i
    let mut b_over_lambda = 0.0; // sum_i B_i / lambda_i
    let mut tail0 = 0.0; // sum_i (1 - exp(-beta (T - T_i)))
    let mut tail1 = 0.0; // sum_i (T - T_i) exp(-beta (T - T_i))
    let mut prev_a = 0.0;
    let mut prev_b = 0.0;
    for (i, &t) in times.iter().enumerate() {
        let (a, b) = if i == 0 {
            (0.0, 0.0)
        } else {
            let dt = t - times[i - 1];
            let decay = (-beta * dt).exp();
            (decay * (1.0 + prev_a), decay * (dt * (1.0 + prev_a) + prev_b))
        };
        let lambda = mu + alpha * a;
        inv_sum += 1.0 / lambda;
        a_over_lambda += a / lambda;
        b_over_lambda += b / lambda;
        let gap = horizon - t;
        let decay_tail = (-beta * gap).exp();
        tail0 += 1.0 - decay_tail;
        tail1 += gap * decay_tail;
        prev_a = a;
        prev_b = b;
    }

    let d_mu = inv_sum - horizon;
    let d_alpha = a_over_lambda - tail0 / beta;
    let d_beta = -alpha * b_over_lambda + alpha / (beta * beta) * tail0 - alpha / beta * tail1;
    let grad = [d_mu, d_alpha, d_beta];
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(HawkesError::Numeric(format!(
            "gradient overflowed: {grad:?}"
        )));
    }
    Ok(grad)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngutil::rng_for;
    use approx::assert_relative_eq;
    use rand::Rng;

    pub(crate) fn random_series(seed: u64, n: usize, horizon: f64) -> EventSeries {
        let mut rng = rng_for(seed, 0);
        let mut times: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * horizon).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        EventSeries::new(times, horizon).unwrap()
    }

    fn table_params() -> HawkesParams {
        HawkesParams::new(0.438, 1.884, 2.087).unwrap()
    }

    #[test]
    fn params_validate_positivity() {
        assert!(HawkesParams::new(0.0, 1.0, 1.0).is_err());
        assert!(HawkesParams::new(1.0, -1.0, 1.0).is_err());
        assert!(HawkesParams::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn summaries_match_reported_fit() {
        let p = table_params();
        assert_relative_eq!(p.branching_ratio(), 0.90, max_relative = 5e-3);
        assert_relative_eq!(p.half_life(), 0.332, max_relative = 5e-3);
        let critical = HawkesParams::new(1.0, 2.0, 2.0).unwrap();
        assert_eq!(critical.branching_ratio(), 1.0);
        assert!(!critical.is_stable());
    }

    #[test]
    fn intensity_with_no_events_is_baseline() {
        let p = table_params();
        let s = EventSeries::new(vec![], 10.0).unwrap();
        assert_eq!(intensity(&p, &s, 4.0, f64::INFINITY).unwrap(), p.mu());
    }

    #[test]
    fn intensity_just_after_single_event() {
        let p = HawkesParams::new(0.5, 2.0, 1.0).unwrap();
        let s = EventSeries::new(vec![0.0], 10.0).unwrap();
        let just_after = intensity(&p, &s, 1e-12, f64::INFINITY).unwrap();
        assert_relative_eq!(just_after, 2.5, max_relative = 1e-9);
    }

    #[test]
    fn intensity_matches_brute_sum() {
        let p = table_params();
        let s = EventSeries::new(vec![1.0, 2.0], 5.0).unwrap();
        let got = intensity(&p, &s, 3.0, f64::INFINITY).unwrap();
        let want = oracle::intensity_brute(&p, s.times(), 3.0);
        assert_relative_eq!(got, want, max_relative = 1e-12);
        assert!(got >= p.mu());
    }

    #[test]
    fn intensity_range_errors() {
        let p = table_params();
        let s = EventSeries::new(vec![1.0], 5.0).unwrap();
        assert!(matches!(
            intensity(&p, &s, -0.1, f64::INFINITY),
            Err(HawkesError::OutOfRange { .. })
        ));
        assert!(matches!(
            intensity(&p, &s, 5.1, f64::INFINITY),
            Err(HawkesError::OutOfRange { .. })
        ));
        assert!(matches!(
            intensity(&p, &s, 1.0, 0.0),
            Err(HawkesError::Argument(_))
        ));
    }

    #[test]
    fn truncation_error_is_bounded() {
        // 20 half-lives leave at most 2^-20 of each kernel's mass.
        let p = HawkesParams::new(0.4, 1.0, 2.0).unwrap();
        let s = random_series(5, 400, 100.0);
        for t in [10.0, 50.0, 99.5] {
            let full = intensity(&p, &s, t, f64::INFINITY).unwrap();
            let truncated = intensity(&p, &s, t, 20.0).unwrap();
            assert!((full - truncated).abs() <= 1e-4, "t={t}: {full} vs {truncated}");
            assert!(truncated <= full);
        }
    }

    #[test]
    fn event_intensities_single_event_and_half_life() {
        let p = HawkesParams::new(0.7, 1.3, 1.3).unwrap();
        let one = EventSeries::new(vec![2.0], 5.0).unwrap();
        assert_eq!(intensities_at_events(&p, &one), vec![0.7]);

        // alpha == beta, second event exactly one half-life later.
        let two = EventSeries::new(vec![0.0, p.half_life()], 5.0).unwrap();
        let lambdas = intensities_at_events(&p, &two);
        assert_relative_eq!(lambdas[1], 0.7 + 1.3 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn event_intensities_match_brute_force() {
        let p = HawkesParams::new(0.9, 1.4, 2.3).unwrap();
        let s = random_series(11, 200, 300.0);
        let fast = intensities_at_events(&p, &s);
        let slow = oracle::intensities_brute(&p, &s);
        for (f, b) in fast.iter().zip(slow.iter()) {
            assert_relative_eq!(f, b, max_relative = 1e-9);
        }
    }

    #[test]
    fn compensator_empty_and_kernel_mass() {
        let p = HawkesParams::new(0.5, 1.0, 2.0).unwrap();
        let empty = EventSeries::new(vec![], 100.0).unwrap();
        assert_relative_eq!(compensator(&p, &empty, 40.0).unwrap(), 20.0);

        // Long after one event the kernel contributes its full mass alpha/beta.
        let one = EventSeries::new(vec![0.0], 1e4).unwrap();
        let got = compensator(&p, &one, 1e4).unwrap();
        assert_relative_eq!(got, 0.5 * 1e4 + 0.5, max_relative = 1e-12);
    }

    #[test]
    fn compensator_matches_quadrature() {
        let p = HawkesParams::new(0.6, 1.1, 1.9).unwrap();
        let s = random_series(17, 200, 250.0);
        let got = compensator(&p, &s, s.horizon()).unwrap();
        let want = oracle::compensator_quadrature(&p, &s, s.horizon());
        assert_relative_eq!(got, want, max_relative = 1e-6);
    }

    #[test]
    fn compensator_monotone_and_zero_at_origin() {
        let p = table_params();
        let s = random_series(23, 50, 60.0);
        assert_eq!(compensator(&p, &s, 0.0).unwrap(), 0.0);
        let mut prev = 0.0;
        for k in 1..=60 {
            let t = k as f64;
            let v = compensator(&p, &s, t).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn likelihood_empty_and_single_event_closed_forms() {
        let p = HawkesParams::new(0.5, 1.0, 2.0).unwrap();
        let empty = EventSeries::new(vec![], 80.0).unwrap();
        assert_relative_eq!(log_likelihood(&p, &empty).unwrap(), -0.5 * 80.0);

        let t1 = 30.0;
        let horizon = 80.0;
        let one = EventSeries::new(vec![t1], horizon).unwrap();
        let expected = 0.5_f64.ln()
            - 0.5 * horizon
            - 0.5 * (1.0 - (-2.0 * (horizon - t1)).exp());
        assert_relative_eq!(log_likelihood(&p, &one).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn likelihood_matches_brute_force() {
        let p = HawkesParams::new(0.8, 0.9, 1.7).unwrap();
        let s = random_series(29, 500, 700.0);
        let fast = log_likelihood(&p, &s).unwrap();
        let slow = oracle::log_likelihood_brute(&p, &s);
        assert_relative_eq!(fast, slow, max_relative = 1e-9);
    }

    #[test]
    fn gradient_empty_series_closed_form() {
        let p = HawkesParams::new(0.5, 1.0, 2.0).unwrap();
        let empty = EventSeries::new(vec![], 42.0).unwrap();
        let g = log_likelihood_grad(&p, &empty).unwrap();
        assert_eq!(g, [-42.0, 0.0, 0.0]);
    }

    pub(crate) fn finite_difference_grad(params: &HawkesParams, series: &EventSeries) -> [f64; 3] {
        let eval = |mu: f64, alpha: f64, beta: f64| {
            log_likelihood(&HawkesParams::new(mu, alpha, beta).unwrap(), series).unwrap()
        };
        let (mu, alpha, beta) = (params.mu(), params.alpha(), params.beta());
        let h = 1e-5;
        let (hm, ha, hb) = (h * mu, h * alpha, h * beta);
        [
            (eval(mu + hm, alpha, beta) - eval(mu - hm, alpha, beta)) / (2.0 * hm),
            (eval(mu, alpha + ha, beta) - eval(mu, alpha - ha, beta)) / (2.0 * ha),
            (eval(mu, alpha, beta + hb) - eval(mu, alpha, beta - hb)) / (2.0 * hb),
        ]
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rng_for(31, 0);
        for trial in 0..20 {
            let p = HawkesParams::new(
                rng.gen_range(0.1..2.0),
                rng.gen_range(0.1..2.0),
                rng.gen_range(0.5..4.0),
            )
            .unwrap();
            let s = random_series(100 + trial, 120, 150.0);
            let analytic = log_likelihood_grad(&p, &s).unwrap();
            let numeric = finite_difference_grad(&p, &s);
            for (a, n) in analytic.iter().zip(numeric.iter()) {
                let scale = n.abs().max(1e-6);
                assert!(
                    (a - n).abs() / scale < 1e-4,
                    "trial {trial}: analytic {analytic:?} vs numeric {numeric:?}"
                );
            }
        }
    }
}
