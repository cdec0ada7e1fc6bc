//! Shared oracles for the integration suites: direct O(N^2) summations
//! and adaptive quadrature, written independently of the library's
//! recursive implementations.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use transitcast::data::EventSeries;
use transitcast::hawkes::HawkesParams;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Direct intensity sum over the full history.
pub fn intensity_brute(params: &HawkesParams, times: &[f64], t: f64) -> f64 {
    let mut lambda = params.mu();
    for &ti in times {
        if ti < t {
            lambda += params.alpha() * (-params.beta() * (t - ti)).exp();
        }
    }
    lambda
}

pub fn intensities_brute(params: &HawkesParams, series: &EventSeries) -> Vec<f64> {
    series
        .times()
        .iter()
        .map(|&t| intensity_brute(params, series.times(), t))
        .collect()
}

/// Direct log-likelihood: brute intensities plus the closed-form integral.
pub fn log_likelihood_brute(params: &HawkesParams, series: &EventSeries) -> f64 {
    let log_sum: f64 = intensities_brute(params, series)
        .iter()
        .map(|l| l.ln())
        .sum();
    let horizon = series.horizon();
    let mut integral = params.mu() * horizon;
    for &ti in series.times() {
        integral +=
            params.alpha() / params.beta() * (1.0 - (-params.beta() * (horizon - ti)).exp());
    }
    log_sum - integral
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = simpson(f, a, m);
    let right = simpson(f, m, b);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        adaptive(f, a, m, left, 0.5 * tol, depth - 1)
            + adaptive(f, m, b, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature of the brute-force intensity over [0, t],
/// segmented at event times where the integrand has kinks.
pub fn compensator_quadrature(params: &HawkesParams, series: &EventSeries, t: f64) -> f64 {
    let times = series.times();
    let f = |s: f64| intensity_brute(params, times, s);
    let mut boundaries = vec![0.0];
    boundaries.extend(times.iter().copied().filter(|&ti| ti < t));
    boundaries.push(t);
    let mut total = 0.0;
    for pair in boundaries.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b > a {
            total += adaptive(&f, a, b, simpson(&f, a, b), 1e-12, 40);
        }
    }
    total
}

/// Uniformly scattered strictly-increasing event times on [0, horizon].
pub fn random_series(seed: u64, max_events: usize, horizon: f64) -> EventSeries {
    let mut r = rng(seed);
    let n = r.gen_range(3..=max_events);
    let mut times: Vec<f64> = (0..n).map(|_| r.gen::<f64>() * horizon).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    EventSeries::new(times, horizon).unwrap()
}

/// Random subcritical parameters in a realistic range.
pub fn random_params(seed: u64) -> HawkesParams {
    let mut r = rng(seed);
    let mu = r.gen_range(0.05..2.0);
    let beta = r.gen_range(0.2..5.0);
    let branching = r.gen_range(0.05..0.95);
    HawkesParams::new(mu, branching * beta, beta).unwrap()
}

/// Central finite differences of the log-likelihood, h = 1e-5 relative.
pub fn finite_difference_grad(params: &HawkesParams, series: &EventSeries) -> [f64; 3] {
    let eval = |mu: f64, alpha: f64, beta: f64| {
        transitcast::hawkes::log_likelihood(&HawkesParams::new(mu, alpha, beta).unwrap(), series)
            .unwrap()
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
