//! Goodness-of-fit diagnostics and descriptive statistics.
//!
//! Under the true model, compensator increments between consecutive
//! events are i.i.d. Exp(1) (the time-rescaling theorem), so the
//! rescaled gaps can be tested against Exp(1) with a Kolmogorov-Smirnov
//! statistic. Cumulative calibration compares the observed count `N(t)`
//! with the expected `Lambda(t)` on a grid. Descriptive helpers cover
//! Rice's-rule histogram binning and a location-shifted (3-parameter)
//! gamma fit for daily-aggregate distributions.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};
use thiserror::Error;

use crate::data::EventSeries;
use crate::hawkes::{compensator, HawkesError, HawkesParams};

#[derive(Debug, Error)]
pub enum DiagError {
    #[error("{0}")]
    Argument(String),
    #[error("gamma fit failed: {0}")]
    GammaFit(String),
    #[error(transparent)]
    Hawkes(#[from] HawkesError),
}

/// Rescaled inter-event gaps `u_i = Lambda(T_{i+1}) - Lambda(T_i)`;
/// length N-1 for an N-event series, all strictly positive.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RescaledIntervals {
    pub u: Vec<f64>,
}

/// One-sample KS test outcome against Exp(1).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KsResult {
    pub d_statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Location-shifted gamma fit: density of `shape`/`scale` gamma on
/// `x - location`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GammaFit {
    pub shape: f64,
    pub scale: f64,
    pub location: f64,
    pub log_likelihood: f64,
}

/// One point of the cumulative calibration curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CalibrationPoint {
    pub t: f64,
    pub observed: usize,
    pub expected: f64,
}

/// Compensator increments between consecutive events, via the one-pass
/// closed form `u_i = mu dt + (alpha/beta) (A_i + 1)(1 - exp(-beta dt))`.
pub fn time_rescale(
    params: &HawkesParams,
    series: &EventSeries,
) -> Result<RescaledIntervals, DiagError> {
    let times = series.times();
    if times.len() < 2 {
        return Err(DiagError::Argument(format!(
            "time-rescaling needs at least 2 events, got {}",
            times.len()
        )));
    }
    let (mu, ratio, beta) = (params.mu(), params.branching_ratio(), params.beta());
    let mut u = Vec::with_capacity(times.len() - 1);
    let mut a = 0.0; // excitation sum at the current event
    for i in 0..times.len() - 1 {
        if i > 0 {
            a = (1.0 + a) * (-beta * (times[i] - times[i - 1])).exp();
        }
        let dt = times[i + 1] - times[i];
        u.push(mu * dt + ratio * (a + 1.0) * (1.0 - (-beta * dt).exp()));
    }
    Ok(RescaledIntervals { u })
}

/// Survival function of the Kolmogorov distribution,
/// `2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`, truncated when terms drop
/// below 1e-10.
fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100_000u64 {
        let term = 2.0 * (-2.0 * (k * k) as f64 * x * x).exp();
        sum += sign * term;
        if term < 1e-10 {
            break;
        }
        sign = -sign;
    }
    sum.clamp(0.0, 1.0)
}

/// One-sample KS test of the rescaled intervals against Exp(1), with the
/// asymptotic p-value `K(sqrt(n) D)`. The approximation is meaningful
/// from roughly n >= 8.
pub fn ks_exp1(intervals: &RescaledIntervals) -> Result<KsResult, DiagError> {
    let n = intervals.u.len();
    if n == 0 {
        return Err(DiagError::Argument("empty rescaled-interval sample".into()));
    }
    let mut sorted = intervals.u.clone();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = 1.0 - (-x).exp();
        let upper = (i + 1) as f64 / nf - cdf;
        let lower = cdf - i as f64 / nf;
        d = d.max(upper).max(lower);
    }
    Ok(KsResult {
        d_statistic: d,
        p_value: kolmogorov_survival(nf.sqrt() * d),
        n,
    })
}

/// Observed count vs expected cumulative intensity on a uniform grid over
/// `[0, horizon]`.
pub fn cumulative_calibration(
    params: &HawkesParams,
    series: &EventSeries,
    n_grid: usize,
) -> Result<Vec<CalibrationPoint>, DiagError> {
    if n_grid < 2 {
        return Err(DiagError::Argument(format!(
            "calibration grid needs at least 2 points, got {n_grid}"
        )));
    }
    let horizon = series.horizon();
    let mut out = Vec::with_capacity(n_grid);
    for k in 0..n_grid {
        let t = horizon * k as f64 / (n_grid - 1) as f64;
        out.push(CalibrationPoint {
            t,
            observed: series.count_at(t),
            expected: compensator(params, series, t)?,
        });
    }
    Ok(out)
}

/// Rice's rule bin count: the smallest integer `k` with `k^3 >= 8 n`,
/// i.e. `ceil(2 n^(1/3))` evaluated exactly in integer arithmetic.
pub fn rice_bins(n: usize) -> usize {
    if n == 0 {
        return 1;
    }
    let target = 8u128 * n as u128;
    let mut k = (2.0 * (n as f64).cbrt()).round() as u128;
    k = k.max(1);
    while k * k * k >= target && (k - 1) * (k - 1) * (k - 1) >= target && k > 1 {
        k -= 1;
    }
    while k * k * k < target {
        k += 1;
    }
    k as usize
}

/// One histogram bin: `[left, right)` except the final bin, which is
/// right-inclusive.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

/// Equal-width histogram over `[min, max]`. A constant sample collapses
/// to a single bin of nominal width 1 centered on the value.
pub fn histogram(samples: &[f64], n_bins: usize) -> Result<Vec<HistogramBin>, DiagError> {
    if samples.is_empty() {
        return Err(DiagError::Argument("histogram of empty sample".into()));
    }
    if n_bins == 0 {
        return Err(DiagError::Argument("histogram needs at least 1 bin".into()));
    }
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok(vec![HistogramBin {
            left: min - 0.5,
            right: min + 0.5,
            count: samples.len(),
        }]);
    }
    let width = (max - min) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &x in samples {
        let idx = (((x - min) / width) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            left: min + i as f64 * width,
            right: if i + 1 == n_bins { max } else { min + (i + 1) as f64 * width },
            count,
        })
        .collect())
}

/// Shape solving `ln k - digamma(k) = s` (the profile-likelihood score
/// equation); unique for `s > 0` since the left side is strictly
/// decreasing. Bisection on `ln k`.
fn solve_shape(s: f64) -> f64 {
    debug_assert!(s > 0.0);
    let f = |k: f64| k.ln() - digamma(k) - s;
    let (mut lo, mut hi) = (1e-8_f64, 1e8_f64);
    // f(lo) > 0 > f(hi) for any positive s.
    for _ in 0..200 {
        let mid = (lo.ln() + hi.ln()).mul_add(0.5, 0.0).exp();
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-13 {
            break;
        }
    }
    (lo * hi).sqrt()
}

/// Profile log-likelihood of the best 2-parameter gamma for a fixed
/// location, together with its (shape, scale).
fn profile_gamma(samples: &[f64], location: f64) -> Option<(f64, f64, f64)> {
    let n = samples.len() as f64;
    let mut sum = 0.0;
    let mut log_sum = 0.0;
    for &x in samples {
        let y = x - location;
        if y <= 0.0 {
            return None;
        }
        sum += y;
        log_sum += y.ln();
    }
    let mean = sum / n;
    let mean_log = log_sum / n;
    let s = mean.ln() - mean_log;
    if !(s > 0.0) || !s.is_finite() {
        return None;
    }
    let shape = solve_shape(s);
    let scale = mean / shape;
    let ll =
        (shape - 1.0) * log_sum - n * shape - n * shape * scale.ln() - n * ln_gamma(shape);
    ll.is_finite().then_some((ll, shape, scale))
}

/// Number of candidate locations profiled before golden-section
/// refinement.
const LOCATION_GRID: usize = 50;

/// Fits a 3-parameter gamma by profiling the location: the (shape, scale)
/// likelihood is maximized in closed form on a location grid spanning
/// `[min - 3 sd, min - 1e-6]`, then the location is refined by
/// golden-section around the best grid cell. Profiling sidesteps the
/// likelihood singularity as the location approaches the sample minimum.
pub fn fit_gamma3(samples: &[f64]) -> Result<GammaFit, DiagError> {
    if samples.len() < 20 {
        return Err(DiagError::Argument(format!(
            "gamma fit needs at least 20 samples, got {}",
            samples.len()
        )));
    }
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let sd = crate::stats::population_variance(samples).sqrt();
    if !(sd > 0.0) {
        return Err(DiagError::GammaFit("sample variance is zero".into()));
    }

    let hi = min - 1e-6;
    let lo = min - 3.0 * sd;
    let step = (hi - lo) / (LOCATION_GRID - 1) as f64;
    let mut best: Option<(f64, f64)> = None; // (ll, location)
    for i in 0..LOCATION_GRID {
        let loc = lo + i as f64 * step;
        if let Some((ll, _, _)) = profile_gamma(samples, loc) {
            if best.map_or(true, |(b, _)| ll > b) {
                best = Some((ll, loc));
            }
        }
    }
    let (_, grid_loc) = best.ok_or_else(|| {
        DiagError::GammaFit("no admissible location on the profiling grid".into())
    })?;

    // Golden-section on the bracket around the best grid point.
    let mut a = (grid_loc - step).max(lo);
    let mut b = (grid_loc + step).min(hi);
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let ll_at = |loc: f64| profile_gamma(samples, loc).map(|(ll, _, _)| ll);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = ll_at(c);
    let mut fd = ll_at(d);
    for _ in 0..100 {
        if b - a < 1e-10 * sd.max(1.0) {
            break;
        }
        // Treat inadmissible points as -inf.
        let vc = fc.unwrap_or(f64::NEG_INFINITY);
        let vd = fd.unwrap_or(f64::NEG_INFINITY);
        if vc > vd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = ll_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = ll_at(d);
        }
    }
    let location = 0.5 * (a + b);
    let (ll, shape, scale) = profile_gamma(samples, location)
        .ok_or_else(|| DiagError::GammaFit("refined location became inadmissible".into()))?;
    Ok(GammaFit {
        shape,
        scale,
        location,
        log_likelihood: ll,
    })
}
