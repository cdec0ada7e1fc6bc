//! Scratch diagnostics runner (not part of the deliverable surface).

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use transitcast::data::EventSeries;
use transitcast::hawkes::{compensator, fit_mle, log_likelihood, FitOptions, HawkesParams};
use transitcast::sim::simulate;

fn intensity_brute(params: &HawkesParams, times: &[f64], t: f64) -> f64 {
    let mut lambda = params.mu();
    for &ti in times {
        if ti < t {
            lambda += params.alpha() * (-params.beta() * (t - ti)).exp();
        }
    }
    lambda
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

fn compensator_quadrature(params: &HawkesParams, series: &EventSeries, t: f64) -> f64 {
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

fn random_series(seed: u64, max_events: usize, horizon: f64) -> EventSeries {
    let mut r = ChaCha8Rng::seed_from_u64(transitcast::rngutil::derive_seed(seed, 0));
    let n = r.gen_range(3..=max_events);
    let mut times: Vec<f64> = (0..n).map(|_| r.gen::<f64>() * horizon).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    EventSeries::new(times, horizon).unwrap()
}

fn random_params(seed: u64) -> HawkesParams {
    let mut r = ChaCha8Rng::seed_from_u64(transitcast::rngutil::derive_seed(seed, 0));
    let mu = r.gen_range(0.05..2.0);
    let beta = r.gen_range(0.2..5.0);
    let branching = r.gen_range(0.05..0.95);
    HawkesParams::new(mu, branching * beta, beta).unwrap()
}

fn probe_compensator() {
    println!("== compensator vs quadrature ==");
    let mut worst: Vec<(f64, u64)> = Vec::new();
    for trial in 0..100u64 {
        let params = random_params(1000 + trial);
        let series = random_series(2000 + trial, 500, 50.0 + (trial as f64) * 3.0);
        let fast = compensator(&params, &series, series.horizon()).unwrap();
        let quad = compensator_quadrature(&params, &series, series.horizon());
        let rel = (fast - quad).abs() / quad.abs();
        worst.push((rel, trial));
    }
    worst.sort_by(|a, b| b.0.total_cmp(&a.0));
    for &(rel, trial) in worst.iter().take(5) {
        let params = random_params(1000 + trial);
        let series = random_series(2000 + trial, 500, 50.0 + (trial as f64) * 3.0);
        println!(
            "trial {trial}: rel {rel:.3e}  n={} horizon={:.1} mu={:.3} alpha={:.3} beta={:.3}",
            series.len(),
            series.horizon(),
            params.mu(),
            params.alpha(),
            params.beta()
        );
    }
}

fn probe_fit() {
    println!("== simulate-then-fit per seed ==");
    let truth = HawkesParams::new(0.5, 1.0, 2.0).unwrap();
    let empty = EventSeries::new(vec![], 0.0).unwrap();
    for seed in 0..20u64 {
        let series = simulate(&truth, &empty, 0.0, 5000.0, 900 + seed).unwrap();
        let fit = fit_mle(
            &series,
            &FitOptions {
                seed,
                ..FitOptions::default()
            },
        )
        .unwrap();
        let p = fit.params;
        let ll_truth = log_likelihood(&truth, &series).unwrap();
        let ok = (p.mu() - 0.5).abs() / 0.5 < 0.10
            && (p.alpha() - 1.0).abs() < 0.10
            && (p.beta() - 2.0).abs() / 2.0 < 0.10;
        println!(
            "seed {seed:2}: n={} mu={:.4} alpha={:.4} beta={:.4} conv={} ll_fit-ll_truth={:+.2} {}",
            series.len(),
            p.mu(),
            p.alpha(),
            p.beta(),
            fit.converged,
            fit.log_likelihood - ll_truth,
            if ok { "OK" } else { "MISS" }
        );
    }
}

fn probe_bench() {
    use transitcast::bench::{bootstrap_benchmark, BenchOptions};
    use transitcast::data::{synth_daily, SynthConfig};
    use transitcast::models::{ModelKind, Regressor};
    println!("== benchmark directionality sweep ==");
    for n_days in [240usize, 400] {
        for noise_sd in [5.0, 12.0, 20.0] {
            for seed in [70u64, 170, 270] {
                let series = synth_daily(&SynthConfig {
                    n_days,
                    weekly_amplitude: 50.0,
                    seasonal_amplitude: 0.0,
                    weather_effect: 0.0,
                    noise_sd,
                    seed,
                    ..SynthConfig::default()
                })
                .unwrap();
                let models = vec![
                    Regressor::new(ModelKind::RandomForest),
                    Regressor::new(ModelKind::Linear),
                ];
                let options = BenchOptions {
                    n_cycles: 20,
                    seed: seed + 1,
                    ..BenchOptions::default()
                };
                let report = bootstrap_benchmark(&series, &models, &options).unwrap();
                let fmt: Vec<String> = report
                    .summaries
                    .iter()
                    .map(|s| {
                        format!(
                            "{}: dow {:+.3} weather {:+.3}",
                            s.model, s.group_deltas.dow, s.group_deltas.weather
                        )
                    })
                    .collect();
                println!(
                    "days={n_days} noise={noise_sd} seed={seed}: {}",
                    fmt.join(" | ")
                );
            }
        }
    }
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    match which.as_str() {
        "compensator" => probe_compensator(),
        "fit" => probe_fit(),
        "bench" => probe_bench(),
        _ => {
            probe_compensator();
            probe_fit();
        }
    }
}
