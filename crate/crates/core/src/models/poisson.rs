//! Poisson regression with a log link, fitted by iteratively reweighted
//! least squares with step-halving.

use nalgebra::{DMatrix, DVector};

use super::linalg::least_squares_min_norm;
use super::linear::LinearFit;
use super::ModelError;

/// Clamp on the linear predictor so exp never overflows.
const ETA_BOUND: f64 = 30.0;

/// Relative log-likelihood change treated as converged.
const LL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct IrlsTrace {
    /// Log-likelihood (up to the `log y!` constant) after every accepted
    /// iteration; non-decreasing.
    pub log_likelihood_per_iteration: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn design_with_intercept(x: &[Vec<f64>]) -> DMatrix<f64> {
    let n = x.len();
    let p = x.first().map_or(0, Vec::len);
    let mut design = DMatrix::zeros(n, p + 1);
    for (i, row) in x.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            design[(i, j)] = v;
        }
        design[(i, p)] = 1.0;
    }
    design
}

fn log_likelihood(design: &DMatrix<f64>, beta: &DVector<f64>, y: &[f64]) -> f64 {
    let eta = design * beta;
    y.iter()
        .zip(eta.iter())
        .map(|(&yi, &e)| {
            let e = e.clamp(-ETA_BOUND, ETA_BOUND);
            yi * e - e.exp()
        })
        .sum()
}

/// Fits the GLM. Targets are rounded to the nearest non-negative integer
/// before fitting (count likelihood); predictions stay real-valued.
pub fn fit_poisson(
    x: &[Vec<f64>],
    y: &[f64],
    max_iterations: usize,
    max_step_halvings: usize,
) -> Result<(LinearFit, IrlsTrace), ModelError> {
    if let Some(&bad) = y.iter().find(|&&v| v < 0.0) {
        return Err(ModelError::Domain(format!(
            "poisson regression needs non-negative targets, got {bad}"
        )));
    }
    let counts: Vec<f64> = y.iter().map(|v| v.round()).collect();
    let n = x.len();
    let p = x.first().map_or(0, Vec::len);
    let design = design_with_intercept(x);

    // Start from the intercept-only model.
    let mut beta = DVector::zeros(p + 1);
    beta[p] = crate::stats::mean(&counts).max(1e-8).ln();
    let mut ll = log_likelihood(&design, &beta, &counts);
    let mut trace = IrlsTrace {
        log_likelihood_per_iteration: vec![ll],
        iterations: 0,
        converged: false,
    };

    for _ in 0..max_iterations {
        trace.iterations += 1;
        let eta = (&design * &beta).map(|e| e.clamp(-ETA_BOUND, ETA_BOUND));
        let mu = eta.map(f64::exp);

        // Weighted least squares on the working response
        // z = eta + (y - mu)/mu with weights mu.
        let mut weighted_design = design.clone();
        let mut weighted_z = DVector::zeros(n);
        for i in 0..n {
            let w_sqrt = mu[i].sqrt();
            let z = eta[i] + (counts[i] - mu[i]) / mu[i];
            for j in 0..=p {
                weighted_design[(i, j)] *= w_sqrt;
            }
            weighted_z[i] = w_sqrt * z;
        }
        let proposal = least_squares_min_norm(&weighted_design, &weighted_z);

        // Step-halving towards the previous iterate until the likelihood
        // stops decreasing.
        let mut accepted = None;
        let mut step = 1.0;
        for _ in 0..=max_step_halvings {
            let candidate = &beta + step * (&proposal - &beta);
            let candidate_ll = log_likelihood(&design, &candidate, &counts);
            if candidate_ll.is_finite() && candidate_ll >= ll - 1e-12 * (1.0 + ll.abs()) {
                accepted = Some((candidate, candidate_ll));
                break;
            }
            step *= 0.5;
        }
        let Some((next_beta, next_ll)) = accepted else {
            return Err(ModelError::NonConvergence(format!(
                "poisson IRLS diverged after {max_step_halvings} step-halvings at iteration {}",
                trace.iterations
            )));
        };

        let improvement = next_ll - ll;
        beta = next_beta;
        ll = next_ll;
        trace.log_likelihood_per_iteration.push(ll);
        if improvement.abs() <= LL_TOL * (1.0 + ll.abs()) {
            trace.converged = true;
            break;
        }
    }

    Ok((
        LinearFit {
            intercept: beta[p],
            coefficients: beta.as_slice()[..p].to_vec(),
        },
        trace,
    ))
}

/// Log-link prediction `exp(intercept + x . coefficients)`.
pub fn predict_poisson(fit: &LinearFit, row: &[f64]) -> f64 {
    fit.predict_row(row).clamp(-ETA_BOUND, ETA_BOUND).exp()
}
