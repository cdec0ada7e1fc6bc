//! Linear-family regressors: ordinary least squares, ridge, and lasso.
//! All three carry an unpenalized intercept.

use nalgebra::{DMatrix, DVector};

use super::linalg::{least_squares_min_norm, to_matrix};
use super::ModelError;

/// Coefficients of a fitted linear predictor `intercept + x . coefficients`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl LinearFit {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept
            + row
                .iter()
                .zip(self.coefficients.iter())
                .map(|(x, c)| x * c)
                .sum::<f64>()
    }
}

/// Least squares with an intercept column, via column-pivoted QR; exactly
/// collinear designs fall back to the minimum-norm solution.
pub fn fit_ols(x: &[Vec<f64>], y: &[f64]) -> LinearFit {
    let n = x.len();
    let p = x.first().map_or(0, Vec::len);
    let mut design = DMatrix::zeros(n, p + 1);
    for (i, row) in x.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            design[(i, j)] = v;
        }
        design[(i, p)] = 1.0;
    }
    let beta = least_squares_min_norm(&design, &DVector::from_column_slice(y));
    LinearFit {
        intercept: beta[p],
        coefficients: beta.as_slice()[..p].to_vec(),
    }
}

fn column_means(x: &[Vec<f64>]) -> Vec<f64> {
    let n = x.len() as f64;
    let p = x.first().map_or(0, Vec::len);
    let mut means = vec![0.0; p];
    for row in x {
        for (m, &v) in means.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    means
}

/// Closed-form ridge `(Xc^T Xc + lambda I)^-1 Xc^T yc` on centered data;
/// the intercept absorbs the means and stays unpenalized.
pub fn fit_ridge(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<LinearFit, ModelError> {
    if lambda < 0.0 {
        return Err(ModelError::Argument("ridge lambda must be >= 0".into()));
    }
    let p = x.first().map_or(0, Vec::len);
    let x_means = column_means(x);
    let y_mean = crate::stats::mean(y);

    let mut xc = to_matrix(x);
    for i in 0..xc.nrows() {
        for j in 0..p {
            xc[(i, j)] -= x_means[j];
        }
    }
    let yc = DVector::from_iterator(y.len(), y.iter().map(|&v| v - y_mean));

    let mut gram = xc.transpose() * &xc;
    for j in 0..p {
        gram[(j, j)] += lambda;
    }
    let rhs = xc.transpose() * &yc;
    let beta = match gram.cholesky() {
        Some(chol) => chol.solve(&rhs),
        // lambda = 0 on a singular design: fall back to min-norm.
        None => least_squares_min_norm(&xc, &yc),
    };
    let intercept = y_mean
        - x_means
            .iter()
            .zip(beta.iter())
            .map(|(m, b)| m * b)
            .sum::<f64>();
    Ok(LinearFit {
        intercept,
        coefficients: beta.as_slice().to_vec(),
    })
}

/// Diagnostics from a lasso coordinate-descent run.
#[derive(Debug, Clone)]
pub struct LassoTrace {
    /// Penalized objective after every sweep; non-increasing.
    pub objective_per_sweep: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

/// Lasso via cyclic coordinate descent on standardized columns,
/// minimizing `(1/2n) ||y - b0 - X b||^2 + lambda ||b||_1` with an
/// unpenalized intercept. Convergence: max coefficient change below
/// `tol` in one sweep. Zero-variance columns keep zero coefficients.
pub fn fit_lasso(
    x: &[Vec<f64>],
    y: &[f64],
    lambda: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<(LinearFit, LassoTrace), ModelError> {
    if lambda < 0.0 {
        return Err(ModelError::Argument("lasso lambda must be >= 0".into()));
    }
    let n = x.len();
    let nf = n as f64;
    let p = x.first().map_or(0, Vec::len);
    let x_means = column_means(x);
    let y_mean = crate::stats::mean(y);

    // Standardized columns (population sd), stored column-major.
    let mut sds = vec![0.0; p];
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); p];
    for j in 0..p {
        let mut var = 0.0;
        for row in x {
            let d = row[j] - x_means[j];
            var += d * d;
        }
        sds[j] = (var / nf).sqrt();
        if sds[j] > 0.0 {
            cols[j] = x.iter().map(|row| (row[j] - x_means[j]) / sds[j]).collect();
        }
    }
    let yc: Vec<f64> = y.iter().map(|&v| v - y_mean).collect();

    let mut beta = vec![0.0; p];
    let mut residual = yc.clone();
    let objective = |residual: &[f64], beta: &[f64]| {
        let rss: f64 = residual.iter().map(|r| r * r).sum();
        rss / (2.0 * nf) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
    };

    let mut trace = LassoTrace {
        objective_per_sweep: Vec::new(),
        sweeps: 0,
        converged: false,
    };
    for _ in 0..max_sweeps {
        trace.sweeps += 1;
        let mut max_change: f64 = 0.0;
        for j in 0..p {
            if sds[j] == 0.0 {
                continue;
            }
            let old = beta[j];
            // rho = x_j . (residual + x_j * old) / n; columns have unit
            // second moment after standardization.
            let mut rho = 0.0;
            for (xij, r) in cols[j].iter().zip(residual.iter()) {
                rho += xij * r;
            }
            rho = rho / nf + old;
            let new = rho.signum() * (rho.abs() - lambda).max(0.0);
            if new != old {
                let delta = new - old;
                for (r, xij) in residual.iter_mut().zip(cols[j].iter()) {
                    *r -= delta * xij;
                }
                beta[j] = new;
            }
            max_change = max_change.max((new - old).abs());
        }
        trace.objective_per_sweep.push(objective(&residual, &beta));
        if max_change < tol {
            trace.converged = true;
            break;
        }
    }

    // Back to the original scale.
    let coefficients: Vec<f64> = beta
        .iter()
        .zip(sds.iter())
        .map(|(&b, &sd)| if sd > 0.0 { b / sd } else { 0.0 })
        .collect();
    let intercept = y_mean
        - x_means
            .iter()
            .zip(coefficients.iter())
            .map(|(m, c)| m * c)
            .sum::<f64>();
    Ok((
        LinearFit {
            intercept,
            coefficients,
        },
        trace,
    ))
}
