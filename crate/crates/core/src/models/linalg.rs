//! Dense least-squares support for the linear-family models.

use nalgebra::{DMatrix, DVector};

/// Minimum-norm least-squares solution of `A x ~ b`.
///
/// Column-pivoted QR reveals the numerical rank; for rank-deficient
/// systems the solution of minimum Euclidean norm is selected via a
/// complete orthogonal decomposition (an LQ factorization of the leading
/// rank rows of `R`). Full-rank systems reduce to the ordinary QR solve.
pub fn least_squares_min_norm(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let m = a.nrows();
    let n = a.ncols();
    assert_eq!(m, b.len(), "row count mismatch");
    if n == 0 {
        return DVector::zeros(0);
    }
    let (q, r, p) = a.clone().col_piv_qr().unpack();

    // R may be rectangular; the rank test walks its leading diagonal.
    let k = r.nrows().min(r.ncols());
    let diag_max = (0..k).fold(0.0_f64, |acc, i| acc.max(r[(i, i)].abs()));
    let tol = diag_max * m.max(n) as f64 * f64::EPSILON;
    let rank = (0..k).take_while(|&i| r[(i, i)].abs() > tol).count();
    if rank == 0 {
        return DVector::zeros(n);
    }

    // c = leading `rank` entries of Q^T b.
    let qtb = q.transpose() * b;
    let c = qtb.rows(0, rank).into_owned();
    let r1 = r.rows(0, rank).into_owned(); // rank x n, upper trapezoidal

    let w = if rank == n {
        // Square triangular system.
        let mut x = c;
        let solved = r1.view((0, 0), (rank, rank)).solve_upper_triangular_mut(&mut x);
        debug_assert!(solved);
        x
    } else {
        // R1 = L Q2 via QR of R1^T; the minimum-norm w solving R1 w = c is
        // w = Q2^T z with L z = c.
        let (q2, r2) = r1.transpose().qr().unpack(); // n x rank, rank x rank
        let mut z = c;
        let solved = r2
            .transpose()
            .view((0, 0), (rank, rank))
            .solve_lower_triangular_mut(&mut z);
        debug_assert!(solved);
        q2 * z
    };

    // Undo the column pivoting.
    let mut x = w;
    p.inv_permute_rows(&mut x);
    x
}

/// Converts row-major data to a nalgebra matrix.
pub fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    DMatrix::from_row_iterator(m, n, rows.iter().flat_map(|r| r.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_rank_matches_normal_equations() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 2.0, 4.0]);
        let x = least_squares_min_norm(&a, &b);
        let gram = a.transpose() * &a;
        let rhs = a.transpose() * &b;
        let oracle = gram.lu().solve(&rhs).unwrap();
        assert!((x - oracle).norm() < 1e-10);
    }

    #[test]
    fn collinear_columns_give_min_norm_solution() {
        // Second column duplicates the first: solutions form a line
        // x0 + x1 = 2; the minimum-norm point is (1, 1).
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let b = DVector::from_vec(vec![2.0, 4.0, 6.0]);
        let x = least_squares_min_norm(&a, &b);
        assert!((x[0] - 1.0).abs() < 1e-10, "{x:?}");
        assert!((x[1] - 1.0).abs() < 1e-10, "{x:?}");
    }

    #[test]
    fn zero_matrix_gives_zero_solution() {
        let a = DMatrix::zeros(3, 2);
        let b = DVector::from_vec(vec![1.0, 1.0, 1.0]);
        let x = least_squares_min_norm(&a, &b);
        assert_eq!(x, DVector::zeros(2));
    }

    #[test]
    fn underdetermined_system_min_norm() {
        // One equation, two unknowns: x0 + 2 x1 = 5; min-norm solution is
        // (1, 2).
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        let b = DVector::from_vec(vec![5.0]);
        let x = least_squares_min_norm(&a, &b);
        assert!((x[0] - 1.0).abs() < 1e-10);
        assert!((x[1] - 2.0).abs() < 1e-10);
    }
}
