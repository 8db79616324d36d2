//! Small dense linear-algebra helpers shared by the rank and containment checks.

use nalgebra::{DMatrix, DVector};

/// Pivot magnitude below which a column is treated as dependent.
pub const PIVOT_THRESHOLD: f64 = 1e-8;

/// Pivots found by Gaussian elimination with partial (row) pivoting, one per
/// independent column, in column order.
fn elimination_pivots(m: &DMatrix<f64>, threshold: f64) -> Vec<f64> {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let (best, mag) = (row..rows)
            .map(|r| (r, a[(r, col)].abs()))
            .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= threshold {
            continue;
        }
        a.swap_rows(row, best);
        let p = a[(row, col)];
        for r in row + 1..rows {
            let f = a[(r, col)] / p;
            if f != 0.0 {
                for c in col..cols {
                    let v = a[(row, c)];
                    a[(r, c)] -= f * v;
                }
            }
        }
        pivots.push(mag);
        row += 1;
    }
    pivots
}

/// Column rank by partial-pivot elimination.
pub fn pivot_rank(m: &DMatrix<f64>, threshold: f64) -> usize {
    elimination_pivots(m, threshold).len()
}

/// Smallest pivot of a square matrix, or 0 when elimination breaks down.
pub fn min_pivot(m: &DMatrix<f64>) -> f64 {
    let pivots = elimination_pivots(m, 0.0);
    if pivots.len() < m.ncols() {
        return 0.0;
    }
    pivots.into_iter().fold(f64::INFINITY, f64::min)
}

/// Orthonormal basis of the column span by Gram-Schmidt with column pivoting
/// and one reorthogonalization pass; columns whose remaining norm is at most
/// `PIVOT_THRESHOLD` are treated as dependent.
pub fn orthonormal_basis(span: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let mut rest: Vec<DVector<f64>> = span.column_iter().map(|c| c.into_owned()).collect();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    while !rest.is_empty() {
        let (k, norm) = rest
            .iter()
            .enumerate()
            .map(|(k, c)| (k, c.norm()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if norm <= PIVOT_THRESHOLD {
            break;
        }
        let q = rest.swap_remove(k) / norm;
        for c in rest.iter_mut() {
            for _ in 0..2 {
                let d = q.dot(c);
                c.axpy(-d, &q, 1.0);
            }
        }
        basis.push(q);
    }
    basis
}

/// Distance from `v` to the column span of `span`.
pub fn projection_residual(span: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    let basis = orthonormal_basis(span);
    let mut r = v.clone();
    for _ in 0..2 {
        for q in &basis {
            let d = q.dot(&r);
            r.axpy(-d, q, 1.0);
        }
    }
    r.norm()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_dependent_columns() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0]);
        assert_eq!(pivot_rank(&m, PIVOT_THRESHOLD), 2);
        assert_eq!(pivot_rank(&DMatrix::identity(4, 4), PIVOT_THRESHOLD), 4);
        assert_eq!(pivot_rank(&DMatrix::zeros(3, 2), PIVOT_THRESHOLD), 0);
    }

    #[test]
    fn min_pivot_detects_singular() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(min_pivot(&m), 0.0);
        assert!(min_pivot(&DMatrix::identity(3, 3)) >= 1.0);
    }

    #[test]
    fn residual_against_span() {
        let span = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let inside = DVector::from_vec(vec![2.0, 0.0, 0.0]);
        let outside = DVector::from_vec(vec![0.0, 3.0, 4.0]);
        assert!(projection_residual(&span, &inside) < 1e-14);
        assert!((projection_residual(&span, &outside) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn basis_of_rank_deficient_span() {
        // third column = first + second
        let m = DMatrix::from_row_slice(3, 3, &[-0.0105, 0.0440, 0.0335, -0.2762, 2.1552, 1.8790, 0.0766, -0.0017, 0.0749]);
        let q = orthonormal_basis(&m);
        assert_eq!(q.len(), 2);
        for a in &q {
            for b in &q {
                let expected = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
                assert!((a.dot(b) - expected).abs() < 1e-14);
            }
        }
        for c in m.column_iter() {
            assert!(projection_residual(&m, &c.into_owned()) < 1e-14);
        }
    }
}
