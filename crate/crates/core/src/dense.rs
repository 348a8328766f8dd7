//! Dense linear algebra on small matrices.
//!
//! Used for sector-restricted exact diagonalization and as the independent
//! reference path for the matrix-free propagators in tests.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Largest dimension accepted by [`hermitian_eigen`].
pub const MAX_DENSE_DIM: usize = 1 << 14;

/// Eigen-decomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// columns. Matrices whose imaginary part vanishes are handled in real
/// arithmetic.
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "matrix must be square");
    let imag = m.iter().fold(0.0f64, |acc, c| acc.max(c.im.abs()));
    let (values, vectors) = if imag < 1e-15 {
        let real = m.map(|c| c.re);
        let eig = SymmetricEigen::new(real);
        (
            eig.eigenvalues.as_slice().to_vec(),
            eig.eigenvectors.map(|x| Complex64::new(x, 0.0)),
        )
    } else {
        let eig = SymmetricEigen::new(m.clone());
        (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    (sorted_values, sorted_vectors)
}

/// Real symmetric variant of [`hermitian_eigen`].
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let values = eig.eigenvalues.as_slice();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (sorted_values, sorted_vectors)
}

/// `exp(−i·dt·H)·v` through the eigen-decomposition of a Hermitian `H`.
pub fn expm_apply(h: &DMatrix<Complex64>, dt: f64, v: &DVector<Complex64>) -> DVector<Complex64> {
    let (values, vectors) = hermitian_eigen(h);
    let coeffs = vectors.adjoint() * v;
    let phased = DVector::from_fn(values.len(), |k, _| {
        coeffs[k] * Complex64::from_polar(1.0, -dt * values[k])
    });
    vectors * phased
}

/// Dense `exp(−i·dt·H)`.
pub fn expm_unitary(h: &DMatrix<Complex64>, dt: f64) -> DMatrix<Complex64> {
    let (values, vectors) = hermitian_eigen(h);
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&e| Complex64::from_polar(1.0, -dt * e)),
    ));
    &vectors * phases * vectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_eigenvalues() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(-1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        let (vals, vecs) = hermitian_eigen(&m);
        let r2 = 2f64.sqrt();
        assert!((vals[0] + r2).abs() < 1e-12 && (vals[1] - r2).abs() < 1e-12);
        let residual = &m * vecs.column(0) - vecs.column(0) * Complex64::new(vals[0], 0.0);
        assert!(residual.norm() < 1e-12);
    }

    #[test]
    fn complex_hermitian_path() {
        let i = Complex64::new(0.0, 1.0);
        let m = DMatrix::from_row_slice(2, 2, &[Complex64::new(0.0, 0.0), -i, i, Complex64::new(0.0, 0.0)]);
        let (vals, _) = hermitian_eigen(&m);
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
        let u = expm_unitary(&m, 0.4);
        let should_be_id = u.adjoint() * &u;
        assert!((should_be_id - DMatrix::identity(2, 2)).norm() < 1e-12);
    }
}
