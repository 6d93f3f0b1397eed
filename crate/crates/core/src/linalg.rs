//! Thin wrappers over `nalgebra` decompositions used by the cone and geometry modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::{CMat, RMat};

/// Singular values (nonincreasing) and right null vectors of `m`.
///
/// A vector is null when its singular value is `≤ rel_tol · σ_max`; a zero
/// matrix has the whole domain as its null space. Rows are zero-padded so the
/// decomposition always returns a full set of right singular vectors.
pub fn complex_null_space(m: &CMat, rel_tol: f64) -> (Vec<f64>, Vec<DVector<Complex64>>) {
    let cols = m.ncols();
    let rows = m.nrows().max(cols);
    let mut padded = CMat::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sv.first().copied().unwrap_or(0.0);
    let null = order
        .iter()
        .filter(|&&i| svd.singular_values[i] <= rel_tol * smax)
        .map(|&i| v_t.row(i).transpose().map(|z| z.conj()))
        .collect();
    (sv, null)
}

/// Real null space of `m`, computed from the stacked real matrix `[Re m; Im m]`.
pub fn real_null_space(m: &CMat, rel_tol: f64) -> Vec<DVector<f64>> {
    let (r, c) = m.shape();
    let rows = (2 * r).max(c);
    let mut stacked = RMat::zeros(rows, c);
    for i in 0..r {
        for j in 0..c {
            stacked[(i, j)] = m[(i, j)].re;
            stacked[(r + i, j)] = m[(i, j)].im;
        }
    }
    let svd = stacked.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut idx: Vec<usize> = (0..c)
        .filter(|&i| svd.singular_values[i] <= rel_tol * smax)
        .collect();
    idx.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    idx.into_iter().map(|i| v_t.row(i).transpose()).collect()
}

/// Eigenvalues (ascending) and eigenvectors of a real symmetric matrix.
pub fn symmetric_eigen(m: &RMat) -> (Vec<f64>, RMat) {
    let eig = SymmetricEigen::new(m.clone());
    sort_eigen(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(m.clone());
    sort_eigen(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

fn sort_eigen<T: nalgebra::Scalar + Copy>(values: Vec<f64>, vectors: DMatrix<T>) -> (Vec<f64>, DMatrix<T>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted = order.iter().map(|&i| values[i]).collect();
    let cols: Vec<_> = order.iter().map(|&i| vectors.column(i).into_owned()).collect();
    (sorted, DMatrix::from_columns(&cols))
}

/// Hermitian part `(m + m^H)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|v| Complex64::new(v, 0.0))
}
