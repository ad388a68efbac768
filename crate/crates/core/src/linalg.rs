//! Small dense complex linear algebra used across the crate.

use nalgebra::{Complex, ComplexField, SymmetricEigen};

use crate::scalar::{cplx, lit, CMat, Real};

/// `(m + m*) / 2`.
pub fn hermitian_part<T: Real>(m: &CMat<T>) -> CMat<T> {
    (m + m.adjoint()) * Complex::new(lit::<T>(0.5), T::zero())
}

/// `(m - m*) / 2i`, the imaginary part of a square matrix.
pub fn imag_part<T: Real>(m: &CMat<T>) -> CMat<T> {
    (m - m.adjoint()) * cplx(T::zero(), lit::<T>(-0.5))
}

/// Eigenvalues of the Hermitian part, ascending.
pub fn hermitian_eigenvalues<T: Real>(m: &CMat<T>) -> Vec<T> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut v: Vec<T> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

pub fn min_hermitian_eigenvalue<T: Real>(m: &CMat<T>) -> T {
    hermitian_eigenvalues(m).first().copied().unwrap_or_else(T::zero)
}

/// Singular values in descending order.
pub fn singular_values<T: Real>(m: &CMat<T>) -> Vec<T> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<T> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Spectral norm.
pub fn norm2<T: Real>(m: &CMat<T>) -> T {
    singular_values(m).first().copied().unwrap_or_else(T::zero)
}

/// 2-norm condition number; infinite for exactly singular matrices.
pub fn condition_number<T: Real>(m: &CMat<T>) -> T {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > T::zero() => hi / lo,
        (Some(_), Some(_)) => T::max_value().unwrap_or_else(|| lit(f64::MAX)),
        _ => T::one(),
    }
}

/// Solves `m x = rhs`, refusing when `cond(m) > max_cond`.
///
/// On refusal the condition number is returned as the error value.
pub fn solve_conditioned<T: Real>(m: &CMat<T>, rhs: &CMat<T>, max_cond: T) -> Result<(CMat<T>, T), T> {
    let cond = condition_number(m);
    if !(cond <= max_cond) {
        return Err(cond);
    }
    match m.clone().lu().solve(rhs) {
        Some(x) => Ok((x, cond)),
        None => Err(cond),
    }
}

/// Orthonormal basis (columns) of the numerical null space of a square or
/// wide matrix, using the threshold `rel_tol * sigma_max`.
pub fn null_space<T: Real>(m: &CMat<T>, rel_tol: T) -> CMat<T> {
    let n = m.ncols();
    // Pad to square so the SVD returns a full right basis.
    let mut sq = CMat::<T>::zeros(n.max(m.nrows()), n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let smax = svd.singular_values.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let thresh = rel_tol * smax.max(T::min_value().unwrap_or_else(T::zero));
    let cols: Vec<_> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= thresh)
        .map(|i| v_t.row(i).adjoint())
        .collect();
    if cols.is_empty() {
        CMat::zeros(n, 0)
    } else {
        CMat::from_columns(&cols)
    }
}

/// Thin orthonormal basis of the column span (Householder QR).
pub fn orthonormalize<T: Real>(m: &CMat<T>) -> CMat<T> {
    m.clone().qr().q()
}

/// Symmetrises and clips negative eigenvalues.
pub fn psd_project<T: Real>(m: &CMat<T>) -> CMat<T> {
    let h = hermitian_part(m);
    if h.nrows() == 0 {
        return h;
    }
    let eig = SymmetricEigen::new(h);
    let mut vals = eig.eigenvalues.clone();
    for v in vals.iter_mut() {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    let q = &eig.eigenvectors;
    let d = CMat::<T>::from_diagonal(&vals.map(|x| Complex::new(x, T::zero())));
    q * d * q.adjoint()
}

/// Rank from singular values with a relative threshold.
pub fn rank<T: Real>(m: &CMat<T>, rel_tol: T) -> usize {
    let s = singular_values(m);
    let Some(&smax) = s.first() else { return 0 };
    s.iter().filter(|&&x| x > rel_tol * smax).count()
}

/// Max-entry distance between two matrices of equal shape.
pub fn max_abs_diff<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    a.iter().zip(b.iter()).fold(T::zero(), |acc, (x, y)| acc.max((*x - *y).modulus()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{creal, imag_unit};

    #[test]
    fn imag_part_of_i_times_hermitian() {
        let h = CMat::<f64>::from_row_slice(2, 2, &[creal(2.0), cplx(0.0, 1.0), cplx(0.0, -1.0), creal(3.0)]);
        let m = &h * imag_unit::<f64>();
        assert!(max_abs_diff(&imag_part(&m), &h) < 1e-15);
    }

    #[test]
    fn null_space_of_rank_one() {
        let m = CMat::<f64>::from_row_slice(2, 2, &[creal(1.0), creal(1.0), creal(1.0), creal(1.0)]);
        let k = null_space(&m, 1e-10);
        assert_eq!(k.ncols(), 1);
        assert!((&m * &k).norm() < 1e-12);
    }

    #[test]
    fn psd_projection_clips() {
        let m = CMat::<f64>::from_diagonal(&nalgebra::DVector::from_vec(vec![creal(1.0), creal(-1e-3)]));
        let p = psd_project(&m);
        assert!((p[(1, 1)].re).abs() < 1e-15);
        assert!((p[(0, 0)].re - 1.0).abs() < 1e-15);
    }
}
