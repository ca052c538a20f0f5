//! Dense complex kernels. Matrices stay `nalgebra` types at the interface; products,
//! Hermitian eigendecompositions and SVDs run on `faer`, single-threaded so that
//! results do not depend on scheduling.

use faer::{MatRef, Side};
use nalgebra::DMatrix;

use super::C64;
use crate::error::{Error, Result};

fn view(m: &DMatrix<C64>) -> MatRef<'_, C64> {
    MatRef::from_column_major_slice(m.as_slice(), m.nrows(), m.ncols())
}

fn to_nalgebra(m: MatRef<'_, C64>) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// `a · b`.
pub(crate) fn mul(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    to_nalgebra((view(a) * view(b)).as_ref())
}

/// `a^* · b`.
pub(crate) fn mul_adjoint_left(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    to_nalgebra((view(a).adjoint() * view(b)).as_ref())
}

/// `a · b^*`.
pub(crate) fn mul_adjoint_right(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    to_nalgebra((view(a) * view(b).adjoint()).as_ref())
}

/// Ascending eigenvalues and matching orthonormal eigenvectors of a Hermitian matrix.
pub(crate) fn eigh(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let eig = view(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::numerical(format!("Hermitian eigensolver failed: {e:?}"), f64::NAN))?;
    let s = eig.S();
    let values = (0..m.nrows()).map(|i| s[i].re).collect();
    Ok((values, to_nalgebra(eig.U())))
}

/// Eigenvalues of a Hermitian matrix, unsorted.
pub(crate) fn eigvalsh(m: &DMatrix<C64>) -> Vec<f64> {
    match view(m).self_adjoint_eigenvalues(Side::Lower) {
        Ok(v) => v,
        Err(_) => m.symmetric_eigenvalues().iter().copied().collect(),
    }
}

/// Singular values (descending) and the thin left singular vectors.
pub(crate) fn left_singular(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let svd = view(m)
        .thin_svd()
        .map_err(|e| Error::numerical(format!("SVD failed: {e:?}"), f64::NAN))?;
    let s = svd.S();
    let k = m.nrows().min(m.ncols());
    Ok(((0..k).map(|i| s[i].re).collect(), to_nalgebra(svd.U())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernels_match_direct_arithmetic() {
        let a = DMatrix::from_fn(3, 2, |i, j| C64::new(i as f64 + 1.0, j as f64 - 0.5));
        let b = DMatrix::from_fn(2, 3, |i, j| C64::new(j as f64, 2.0 - i as f64));
        assert!((mul(&a, &b) - &a * &b).norm() < 1e-13);
        assert!((mul_adjoint_left(&a, &a) - a.adjoint() * &a).norm() < 1e-13);
        assert!((mul_adjoint_right(&a, &a) - &a * a.adjoint()).norm() < 1e-13);
        let h = mul_adjoint_right(&a, &a);
        let (values, vectors) = eigh(&h).unwrap();
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
        let rebuilt = &vectors * DMatrix::from_fn(3, 3, |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) }) * vectors.adjoint();
        assert!((rebuilt - &h).norm() < 1e-12);
        let (s, u) = left_singular(&a).unwrap();
        assert_eq!((s.len(), u.ncols()), (2, 2));
        assert!(s[0] >= s[1]);
    }
}
