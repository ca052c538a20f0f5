//! Join, meet and complement on the projection lattice of `M_d(ℂ)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{dense, HermitianOperator, Projection, C64};
use crate::tolerance::Tolerances;

/// Projection onto the span of the ranges of `ps`.
///
/// Range bases are concatenated and orthonormalized by SVD; singular values below
/// `tol.rank · σ_max` are discarded.
pub fn join(ps: &[Projection], tol: &Tolerances) -> Result<Projection> {
    let dim = common_dim(ps)?;
    if ps.iter().all(|p| p.is_diagonal()) {
        let mut d = vec![0.0f64; dim];
        for p in ps {
            for (acc, v) in d.iter_mut().zip(p.diagonal_values().unwrap_or_default()) {
                *acc = acc.max(*v);
            }
        }
        return Ok(Projection::from_mask(&d.iter().map(|v| *v > 0.5).collect::<Vec<_>>()));
    }

    let mut bases = Vec::with_capacity(ps.len());
    for p in ps {
        bases.push(p.spectral_with(tol)?.range_basis(|v| v > 0.5));
    }
    join_spans(dim, &bases, tol)
}

/// Projection onto the span of the columns of all `spans`, each a `dim`-row matrix.
pub fn join_spans(dim: usize, spans: &[DMatrix<C64>], tol: &Tolerances) -> Result<Projection> {
    if let Some(bad) = spans.iter().find(|b| b.nrows() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            found: bad.nrows(),
        });
    }
    let bases = spans;
    let total: usize = bases.iter().map(|b| b.ncols()).sum();
    if total == 0 {
        return Ok(Projection::zero(dim));
    }
    let mut stacked = DMatrix::<C64>::zeros(dim, total);
    let mut col = 0;
    for b in bases {
        stacked.columns_mut(col, b.ncols()).copy_from(b);
        col += b.ncols();
    }

    let (singular_values, u) = dense::left_singular(&stacked)?;
    let sigma_max = singular_values.iter().fold(0.0f64, |a, s| a.max(*s));
    let keep: Vec<usize> = singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > tol.rank * sigma_max)
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Ok(Projection::zero(dim));
    }
    let range = u.select_columns(keep.iter());
    let p = hermitian_outer(&range);
    Projection::new(p, tol)
}

/// Projection onto the intersection of the ranges of `ps`, computed as
/// `(∨ p_i^⊥)^⊥`.
pub fn meet(ps: &[Projection], tol: &Tolerances) -> Result<Projection> {
    common_dim(ps)?;
    let complements: Vec<Projection> = ps.iter().map(complement).collect();
    Ok(complement(&join(&complements, tol)?))
}

/// `p^⊥ = 1 − p`.
pub fn complement(p: &Projection) -> Projection {
    p.complement()
}

fn common_dim(ps: &[Projection]) -> Result<usize> {
    let first = ps
        .first()
        .ok_or_else(|| Error::InvalidArgument("lattice operation on an empty family".into()))?;
    let dim = first.dim();
    if let Some(bad) = ps.iter().find(|p| p.dim() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            found: bad.dim(),
        });
    }
    Ok(dim)
}

fn hermitian_outer(b: &DMatrix<C64>) -> HermitianOperator {
    let p = dense::mul_adjoint_right(b, b);
    crate::operator::hermitize(&p).expect("outer product is square")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::loewner_leq;

    fn rank_one(v: &[C64]) -> Projection {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let b = DMatrix::from_fn(v.len(), 1, |i, _| v[i] / norm);
        Projection::new(hermitian_outer(&b), &Tolerances::default()).unwrap()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn join_examples() {
        let tol = Tolerances::default();
        let a = Projection::from_mask(&[true, false, false]);
        let b = Projection::from_mask(&[false, true, false]);
        assert_eq!(join(&[a.clone(), b], &tol).unwrap(), Projection::from_mask(&[true, true, false]));
        assert_eq!(join(&[a.clone(), a.clone()], &tol).unwrap(), a);

        // span{e1, (e1+e2)/√2} = span{e1, e2}
        let e1 = rank_one(&[c(1.), c(0.), c(0.)]);
        let diag = rank_one(&[c(1.), c(1.), c(0.)]);
        let j = join(&[e1, diag], &tol).unwrap();
        assert!(j.approx_eq(&HermitianOperator::from_diagonal(vec![1., 1., 0.]), 1e-12));
    }

    #[test]
    fn meet_examples() {
        let tol = Tolerances::default();
        let a = Projection::from_mask(&[true, true, false]);
        let b = Projection::from_mask(&[false, true, true]);
        assert_eq!(meet(&[a.clone(), b], &tol).unwrap(), Projection::from_mask(&[false, true, false]));
        assert_eq!(meet(&[a.clone(), a.complement()], &tol).unwrap(), Projection::zero(3));
        assert_eq!(meet(&[a.clone(), Projection::identity(3)], &tol).unwrap(), a);
    }

    #[test]
    fn dense_join_dominates_inputs() {
        let tol = Tolerances::default();
        let p = rank_one(&[c(1.), C64::new(0., 1.), c(2.)]);
        let q = rank_one(&[c(0.), c(1.), C64::new(1., -1.)]);
        let j = join(&[p.clone(), q.clone()], &tol).unwrap();
        assert_eq!(j.rank(), 2);
        assert!(loewner_leq(&p, &j, 1e-10).unwrap());
        assert!(loewner_leq(&q, &j, 1e-10).unwrap());
        let m = meet(&[p.clone(), q], &tol).unwrap();
        assert!(m.is_zero(1e-10));
        assert!(meet(&[p.clone(), p.clone()], &tol).unwrap().approx_eq(&p, 1e-10));
    }

    #[test]
    fn errors() {
        let tol = Tolerances::default();
        assert!(join(&[], &tol).is_err());
        let r = join(&[Projection::zero(2), Projection::zero(3)], &tol);
        assert!(matches!(r, Err(Error::Dimension { expected: 2, found: 3 })));
    }
}
