use nalgebra::DMatrix;

use super::{dense, diag_matrix, symmetrize, HermitianOperator, Projection, RealInterval, Repr, C64};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// One clustered eigenvalue and the basis columns spanning its eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    pub value: f64,
    start: usize,
    len: usize,
}

impl EigenCluster {
    pub fn multiplicity(&self) -> usize {
        self.len
    }
}

#[derive(Debug, Clone)]
enum Basis {
    /// Column `c` is the standard basis vector `perm[c]`.
    Standard(Vec<usize>),
    /// Orthonormal eigenvectors, columns sorted by eigenvalue.
    Dense(DMatrix<C64>),
}

/// `x = Σ λ_i E_i` with ascending, pairwise-separated `λ_i`.
///
/// Eigenprojections are materialized on demand; a 1024-dimensional operator may
/// have a thousand of them.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    dim: usize,
    basis: Basis,
    clusters: Vec<EigenCluster>,
}

impl SpectralDecomposition {
    pub(crate) fn compute(x: &HermitianOperator, tol: &Tolerances) -> Result<Self> {
        let dim = x.dim();
        let (values, basis) = match &x.repr {
            Repr::Diagonal(d) => {
                let mut perm: Vec<usize> = (0..dim).collect();
                perm.sort_by(|a, b| d[*a].total_cmp(&d[*b]));
                let values = perm.iter().map(|i| d[*i]).collect();
                (values, Basis::Standard(perm))
            }
            Repr::Dense(m) => {
                let (raw_values, raw_vectors) = dense::eigh(m)?;
                let mut order: Vec<usize> = (0..dim).collect();
                order.sort_by(|a, b| raw_values[*a].total_cmp(&raw_values[*b]));
                let values: Vec<f64> = order.iter().map(|i| raw_values[*i]).collect();
                let vectors = raw_vectors.select_columns(order.iter());

                let scaled = DMatrix::from_fn(dim, dim, |i, j| vectors[(i, j)] * values[j]);
                let residual = (dense::mul(m, &vectors) - scaled).iter().fold(0.0f64, |a, v| a.max(v.norm()));
                let scale = m.iter().fold(0.0f64, |a, v| a.max(v.norm()));
                if !residual.is_finite() || residual > 1e-9 * (scale + 1.0) * dim as f64 {
                    return Err(Error::numerical("eigendecomposition residual too large", residual));
                }
                (values, Basis::Dense(vectors))
            }
        };

        let diameter = values[dim - 1] - values[0];
        let gap = tol.cluster * (diameter + 1.0);
        let mut clusters: Vec<EigenCluster> = Vec::new();
        let mut start = 0;
        for i in 1..=dim {
            if i == dim || values[i] - values[i - 1] >= gap {
                let len = i - start;
                let value = if values[start] == values[i - 1] {
                    values[start]
                } else {
                    values[start..i].iter().sum::<f64>() / len as f64
                };
                clusters.push(EigenCluster { value, start, len });
                start = i;
            }
        }

        Ok(Self {
            dim,
            basis,
            clusters,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn clusters(&self) -> &[EigenCluster] {
        &self.clusters
    }

    /// Distinct eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.value).collect()
    }

    pub fn eigenprojection(&self, i: usize) -> Projection {
        self.projection_from(&[&self.clusters[i]])
    }

    pub fn eigenprojections(&self) -> impl Iterator<Item = Projection> + '_ {
        (0..self.clusters.len()).map(|i| self.eigenprojection(i))
    }

    /// `Σ_{λ_i ∈ B} E_i`.
    pub fn projection_onto(&self, interval: &RealInterval, tol: &Tolerances) -> Projection {
        self.projection_where(|v| interval.contains(v, tol.snap))
    }

    pub fn projection_where(&self, keep: impl Fn(f64) -> bool) -> Projection {
        let chosen: Vec<&EigenCluster> = self.clusters.iter().filter(|c| keep(c.value)).collect();
        self.projection_from(&chosen)
    }

    fn projection_from(&self, chosen: &[&EigenCluster]) -> Projection {
        let columns: Vec<usize> = chosen.iter().flat_map(|c| c.start..c.start + c.len).collect();
        match &self.basis {
            Basis::Standard(perm) => {
                let mut d = vec![0.0; self.dim];
                for c in columns {
                    d[perm[c]] = 1.0;
                }
                Projection::from_operator_unchecked(HermitianOperator::from_diagonal(d))
            }
            Basis::Dense(v) => {
                if columns.is_empty() {
                    return Projection::zero(self.dim);
                }
                let b = v.select_columns(columns.iter());
                let p = dense::mul_adjoint_right(&b, &b);
                Projection::from_operator_unchecked(HermitianOperator::from_dense_unchecked(symmetrize(&p)))
            }
        }
    }

    /// `τ(Σ_{λ_i ∈ B} E_i)`: the fraction of eigenvalues (with multiplicity) in `B`.
    pub fn fraction_in(&self, interval: &RealInterval, tol: &Tolerances) -> f64 {
        let count: usize = self
            .clusters
            .iter()
            .filter(|c| interval.contains(c.value, tol.snap))
            .map(|c| c.len)
            .sum();
        count as f64 / self.dim as f64
    }

    /// Same eigenprojections with eigenvalues `f(λ_i)`; `f` must be non-decreasing.
    pub(crate) fn map_values(mut self, f: impl Fn(f64) -> f64) -> Self {
        for c in &mut self.clusters {
            c.value = f(c.value);
        }
        self
    }

    /// Range basis of the selected clusters as orthonormal columns.
    pub(crate) fn range_basis(&self, keep: impl Fn(f64) -> bool) -> DMatrix<C64> {
        let columns: Vec<usize> = self
            .clusters
            .iter()
            .filter(|c| keep(c.value))
            .flat_map(|c| c.start..c.start + c.len)
            .collect();
        match &self.basis {
            Basis::Standard(perm) => {
                let mut b = DMatrix::zeros(self.dim, columns.len());
                for (k, c) in columns.iter().enumerate() {
                    b[(perm[*c], k)] = C64::new(1.0, 0.0);
                }
                b
            }
            Basis::Dense(v) => v.select_columns(columns.iter()),
        }
    }

    /// `Σ f(λ_i) E_i`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
        let mut mapped = Vec::with_capacity(self.clusters.len());
        for c in &self.clusters {
            let v = f(c.value);
            if !v.is_finite() {
                return Err(Error::Domain { eigenvalue: c.value });
            }
            mapped.push(v);
        }
        let mut per_column = vec![0.0; self.dim];
        for (c, v) in self.clusters.iter().zip(&mapped) {
            per_column[c.start..c.start + c.len].fill(*v);
        }
        Ok(match &self.basis {
            Basis::Standard(perm) => {
                let mut d = vec![0.0; self.dim];
                for (col, v) in per_column.iter().enumerate() {
                    d[perm[col]] = *v;
                }
                HermitianOperator::from_diagonal(d)
            }
            Basis::Dense(v) => {
                let weighted = v * diag_matrix(&per_column);
                HermitianOperator::from_dense_unchecked(symmetrize(&dense::mul_adjoint_right(&weighted, v)))
            }
        })
    }

    /// `Σ λ_i E_i`.
    pub fn reconstruct(&self) -> HermitianOperator {
        self.map(|v| v).expect("eigenvalues are finite")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_case_clusters_repeated_values() {
        let x = HermitianOperator::from_diagonal(vec![3.0, 1.0, 3.0]);
        let s = x.spectral().unwrap();
        assert_eq!(s.eigenvalues(), vec![1.0, 3.0]);
        assert_eq!(
            s.eigenprojection(0).as_operator(),
            &HermitianOperator::from_diagonal(vec![0., 1., 0.])
        );
        assert_eq!(
            s.eigenprojection(1).as_operator(),
            &HermitianOperator::from_diagonal(vec![1., 0., 1.])
        );
    }

    #[test]
    fn identity_has_single_eigenprojection() {
        let s = HermitianOperator::identity(4).spectral().unwrap();
        assert_eq!(s.eigenvalues(), vec![1.0]);
        assert_eq!(s.eigenprojection(0).as_operator(), &HermitianOperator::identity(4));
    }

    #[test]
    fn first_demo_matrix_has_eigenvalues_one_and_three() {
        // (2 - t)^2 - 1 = 0  =>  t ∈ {1, 3}
        let x = HermitianOperator::from_rows(&[vec![c(2., 0.), c(0., 1.)], vec![c(0., -1.), c(2., 0.)]])
            .unwrap();
        let s = x.spectral().unwrap();
        let ev = s.eigenvalues();
        assert_eq!(ev.len(), 2);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
        let e0 = s.eigenprojection(0);
        let e1 = s.eigenprojection(1);
        assert!(e0.product(&e1).iter().all(|v| v.norm() < 1e-12));
        assert!((e0.as_operator() + e1.as_operator()).approx_eq(&HermitianOperator::identity(2), 1e-12));
        assert!(s.reconstruct().approx_eq(&x, 1e-12));
    }

    #[test]
    fn near_degenerate_eigenvalues_merge() {
        let x = HermitianOperator::from_diagonal(vec![1.0, 1.0 + 1e-12, 2.0]);
        let s = x.spectral().unwrap();
        assert_eq!(s.clusters().len(), 2);
        assert_eq!(s.clusters()[0].multiplicity(), 2);
    }
}
