//! Hermitian matrices and their Borel functional calculus.
//!
//! Every random variable in this crate is a [`HermitianOperator`] on `ℂ^d`. Operators
//! whose off-diagonal part is exactly zero are stored as a real diagonal; this keeps
//! classical (commutative) instances exact and lets 1024-dimensional chains run in
//! linear time per operation. All other operators are dense complex matrices.

pub(crate) mod dense;
mod interval;
mod projection;
mod spectral;

use std::borrow::Cow;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

pub use interval::RealInterval;
pub use projection::Projection;
pub use spectral::{EigenCluster, SpectralDecomposition};

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Diagonal(Vec<f64>),
    Dense(DMatrix<C64>),
}

/// A `d×d` complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRecord", into = "MatrixRecord")]
pub struct HermitianOperator {
    repr: Repr,
}

impl HermitianOperator {
    /// Wraps `m` after checking it is square and Hermitian to within
    /// `1e-12 · max|m_ij|`. The stored matrix is the exact symmetrization.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        Self::new_with(m, &Tolerances::default())
    }

    pub fn new_with(m: DMatrix<C64>, tol: &Tolerances) -> Result<Self> {
        check_square(&m)?;
        let scale = max_abs(&m);
        let mut asymmetry = 0.0f64;
        for j in 0..m.ncols() {
            for i in 0..=j {
                asymmetry = asymmetry.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if asymmetry > tol.hermitian * scale {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(Self::from_dense_unchecked(symmetrize(&m)))
    }

    /// Real diagonal operator.
    pub fn from_diagonal(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "operators have dimension >= 1");
        Self {
            repr: Repr::Diagonal(values),
        }
    }

    /// Builds an operator from row-major complex entries (test and demo helper).
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Shape { rows: 0, cols: 0 });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Shape {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(vec![1.0; dim])
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_diagonal(vec![0.0; dim])
    }

    /// Converts an already-symmetric dense matrix, switching to the diagonal
    /// representation when the off-diagonal part is exactly zero.
    pub(crate) fn from_dense_unchecked(m: DMatrix<C64>) -> Self {
        let n = m.nrows();
        let diagonal = (0..n).all(|j| (0..n).all(|i| i == j || m[(i, j)] == C64::new(0.0, 0.0)));
        if diagonal {
            Self::from_diagonal((0..n).map(|i| m[(i, i)].re).collect())
        } else {
            Self {
                repr: Repr::Dense(m),
            }
        }
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Diagonal(d) => d.len(),
            Repr::Dense(m) => m.nrows(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.repr, Repr::Diagonal(_))
    }

    /// Diagonal entries when the operator is stored diagonally.
    pub fn diagonal_values(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Diagonal(d) => Some(d),
            Repr::Dense(_) => None,
        }
    }

    pub fn matrix(&self) -> Cow<'_, DMatrix<C64>> {
        match &self.repr {
            Repr::Dense(m) => Cow::Borrowed(m),
            Repr::Diagonal(d) => Cow::Owned(diag_matrix(d)),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        match &self.repr {
            Repr::Dense(m) => m[(i, j)],
            Repr::Diagonal(d) => {
                if i == j {
                    C64::new(d[i], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
        }
    }

    /// Largest absolute entry.
    pub fn scale(&self) -> f64 {
        match &self.repr {
            Repr::Diagonal(d) => d.iter().fold(0.0, |a, v| a.max(v.abs())),
            Repr::Dense(m) => max_abs(m),
        }
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        match (&self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => {
                a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
            }
            _ => max_abs(&(self.matrix().into_owned() - other.matrix().as_ref())),
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && self.max_abs_diff(other) <= tol
    }

    /// Unnormalized matrix trace.
    pub fn trace_raw(&self) -> C64 {
        match &self.repr {
            Repr::Diagonal(d) => C64::new(d.iter().sum(), 0.0),
            Repr::Dense(m) => m.trace(),
        }
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        match (&self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => {
                C64::new(a.iter().zip(b).map(|(x, y)| x * y).sum(), 0.0)
            }
            (Repr::Diagonal(a), Repr::Dense(m)) | (Repr::Dense(m), Repr::Diagonal(a)) => {
                a.iter().enumerate().map(|(i, v)| m[(i, i)] * *v).sum()
            }
            (Repr::Dense(a), Repr::Dense(b)) => {
                let n = a.nrows();
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        acc += a[(i, j)] * b[(j, i)];
                    }
                }
                acc
            }
        }
    }

    /// The (generally non-Hermitian) matrix product `self · other`.
    pub fn product(&self, other: &Self) -> DMatrix<C64> {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        match (&self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => {
                diag_matrix(&a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<_>>())
            }
            (Repr::Diagonal(a), Repr::Dense(m)) => {
                let mut out = m.clone();
                for (i, mut row) in out.row_iter_mut().enumerate() {
                    row *= C64::new(a[i], 0.0);
                }
                out
            }
            (Repr::Dense(m), Repr::Diagonal(b)) => {
                let mut out = m.clone();
                for (j, mut col) in out.column_iter_mut().enumerate() {
                    col *= C64::new(b[j], 0.0);
                }
                out
            }
            (Repr::Dense(a), Repr::Dense(b)) => dense::mul(a, b),
        }
    }

    /// Hermitian part of `self · other`; exact when the two commute.
    pub fn symmetric_product(&self, other: &Self) -> Self {
        match (&self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => {
                Self::from_diagonal(a.iter().zip(b).map(|(x, y)| x * y).collect())
            }
            _ => Self::from_dense_unchecked(symmetrize(&self.product(other))),
        }
    }

    /// `outer · self · outer`.
    pub fn sandwich(&self, outer: &Self) -> Self {
        assert_eq!(self.dim(), outer.dim(), "dimension mismatch");
        match (&self.repr, &outer.repr) {
            (Repr::Diagonal(x), Repr::Diagonal(p)) => {
                Self::from_diagonal(x.iter().zip(p).map(|(v, q)| q * v * q).collect())
            }
            (Repr::Dense(m), Repr::Diagonal(p)) => {
                let n = m.nrows();
                let out = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * (p[i] * p[j]));
                Self::from_dense_unchecked(symmetrize(&out))
            }
            _ => {
                let left = outer.product(self);
                let full = match &outer.repr {
                    Repr::Dense(o) => dense::mul(&left, o),
                    Repr::Diagonal(_) => unreachable!(),
                };
                Self::from_dense_unchecked(symmetrize(&full))
            }
        }
    }

    /// `self · self`.
    pub fn square(&self) -> Self {
        self.symmetric_product(self)
    }

    /// Operator norm of the commutator `[self, other]`.
    pub fn commutator_norm(&self, other: &Self) -> f64 {
        if self.is_diagonal() && other.is_diagonal() {
            return 0.0;
        }
        let ab = self.product(other);
        let ba = other.product(self);
        // i[a,b] is Hermitian with the same singular values as [a,b].
        let c = (ab - ba) * C64::new(0.0, 1.0);
        let h = Self::from_dense_unchecked(symmetrize(&c));
        h.op_norm()
    }

    pub fn commutes_with(&self, other: &Self, rel_tol: f64) -> bool {
        self.commutator_norm(other) <= rel_tol * self.op_norm() * other.op_norm()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        match (&self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => Self::from_diagonal(
                a.iter()
                    .flat_map(|x| b.iter().map(move |y| x * y))
                    .collect(),
            ),
            _ => Self::from_dense_unchecked(self.matrix().kronecker(other.matrix().as_ref())),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match &self.repr {
            Repr::Diagonal(d) => Self::from_diagonal(d.iter().map(|v| v * c).collect()),
            Repr::Dense(m) => Self::from_dense_unchecked(m * C64::new(c, 0.0)),
        }
    }

    /// `self + c · 1`.
    pub fn shifted(&self, c: f64) -> Self {
        match &self.repr {
            Repr::Diagonal(d) => Self::from_diagonal(d.iter().map(|v| v + c).collect()),
            Repr::Dense(m) => {
                let mut out = m.clone();
                for i in 0..out.nrows() {
                    out[(i, i)] += c;
                }
                Self::from_dense_unchecked(out)
            }
        }
    }

    /// Sorted eigenvalues (with multiplicity).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = match &self.repr {
            Repr::Diagonal(d) => d.clone(),
            Repr::Dense(m) => dense::eigvalsh(m),
        };
        values.sort_by(f64::total_cmp);
        values
    }

    /// Operator norm `max |λ_i|`.
    pub fn op_norm(&self) -> f64 {
        op_norm(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Spectral decomposition with default tolerances.
    pub fn spectral(&self) -> Result<SpectralDecomposition> {
        spectral_decompose(self, &Tolerances::default())
    }

    pub fn spectral_with(&self, tol: &Tolerances) -> Result<SpectralDecomposition> {
        spectral_decompose(self, tol)
    }

    /// `|x|` with default tolerances.
    pub fn abs(&self) -> Result<Self> {
        abs_op(self, &Tolerances::default())
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;

    fn add(self, rhs: Self) -> HermitianOperator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        match (&self.repr, &rhs.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => {
                HermitianOperator::from_diagonal(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            _ => HermitianOperator::from_dense_unchecked(
                self.matrix().into_owned() + rhs.matrix().as_ref(),
            ),
        }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;

    fn sub(self, rhs: Self) -> HermitianOperator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        match (&self.repr, &rhs.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => {
                HermitianOperator::from_diagonal(a.iter().zip(b).map(|(x, y)| x - y).collect())
            }
            _ => HermitianOperator::from_dense_unchecked(
                self.matrix().into_owned() - rhs.matrix().as_ref(),
            ),
        }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;

    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scaled(rhs)
    }
}

/// `(m + m*) / 2`.
pub fn hermitize(m: &DMatrix<C64>) -> Result<HermitianOperator> {
    check_square(m)?;
    Ok(HermitianOperator::from_dense_unchecked(symmetrize(m)))
}

/// Decomposes `x = Σ λ_i E_i` with eigenvalues clustered per `tol.cluster`.
pub fn spectral_decompose(x: &HermitianOperator, tol: &Tolerances) -> Result<SpectralDecomposition> {
    SpectralDecomposition::compute(x, tol)
}

/// Borel functional calculus `f(x) = Σ f(λ_i) E_i`.
///
/// Fails with [`Error::Domain`] if `f` is not finite at some eigenvalue.
pub fn apply_function(
    x: &HermitianOperator,
    f: impl Fn(f64) -> f64,
    tol: &Tolerances,
) -> Result<HermitianOperator> {
    spectral_decompose(x, tol)?.map(f)
}

/// Spectral projection `1_B(x)`.
pub fn spectral_projection(
    x: &HermitianOperator,
    interval: &RealInterval,
    tol: &Tolerances,
) -> Result<Projection> {
    Ok(spectral_decompose(x, tol)?.projection_onto(interval, tol))
}

/// Absolute value `|x| = (x·x)^{1/2}`.
pub fn abs_op(x: &HermitianOperator, tol: &Tolerances) -> Result<HermitianOperator> {
    Ok(abs_decomposition(x, tol)?.reconstruct())
}

/// Spectral decomposition of `|x|`, obtained from that of `x·x`.
pub fn abs_decomposition(x: &HermitianOperator, tol: &Tolerances) -> Result<SpectralDecomposition> {
    let sq = x.square();
    let scale = sq.scale();
    let decomposition = spectral_decompose(&sq, tol)?;
    if let Some(bad) = decomposition
        .eigenvalues()
        .into_iter()
        .find(|v| *v < -tol.psd_clamp * scale)
    {
        return Err(Error::numerical(
            "x·x has a negative eigenvalue beyond roundoff",
            bad,
        ));
    }
    Ok(decomposition.map_values(|v| v.max(0.0).sqrt()))
}

/// `Σ_j b_j b_j^*` for a matrix with orthonormal columns `b_j`.
pub(crate) fn projection_from_basis(b: &DMatrix<C64>) -> Projection {
    if b.ncols() == 0 {
        return Projection::zero(b.nrows());
    }
    let p = dense::mul_adjoint_right(b, b);
    Projection::from_operator_unchecked(HermitianOperator::from_dense_unchecked(symmetrize(&p)))
}

/// The compression `b^* x b`.
pub(crate) fn compress(x: &HermitianOperator, b: &DMatrix<C64>) -> HermitianOperator {
    let xb = match &x.repr {
        Repr::Diagonal(d) => {
            let mut out = b.clone();
            for (i, mut row) in out.row_iter_mut().enumerate() {
                row *= C64::new(d[i], 0.0);
            }
            out
        }
        Repr::Dense(m) => dense::mul(m, b),
    };
    HermitianOperator::from_dense_unchecked(symmetrize(&dense::mul_adjoint_left(b, &xb)))
}

pub fn op_norm(x: &HermitianOperator) -> f64 {
    match &x.repr {
        Repr::Diagonal(d) => d.iter().fold(0.0, |a, v| a.max(v.abs())),
        Repr::Dense(m) => dense::eigvalsh(m).iter().fold(0.0, |a, v| a.max(v.abs())),
    }
}

/// `a ≤ b` in the Loewner order, i.e. `λ_min(b − a) ≥ −tol`.
pub fn loewner_leq(a: &HermitianOperator, b: &HermitianOperator, tol: f64) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok((b - a).min_eigenvalue() >= -tol)
}

fn check_square(m: &DMatrix<C64>) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Shape {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

fn symmetrize(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(m[(i, i)].re, 0.0)
        } else {
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        }
    })
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.norm()))
}

fn diag_matrix(d: &[f64]) -> DMatrix<C64> {
    let n = d.len();
    let mut m = DMatrix::zeros(n, n);
    for (i, v) in d.iter().enumerate() {
        m[(i, i)] = C64::new(*v, 0.0);
    }
    m
}

/// Row-major real and imaginary parts; the JSON form of an operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<HermitianOperator> for MatrixRecord {
    fn from(op: HermitianOperator) -> Self {
        let n = op.dim();
        let m = op.matrix();
        MatrixRecord {
            dim: n,
            re: (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect(),
        }
    }
}

impl TryFrom<MatrixRecord> for HermitianOperator {
    type Error = Error;

    fn try_from(r: MatrixRecord) -> Result<Self> {
        let n = r.dim;
        if r.re.len() != n || r.im.len() != n || r.re.iter().chain(&r.im).any(|row| row.len() != n) {
            return Err(Error::Shape {
                rows: r.re.len(),
                cols: r.re.first().map_or(0, Vec::len),
            });
        }
        HermitianOperator::new(DMatrix::from_fn(n, n, |i, j| C64::new(r.re[i][j], r.im[i][j])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn dense(rows: &[&[C64]]) -> DMatrix<C64> {
        let n = rows.len();
        DMatrix::from_fn(n, n, |i, j| rows[i][j])
    }

    fn demo_x1() -> HermitianOperator {
        HermitianOperator::from_rows(&[vec![c(2., 0.), c(0., 1.)], vec![c(0., -1.), c(2., 0.)]])
            .unwrap()
    }

    #[test]
    fn hermitize_examples() {
        let d = hermitize(&dense(&[&[c(1., 0.), c(0., 0.)], &[c(0., 0.), c(2., 0.)]])).unwrap();
        assert_eq!(d, HermitianOperator::from_diagonal(vec![1.0, 2.0]));

        let h = hermitize(&dense(&[&[c(0., 0.), c(1., 0.)], &[c(0., 0.), c(0., 0.)]])).unwrap();
        assert_eq!(h.entry(0, 1), c(0.5, 0.));
        assert_eq!(h.entry(1, 0), c(0.5, 0.));

        let z = hermitize(&dense(&[&[c(0., 0.), c(1., 0.)], &[c(-1., 0.), c(0., 0.)]])).unwrap();
        assert_eq!(z, HermitianOperator::zeros(2));
    }

    #[test]
    fn hermitize_rejects_non_square() {
        let m = DMatrix::<C64>::zeros(2, 3);
        assert!(matches!(hermitize(&m), Err(Error::Shape { rows: 2, cols: 3 })));
    }

    #[test]
    fn new_rejects_non_hermitian() {
        let m = dense(&[&[c(0., 0.), c(1., 0.)], &[c(0., 0.), c(0., 0.)]]);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn apply_function_examples() {
        let tol = Tolerances::default();
        let x = HermitianOperator::from_diagonal(vec![1.0, -2.0]);
        let sq = apply_function(&x, |v| v * v, &tol).unwrap();
        assert!(sq.approx_eq(&HermitianOperator::from_diagonal(vec![1.0, 4.0]), 1e-14));

        let y = demo_x1();
        let same = apply_function(&y, |v| v, &tol).unwrap();
        assert!(same.approx_eq(&y, 1e-12));

        let x = HermitianOperator::from_diagonal(vec![-1.0, 2.0]);
        let root = apply_function(&x.square(), f64::sqrt, &tol).unwrap();
        assert!(root.approx_eq(&x.abs().unwrap(), 1e-14));
        assert!(root.approx_eq(&HermitianOperator::from_diagonal(vec![1.0, 2.0]), 1e-14));
    }

    #[test]
    fn apply_function_domain_error() {
        let x = HermitianOperator::from_diagonal(vec![-1.0, 2.0]);
        let err = apply_function(&x, f64::sqrt, &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::Domain { eigenvalue } if eigenvalue == -1.0));
    }

    #[test]
    fn spectral_projection_examples() {
        let tol = Tolerances::default();
        let x = HermitianOperator::from_diagonal(vec![1.0, 2.0, 3.0]);
        let p = spectral_projection(&x, &RealInterval::at_least(2.0), &tol).unwrap();
        assert_eq!(p.as_operator(), &HermitianOperator::from_diagonal(vec![0., 1., 1.]));
        let p = spectral_projection(&x, &RealInterval::half_open(0.0, 2.0).unwrap(), &tol).unwrap();
        assert_eq!(p.as_operator(), &HermitianOperator::from_diagonal(vec![1., 0., 0.]));
        let p = spectral_projection(&demo_x1(), &RealInterval::whole(), &tol).unwrap();
        assert!(p.approx_eq(&HermitianOperator::identity(2), 1e-12));
    }

    #[test]
    fn abs_examples() {
        let x = HermitianOperator::from_diagonal(vec![-1.0, 2.0]);
        assert_eq!(x.abs().unwrap(), HermitianOperator::from_diagonal(vec![1.0, 2.0]));

        let flip = HermitianOperator::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]])
            .unwrap();
        assert!(flip.abs().unwrap().approx_eq(&HermitianOperator::identity(2), 1e-12));

        let p = spectral_projection(&demo_x1(), &RealInterval::at_least(2.0), &Tolerances::default())
            .unwrap();
        assert!(p.abs().unwrap().approx_eq(p.as_operator(), 1e-12));
    }

    #[test]
    fn op_norm_examples() {
        assert_eq!(HermitianOperator::from_diagonal(vec![-3.0, 2.0]).op_norm(), 3.0);
        let p = spectral_projection(&demo_x1(), &RealInterval::at_least(2.0), &Tolerances::default())
            .unwrap();
        assert_abs_diff_eq!(p.op_norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(demo_x1().op_norm(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn loewner_examples() {
        let p = spectral_projection(&demo_x1(), &RealInterval::at_least(2.0), &Tolerances::default())
            .unwrap();
        assert!(loewner_leq(&HermitianOperator::zeros(2), p.as_operator(), 1e-12).unwrap());
        assert!(!loewner_leq(&HermitianOperator::identity(2), &HermitianOperator::zeros(2), 1e-12).unwrap());
        assert!(loewner_leq(&HermitianOperator::zeros(2), &HermitianOperator::zeros(3), 0.0).is_err());
    }

    #[test]
    fn commutator_of_demo_pair_is_nonzero() {
        let x2 = HermitianOperator::from_rows(&[vec![c(1., 0.), c(0., -1.)], vec![c(0., 1.), c(2., 0.)]])
            .unwrap();
        assert!(demo_x1().commutator_norm(&x2) > 0.1);
        assert_eq!(demo_x1().commutator_norm(&demo_x1()), 0.0);
    }

    #[test]
    fn diagonal_and_dense_paths_agree() {
        let d = HermitianOperator::from_diagonal(vec![0.5, -1.0, 2.0]);
        let m = HermitianOperator::from_rows(&[
            vec![c(1., 0.), c(0., 1.), c(2., 0.)],
            vec![c(0., -1.), c(0., 0.), c(1., 1.)],
            vec![c(2., 0.), c(1., -1.), c(-1., 0.)],
        ])
        .unwrap();
        let dense_d = HermitianOperator { repr: Repr::Dense(d.matrix().into_owned()) };
        assert_eq!(d.product(&m), dense_d.product(&m));
        assert_eq!(m.product(&d), m.product(&dense_d));
        assert!(m.sandwich(&d).approx_eq(&m.sandwich(&dense_d), 1e-15));
        assert_abs_diff_eq!(d.trace_of_product(&m).re, dense_d.trace_of_product(&m).re, epsilon = 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let x = demo_x1();
        let s = serde_json::to_string(&x).unwrap();
        let back: HermitianOperator = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
    }
}
