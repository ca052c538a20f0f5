//! The matrix algebra `M_d(ℂ)` with its normalized trace, viewed as a
//! noncommutative probability space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{abs_op, spectral_decompose, spectral_projection, HermitianOperator, Projection, RealInterval};
use crate::report::InequalityReport;
use crate::tolerance::Tolerances;

/// `(M_d(ℂ), τ)` with `τ = tr / d`, optionally carrying a tensor factorization
/// `ℂ^d = ℂ^{d_1} ⊗ … ⊗ ℂ^{d_n}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NcSpace {
    dim: usize,
    factor_dims: Option<Vec<usize>>,
}

impl NcSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("space dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            factor_dims: None,
        })
    }

    /// Tensor-product space; fails if the product exceeds `cap`.
    pub fn tensor(factor_dims: Vec<usize>, cap: usize) -> Result<Self> {
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return Err(Error::InvalidArgument("factor dimensions must be positive".into()));
        }
        let mut dim: usize = 1;
        for d in &factor_dims {
            dim = dim.saturating_mul(*d);
        }
        if dim > cap {
            return Err(Error::DimensionCap { dim, cap });
        }
        Ok(Self {
            dim,
            factor_dims: Some(factor_dims),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factor_dims(&self) -> Option<&[usize]> {
        self.factor_dims.as_deref()
    }

    fn check(&self, x: &HermitianOperator) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(())
    }

    /// `τ(x)`. The imaginary part of the trace of a Hermitian matrix is zero.
    pub fn trace(&self, x: &HermitianOperator) -> Result<f64> {
        self.check(x)?;
        Ok(x.trace_raw().re / self.dim as f64)
    }

    /// `τ(ab)` as a complex number.
    pub fn trace_of_product(&self, a: &HermitianOperator, b: &HermitianOperator) -> Result<num_complex::Complex64> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.trace_of_product(b) / self.dim as f64)
    }

    /// `τ(p)` for a projection.
    /// Clamped to `[0, 1]`; a projection's trace leaves it only by roundoff.
    pub fn prob(&self, p: &Projection) -> Result<f64> {
        Ok(self.trace(p)?.clamp(0.0, 1.0))
    }

    /// `var(x) = τ((x − τ(x))²)`.
    pub fn variance(&self, x: &HermitianOperator) -> Result<f64> {
        let centered = x.shifted(-self.trace(x)?);
        let v = centered.trace_of_product(&centered).re / self.dim as f64;
        Ok(v.max(0.0))
    }

    /// `Prob(x ≥ t) = τ(1_{[t,∞)}(x))`.
    pub fn tail_prob(&self, x: &HermitianOperator, t: f64, tol: &Tolerances) -> Result<f64> {
        self.check(x)?;
        self.prob(&spectral_projection(x, &RealInterval::at_least(t), tol)?)
    }

    /// Markov: `τ(1_{[t,∞)}(x)) ≤ τ(x)/t` for `x ≥ 0`, `t > 0`.
    pub fn markov_check(&self, x: &HermitianOperator, t: f64, tol: &Tolerances) -> Result<InequalityReport> {
        self.check(x)?;
        if !(t > 0.0) {
            return Err(Error::Precondition(format!("Markov threshold must be positive, got {t}")));
        }
        let min = x.min_eigenvalue();
        if min < -tol.check * x.scale().max(1.0) {
            return Err(Error::Precondition(format!(
                "Markov inequality needs x >= 0, smallest eigenvalue is {min}"
            )));
        }
        let lhs = self.tail_prob(x, t, tol)?;
        let rhs = self.trace(x)? / t;
        Ok(InequalityReport::upper("markov", lhs, rhs, tol.check).with_param("t", t))
    }

    /// Chebyshev: `τ(1_{[λ,∞)}(|x − τ(x)|)) ≤ var(x)/λ²`.
    pub fn chebyshev_check(&self, x: &HermitianOperator, lambda: f64, tol: &Tolerances) -> Result<InequalityReport> {
        self.check(x)?;
        if !(lambda > 0.0) {
            return Err(Error::Precondition(format!("lambda must be positive, got {lambda}")));
        }
        let deviation = abs_op(&x.shifted(-self.trace(x)?), tol)?;
        let lhs = self.tail_prob(&deviation, lambda, tol)?;
        let rhs = self.variance(x)? / (lambda * lambda);
        Ok(InequalityReport::upper("chebyshev", lhs, rhs, tol.check).with_param("lambda", lambda))
    }

    /// Audits `τ(f(x) g(y)) = τ(f(x)) τ(g(y))` over all pairs of eigenprojections of
    /// `x` and `y`. These generate `W*(x)` and `W*(y)` as linear spans.
    pub fn check_independence(
        &self,
        x: &HermitianOperator,
        y: &HermitianOperator,
        tol: f64,
        tolerances: &Tolerances,
    ) -> Result<bool> {
        self.check(x)?;
        self.check(y)?;
        let ex: Vec<Projection> = spectral_decompose(x, tolerances)?.eigenprojections().collect();
        let ey: Vec<Projection> = spectral_decompose(y, tolerances)?.eigenprojections().collect();
        let tx: Vec<f64> = ex.iter().map(|p| self.prob(p)).collect::<Result<_>>()?;
        let ty: Vec<f64> = ey.iter().map(|p| self.prob(p)).collect::<Result<_>>()?;
        for (p, a) in ex.iter().zip(&tx) {
            for (q, b) in ey.iter().zip(&ty) {
                let joint = self.trace_of_product(p, q)?;
                if (joint.re - a * b).abs() > tol || joint.im.abs() > tol {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// An ordered family `x_1, …, x_n` of Hermitian operators on one space.
///
/// Built by [`tensor_lift`], `x_k` acts on the `k`-th tensor factor only, which makes
/// the family fully independent with respect to `τ`. [`IndependentSequence::from_family`]
/// wraps an arbitrary family without that guarantee.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependentSequence {
    space: NcSpace,
    locals: Vec<HermitianOperator>,
    lifted: Vec<HermitianOperator>,
}

impl IndependentSequence {
    /// A family on a single space with no tensor structure. Independence is not
    /// guaranteed; constructions that need it only check their stated preconditions.
    pub fn from_family(ops: Vec<HermitianOperator>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty operator family".into()))?;
        let space = NcSpace::new(first.dim())?;
        for x in &ops {
            space.check(x)?;
        }
        Ok(Self {
            space,
            locals: ops.clone(),
            lifted: ops,
        })
    }

    pub fn space(&self) -> &NcSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.lifted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lifted.is_empty()
    }

    pub fn is_tensor(&self) -> bool {
        self.space.factor_dims.is_some()
    }

    pub fn locals(&self) -> &[HermitianOperator] {
        &self.locals
    }

    /// The operators `x_k` on the full space.
    pub fn lifted(&self) -> &[HermitianOperator] {
        &self.lifted
    }

    /// `s_1, …, s_n` with `s_k = x_1 + … + x_k`.
    pub fn partial_sums(&self) -> Vec<HermitianOperator> {
        let mut sums: Vec<HermitianOperator> = Vec::with_capacity(self.len());
        for x in &self.lifted {
            let next = match sums.last() {
                Some(prev) => prev + x,
                None => x.clone(),
            };
            sums.push(next);
        }
        sums
    }

    /// Subtracts `τ(x_k)` from every variable.
    pub fn centered(&self) -> Self {
        let center = |x: &HermitianOperator| x.shifted(-x.trace_raw().re / x.dim() as f64);
        Self {
            space: self.space.clone(),
            locals: self.locals.iter().map(center).collect(),
            lifted: self.lifted.iter().map(center).collect(),
        }
    }

    pub fn variances(&self) -> Result<Vec<f64>> {
        self.lifted.iter().map(|x| self.space.variance(x)).collect()
    }
}

/// Places `locals[k]` on the `k`-th tensor factor:
/// `x_k = 1 ⊗ … ⊗ a_k ⊗ … ⊗ 1`.
///
/// With `center`, each `a_k` is replaced by `a_k − τ(a_k)` first.
pub fn tensor_lift(locals: Vec<HermitianOperator>, center: bool, cap: usize) -> Result<IndependentSequence> {
    if locals.is_empty() {
        return Err(Error::InvalidArgument("tensor lift of an empty family".into()));
    }
    let locals: Vec<HermitianOperator> = if center {
        locals
            .iter()
            .map(|a| a.shifted(-a.trace_raw().re / a.dim() as f64))
            .collect()
    } else {
        locals
    };
    let dims: Vec<usize> = locals.iter().map(HermitianOperator::dim).collect();
    let space = NcSpace::tensor(dims.clone(), cap)?;

    let mut lifted = Vec::with_capacity(locals.len());
    for (k, a) in locals.iter().enumerate() {
        let left: usize = dims[..k].iter().product();
        let right: usize = dims[k + 1..].iter().product();
        let mut x = a.clone();
        if left > 1 {
            x = HermitianOperator::identity(left).kron(&x);
        }
        if right > 1 {
            x = x.kron(&HermitianOperator::identity(right));
        }
        lifted.push(x);
    }
    Ok(IndependentSequence {
        space,
        locals,
        lifted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::C64;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn x1() -> HermitianOperator {
        HermitianOperator::from_rows(&[
            vec![C64::new(2., 0.), C64::new(0., 1.)],
            vec![C64::new(0., -1.), C64::new(2., 0.)],
        ])
        .unwrap()
    }

    #[test]
    fn trace_examples() {
        let s2 = NcSpace::new(2).unwrap();
        assert_eq!(NcSpace::new(4).unwrap().trace(&HermitianOperator::identity(4)).unwrap(), 1.0);
        assert_eq!(s2.trace(&HermitianOperator::from_diagonal(vec![1., 3.])).unwrap(), 2.0);
        assert_eq!(s2.trace(&x1()).unwrap(), 2.0);
        assert!(matches!(
            s2.trace(&HermitianOperator::identity(3)),
            Err(Error::Dimension { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn variance_examples() {
        let s = NcSpace::new(2).unwrap();
        assert_eq!(s.variance(&HermitianOperator::identity(2)).unwrap(), 0.0);
        assert_eq!(s.variance(&HermitianOperator::from_diagonal(vec![1., -1.])).unwrap(), 1.0);
        assert_eq!(s.variance(&HermitianOperator::from_diagonal(vec![2., 0.])).unwrap(), 1.0);
    }

    #[test]
    fn tail_examples() {
        let s = NcSpace::new(2).unwrap();
        let x = HermitianOperator::from_diagonal(vec![0., 4.]);
        assert_eq!(s.tail_prob(&x, 2.0, &tol()).unwrap(), 0.5);
        assert_eq!(s.tail_prob(&x, -1.0, &tol()).unwrap(), 1.0);
        assert_eq!(s.tail_prob(&x, 4.5, &tol()).unwrap(), 0.0);
    }

    #[test]
    fn markov_examples() {
        let s = NcSpace::new(2).unwrap();
        let r = s.markov_check(&HermitianOperator::from_diagonal(vec![0., 4.]), 2.0, &tol()).unwrap();
        assert_eq!((r.lhs, r.rhs, r.pass), (0.5, 1.0, true));
        let r = s.markov_check(&HermitianOperator::identity(2).scaled(3.0), 3.0, &tol()).unwrap();
        assert_eq!((r.lhs, r.rhs, r.pass), (1.0, 1.0, true));
        let err = s.markov_check(&HermitianOperator::from_diagonal(vec![-1., 4.]), 2.0, &tol());
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn chebyshev_examples() {
        let s = NcSpace::new(2).unwrap();
        let x = HermitianOperator::from_diagonal(vec![1., -1.]);
        let r = s.chebyshev_check(&x, 2.0, &tol()).unwrap();
        assert_eq!((r.lhs, r.rhs, r.pass), (0.0, 0.25, true));
        let r = s.chebyshev_check(&x, 1.0, &tol()).unwrap();
        assert_eq!((r.lhs, r.rhs, r.pass), (1.0, 1.0, true));
    }

    #[test]
    fn tensor_lift_examples() {
        let seq = tensor_lift(
            vec![HermitianOperator::from_diagonal(vec![1., -1.]), HermitianOperator::from_diagonal(vec![2., 0.])],
            false,
            1024,
        )
        .unwrap();
        let s = seq.space();
        assert_eq!(s.dim(), 4);
        let (x, y) = (&seq.lifted()[0], &seq.lifted()[1]);
        let joint = s.trace_of_product(x, y).unwrap();
        assert_eq!(joint.re, s.trace(x).unwrap() * s.trace(y).unwrap());
        assert_eq!(joint.re, 0.0);

        let single = tensor_lift(vec![x1()], false, 1024).unwrap();
        assert_eq!(single.lifted()[0], x1());

        let coins = tensor_lift(vec![HermitianOperator::from_diagonal(vec![1., -1.]); 2], false, 1024).unwrap();
        let sum = &coins.lifted()[0] + &coins.lifted()[1];
        assert_abs_diff_eq!(coins.space().variance(&sum).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn tensor_lift_respects_cap() {
        let r = tensor_lift(vec![HermitianOperator::identity(4); 3], false, 32);
        assert!(matches!(r, Err(Error::DimensionCap { dim: 64, cap: 32 })));
    }

    #[test]
    fn lifted_dense_factors_commute_and_factorize() {
        let seq = tensor_lift(vec![x1(), x1().scaled(-0.5)], true, 1024).unwrap();
        let (x, y) = (&seq.lifted()[0], &seq.lifted()[1]);
        assert!(x.commutator_norm(y) <= 1e-12);
        assert!(seq.space().trace(x).unwrap().abs() < 1e-15);
        assert!(seq.space().check_independence(x, y, 1e-10, &tol()).unwrap());
    }

    #[test]
    fn independence_examples() {
        let s = NcSpace::new(2).unwrap();
        let x = HermitianOperator::from_diagonal(vec![1., -1.]);
        assert!(!s.check_independence(&x, &x, 1e-10, &tol()).unwrap());
        let p = HermitianOperator::from_diagonal(vec![1., 0.]);
        // τ(pp) = 1/2 but τ(p)² = 1/4
        assert!(!s.check_independence(&p, &p, 1e-10, &tol()).unwrap());
    }
}
