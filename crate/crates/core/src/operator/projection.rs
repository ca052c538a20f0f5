use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::HermitianOperator;
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// An orthogonal projection: Hermitian and idempotent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianOperator", into = "HermitianOperator")]
pub struct Projection(HermitianOperator);

impl Projection {
    /// Accepts `op` if `‖op² − op‖_max ≤ tol.idempotence`.
    pub fn new(op: HermitianOperator, tol: &Tolerances) -> Result<Self> {
        let defect = op.square().max_abs_diff(&op);
        if defect > tol.idempotence {
            return Err(Error::numerical("operator is not idempotent", defect));
        }
        Ok(Self(op))
    }

    /// Rounds the spectrum of `op` onto `{0, 1}`.
    ///
    /// Eigenvalues below `tol.round_low` become 0 and above `tol.round_high` become 1.
    /// Anything in between is an error: the operator was not a projection up to
    /// roundoff.
    pub fn round(op: &HermitianOperator, tol: &Tolerances) -> Result<Self> {
        if let Some(d) = op.diagonal_values() {
            let mut rounded = Vec::with_capacity(d.len());
            for v in d {
                rounded.push(round_eigenvalue(*v, tol)?);
            }
            return Ok(Self(HermitianOperator::from_diagonal(rounded)));
        }
        let s = op.spectral_with(tol)?;
        for v in s.eigenvalues() {
            round_eigenvalue(v, tol)?;
        }
        Ok(s.projection_where(|v| v > tol.round_high))
    }

    /// Rounds the product of two commuting projections.
    pub fn product_of_commuting(a: &Projection, b: &Projection, tol: &Tolerances) -> Result<Self> {
        Self::round(&a.0.symmetric_product(&b.0), tol)
    }

    pub(crate) fn from_operator_unchecked(op: HermitianOperator) -> Self {
        Self(op)
    }

    pub fn zero(dim: usize) -> Self {
        Self(HermitianOperator::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(HermitianOperator::identity(dim))
    }

    /// Diagonal projection onto the coordinates where `mask` is set.
    pub fn from_mask(mask: &[bool]) -> Self {
        Self(HermitianOperator::from_diagonal(
            mask.iter().map(|b| if *b { 1.0 } else { 0.0 }).collect(),
        ))
    }

    /// `1 − p`.
    pub fn complement(&self) -> Projection {
        Self(&HermitianOperator::identity(self.dim()) - &self.0)
    }

    pub fn rank(&self) -> usize {
        self.0.trace_raw().re.round().max(0.0) as usize
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.0.scale() <= tol
    }

    pub fn as_operator(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn into_operator(self) -> HermitianOperator {
        self.0
    }
}

fn round_eigenvalue(v: f64, tol: &Tolerances) -> Result<f64> {
    if v < tol.round_low {
        Ok(0.0)
    } else if v > tol.round_high {
        Ok(1.0)
    } else {
        Err(Error::numerical(
            format!("eigenvalue {v} cannot be rounded to a projection"),
            v.min(1.0 - v),
        ))
    }
}

impl Deref for Projection {
    type Target = HermitianOperator;

    fn deref(&self) -> &HermitianOperator {
        &self.0
    }
}

impl From<Projection> for HermitianOperator {
    fn from(p: Projection) -> Self {
        p.0
    }
}

impl TryFrom<HermitianOperator> for Projection {
    type Error = Error;

    fn try_from(op: HermitianOperator) -> Result<Self> {
        Projection::new(op, &Tolerances::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_snaps_near_binary_spectra() {
        let tol = Tolerances::default();
        let p = Projection::round(&HermitianOperator::from_diagonal(vec![1e-13, 1.0 - 1e-13, 0.05]), &tol)
            .unwrap();
        assert_eq!(p.as_operator(), &HermitianOperator::from_diagonal(vec![0., 1., 0.]));
    }

    #[test]
    fn rounding_refuses_intermediate_eigenvalues() {
        let tol = Tolerances::default();
        let err = Projection::round(&HermitianOperator::from_diagonal(vec![0.5, 1.0]), &tol).unwrap_err();
        assert!(err.is_numerical());
    }

    #[test]
    fn new_checks_idempotence() {
        let tol = Tolerances::default();
        assert!(Projection::new(HermitianOperator::from_diagonal(vec![1.0, 0.0]), &tol).is_ok());
        assert!(Projection::new(HermitianOperator::from_diagonal(vec![2.0, 0.0]), &tol).is_err());
    }

    #[test]
    fn complement_examples() {
        let p = Projection::from_mask(&[true, false]);
        assert_eq!(p.complement(), Projection::from_mask(&[false, true]));
        assert_eq!(Projection::identity(3).complement(), Projection::zero(3));
        assert_eq!(p.complement().complement(), p);
    }
}
