//! Seeded random instances.

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::classical::{classical_embed, ClassicalTable, ClassicalVariable, Probability};
use crate::error::{Error, Result};
use crate::operator::{hermitize, HermitianOperator, Projection, C64};
use crate::space::{tensor_lift, IndependentSequence};

/// Shape and model of a random independent sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    pub factor_dims: Vec<usize>,
    #[serde(default = "default_true")]
    pub mean_zero: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounded_by: Option<f64>,
    /// Diagonal locals coming from a classical table with uniform weights.
    #[serde(default)]
    pub classical: bool,
    /// Locals `U diag(g) U^*` with a random unitary per factor.
    #[serde(default)]
    pub commuting_tail: bool,
    /// With `classical`, every variable is a fair ±1 coin.
    #[serde(default)]
    pub fair_coins: bool,
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

impl InstanceSpec {
    pub fn new(factor_dims: Vec<usize>, seed: u64) -> Self {
        Self {
            n: factor_dims.len(),
            factor_dims,
            mean_zero: true,
            bounded_by: None,
            classical: false,
            commuting_tail: false,
            fair_coins: false,
            seed,
        }
    }

    pub fn fair_coins(n: usize, seed: u64) -> Self {
        Self {
            classical: true,
            fair_coins: true,
            ..Self::new(vec![2; n], seed)
        }
    }

    pub fn classical(mut self) -> Self {
        self.classical = true;
        self
    }

    pub fn commuting_tail(mut self) -> Self {
        self.commuting_tail = true;
        self
    }

    pub fn mean_zero(mut self, on: bool) -> Self {
        self.mean_zero = on;
        self
    }

    pub fn bounded_by(mut self, c: f64) -> Self {
        self.bounded_by = Some(c);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn dim(&self) -> usize {
        self.factor_dims.iter().fold(1usize, |a, d| a.saturating_mul(*d))
    }

    pub fn validate(&self, cap: usize) -> Result<()> {
        if self.n == 0 || self.n != self.factor_dims.len() {
            return Err(Error::InvalidArgument(format!(
                "n = {} but {} factor dimensions given",
                self.n,
                self.factor_dims.len()
            )));
        }
        if self.factor_dims.contains(&0) {
            return Err(Error::InvalidArgument("factor dimensions must be positive".into()));
        }
        if self.fair_coins && (!self.classical || self.factor_dims.iter().any(|d| *d != 2)) {
            return Err(Error::InvalidArgument("fair coins need classical factors of dimension 2".into()));
        }
        if let Some(c) = self.bounded_by {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidArgument(format!("bound must be positive, got {c}")));
            }
        }
        if self.dim() > cap {
            return Err(Error::DimensionCap { dim: self.dim(), cap });
        }
        Ok(())
    }
}

/// Seed of trial `trial` in a run started from `base`; independent of evaluation order.
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(trial);
    rng.next_u64()
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Builds the sequence described by `spec`; deterministic in `spec.seed`.
pub fn random_instance(spec: &InstanceSpec, cap: usize) -> Result<IndependentSequence> {
    spec.validate(cap)?;
    if spec.classical {
        return classical_embed(&random_table(spec)?, cap);
    }
    let mut rng = rng_from_seed(spec.seed);
    let locals = spec
        .factor_dims
        .iter()
        .map(|d| {
            let a = if spec.commuting_tail {
                random_with_random_eigenbasis(&mut rng, *d)
            } else {
                random_hermitian(&mut rng, *d)
            };
            let a = if spec.mean_zero { center(&a) } else { a };
            bound(a, spec.bounded_by)
        })
        .collect();
    tensor_lift(locals, false, cap)
}

/// The classical table behind a `classical` spec: `d_k` equally likely outcomes per
/// variable, or fair ±1 coins.
pub fn random_table(spec: &InstanceSpec) -> Result<ClassicalTable> {
    if !spec.classical {
        return Err(Error::InvalidArgument("spec is not classical".into()));
    }
    if spec.fair_coins {
        return Ok(ClassicalTable::fair_coins(spec.n));
    }
    let mut rng = rng_from_seed(spec.seed);
    let variables = spec
        .factor_dims
        .iter()
        .map(|d| {
            let outcomes: Vec<f64> = (0..*d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            ClassicalVariable::uniform(outcomes)
        })
        .collect();
    let table = ClassicalTable::new(variables)?;
    let table = if spec.mean_zero { table.centered() } else { table };
    Ok(bound_table(table, spec.bounded_by))
}

/// A table with non-uniform rational weights: support sizes in `2..=max_support`,
/// denominators in `support..=max_denominator`.
pub fn random_rational_table(
    rng: &mut impl Rng,
    n: usize,
    max_support: usize,
    max_denominator: u64,
    mean_zero: bool,
) -> Result<ClassicalTable> {
    let mut variables = Vec::with_capacity(n);
    for _ in 0..n {
        let support = rng.random_range(2..=max_support.max(2));
        let denom = rng.random_range(support as u64..=max_denominator.max(support as u64));
        // a random composition of `denom` into `support` positive parts
        let mut counts = vec![1u64; support];
        for _ in 0..denom - support as u64 {
            counts[rng.random_range(0..support)] += 1;
        }
        let outcomes = (0..support).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        variables.push(ClassicalVariable {
            outcomes,
            probs: counts.iter().map(|c| Probability::Ratio(*c, denom)).collect(),
        });
    }
    let table = ClassicalTable::new(variables)?;
    Ok(if mean_zero { table.centered() } else { table })
}

/// `(G + G^*)/2` with independent standard complex Gaussian entries.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> HermitianOperator {
    hermitize(&gaussian_matrix(rng, dim, dim)).expect("square")
}

/// `G G^*`, positive semidefinite.
pub fn random_psd(rng: &mut impl Rng, dim: usize) -> HermitianOperator {
    let g = gaussian_matrix(rng, dim, dim);
    hermitize(&(&g * g.adjoint())).expect("square")
}

/// Haar-distributed unitary from the QR decomposition of a Gaussian matrix.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> DMatrix<C64> {
    let qr = gaussian_matrix(rng, dim, dim).qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            col *= d.conj() / d.norm();
        }
    }
    q
}

/// Projection onto the span of `rank` random orthonormal vectors.
pub fn random_projection(rng: &mut impl Rng, dim: usize, rank: usize) -> Projection {
    let u = random_unitary(rng, dim);
    projection_onto_columns(&u.columns(0, rank.min(dim)).into_owned())
}

/// A random unit vector in `ℂ^dim`.
pub fn random_unit_vector(rng: &mut impl Rng, dim: usize) -> nalgebra::DVector<C64> {
    let g = gaussian_matrix(rng, dim, 1);
    let v = g.column(0).into_owned();
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

pub(crate) fn projection_onto_columns(b: &DMatrix<C64>) -> Projection {
    crate::operator::projection_from_basis(b)
}

fn random_with_random_eigenbasis(rng: &mut impl Rng, dim: usize) -> HermitianOperator {
    let u = random_unitary(rng, dim);
    let g: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let scaled = DMatrix::from_fn(dim, dim, |i, j| u[(i, j)] * g[j]);
    hermitize(&(scaled * u.adjoint())).expect("square")
}

fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

fn center(a: &HermitianOperator) -> HermitianOperator {
    a.shifted(-a.trace_raw().re / a.dim() as f64)
}

fn bound(a: HermitianOperator, c: Option<f64>) -> HermitianOperator {
    match c {
        Some(c) if a.op_norm() > c => {
            let s = c / a.op_norm();
            a.scaled(s)
        }
        _ => a,
    }
}

fn bound_table(mut table: ClassicalTable, c: Option<f64>) -> ClassicalTable {
    if let Some(c) = c {
        for v in &mut table.variables {
            let m = v.outcomes.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            if m > c {
                let s = c / m;
                v.outcomes.iter_mut().for_each(|x| *x *= s);
            }
        }
    }
    table
}
