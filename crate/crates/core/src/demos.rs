//! Two fixed instances: a family whose partial sums commute with the total sum
//! although the variables do not commute pairwise, and two fair coins.

use serde::Serialize;

use crate::classical::{classical_embed, ClassicalTable};
use crate::cuculescu::{etemadi, hajek_renyi, kolmogorov_type, EtemadiResult, HajekRenyiResult, TwoSidedResult};
use crate::error::Result;
use crate::operator::{HermitianOperator, C64};
use crate::space::IndependentSequence;
use crate::tolerance::Tolerances;

/// Thresholds at which the commuting-tail demo runs the `3λ` chain.
pub const REMARK_LAMBDAS: [f64; 4] = [0.5, 1.0, 2.0, 3.0];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Four 2×2 Hermitian matrices summing to `8·1`. Here `[x_1, x_2] ≠ 0`, but every
/// partial sum commutes with the total.
pub fn remark_matrices() -> Vec<HermitianOperator> {
    let rows = [
        [[c(2.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(2.0, 0.0)]],
        [[c(1.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(2.0, 0.0)]],
        [[c(2.0, 0.0), c(1.0, 1.0)], [c(1.0, -1.0), c(3.0, 0.0)]],
        [[c(3.0, 0.0), c(-1.0, -1.0)], [c(-1.0, 1.0), c(1.0, 0.0)]],
    ];
    rows.iter()
        .map(|m| HermitianOperator::from_rows(&[m[0].to_vec(), m[1].to_vec()]).expect("Hermitian by construction"))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RemarkRun {
    pub lambda: f64,
    pub result: EtemadiResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct RemarkDemo {
    pub locals: Vec<HermitianOperator>,
    pub total: HermitianOperator,
    /// `s_n` equals `8·1` entry by entry.
    pub total_is_eight: bool,
    /// `‖[x_1, x_2]‖`.
    pub first_commutator: f64,
    /// `‖[s_k, s_n]‖` for `k < n`.
    pub tail_commutators: Vec<f64>,
    pub runs: Vec<RemarkRun>,
}

impl RemarkDemo {
    pub fn pass(&self) -> bool {
        self.total_is_eight
            && self.first_commutator > 0.1
            && self.tail_commutators.iter().all(|v| *v <= 1e-12)
            && self.runs.iter().all(|r| r.result.pass())
    }
}

pub fn remark_demo(lambdas: &[f64], tol: &Tolerances) -> Result<RemarkDemo> {
    let locals = remark_matrices();
    let seq = IndependentSequence::from_family(locals.clone())?;
    let sums = seq.partial_sums();
    let total = sums[sums.len() - 1].clone();
    let eight = HermitianOperator::from_diagonal(vec![8.0, 8.0]);
    let total_is_eight = (0..2).all(|i| (0..2).all(|j| total.entry(i, j) == eight.entry(i, j)));
    let first_commutator = locals[0].commutator_norm(&locals[1]);
    let tail_commutators = sums[..sums.len() - 1].iter().map(|s| s.commutator_norm(&total)).collect();
    let runs = lambdas
        .iter()
        .map(|&lambda| {
            Ok(RemarkRun {
                lambda,
                result: etemadi(&seq, lambda, tol)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(RemarkDemo {
        locals,
        total,
        total_is_eight,
        first_commutator,
        tail_commutators,
        runs,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoCoinsDemo {
    pub lambda: f64,
    pub locals: Vec<HermitianOperator>,
    pub hajek_renyi: HajekRenyiResult,
    pub kolmogorov_type: TwoSidedResult,
    pub etemadi: EtemadiResult,
}

impl TwoCoinsDemo {
    pub fn pass(&self) -> bool {
        self.hajek_renyi.pass() && self.kolmogorov_type.pass() && self.etemadi.pass()
    }
}

/// All three constructions on `x_1 = diag(1,1,−1,−1)`, `x_2 = diag(1,−1,1,−1)`.
pub fn two_coins_demo(lambda: f64, tol: &Tolerances) -> Result<TwoCoinsDemo> {
    let seq = classical_embed(&ClassicalTable::fair_coins(2), tol.dim_cap)?;
    Ok(TwoCoinsDemo {
        lambda,
        locals: seq.lifted().to_vec(),
        hajek_renyi: hajek_renyi(&seq, &[1.0, 1.0], lambda, tol)?,
        kolmogorov_type: kolmogorov_type(&seq, lambda, tol)?,
        etemadi: etemadi(&seq, lambda, tol)?,
    })
}
