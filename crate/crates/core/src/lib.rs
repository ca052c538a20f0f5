//! Finite-dimensional noncommutative probability.
//!
//! Random variables are Hermitian matrices on `ℂ^d` and probabilities are values of
//! the normalized trace `τ = tr/d` on spectral projections. On top of that the crate
//! builds Cuculescu-type projection chains for maximal inequalities
//! ([`cuculescu`]), checks them against a brute-force classical oracle
//! ([`harness::oracle`]) and runs randomized property suites ([`harness`]).

pub mod classical;
pub mod cuculescu;
pub mod demos;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod operator;
pub mod report;
pub mod space;
pub mod tolerance;

pub use classical::{classical_embed, ClassicalTable, ClassicalVariable};
pub use cuculescu::{
    etemadi, hajek_renyi, kolmogorov_maximal, kolmogorov_type, series_divergence_witness, CuculescuTrace,
    EtemadiResult, HajekRenyiResult, SeriesWitness, TwoSidedResult,
};
pub use error::{Error, Result};
pub use lattice::{complement, join, meet};
pub use operator::{
    abs_decomposition, abs_op, apply_function, hermitize, loewner_leq, op_norm, spectral_decompose, spectral_projection,
    HermitianOperator, Projection, RealInterval, SpectralDecomposition, C64,
};
pub use report::InequalityReport;
pub use space::{tensor_lift, IndependentSequence, NcSpace};
pub use tolerance::Tolerances;
