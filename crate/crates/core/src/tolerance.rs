use serde::{Deserialize, Serialize};

/// Default cap on the dimension of a tensor-product space.
pub const DEFAULT_DIM_CAP: usize = 1024;

/// Numerical thresholds used across the crate.
///
/// Relative tolerances are scaled as documented on each field. Every value can be
/// overridden from a run configuration; missing fields fall back to the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Hermiticity check, relative to the largest absolute entry.
    pub hermitian: f64,
    /// Eigenvalues closer than `cluster * (spectral diameter + 1)` share one eigenprojection.
    pub cluster: f64,
    /// Eigenvalues within `snap * (|endpoint| + 1)` of an interval endpoint are moved onto it.
    pub snap: f64,
    /// Eigenvalues below this are rounded to 0 when rounding to a projection.
    pub round_low: f64,
    /// Eigenvalues above this are rounded to 1 when rounding to a projection.
    pub round_high: f64,
    /// Negative eigenvalues down to `-psd_clamp * scale` are clamped to zero before a square root.
    pub psd_clamp: f64,
    /// Singular values below `rank * sigma_max` are treated as zero in a join.
    pub rank: f64,
    /// Idempotence tolerance for projections.
    pub idempotence: f64,
    /// Relative commutator tolerance: `‖[a,b]‖ <= commute * ‖a‖ ‖b‖`.
    pub commute: f64,
    /// Absolute tolerance on `|τ(x_k)|` for mean-zero preconditions.
    pub centered: f64,
    /// Slack allowed when checking inequalities.
    pub check: f64,
    /// The refined Etemadi bound is asserted only when `m < 1 − refined_margin`.
    pub refined_margin: f64,
    /// Tensor dimension cap.
    pub dim_cap: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            cluster: 1e-8,
            snap: 1e-9,
            round_low: 0.1,
            round_high: 0.9,
            psd_clamp: 1e-10,
            rank: 1e-9,
            idempotence: 1e-9,
            commute: 1e-8,
            centered: 1e-9,
            check: 1e-8,
            refined_margin: 1e-6,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

impl Tolerances {
    pub fn with_check(mut self, check: f64) -> Self {
        self.check = check;
        self
    }

    pub fn with_dim_cap(mut self, cap: usize) -> Self {
        self.dim_cap = cap;
        self
    }
}
