//! Fixed instances shared by the benchmarks in `benches/`.

use ncprob::harness::{random_instance, InstanceSpec};
use ncprob::tolerance::DEFAULT_DIM_CAP;
use ncprob::IndependentSequence;

/// Mean-zero random local variables on `⊗ ℂ^{d_k}`.
pub fn tensor_instance(dims: &[usize], seed: u64) -> IndependentSequence {
    random_instance(&InstanceSpec::new(dims.to_vec(), seed), DEFAULT_DIM_CAP).expect("dimension within cap")
}

/// Random instance whose partial sums commute, as the threshold-`3λ` chain requires.
pub fn commuting_instance(dims: &[usize], seed: u64) -> IndependentSequence {
    let spec = InstanceSpec::new(dims.to_vec(), seed).commuting_tail().mean_zero(false);
    random_instance(&spec, DEFAULT_DIM_CAP).expect("dimension within cap")
}
