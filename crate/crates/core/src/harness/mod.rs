//! Seeded random instances, a registry of randomized properties, suite runners and
//! a brute-force classical oracle.

pub mod crosscheck;
pub mod inequalities;
pub mod instance;
pub mod oracle;
pub mod registry;
pub mod suite;

pub use crosscheck::{crosscheck_table, oracle_crosscheck, CrosscheckConfig, ORACLE_TOLERANCE};
pub use inequalities::{run_inequality_once, Inequality, InequalityConfig};
pub use instance::{random_instance, random_rational_table, random_table, trial_seed, InstanceSpec};
pub use oracle::{classical_oracle, OracleProbability, OracleQuery, DEFAULT_ENUMERATION_CAP};
pub use registry::{find_property, meet_trace_report, properties, Property};
pub use suite::{run_inequality, run_property, Counterexample, SuiteOutcome, SuiteReport, Trial, TrialRecord};
