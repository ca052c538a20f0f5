//! Running seeded trials and aggregating their reports.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::inequalities::{inequality_trial, Inequality, InequalityConfig};
use super::instance::{rng_from_seed, trial_seed};
use super::registry::find_property;
use crate::error::{Error, Result};
use crate::report::{to_json_string, write_json, InequalityReport, VERSION};
use crate::tolerance::Tolerances;

/// The outcome of one trial together with the instance it was run on.
#[derive(Debug)]
pub struct Trial {
    pub instance: serde_json::Value,
    pub outcome: Result<Vec<InequalityReport>>,
}

impl Trial {
    pub fn ok(instance: serde_json::Value, reports: Vec<InequalityReport>) -> Self {
        Self {
            instance,
            outcome: Ok(reports),
        }
    }

    pub fn failed(instance: serde_json::Value, error: Error) -> Self {
        Self {
            instance,
            outcome: Err(error),
        }
    }
}

/// Summary of a suite run; `elapsed` is left out of the JSON so reruns compare equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub property: String,
    pub trials: usize,
    /// Trials with at least one failing report.
    pub failures: usize,
    /// Trials that raised an error instead of producing reports.
    pub errors: usize,
    /// Errors from the numerical machinery, a subset of `errors`.
    pub numerical_errors: usize,
    /// Smallest slack over all applicable reports.
    pub worst_slack: Option<f64>,
    pub seed: u64,
    #[serde(skip)]
    pub elapsed: Duration,
    pub version: String,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.failures == 0 && self.errors == 0
    }
}

/// Per-trial record kept in the full output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub pass: bool,
    pub reports: Vec<InequalityReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// The generated instance; kept in memory for tabular output, not serialized.
    #[serde(skip)]
    pub instance: serde_json::Value,
}

/// Everything needed to replay a failing trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub property: String,
    pub trial: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub reports: Vec<InequalityReport>,
    pub instance: serde_json::Value,
    pub version: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub report: SuiteReport,
    pub records: Vec<TrialRecord>,
    pub counterexamples: Vec<Counterexample>,
}

impl SuiteOutcome {
    pub fn pass(&self) -> bool {
        self.report.pass()
    }

    /// All reports of all trials, in trial order.
    pub fn reports(&self) -> impl Iterator<Item = &InequalityReport> {
        self.records.iter().flat_map(|r| &r.reports)
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    /// Writes one file per counterexample into `dir` and returns their paths.
    pub fn write_counterexamples(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        if self.counterexamples.is_empty() {
            return Ok(Vec::new());
        }
        fs::create_dir_all(dir)?;
        self.counterexamples
            .iter()
            .map(|c| {
                let path = dir.join(format!("{}-trial{}-seed{}.json", c.property, c.trial, c.seed));
                let mut buf = Vec::new();
                write_json(&mut buf, c).map_err(io::Error::other)?;
                fs::write(&path, buf)?;
                Ok(path)
            })
            .collect()
    }
}

/// Runs `trials` independent trials. Trial `i` draws from a generator seeded with
/// `trial_seed(base_seed, i)`, so results do not depend on scheduling.
pub fn run_trials(
    property: &str,
    trials: usize,
    base_seed: u64,
    trial: impl Fn(&mut ChaCha8Rng) -> Trial + Sync,
) -> SuiteOutcome {
    let start = Instant::now();
    let results: Vec<(usize, u64, Trial)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(base_seed, i as u64);
            let mut rng = rng_from_seed(seed);
            (i, seed, trial(&mut rng))
        })
        .collect();

    let mut records = Vec::with_capacity(trials);
    let mut counterexamples = Vec::new();
    let (mut failures, mut errors, mut numerical_errors) = (0, 0, 0);
    let mut worst_slack: Option<f64> = None;
    for (i, seed, t) in results {
        let (reports, error) = match t.outcome {
            Ok(reports) => (reports.into_iter().map(|r| r.with_seed(seed)).collect::<Vec<_>>(), None),
            Err(e) => {
                errors += 1;
                if e.is_numerical() {
                    numerical_errors += 1;
                }
                (Vec::new(), Some(e.to_string()))
            }
        };
        for r in reports.iter().filter(|r| r.is_applicable()) {
            worst_slack = Some(worst_slack.map_or(r.slack, |w| w.min(r.slack)));
        }
        let pass = error.is_none() && reports.iter().all(|r| r.pass);
        if error.is_none() && !pass {
            failures += 1;
        }
        if !pass {
            counterexamples.push(Counterexample {
                property: property.to_string(),
                trial: i,
                seed,
                error: error.clone(),
                reports: reports.clone(),
                instance: t.instance.clone(),
                version: VERSION.to_string(),
            });
        }
        records.push(TrialRecord {
            trial: i,
            seed,
            pass,
            reports,
            error,
            instance: t.instance,
        });
    }
    SuiteOutcome {
        report: SuiteReport {
            property: property.to_string(),
            trials,
            failures,
            errors,
            numerical_errors,
            worst_slack,
            seed: base_seed,
            elapsed: start.elapsed(),
            version: VERSION.to_string(),
        },
        records,
        counterexamples,
    }
}

/// Runs a registered property by name.
pub fn run_property(name: &str, trials: usize, base_seed: u64, tol: &Tolerances) -> Result<SuiteOutcome> {
    let property = find_property(name)?;
    Ok(run_trials(property.name, trials, base_seed, |rng| (property.trial)(rng, tol)))
}

/// Runs an inequality suite with explicit parameters.
pub fn run_inequality(
    inequality: Inequality,
    cfg: &InequalityConfig,
    trials: usize,
    base_seed: u64,
    tol: &Tolerances,
) -> Result<SuiteOutcome> {
    cfg.validate(inequality)?;
    Ok(run_trials(inequality.name(), trials, base_seed, |rng| {
        inequality_trial(inequality, cfg, rng, tol)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn failing_trials_become_counterexamples() {
        let out = run_trials("toy", 4, 1, |_| {
            Trial::ok(json!({"x": 1}), vec![InequalityReport::upper("toy", 2.0, 1.0, 0.0)])
        });
        assert_eq!(out.report.failures, 4);
        assert!(!out.pass());
        assert_eq!(out.counterexamples.len(), 4);
        assert_eq!(out.report.worst_slack, Some(-1.0));
        let dir = std::env::temp_dir().join(format!("ncprob-cx-{}", std::process::id()));
        let paths = out.write_counterexamples(&dir).unwrap();
        assert_eq!(paths.len(), 4);
        let back: Counterexample = serde_json::from_str(&fs::read_to_string(&paths[0]).unwrap()).unwrap();
        assert_eq!(back, out.counterexamples[0]);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn errors_are_counted_separately() {
        let out = run_trials("toy", 3, 1, |_| Trial::failed(json!(null), Error::numerical("boom", 1.0)));
        assert_eq!(out.report.errors, 3);
        assert_eq!(out.report.numerical_errors, 3);
        assert_eq!(out.report.failures, 0);
        assert_eq!(out.report.worst_slack, None);
    }

    #[test]
    fn reruns_are_identical() {
        let tol = Tolerances::default();
        let a = run_property("tracial", 10, 99, &tol).unwrap();
        let b = run_property("tracial", 10, 99, &tol).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}
