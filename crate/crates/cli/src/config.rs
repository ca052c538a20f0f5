//! Run configuration: a JSON file with the same fields as the flags. Flags win.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use ncprob::harness::Inequality;
use ncprob::Tolerances;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Verify,
    Demo,
    Sweep,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DemoName {
    RemarkMatrices,
    TwoCoins,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum QueryName {
    /// P(max_k |S_k| >= t)
    MaxAbsPartialSum,
    /// P(max_k |S_k| > t)
    MaxAbsPartialSumStrict,
    /// P(|S_k| >= t)
    Tail,
    /// P(max_k alpha_k |S_k| >= t)
    WeightedMax,
    /// Var(X_k)
    Var,
    /// E[S_n^2]
    SecondMoment,
    /// P(|S_j| < t for j < k, |S_k| >= t)
    ChainEvent,
}

/// Every setting of a run. Lists (`n`, `lambda`) accept a single number in the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<CommandName>,
    pub inequality: Option<Inequality>,
    #[serde(deserialize_with = "one_or_many")]
    pub n: Option<Vec<usize>>,
    pub dims: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    #[serde(deserialize_with = "one_or_many")]
    pub lambda: Option<Vec<f64>>,
    pub alphas: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
    pub classical: bool,
    pub commuting: bool,
    pub center: bool,
    pub fair_coins: bool,
    pub bounded_by: Option<f64>,
    /// Slack allowed when checking inequalities; overrides `tolerances.check`.
    pub tolerance: Option<f64>,
    /// Full tolerance overrides; missing fields keep their defaults.
    pub tolerances: Option<Tolerances>,
    pub dim_cap: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub counterexamples: Option<PathBuf>,
    pub demo: Option<DemoName>,
    pub table: Option<PathBuf>,
    pub query: Option<QueryName>,
    pub t: Option<f64>,
    pub k: Option<usize>,
    pub max_points: Option<u128>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(d: D) -> Result<Option<Vec<T>>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(Option::<OneOrMany<T>>::deserialize(d)?.map(|v| match v {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(xs) => xs,
    }))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    /// Tolerances after applying `tolerances`, `tolerance` and `dim_cap`.
    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        let mut tol = self.tolerances.clone().unwrap_or_default();
        if let Some(t) = self.tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("tolerance must be non-negative, got {t}")));
            }
            tol.check = t;
        }
        if let Some(cap) = self.dim_cap {
            if cap == 0 {
                return Err(CliError::Usage("dimension cap must be positive".into()));
            }
            tol.dim_cap = cap;
        }
        Ok(tol)
    }

    pub fn trials(&self, default: usize) -> Result<usize, CliError> {
        match self.trials.unwrap_or(default) {
            0 => Err(CliError::Usage("trials must be at least 1".into())),
            t => Ok(t),
        }
    }

    pub fn single_n(&self) -> Result<Option<usize>, CliError> {
        single("n", self.n.as_deref())
    }

    pub fn single_lambda(&self) -> Result<Option<f64>, CliError> {
        single("lambda", self.lambda.as_deref())
    }
}

fn single<T: Copy>(name: &str, values: Option<&[T]>) -> Result<Option<T>, CliError> {
    match values {
        None => Ok(None),
        Some([v]) => Ok(Some(*v)),
        Some(_) => Err(CliError::Usage(format!("this command takes a single --{name}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars_and_lists_both_parse() {
        let c: RunConfig = serde_json::from_str(r#"{"n": 3, "lambda": [0.5, 1.0], "inequality": "etemadi"}"#).unwrap();
        assert_eq!(c.n, Some(vec![3]));
        assert_eq!(c.lambda, Some(vec![0.5, 1.0]));
        assert_eq!(c.inequality, Some(Inequality::Etemadi));
        assert!(serde_json::from_str::<RunConfig>(r#"{"lamda": 1}"#).is_err());
    }

    #[test]
    fn tolerance_overrides() {
        let c: RunConfig = serde_json::from_str(r#"{"tolerances": {"check": 1e-6, "snap": 1e-10}, "tolerance": 1e-7}"#).unwrap();
        let t = c.tolerances().unwrap();
        assert_eq!(t.check, 1e-7);
        assert_eq!(t.snap, 1e-10);
        assert_eq!(t.cluster, Tolerances::default().cluster);
    }
}
