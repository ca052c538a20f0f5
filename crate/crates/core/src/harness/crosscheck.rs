//! Cross-validation of the constructions against brute-force enumeration on
//! classical (diagonal) instances.

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::inequalities::{random_alphas, Inequality};
use super::instance::{random_rational_table, random_table, InstanceSpec};
use super::oracle::{classical_oracle, probability, sample_points, OracleQuery};
use super::suite::{run_trials, SuiteOutcome, Trial};
use crate::classical::{classical_embed, ClassicalTable};
use crate::cuculescu::{etemadi, hajek_renyi, kolmogorov_type};
use crate::error::{Error, Result};
use crate::operator::RealInterval;
use crate::report::InequalityReport;
use crate::tolerance::Tolerances;

/// Agreement required between a trace and the enumerated probability.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrosscheckConfig {
    /// Classical template; its seed is redrawn per trial. Random rational tables otherwise.
    pub spec: Option<InstanceSpec>,
    /// Restrict to one construction; all three run otherwise.
    pub inequality: Option<Inequality>,
    /// Fixed sequence length for random tables; drawn from `1..=max_n` otherwise.
    pub n: Option<usize>,
    pub max_n: usize,
    pub max_support: usize,
    pub max_denominator: u64,
    pub max_points: u128,
    pub max_dim: usize,
    pub lambda: Option<f64>,
    pub alphas: Option<Vec<f64>>,
}

impl Default for CrosscheckConfig {
    fn default() -> Self {
        Self {
            spec: None,
            inequality: None,
            n: None,
            max_n: 5,
            max_support: 3,
            max_denominator: 6,
            max_points: 100_000,
            max_dim: 1024,
            lambda: None,
            alphas: None,
        }
    }
}

impl CrosscheckConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = &self.spec {
            if !s.classical {
                return Err(Error::InvalidArgument("oracle cross-checks need a classical instance".into()));
            }
        }
        match self.inequality {
            None | Some(Inequality::HajekRenyi | Inequality::KolmogorovType | Inequality::Etemadi) => {}
            Some(other) => {
                return Err(Error::InvalidArgument(format!("no oracle cross-check for {other}")));
            }
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidArgument(format!("lambda must be positive, got {l}")));
            }
        }
        if self.max_n == 0 || self.n == Some(0) || self.max_support < 2 {
            return Err(Error::InvalidArgument("need max_n >= 1 and max_support >= 2".into()));
        }
        Ok(())
    }

    fn runs(&self, i: Inequality) -> bool {
        self.inequality.is_none_or(|only| only == i)
    }

    fn draw_table(&self, rng: &mut ChaCha8Rng, cap: usize) -> Result<ClassicalTable> {
        if let Some(spec) = &self.spec {
            return random_table(&spec.clone().with_seed(rng.next_u64()));
        }
        let limit = cap.min(self.max_dim);
        for _ in 0..1000 {
            let n = self.n.unwrap_or_else(|| rng.random_range(1..=self.max_n));
            let t = random_rational_table(rng, n, self.max_support, self.max_denominator, false)?;
            let dim: u128 = t
                .variables
                .iter()
                .map(|v| v.rational_weights().map_or(u128::MAX, |(_, d)| u128::from(d)))
                .product();
            if sample_points(&t) <= self.max_points && dim <= limit as u128 {
                return Ok(t);
            }
        }
        Err(Error::InvalidArgument("could not draw a table within the size limits".into()))
    }
}

fn agreement(name: &str, tau: f64, oracle: f64) -> InequalityReport {
    InequalityReport::upper(name, (tau - oracle).abs(), 0.0, ORACLE_TOLERANCE)
        .with_aux("trace", tau)
        .with_aux("oracle", oracle)
}

/// One cross-check trial: every recorded report compares a construction with the oracle.
pub fn crosscheck_trial(cfg: &CrosscheckConfig, rng: &mut ChaCha8Rng, tol: &Tolerances) -> Trial {
    let table = match cfg.draw_table(rng, tol.dim_cap) {
        Ok(t) => t,
        Err(e) => return Trial::failed(json!(null), e),
    };
    let lambda = cfg.lambda.unwrap_or_else(|| rng.random_range(0.1..3.0));
    let alphas = cfg.alphas.clone().unwrap_or_else(|| random_alphas(rng, table.len()));
    let instance = json!({ "table": table, "lambda": lambda, "alphas": alphas });
    let outcome = crosscheck_table(cfg, &table, lambda, &alphas, tol);
    Trial { instance, outcome }
}

/// Compares the constructions on `table` with enumeration. Mean-zero constructions
/// run on the centered table; the threshold-`3λ` chain runs on the table as given.
pub fn crosscheck_table(
    cfg: &CrosscheckConfig,
    table: &ClassicalTable,
    lambda: f64,
    alphas: &[f64],
    tol: &Tolerances,
) -> Result<Vec<InequalityReport>> {
    let cap = cfg.max_points;
    let snap = tol.snap;
    let mut reports = Vec::new();
    let centered = table.centered();
    let n = table.len();

    if cfg.runs(Inequality::HajekRenyi) || cfg.runs(Inequality::KolmogorovType) {
        let seq = classical_embed(&centered, tol.dim_cap)?;
        let vars: Vec<f64> = centered.variables.iter().map(|v| v.variance()).collect();
        let sum_var: f64 = vars.iter().sum();

        if cfg.runs(Inequality::HajekRenyi) {
            let r = hajek_renyi(&seq, alphas, lambda, tol)?;
            let a = crate::cuculescu::normalize_alphas(alphas, n)?;
            reports.extend(r.reports().cloned());
            let tau_p = r.report.aux["tau_p"];
            let q = OracleQuery::WeightedMax {
                alphas: a.clone(),
                t: lambda,
            };
            reports.push(agreement("oracle-hajek-renyi", tau_p, classical_oracle(&centered, &q, cap)?));
            let b = RealInterval::at_least(lambda);
            for (k, pk) in r.trace.p_sequence.iter().enumerate() {
                let event = probability(&centered, cap, |s| {
                    s[..k].iter().zip(&a).all(|(v, w)| !b.contains(w * v.abs(), snap)) && b.contains(a[k] * s[k].abs(), snap)
                })?;
                reports.push(
                    agreement("oracle-hajek-renyi-step", seq.space().prob(pk)?, event.value).with_param("k", (k + 1) as f64),
                );
            }
            let weighted: f64 = a.iter().zip(&vars).map(|(w, v)| w * w * v).sum();
            reports.push(agreement("oracle-weighted-variance", r.report.aux["weighted_var"], weighted));
        }

        if cfg.runs(Inequality::KolmogorovType) {
            let r = kolmogorov_type(&seq, lambda, tol)?;
            reports.extend(r.reports().cloned());
            let l2 = RealInterval::greater_than(lambda * lambda);
            let escape = probability(&centered, cap, |s| s.iter().any(|v| l2.contains(v * v, snap)))?;
            reports.push(agreement("oracle-kolmogorov-type", r.trace_e, escape.value));
            let second = classical_oracle(&centered, &OracleQuery::SecondMoment, cap)?;
            reports.push(agreement("oracle-second-moment", r.report.aux["second_moment"], second));
            reports.push(agreement("oracle-variance-sum", r.report.aux["sum_var"], sum_var));
            let c = centered.sup_abs();
            reports.push(agreement("oracle-bound-constant", r.report.aux["c"], c));
            if sum_var > tol.check {
                let lower = 1.0 - (lambda + c).powi(2) / sum_var;
                reports.push(agreement(
                    "oracle-lower-commuting",
                    r.lower_commuting.unwrap_or(f64::NAN),
                    lower,
                ));
                let strict = classical_oracle(&centered, &OracleQuery::MaxAbsPartialSumStrict { t: lambda }, cap)?;
                reports.push(
                    InequalityReport::upper("classical-kolmogorov-lower", lower, strict, ORACLE_TOLERANCE)
                        .with_param("lambda", lambda),
                );
            }
        }
    }

    if cfg.runs(Inequality::Etemadi) {
        let seq = classical_embed(table, tol.dim_cap)?;
        let r = etemadi(&seq, lambda, tol)?;
        reports.extend(r.reports.iter().cloned());
        let three = 3.0 * lambda;
        let main = r.report("etemadi").expect("main report");
        let crossing = classical_oracle(table, &OracleQuery::MaxAbsPartialSum { t: three }, cap)?;
        reports.push(agreement("oracle-etemadi", main.aux["tau_p"], crossing));
        for (k, pk) in r.trace.p_sequence.iter().enumerate() {
            let q = OracleQuery::ChainEvent {
                k: k + 1,
                threshold: three,
            };
            reports.push(
                agreement("oracle-etemadi-step", seq.space().prob(pk)?, classical_oracle(table, &q, cap)?)
                    .with_param("k", (k + 1) as f64),
            );
        }
        let closed: Vec<f64> = (1..=n)
            .map(|k| classical_oracle(table, &OracleQuery::Tail { k, t: lambda }, cap))
            .collect::<Result<_>>()?;
        let open_b = RealInterval::greater_than(lambda);
        let open: Vec<f64> = (0..n)
            .map(|k| probability(table, cap, |s| open_b.contains(s[k].abs(), snap)).map(|p| p.value))
            .collect::<Result<_>>()?;
        let max_closed = closed.iter().fold(0.0f64, |a, v| a.max(*v));
        let max_open = open.iter().fold(0.0f64, |a, v| a.max(*v));
        reports.push(agreement("oracle-etemadi-closed", main.aux["closed_rhs"], 2.0 * closed[n - 1] + max_closed));
        reports.push(agreement("oracle-etemadi-open", main.aux["open_rhs"], 2.0 * open[n - 1] + max_open));
        let below = RealInterval::less_than(three);
        let first_below = probability(table, cap, |s| below.contains(s[0].abs(), snap))?.value;
        let complement = r.report("etemadi-complement").expect("complement report");
        reports.push(agreement("oracle-etemadi-complement", complement.rhs, first_below));
        let half = RealInterval::greater_than(lambda / 2.0);
        let mut m = 0.0f64;
        for k in 0..n - 1 {
            m = m.max(probability(table, cap, |s| half.contains((s[n - 1] - s[k]).abs(), snap))?.value);
        }
        let refined = r.report("etemadi-refined").expect("refined report");
        reports.push(agreement("oracle-etemadi-m", refined.aux["m"], m));
        reports.push(
            InequalityReport::upper("classical-etemadi", crossing, 3.0 * max_closed, 1e-12).with_param("lambda", lambda),
        );
    }
    Ok(reports)
}

/// Runs `trials` cross-check trials.
pub fn oracle_crosscheck(cfg: &CrosscheckConfig, trials: usize, base_seed: u64, tol: &Tolerances) -> Result<SuiteOutcome> {
    cfg.validate()?;
    Ok(run_trials("oracle-crosscheck", trials, base_seed, |rng| crosscheck_trial(cfg, rng, tol)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_fair_coins_agree() {
        let tol = Tolerances::default();
        let cfg = CrosscheckConfig::default();
        let reports = crosscheck_table(&cfg, &ClassicalTable::fair_coins(2), 1.2, &[1.0, 1.0], &tol).unwrap();
        for r in &reports {
            assert!(r.pass, "{r:?}");
        }
        assert!(reports.iter().any(|r| r.name == "oracle-etemadi"));
    }

    #[test]
    fn random_rational_tables_agree() {
        let tol = Tolerances::default();
        let out = oracle_crosscheck(&CrosscheckConfig::default(), 20, 5, &tol).unwrap();
        assert!(out.pass(), "{:?}", out.counterexamples.first());
    }

    #[test]
    fn rejects_quantum_specs() {
        let cfg = CrosscheckConfig {
            spec: Some(InstanceSpec::new(vec![2, 2], 0)),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
