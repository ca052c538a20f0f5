//! Randomized trials of the maximal inequalities.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::instance::{random_hermitian, random_instance, rng_from_seed, InstanceSpec};
use super::suite::Trial;
use crate::cuculescu::{etemadi, hajek_renyi, kolmogorov_maximal, kolmogorov_type, normalize_alphas, series_divergence_witness};
use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::report::InequalityReport;
use crate::space::IndependentSequence;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inequality {
    HajekRenyi,
    KolmogorovMaximal,
    KolmogorovType,
    Etemadi,
    SeriesWitness,
}

impl Inequality {
    pub const ALL: [Inequality; 5] = [
        Inequality::HajekRenyi,
        Inequality::KolmogorovMaximal,
        Inequality::KolmogorovType,
        Inequality::Etemadi,
        Inequality::SeriesWitness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Inequality::HajekRenyi => "hajek-renyi",
            Inequality::KolmogorovMaximal => "kolmogorov-maximal",
            Inequality::KolmogorovType => "kolmogorov-type",
            Inequality::Etemadi => "etemadi",
            Inequality::SeriesWitness => "series-witness",
        }
    }

    fn needs_mean_zero(self) -> bool {
        !matches!(self, Inequality::Etemadi)
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Inequality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Inequality::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| Error::UnknownProperty(s.to_string()))
    }
}

/// Parameters of an inequality suite. Unset values are drawn per trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InequalityConfig {
    pub n: Option<usize>,
    /// Factor dimensions; a single entry is repeated `n` times.
    pub dims: Option<Vec<usize>>,
    pub max_n: usize,
    pub max_factor_dim: usize,
    pub max_dim: usize,
    pub lambda: Option<f64>,
    pub lambda_range: (f64, f64),
    pub alphas: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
    pub classical: bool,
    pub fair_coins: bool,
    pub commuting: bool,
    /// Generate uncentered variables and subtract their means before the construction.
    pub center: bool,
    pub bounded_by: Option<f64>,
}

impl Default for InequalityConfig {
    fn default() -> Self {
        Self {
            n: None,
            dims: None,
            max_n: 5,
            max_factor_dim: 3,
            max_dim: 243,
            lambda: None,
            lambda_range: (0.1, 5.0),
            alphas: None,
            epsilon: None,
            classical: false,
            fair_coins: false,
            commuting: false,
            center: false,
            bounded_by: None,
        }
    }
}

impl InequalityConfig {
    pub fn validate(&self, inequality: Inequality) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(v) if !(v > 0.0 && v.is_finite()) => {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
            _ => Ok(()),
        };
        positive("lambda", self.lambda)?;
        positive("epsilon", self.epsilon)?;
        positive("bound", self.bounded_by)?;
        if self.n == Some(0) || self.max_n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if let Some(d) = &self.dims {
            if d.is_empty() || d.contains(&0) {
                return Err(Error::InvalidArgument("dimensions must be positive".into()));
            }
            if let Some(n) = self.n {
                if d.len() != 1 && d.len() != n {
                    return Err(Error::InvalidArgument(format!("{} dimensions given for n = {n}", d.len())));
                }
            }
        }
        let (lo, hi) = self.lambda_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad lambda range ({lo}, {hi})")));
        }
        if let Some(a) = &self.alphas {
            if inequality != Inequality::HajekRenyi {
                return Err(Error::InvalidArgument(format!("weights only apply to hajek-renyi, not {inequality}")));
            }
            let n = self.n.or(self.dims.as_ref().filter(|d| d.len() > 1).map(Vec::len));
            let n = n.unwrap_or(a.len());
            normalize_alphas(a, n)?;
        }
        Ok(())
    }

    fn draw_dims(&self, rng: &mut ChaCha8Rng, cap: usize) -> Result<Vec<usize>> {
        let n = match (&self.dims, self.n) {
            (_, Some(n)) => n,
            (Some(d), None) if d.len() > 1 => d.len(),
            _ => match &self.alphas {
                Some(a) => a.len(),
                None => rng.random_range(1..=self.max_n),
            },
        };
        if let Some(d) = &self.dims {
            return Ok(if d.len() == 1 { vec![d[0]; n] } else { d.clone() });
        }
        if self.fair_coins {
            return Ok(vec![2; n]);
        }
        let limit = self.max_dim.min(cap);
        let hi = self.max_factor_dim.max(2);
        for _ in 0..1000 {
            let dims: Vec<usize> = (0..n).map(|_| rng.random_range(2..=hi)).collect();
            if dims.iter().product::<usize>() <= limit {
                return Ok(dims);
            }
        }
        Err(Error::DimensionCap {
            dim: 2usize.saturating_pow(n as u32),
            cap: limit,
        })
    }

    fn draw_lambda(&self, rng: &mut ChaCha8Rng) -> f64 {
        self.lambda.unwrap_or_else(|| {
            let (lo, hi) = self.lambda_range;
            if hi > lo {
                rng.random_range(lo..hi)
            } else {
                lo
            }
        })
    }
}

/// Random non-increasing weights `α_1 ≥ … ≥ α_n > 0`.
pub fn random_alphas(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut a = rng.random_range(0.5..2.0);
    (0..n)
        .map(|_| {
            let current = a;
            a *= rng.random_range(0.3..=1.0);
            current
        })
        .collect()
}

/// One random trial of `inequality`; all randomness comes from `rng`.
pub fn inequality_trial(
    inequality: Inequality,
    cfg: &InequalityConfig,
    rng: &mut ChaCha8Rng,
    tol: &Tolerances,
) -> Trial {
    if inequality == Inequality::SeriesWitness {
        return series_trial(cfg, rng, tol);
    }
    let mut setup = || -> Result<(InstanceSpec, f64, Option<Vec<f64>>)> {
        let dims = cfg.draw_dims(rng, tol.dim_cap)?;
        let mut spec = InstanceSpec::new(dims, rng.next_u64());
        spec.mean_zero = inequality.needs_mean_zero() && !cfg.center;
        spec.classical = cfg.classical || cfg.fair_coins;
        spec.fair_coins = cfg.fair_coins;
        spec.commuting_tail = cfg.commuting || inequality == Inequality::Etemadi;
        spec.bounded_by = cfg.bounded_by;
        let lambda = cfg.draw_lambda(rng);
        let alphas = match inequality {
            Inequality::HajekRenyi => Some(cfg.alphas.clone().unwrap_or_else(|| random_alphas(rng, spec.n))),
            _ => None,
        };
        Ok((spec, lambda, alphas))
    };
    let (spec, lambda, alphas) = match setup() {
        Ok(s) => s,
        Err(e) => return Trial::failed(json!(null), e),
    };
    let seq = match random_instance(&spec, tol.dim_cap) {
        Ok(seq) => seq,
        Err(e) => return Trial::failed(json!({ "spec": spec }), e),
    };
    let seq = if cfg.center { seq.centered() } else { seq };
    let instance = json!({
        "spec": spec,
        "lambda": lambda,
        "alphas": alphas,
        "locals": seq.locals(),
    });
    let outcome = run_inequality_once(inequality, &seq, lambda, alphas.as_deref(), tol);
    Trial { instance, outcome }
}

/// Runs one construction and collects every report it produces, including the
/// structural audit of its chain.
pub fn run_inequality_once(
    inequality: Inequality,
    seq: &IndependentSequence,
    lambda: f64,
    alphas: Option<&[f64]>,
    tol: &Tolerances,
) -> Result<Vec<InequalityReport>> {
    let name = inequality.name();
    Ok(match inequality {
        Inequality::HajekRenyi | Inequality::KolmogorovMaximal => {
            let r = match (inequality, alphas) {
                (Inequality::HajekRenyi, Some(a)) => hajek_renyi(seq, a, lambda, tol)?,
                (Inequality::HajekRenyi, None) => hajek_renyi(seq, &vec![1.0; seq.len()], lambda, tol)?,
                _ => kolmogorov_maximal(seq, lambda, tol)?,
            };
            let mut reports: Vec<InequalityReport> = r.reports().cloned().collect();
            reports.push(r.trace.audit().report(name));
            reports
        }
        Inequality::KolmogorovType => {
            let r = kolmogorov_type(seq, lambda, tol)?;
            let mut reports: Vec<InequalityReport> = r.reports().cloned().collect();
            reports.push(r.trace.audit().report(name));
            reports
        }
        Inequality::Etemadi => {
            let r = etemadi(seq, lambda, tol)?;
            let mut reports = r.reports.clone();
            reports.push(r.trace.audit().report(name));
            reports
        }
        Inequality::SeriesWitness => {
            return Err(Error::InvalidArgument("the series witness is not a single-sequence construction".into()))
        }
    })
}

fn series_trial(cfg: &InequalityConfig, rng: &mut ChaCha8Rng, tol: &Tolerances) -> Trial {
    let epsilon = cfg.epsilon.unwrap_or_else(|| rng.random_range(0.1..2.0));
    let offset: usize = rng.random_range(0..=3);
    let limit = cfg.max_dim.min(tol.dim_cap).max(2);
    let max_m = (usize::BITS - 1 - limit.leading_zeros()) as usize;
    let m_max = cfg.n.unwrap_or_else(|| rng.random_range(1..=max_m.clamp(1, 8)));
    let seed = rng.next_u64();
    let classical = cfg.classical || cfg.fair_coins;
    let fair = cfg.fair_coins;
    let bound = cfg.bounded_by;
    let factory = move |k: usize| -> HermitianOperator {
        if fair {
            return HermitianOperator::from_diagonal(vec![1.0, -1.0]);
        }
        let mut r = rng_from_seed(seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let a = if classical {
            let v: f64 = r.random_range(0.1..2.0);
            HermitianOperator::from_diagonal(vec![v, -v])
        } else {
            let a = random_hermitian(&mut r, 2);
            a.shifted(-a.trace_raw().re / 2.0)
        };
        match bound {
            Some(c) if a.op_norm() > c => {
                let s = c / a.op_norm();
                a.scaled(s)
            }
            _ => a,
        }
    };
    let locals: Vec<HermitianOperator> = (offset + 1..=offset + m_max).map(factory).collect();
    let instance = json!({
        "epsilon": epsilon,
        "offset": offset,
        "m_max": m_max,
        "locals": locals,
    });
    let outcome = series_divergence_witness(factory, epsilon, offset, m_max, tol)
        .map(|w| w.rows.into_iter().map(|r| r.report).collect());
    Trial { instance, outcome }
}
