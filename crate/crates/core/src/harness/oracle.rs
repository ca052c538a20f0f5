//! Brute-force evaluation of classical probabilities by enumerating every outcome
//! combination of a [`ClassicalTable`].
//!
//! When all weights are fractions the probability of an event is accumulated as an
//! exact integer count over the common denominator `Π_k D_k`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::classical::ClassicalTable;
use crate::error::{Error, Result};
use crate::operator::RealInterval;
use crate::tolerance::Tolerances;

/// Default cap on the number of enumerated sample points.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Classical quantities understood by [`classical_oracle`]. Indices `k` start at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "query", rename_all = "kebab-case")]
pub enum OracleQuery {
    /// `ℙ(max_k |S_k| ≥ t)`.
    MaxAbsPartialSum { t: f64 },
    /// `ℙ(max_k |S_k| > t)`.
    MaxAbsPartialSumStrict { t: f64 },
    /// `ℙ(|S_k| ≥ t)`.
    Tail { k: usize, t: f64 },
    /// `ℙ(max_k α_k |S_k| ≥ t)`.
    WeightedMax { alphas: Vec<f64>, t: f64 },
    /// `Var(X_k)`.
    Variance { k: usize },
    /// `E[S_n²]`.
    SecondMoment,
    /// `ℙ(|S_j| < threshold for j < k, |S_k| ≥ threshold)`.
    ChainEvent { k: usize, threshold: f64 },
}

/// A probability computed by enumeration, exact when the table is rational.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleProbability {
    pub value: f64,
    /// `(numerator, denominator)` in lowest terms.
    pub exact: Option<(u128, u128)>,
}

enum Weights {
    Exact { counts: Vec<Vec<u64>>, denom: u128 },
    Float(Vec<Vec<f64>>),
}

fn weights(table: &ClassicalTable) -> Weights {
    let rational: Option<Vec<(Vec<u64>, u64)>> = table.variables.iter().map(|v| v.rational_weights()).collect();
    if let Some(r) = rational {
        let denom = r.iter().try_fold(1u128, |a, (_, d)| a.checked_mul(u128::from(*d)));
        if let Some(denom) = denom {
            return Weights::Exact {
                counts: r.into_iter().map(|(c, _)| c).collect(),
                denom,
            };
        }
    }
    Weights::Float(
        table
            .variables
            .iter()
            .map(|v| v.probs.iter().map(|p| p.value()).collect())
            .collect(),
    )
}

/// Number of outcome combinations of the table.
pub fn sample_points(table: &ClassicalTable) -> u128 {
    table
        .variables
        .iter()
        .fold(1u128, |a, v| a.saturating_mul(v.outcomes.len() as u128))
}

/// `ℙ(event(S_1, …, S_n))` over all outcome combinations.
pub fn probability(
    table: &ClassicalTable,
    cap: u128,
    event: impl Fn(&[f64]) -> bool,
) -> Result<OracleProbability> {
    table.validate()?;
    let points = sample_points(table);
    if points > cap {
        return Err(Error::EnumerationCap { points, cap });
    }
    let n = table.len();
    let sizes: Vec<usize> = table.variables.iter().map(|v| v.outcomes.len()).collect();
    let w = weights(table);
    let mut index = vec![0usize; n];
    let mut sums = vec![0.0f64; n];
    let mut hits_exact: u128 = 0;
    let mut hits_float = 0.0f64;
    loop {
        let mut acc = 0.0;
        for k in 0..n {
            acc += table.variables[k].outcomes[index[k]];
            sums[k] = acc;
        }
        if event(&sums) {
            match &w {
                Weights::Exact { counts, .. } => {
                    hits_exact += (0..n).map(|k| u128::from(counts[k][index[k]])).product::<u128>();
                }
                Weights::Float(p) => hits_float += (0..n).map(|k| p[k][index[k]]).product::<f64>(),
            }
        }
        // odometer
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(match w {
                    Weights::Exact { denom, .. } => {
                        let r = Ratio::new(hits_exact, denom);
                        OracleProbability {
                            value: *r.numer() as f64 / *r.denom() as f64,
                            exact: Some((*r.numer(), *r.denom())),
                        }
                    }
                    Weights::Float(_) => OracleProbability {
                        value: hits_float,
                        exact: None,
                    },
                });
            }
            k -= 1;
            index[k] += 1;
            if index[k] < sizes[k] {
                break;
            }
            index[k] = 0;
        }
    }
}

/// `E[f(S_1, …, S_n)]` in floating point.
pub fn expectation(table: &ClassicalTable, cap: u128, f: impl Fn(&[f64]) -> f64) -> Result<f64> {
    table.validate()?;
    let points = sample_points(table);
    if points > cap {
        return Err(Error::EnumerationCap { points, cap });
    }
    let n = table.len();
    let probs: Vec<Vec<f64>> = table
        .variables
        .iter()
        .map(|v| v.probs.iter().map(|p| p.value()).collect())
        .collect();
    let mut index = vec![0usize; n];
    let mut sums = vec![0.0f64; n];
    let mut total = 0.0;
    loop {
        let mut acc = 0.0;
        for k in 0..n {
            acc += table.variables[k].outcomes[index[k]];
            sums[k] = acc;
        }
        total += f(&sums) * (0..n).map(|k| probs[k][index[k]]).product::<f64>();
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(total);
            }
            k -= 1;
            index[k] += 1;
            if index[k] < table.variables[k].outcomes.len() {
                break;
            }
            index[k] = 0;
        }
    }
}

/// Evaluates `query` on `table`.
///
/// Thresholds are compared with the same endpoint snapping as spectral projections,
/// so the oracle and the embedded constructions classify ties identically.
pub fn classical_oracle(table: &ClassicalTable, query: &OracleQuery, cap: u128) -> Result<f64> {
    let snap = Tolerances::default().snap;
    let n = table.len();
    let check_k = |k: usize| {
        if k == 0 || k > n {
            Err(Error::InvalidArgument(format!("index k = {k} outside 1..={n}")))
        } else {
            Ok(k)
        }
    };
    let p = |event: &dyn Fn(&[f64]) -> bool| probability(table, cap, event).map(|p| p.value);
    match query {
        OracleQuery::MaxAbsPartialSum { t } => {
            let b = RealInterval::at_least(*t);
            p(&|s| s.iter().any(|v| b.contains(v.abs(), snap)))
        }
        OracleQuery::MaxAbsPartialSumStrict { t } => {
            let b = RealInterval::greater_than(*t);
            p(&|s| s.iter().any(|v| b.contains(v.abs(), snap)))
        }
        OracleQuery::Tail { k, t } => {
            let k = check_k(*k)?;
            let b = RealInterval::at_least(*t);
            p(&|s| b.contains(s[k - 1].abs(), snap))
        }
        OracleQuery::WeightedMax { alphas, t } => {
            if alphas.len() != n {
                return Err(Error::InvalidArgument(format!("expected {n} weights, got {}", alphas.len())));
            }
            let b = RealInterval::at_least(*t);
            p(&|s| s.iter().zip(alphas).any(|(v, a)| b.contains(a * v.abs(), snap)))
        }
        OracleQuery::Variance { k } => {
            let k = check_k(*k)?;
            table.validate()?;
            Ok(table.variables[k - 1].variance())
        }
        OracleQuery::SecondMoment => expectation(table, cap, |s| s[n - 1] * s[n - 1]),
        OracleQuery::ChainEvent { k, threshold } => {
            let k = check_k(*k)?;
            let b = RealInterval::at_least(*threshold);
            p(&|s| s[..k - 1].iter().all(|v| !b.contains(v.abs(), snap)) && b.contains(s[k - 1].abs(), snap))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_coin_examples() {
        let t = ClassicalTable::fair_coins(2);
        let cap = DEFAULT_ENUMERATION_CAP;
        assert_eq!(classical_oracle(&t, &OracleQuery::MaxAbsPartialSum { t: 1.2 }, cap).unwrap(), 0.5);
        let tail1 = classical_oracle(&t, &OracleQuery::Tail { k: 1, t: 0.4 }, cap).unwrap();
        let tail2 = classical_oracle(&t, &OracleQuery::Tail { k: 2, t: 0.4 }, cap).unwrap();
        assert_eq!(3.0 * tail1.max(tail2), 3.0);
        assert_eq!(classical_oracle(&t, &OracleQuery::Tail { k: 2, t: 3.0 }, cap).unwrap(), 0.0);
        assert_eq!(classical_oracle(&t, &OracleQuery::SecondMoment, cap).unwrap(), 2.0);
    }

    #[test]
    fn single_coin_examples() {
        let t = ClassicalTable::fair_coins(1);
        let cap = DEFAULT_ENUMERATION_CAP;
        assert_eq!(classical_oracle(&t, &OracleQuery::Tail { k: 1, t: 2.0 }, cap).unwrap(), 0.0);
        assert_eq!(classical_oracle(&t, &OracleQuery::Variance { k: 1 }, cap).unwrap(), 1.0);
        assert!(classical_oracle(&t, &OracleQuery::Variance { k: 2 }, cap).is_err());
    }

    #[test]
    fn exact_fractions() {
        let t = ClassicalTable::from_json(
            r#"{"variables":[{"outcomes":[1,-1],"probs":["1/3","2/3"]},{"outcomes":[1,-1],"probs":["1/4","3/4"]}]}"#,
        )
        .unwrap();
        // S_2 = 2 with probability 1/12, S_2 = -2 with probability 1/2
        let p = probability(&t, DEFAULT_ENUMERATION_CAP, |s| s[1].abs() >= 2.0).unwrap();
        assert_eq!(p.exact, Some((7, 12)));
    }

    #[test]
    fn chain_events_partition_the_first_crossing() {
        let t = ClassicalTable::fair_coins(4);
        let cap = DEFAULT_ENUMERATION_CAP;
        let total: f64 = (1..=4)
            .map(|k| classical_oracle(&t, &OracleQuery::ChainEvent { k, threshold: 2.0 }, cap).unwrap())
            .sum();
        let direct = classical_oracle(&t, &OracleQuery::MaxAbsPartialSum { t: 2.0 }, cap).unwrap();
        assert_eq!(total, direct);
    }

    #[test]
    fn enumeration_cap() {
        let t = ClassicalTable::fair_coins(12);
        let r = classical_oracle(&t, &OracleQuery::SecondMoment, 1000);
        assert!(matches!(r, Err(Error::EnumerationCap { points: 4096, cap: 1000 })));
    }
}
