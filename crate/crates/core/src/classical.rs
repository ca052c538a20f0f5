//! Classical independent variables with finitely many outcomes, and their diagonal
//! embedding into a tensor-product matrix algebra.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::space::{tensor_lift, IndependentSequence};

/// Largest common denominator allowed per variable in the embedding.
pub const DENOMINATOR_CAP: u64 = 64;

const SUM_TOL: f64 = 1e-12;

/// A probability given either as a decimal or as an exact fraction `"a/b"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Probability {
    Float(f64),
    Ratio(u64, u64),
}

impl Probability {
    pub fn value(self) -> f64 {
        match self {
            Probability::Float(p) => p,
            Probability::Ratio(a, b) => a as f64 / b as f64,
        }
    }

    /// Smallest `(a, b)` with `b ≤ DENOMINATOR_CAP` representing the probability.
    fn as_fraction(self) -> Option<(u64, u64)> {
        match self {
            Probability::Ratio(a, b) => {
                let g = gcd(a, b);
                Some((a / g, b / g))
            }
            Probability::Float(p) => (1..=DENOMINATOR_CAP).find_map(|b| {
                let a = (p * b as f64).round();
                ((a / b as f64 - p).abs() <= SUM_TOL).then_some((a as u64, b))
            }),
        }
    }
}

impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Probability::Float(p) => s.serialize_f64(*p),
            Probability::Ratio(a, b) => s.serialize_str(&format!("{a}/{b}")),
        }
    }
}

impl<'de> Deserialize<'de> for Probability {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ProbVisitor;

        impl Visitor<'_> for ProbVisitor {
            type Value = Probability;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a fraction string \"a/b\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Probability, E> {
                Ok(Probability::Float(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Probability, E> {
                Ok(Probability::Float(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Probability, E> {
                Ok(Probability::Float(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Probability, E> {
                let parse = |s: &str| s.trim().parse::<u64>().map_err(|_| E::custom(format!("bad fraction `{v}`")));
                match v.split_once('/') {
                    Some((a, b)) => {
                        let (a, b) = (parse(a)?, parse(b)?);
                        if b == 0 {
                            return Err(E::custom("zero denominator"));
                        }
                        Ok(Probability::Ratio(a, b))
                    }
                    None => v
                        .trim()
                        .parse::<f64>()
                        .map(Probability::Float)
                        .map_err(|_| E::custom(format!("bad probability `{v}`"))),
                }
            }
        }

        d.deserialize_any(ProbVisitor)
    }
}

/// One variable: outcomes with their probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalVariable {
    pub outcomes: Vec<f64>,
    pub probs: Vec<Probability>,
}

impl ClassicalVariable {
    pub fn uniform(outcomes: Vec<f64>) -> Self {
        let n = outcomes.len() as u64;
        Self {
            probs: vec![Probability::Ratio(1, n); outcomes.len()],
            outcomes,
        }
    }

    pub fn fair_coin() -> Self {
        Self::uniform(vec![1.0, -1.0])
    }

    pub fn mean(&self) -> f64 {
        self.outcomes.iter().zip(&self.probs).map(|(x, p)| x * p.value()).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.outcomes
            .iter()
            .zip(&self.probs)
            .map(|(x, p)| (x - m) * (x - m) * p.value())
            .sum()
    }

    /// `max |x|` over outcomes of positive probability.
    pub fn sup_abs(&self) -> f64 {
        self.outcomes
            .iter()
            .zip(&self.probs)
            .filter(|(_, p)| p.value() > 0.0)
            .fold(0.0, |a, (x, _)| a.max(x.abs()))
    }

    fn validate(&self, index: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::UnsupportedTable(format!("variable {index}: {msg}")));
        if self.outcomes.is_empty() {
            return bad("no outcomes".into());
        }
        if self.outcomes.len() != self.probs.len() {
            return bad(format!("{} outcomes but {} probabilities", self.outcomes.len(), self.probs.len()));
        }
        if let Some(x) = self.outcomes.iter().find(|x| !x.is_finite()) {
            return bad(format!("non-finite outcome {x}"));
        }
        if let Some(p) = self.probs.iter().find(|p| !(p.value() >= 0.0)) {
            return bad(format!("negative probability {}", p.value()));
        }
        let total: f64 = self.probs.iter().map(|p| p.value()).sum();
        if (total - 1.0).abs() > SUM_TOL {
            return bad(format!("probabilities sum to {total}"));
        }
        Ok(())
    }

    /// Integer weights `c_j` over a common denominator `D = Σ c_j ≤ DENOMINATOR_CAP`,
    /// or `None` if some probability is not such a fraction.
    pub fn rational_weights(&self) -> Option<(Vec<u64>, u64)> {
        let fractions: Vec<(u64, u64)> = self.probs.iter().map(|p| p.as_fraction()).collect::<Option<_>>()?;
        let mut denom = 1u64;
        for (_, b) in &fractions {
            denom = denom / gcd(denom, *b) * b;
            if denom > DENOMINATOR_CAP {
                return None;
            }
        }
        let counts: Vec<u64> = fractions.iter().map(|(a, b)| a * (denom / b)).collect();
        (counts.iter().sum::<u64>() == denom).then_some((counts, denom))
    }
}

/// A finite family of independent classical random variables.
///
/// JSON form: `{"variables":[{"outcomes":[...],"probs":[...]}]}` where each
/// probability is a number or a string `"a/b"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalTable {
    pub variables: Vec<ClassicalVariable>,
}

impl ClassicalTable {
    pub fn new(variables: Vec<ClassicalVariable>) -> Result<Self> {
        let t = Self { variables };
        t.validate()?;
        Ok(t)
    }

    pub fn fair_coins(n: usize) -> Self {
        Self {
            variables: vec![ClassicalVariable::fair_coin(); n],
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: Self =
            serde_json::from_str(s).map_err(|e| Error::UnsupportedTable(format!("malformed table JSON: {e}")))?;
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.variables.is_empty() {
            return Err(Error::UnsupportedTable("no variables".into()));
        }
        self.variables.iter().enumerate().try_for_each(|(i, v)| v.validate(i + 1))
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    /// `C = max_k sup |X_k|`.
    pub fn sup_abs(&self) -> f64 {
        self.variables.iter().fold(0.0, |a, v| a.max(v.sup_abs()))
    }

    /// Replaces every outcome `x` of `X_k` by `x − E[X_k]`.
    pub fn centered(&self) -> Self {
        Self {
            variables: self
                .variables
                .iter()
                .map(|v| {
                    let m = v.mean();
                    ClassicalVariable {
                        outcomes: v.outcomes.iter().map(|x| x - m).collect(),
                        probs: v.probs.clone(),
                    }
                })
                .collect(),
        }
    }

    /// Diagonal entries of the local matrix of each variable in the embedding.
    pub fn local_diagonals(&self) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        self.variables
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let (counts, _) = v.rational_weights().ok_or_else(|| {
                    Error::UnsupportedTable(format!(
                        "variable {}: probabilities are not fractions with denominator at most {DENOMINATOR_CAP}",
                        i + 1
                    ))
                })?;
                Ok(v.outcomes
                    .iter()
                    .zip(&counts)
                    .flat_map(|(x, c)| std::iter::repeat_n(*x, *c as usize))
                    .collect())
            })
            .collect()
    }
}

/// Embeds the table as commuting diagonal operators on a tensor product.
///
/// Outcome `x_j` of probability `c_j / D` fills `c_j` diagonal slots of a factor of
/// dimension `D`, so `τ` of any function of the variables equals its expectation.
/// Outcomes of probability zero are dropped.
pub fn classical_embed(table: &ClassicalTable, cap: usize) -> Result<IndependentSequence> {
    let locals = table
        .local_diagonals()?
        .into_iter()
        .map(HermitianOperator::from_diagonal)
        .collect();
    tensor_lift(locals, false, cap)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}
