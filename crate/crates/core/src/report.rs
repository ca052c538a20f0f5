//! Inequality reports and their JSON encoding.
//!
//! Floats are written with 17 significant digits so that every report can be
//! replayed bit-for-bit. Non-finite values (the `−∞` sentinel of a vacuous lower
//! bound) are written as `null` and read back as `−∞`.

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Deserializer, Serialize};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One checked inequality `lhs ≤ rhs` (or `lower ≤ lhs ≤ rhs`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(deserialize_with = "nullable_f64")]
    pub lhs: f64,
    #[serde(deserialize_with = "nullable_f64")]
    pub rhs: f64,
    #[serde(deserialize_with = "nullable_f64")]
    pub slack: f64,
    pub tol: f64,
    pub pass: bool,
    #[serde(default, deserialize_with = "nullable_map")]
    pub aux: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
}

impl InequalityReport {
    /// `lhs ≤ rhs + tol`.
    pub fn upper(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            params: BTreeMap::new(),
            lhs,
            rhs,
            slack: rhs - lhs,
            tol,
            pass: lhs <= rhs + tol,
            aux: BTreeMap::new(),
            seed: None,
            version: VERSION.to_string(),
        }
    }

    /// `lower − tol ≤ value ≤ upper + tol`; `lower` may be `−∞`.
    ///
    /// Stored as `lhs = value`, `rhs = upper` and `aux["lower"] = lower`.
    pub fn two_sided(name: impl Into<String>, lower: f64, value: f64, upper: f64, tol: f64) -> Self {
        let mut r = Self::upper(name, value, upper, tol);
        r.slack = (upper - value).min(value - lower);
        r.pass = lower - tol <= value && value <= upper + tol;
        r.aux.insert("lower".into(), lower);
        r
    }

    /// A check that only applies under a hypothesis; passes trivially otherwise.
    pub fn not_applicable(name: impl Into<String>, tol: f64) -> Self {
        let mut r = Self::upper(name, 0.0, 0.0, tol);
        r.aux.insert("applicable".into(), 0.0);
        r
    }

    pub fn with_aux(mut self, key: &str, value: f64) -> Self {
        self.aux.insert(key.to_string(), value);
        self
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Requires an additional condition for `pass`.
    pub fn and(mut self, ok: bool) -> Self {
        self.pass &= ok;
        self
    }

    pub fn is_applicable(&self) -> bool {
        self.aux.get("applicable").is_none_or(|v| *v != 0.0)
    }
}

/// JSON formatter emitting every finite float with 17 significant digits.
#[derive(Debug, Default, Clone, Copy)]
pub struct ReplayFormatter;

impl serde_json::ser::Formatter for ReplayFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn write_json<W: io::Write, T: Serialize + ?Sized>(writer: W, value: &T) -> serde_json::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(writer, ReplayFormatter);
    value.serialize(&mut ser)
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    write_json(&mut buf, value).expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn nullable_f64<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
}

fn nullable_map<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
    let raw = BTreeMap::<String, Option<f64>>::deserialize(d)?;
    Ok(raw
        .into_iter()
        .map(|(k, v)| (k, v.unwrap_or(f64::NEG_INFINITY)))
        .collect())
}
