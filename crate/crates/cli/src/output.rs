//! Output files, tabular rows and number formatting.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use ncprob::harness::SuiteOutcome;
use ncprob::report::write_json;
use ncprob::InequalityReport;
use serde::Serialize;
use tempfile::NamedTempFile;

/// CSV header; the column order is part of the output contract.
pub const CSV_COLUMNS: [&str; 12] = [
    "inequality",
    "n",
    "dims",
    "lambda",
    "lhs",
    "rhs",
    "slack",
    "pass",
    "lower",
    "report",
    "trial",
    "seed",
];

/// One checked inequality in tabular form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub inequality: String,
    pub n: usize,
    /// Factor dimensions joined by `x`.
    pub dims: String,
    /// Threshold of the construction (`ε` for the series witness).
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    /// Sharpest lower bound in force, if the report has one.
    pub lower: Option<f64>,
    pub report: String,
    pub trial: Option<usize>,
    pub seed: Option<u64>,
}

impl Row {
    pub fn from_report(inequality: &str, n: usize, dims: &[usize], r: &InequalityReport) -> Self {
        let lambda = r
            .params
            .get("lambda")
            .or_else(|| r.params.get("epsilon"))
            .copied()
            .unwrap_or(f64::NAN);
        let lower = r
            .aux
            .get("lower_commuting")
            .filter(|v| v.is_finite())
            .or_else(|| r.aux.get("lower"))
            .copied();
        Row {
            inequality: inequality.to_string(),
            n,
            dims: dims.iter().map(usize::to_string).collect::<Vec<_>>().join("x"),
            lambda,
            lhs: r.lhs,
            rhs: r.rhs,
            slack: r.slack,
            pass: r.pass,
            lower,
            report: r.name.clone(),
            trial: None,
            seed: r.seed,
        }
    }

    pub fn record(&self) -> [String; 12] {
        [
            self.inequality.clone(),
            self.n.to_string(),
            self.dims.clone(),
            float(self.lambda),
            float(self.lhs),
            float(self.rhs),
            float(self.slack),
            self.pass.to_string(),
            self.lower.map_or(String::new(), float),
            self.report.clone(),
            self.trial.map_or(String::new(), |t| t.to_string()),
            self.seed.map_or(String::new(), |s| s.to_string()),
        ]
    }
}

/// 17 significant digits; non-finite values become empty fields.
pub fn float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

/// `v` with 15 significant digits, in positional notation when that is readable.
pub fn significant15(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.14e}")
    }
}

/// Main-report rows of every trial of a suite.
pub fn suite_rows(out: &SuiteOutcome, inequality: &str) -> Vec<Row> {
    let mut rows = Vec::new();
    for rec in &out.records {
        let dims = instance_dims(&rec.instance);
        for r in rec.reports.iter().filter(|r| r.name == inequality) {
            let n = r
                .params
                .get("n")
                .or_else(|| r.params.get("m"))
                .map_or(dims.len(), |v| *v as usize);
            let dims = if dims.is_empty() { vec![2; n] } else { dims.clone() };
            let mut row = Row::from_report(inequality, n, &dims[..n.min(dims.len())], r);
            row.trial = Some(rec.trial);
            row.seed = Some(rec.seed);
            rows.push(row);
        }
    }
    rows
}

fn instance_dims(instance: &serde_json::Value) -> Vec<usize> {
    instance["spec"]["factor_dims"]
        .as_array()
        .map(|a| a.iter().filter_map(|v| v.as_u64()).map(|v| v as usize).collect())
        .unwrap_or_default()
}

pub fn csv_bytes(rows: &[Row]) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_json(&mut buf, value).map_err(io::Error::other)?;
    buf.push(b'\n');
    Ok(buf)
}

/// Writes to `path` through a temporary file in the same directory, or to stdout.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match path {
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            fs::create_dir_all(&dir)?;
            let mut tmp = NamedTempFile::new_in(&dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| e.error)?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(significant15(0.5), "0.500000000000000");
        assert_eq!(significant15(1.0), "1.00000000000000");
        assert_eq!(significant15(0.0), "0");
        assert_eq!(significant15(1.0 / 3.0), "0.333333333333333");
        assert_eq!(significant15(123.25), "123.250000000000");
        assert_eq!(significant15(1e-7), "1.00000000000000e-7");
    }

    #[test]
    fn rows_have_the_documented_columns() {
        let r = InequalityReport::two_sided("kolmogorov-type", f64::NEG_INFINITY, 0.25, 1.0, 1e-8)
            .with_param("lambda", 0.5)
            .with_param("n", 2.0);
        let row = Row::from_report("kolmogorov-type", 2, &[2, 2], &r);
        let bytes = csv_bytes(&[row]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields[0], "kolmogorov-type");
        assert_eq!(fields[2], "2x2");
        assert_eq!(fields[7], "true");
        assert_eq!(fields[8], "");
    }

    #[test]
    fn atomic_write_replaces_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("out.json");
        emit(Some(&path), b"first").unwrap();
        emit(Some(&path), b"second").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"second");
        assert_eq!(fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
