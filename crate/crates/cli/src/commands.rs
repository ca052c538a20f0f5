use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use ncprob::demos::{remark_demo, two_coins_demo, REMARK_LAMBDAS};
use ncprob::harness::{
    classical_oracle, oracle_crosscheck, run_inequality, CrosscheckConfig, Inequality, InequalityConfig, InstanceSpec,
    OracleQuery, SuiteOutcome, DEFAULT_ENUMERATION_CAP,
};
use ncprob::{ClassicalTable, InequalityReport, Tolerances};
use serde::Serialize;

use crate::config::{CommandName, DemoName, Format, QueryName, RunConfig};
use crate::error::{CliError, Status};
use crate::output::{csv_bytes, emit, json_bytes, significant15, suite_rows, Row};

pub fn run(c: &RunConfig) -> Result<Status, CliError> {
    match c.command.unwrap_or(CommandName::Verify) {
        CommandName::Verify => verify(c),
        CommandName::Demo => demo(c),
        CommandName::Sweep => sweep(c),
        CommandName::Oracle => oracle(c),
    }
}

fn inequality(c: &RunConfig) -> Result<Inequality, CliError> {
    c.inequality
        .ok_or_else(|| CliError::Usage("--inequality is required".into()))
}

fn base_config(c: &RunConfig, ineq: Inequality, tol: &Tolerances) -> Result<InequalityConfig, CliError> {
    let cfg = InequalityConfig {
        n: c.single_n()?,
        dims: c.dims.clone(),
        lambda: c.single_lambda()?,
        alphas: c.alphas.clone(),
        epsilon: c.epsilon,
        classical: c.classical,
        fair_coins: c.fair_coins,
        commuting: c.commuting,
        center: c.center,
        bounded_by: c.bounded_by,
        ..Default::default()
    };
    cfg.validate(ineq)?;
    check_dims(&cfg, tol)?;
    Ok(cfg)
}

/// Rejects explicit dimensions that no trial could satisfy.
fn check_dims(cfg: &InequalityConfig, tol: &Tolerances) -> Result<(), CliError> {
    let Some(d) = &cfg.dims else { return Ok(()) };
    let n = cfg.n.unwrap_or(d.len());
    let dims: Vec<usize> = if d.len() == 1 { vec![d[0]; n] } else { d.clone() };
    if cfg.fair_coins && dims.iter().any(|v| *v != 2) {
        return Err(CliError::Usage("fair coins have factor dimension 2".into()));
    }
    let total = dims.iter().try_fold(1usize, |a, v| a.checked_mul(*v)).unwrap_or(usize::MAX);
    if total > tol.dim_cap {
        return Err(ncprob::Error::DimensionCap {
            dim: total,
            cap: tol.dim_cap,
        }
        .into());
    }
    Ok(())
}

fn counterexample_dir(c: &RunConfig) -> PathBuf {
    if let Some(d) = &c.counterexamples {
        return d.clone();
    }
    match c.out.as_ref().and_then(|p| p.parent()) {
        Some(p) if !p.as_os_str().is_empty() => p.join("counterexamples"),
        _ => PathBuf::from("counterexamples"),
    }
}

fn status_of(out: &SuiteOutcome) -> Status {
    if out.report.numerical_errors > 0 {
        Status::Numerical
    } else if out.pass() {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn summarize(out: &SuiteOutcome) {
    let r = &out.report;
    eprintln!(
        "{}: {} trials, {} failures, {} errors ({} numerical), worst slack {}, {:.2}s",
        r.property,
        r.trials,
        r.failures,
        r.errors,
        r.numerical_errors,
        r.worst_slack.map_or("n/a".into(), |s| format!("{s:.3e}")),
        r.elapsed.as_secs_f64()
    );
}

/// Writes counterexamples of failing suites and reports where they went.
fn dump(outcomes: &[&SuiteOutcome], dir: &Path) -> Result<(), CliError> {
    for out in outcomes {
        for path in out.write_counterexamples(dir)? {
            eprintln!("counterexample: {}", path.display());
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    #[serde(flatten)]
    suite: &'a SuiteOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<&'a SuiteOutcome>,
}

fn verify(c: &RunConfig) -> Result<Status, CliError> {
    let ineq = inequality(c)?;
    let tol = c.tolerances()?;
    let cfg = base_config(c, ineq, &tol)?;
    let trials = c.trials(100)?;
    let seed = c.seed.unwrap_or(0);
    let suite = run_inequality(ineq, &cfg, trials, seed, &tol)?;
    summarize(&suite);

    let oracle = if (c.classical || c.fair_coins) && ineq != Inequality::SeriesWitness {
        let cc = crosscheck_config(c, &cfg, ineq);
        let o = oracle_crosscheck(&cc, trials, seed, &tol)?;
        summarize(&o);
        Some(o)
    } else {
        None
    };

    let mut status = status_of(&suite);
    if let Some(o) = &oracle {
        status = status.worst(status_of(o));
    }
    if status != Status::Pass {
        let all: Vec<&SuiteOutcome> = std::iter::once(&suite).chain(oracle.as_ref()).collect();
        dump(&all, &counterexample_dir(c))?;
    }
    let bytes = match c.format.unwrap_or(Format::Json) {
        Format::Json => json_bytes(&VerifyOutput {
            suite: &suite,
            oracle: oracle.as_ref(),
        })?,
        Format::Csv => {
            let mut rows = suite_rows(&suite, ineq.name());
            if let Some(o) = &oracle {
                rows.extend(suite_rows(o, &format!("oracle-{}", ineq.name())));
            }
            csv_bytes(&rows)?
        }
    };
    emit(c.out.as_deref(), &bytes)?;
    Ok(status)
}

/// Oracle cross-check matching the shape of a classical verify run.
fn crosscheck_config(c: &RunConfig, cfg: &InequalityConfig, ineq: Inequality) -> CrosscheckConfig {
    let n = cfg.n.or(cfg.dims.as_ref().filter(|d| d.len() > 1).map(Vec::len));
    let spec = match (&cfg.dims, n) {
        (Some(d), n) => {
            let n = n.unwrap_or(d.len());
            let dims = if d.len() == 1 { vec![d[0]; n] } else { d.clone() };
            Some(classical_spec(dims, c.fair_coins))
        }
        (None, Some(n)) if c.fair_coins => Some(classical_spec(vec![2; n], true)),
        _ => None,
    };
    CrosscheckConfig {
        spec,
        inequality: Some(ineq),
        n,
        lambda: cfg.lambda,
        alphas: cfg.alphas.clone(),
        ..Default::default()
    }
}

fn classical_spec(dims: Vec<usize>, fair: bool) -> InstanceSpec {
    let mut spec = InstanceSpec::new(dims, 0);
    spec.classical = true;
    spec.fair_coins = fair;
    spec
}

fn demo(c: &RunConfig) -> Result<Status, CliError> {
    let tol = c.tolerances()?;
    let name = c
        .demo
        .ok_or_else(|| CliError::Usage("demo name required: remark-matrices or two-coins".into()))?;
    let format = c.format.unwrap_or(Format::Json);
    let (pass, bytes) = match name {
        DemoName::RemarkMatrices => {
            let lambdas = c.lambda.clone().unwrap_or_else(|| REMARK_LAMBDAS.to_vec());
            let d = remark_demo(&lambdas, &tol)?;
            eprintln!(
                "remark-matrices: s_4 = diag(8,8): {}; |[x1,x2]| = {:.6}; max |[s_k,s_4]| = {:.1e}",
                d.total_is_eight,
                d.first_commutator,
                d.tail_commutators.iter().fold(0.0f64, |a, v| a.max(*v))
            );
            let bytes = match format {
                Format::Json => json_bytes(&d)?,
                Format::Csv => {
                    let rows: Vec<Row> = d
                        .runs
                        .iter()
                        .flat_map(|r| r.result.reports.iter())
                        .map(|r| Row::from_report("etemadi", 4, &[2], r))
                        .collect();
                    csv_bytes(&rows)?
                }
            };
            (d.pass(), bytes)
        }
        DemoName::TwoCoins => {
            let lambda = c.single_lambda()?.unwrap_or(0.5);
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(CliError::Usage(format!("lambda must be positive, got {lambda}")));
            }
            let d = two_coins_demo(lambda, &tol)?;
            let tau = |r: Option<&InequalityReport>| r.and_then(|r| r.aux.get("tau_p").copied()).unwrap_or(f64::NAN);
            eprintln!(
                "two-coins at lambda = {lambda}: etemadi tau(p) = {}",
                significant15(tau(d.etemadi.report("etemadi")))
            );
            let bytes = match format {
                Format::Json => json_bytes(&d)?,
                Format::Csv => {
                    let mut rows: Vec<Row> = Vec::new();
                    rows.extend(d.hajek_renyi.reports().map(|r| Row::from_report("hajek-renyi", 2, &[2, 2], r)));
                    rows.extend(
                        d.kolmogorov_type
                            .reports()
                            .map(|r| Row::from_report("kolmogorov-type", 2, &[2, 2], r)),
                    );
                    rows.extend(d.etemadi.reports.iter().map(|r| Row::from_report("etemadi", 2, &[2, 2], r)));
                    csv_bytes(&rows)?
                }
            };
            (d.pass(), bytes)
        }
    };
    emit(c.out.as_deref(), &bytes)?;
    Ok(if pass { Status::Pass } else { Status::Fail })
}

fn sweep(c: &RunConfig) -> Result<Status, CliError> {
    let ineq = inequality(c)?;
    let tol = c.tolerances()?;
    let trials = c.trials(1)?;
    let seed = c.seed.unwrap_or(0);
    if c.n.is_none() && c.lambda.is_none() {
        return Err(CliError::Usage("sweep needs --n and/or --lambda values".into()));
    }
    let ns: Vec<Option<usize>> = match &c.n {
        Some(v) if v.is_empty() => return Err(CliError::Usage("empty range for n".into())),
        Some(v) => v.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let lambdas: Vec<Option<f64>> = match &c.lambda {
        Some(_) if ineq == Inequality::SeriesWitness => {
            return Err(CliError::Usage("series-witness is swept over n with a fixed --epsilon".into()))
        }
        Some(v) if v.is_empty() => return Err(CliError::Usage("empty range for lambda".into())),
        Some(v) => v.iter().copied().map(Some).collect(),
        None => vec![None],
    };

    let mut rows = Vec::new();
    let mut status = Status::Pass;
    let dir = counterexample_dir(c);
    for n in &ns {
        for lambda in &lambdas {
            let point = RunConfig {
                n: n.map(|n| vec![n]),
                lambda: lambda.map(|l| vec![l]),
                ..c.clone()
            };
            let cfg = base_config(&point, ineq, &tol)?;
            let out = run_inequality(ineq, &cfg, trials, seed, &tol)?;
            let s = status_of(&out);
            if s != Status::Pass {
                dump(&[&out], &dir)?;
            }
            status = status.worst(s);
            rows.extend(suite_rows(&out, ineq.name()));
        }
    }
    eprintln!(
        "sweep {}: {} rows, {} failing",
        ineq.name(),
        rows.len(),
        rows.iter().filter(|r| !r.pass).count()
    );
    let bytes = match c.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_bytes(&rows)?,
        Format::Json => json_bytes(&rows)?,
    };
    emit(c.out.as_deref(), &bytes)?;
    Ok(status)
}

fn read_table(c: &RunConfig) -> Result<ClassicalTable, CliError> {
    match (&c.table, c.fair_coins) {
        (Some(_), true) => Err(CliError::Usage("give either --table or --fair-coins".into())),
        (Some(path), false) => {
            let text = if path.as_os_str() == "-" {
                let mut s = String::new();
                io::stdin().read_to_string(&mut s)?;
                s
            } else {
                fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?
            };
            Ok(ClassicalTable::from_json(&text)?)
        }
        (None, true) => {
            let n = c.single_n()?.unwrap_or(1);
            if n == 0 {
                return Err(CliError::Usage("n must be at least 1".into()));
            }
            Ok(ClassicalTable::fair_coins(n))
        }
        (None, false) => Err(CliError::Usage("--table or --fair-coins is required".into())),
    }
}

#[derive(Serialize)]
struct OracleOutput {
    query: QueryName,
    k: Option<usize>,
    t: Option<f64>,
    value: f64,
}

fn oracle(c: &RunConfig) -> Result<Status, CliError> {
    let table = read_table(c)?;
    let n = table.len();
    let name = c.query.ok_or_else(|| CliError::Usage("--query is required".into()))?;
    let t = || c.t.ok_or_else(|| CliError::Usage(format!("--t is required for {name:?}")));
    let k = || match c.k {
        Some(k) if (1..=n).contains(&k) => Ok(k),
        Some(k) => Err(CliError::Usage(format!("k must lie in 1..={n}, got {k}"))),
        None => Err(CliError::Usage(format!("--k is required for {name:?}"))),
    };
    let query = match name {
        QueryName::MaxAbsPartialSum => OracleQuery::MaxAbsPartialSum { t: t()? },
        QueryName::MaxAbsPartialSumStrict => OracleQuery::MaxAbsPartialSumStrict { t: t()? },
        QueryName::Tail => OracleQuery::Tail { k: k()?, t: t()? },
        QueryName::WeightedMax => {
            let alphas = c.alphas.clone().unwrap_or_else(|| vec![1.0; n]);
            ncprob::cuculescu::normalize_alphas(&alphas, n)?;
            OracleQuery::WeightedMax { alphas, t: t()? }
        }
        QueryName::Var => OracleQuery::Variance { k: k()? },
        QueryName::SecondMoment => OracleQuery::SecondMoment,
        QueryName::ChainEvent => OracleQuery::ChainEvent {
            k: k()?,
            threshold: t()?,
        },
    };
    let value = classical_oracle(&table, &query, c.max_points.unwrap_or(DEFAULT_ENUMERATION_CAP))?;
    let bytes = match c.format.unwrap_or(Format::Csv) {
        Format::Csv => format!("{}\n", significant15(value)).into_bytes(),
        Format::Json => json_bytes(&OracleOutput {
            query: name,
            k: c.k,
            t: c.t,
            value,
        })?,
    };
    emit(c.out.as_deref(), &bytes)?;
    Ok(Status::Pass)
}
