//! Command-line flags. Every flag overrides the matching config-file field.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use ncprob::harness::Inequality;

use crate::config::{CommandName, DemoName, Format, QueryName, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "ncprob", version, about = "Verify noncommutative maximal inequalities on random matrix instances")]
pub struct Cli {
    /// JSON file with default settings; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Write the result here (atomically) instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Slack allowed when checking inequalities.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Largest tensor-product dimension.
    #[arg(long, global = true, env = "NCPROB_DIM_CAP")]
    pub dim_cap: Option<usize>,
    /// Directory for counterexample files.
    #[arg(long, global = true, value_name = "DIR")]
    pub counterexamples: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an inequality over random instances.
    Verify(RunArgs),
    /// Run one of the fixed example instances.
    Demo(DemoArgs),
    /// Tabulate an inequality over a grid of n and lambda.
    Sweep(RunArgs),
    /// Evaluate a probability of a classical table by enumeration.
    Oracle(OracleArgs),
}

/// A comma-separated list; counts also accept inclusive ranges `a..b`.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

fn parse_floats(s: &str) -> Result<List<f64>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(List)
}

fn parse_counts(s: &str) -> Result<List<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |x: &str| usize::from_str(x.trim()).map_err(|e| format!("`{x}`: {e}"));
        if let Some((a, b)) = part.split_once("..") {
            let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
            out.extend(a..=b);
        } else {
            out.push(num(part)?);
        }
    }
    Ok(List(out))
}

fn parse_inequality(s: &str) -> Result<Inequality, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = Inequality::ALL.iter().map(|i| i.name()).collect();
        format!("unknown inequality `{s}`; expected one of {}", names.join(", "))
    })
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long, value_parser = parse_inequality)]
    pub inequality: Option<Inequality>,
    /// Sequence length; `sweep` accepts lists and ranges such as `2..6`.
    #[arg(long, value_parser = parse_counts)]
    pub n: Option<List<usize>>,
    /// Factor dimensions; a single value is repeated n times.
    #[arg(long, value_parser = parse_counts)]
    pub dims: Option<List<usize>>,
    /// Threshold; `sweep` accepts a comma-separated list.
    #[arg(long, value_parser = parse_floats, allow_negative_numbers = true)]
    pub lambda: Option<List<f64>>,
    /// Non-increasing positive weights for hajek-renyi.
    #[arg(long, value_parser = parse_floats, allow_negative_numbers = true)]
    pub alphas: Option<List<f64>>,
    /// Series-witness threshold.
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Diagonal (classical) local variables.
    #[arg(long)]
    pub classical: bool,
    /// Fair +-1 coins.
    #[arg(long)]
    pub fair_coins: bool,
    /// Locals that make every partial sum commute.
    #[arg(long)]
    pub commuting: bool,
    /// Draw uncentered variables and subtract their means.
    #[arg(long)]
    pub center: bool,
    /// Scale every local to operator norm at most this.
    #[arg(long)]
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    #[arg(value_enum)]
    pub name: Option<DemoName>,
    /// Threshold for two-coins.
    #[arg(long, value_parser = parse_floats)]
    pub lambda: Option<List<f64>>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OracleArgs {
    /// ClassicalTable JSON file, or `-` for stdin.
    #[arg(long, value_name = "FILE")]
    pub table: Option<PathBuf>,
    /// Use n fair coins instead of a table.
    #[arg(long)]
    pub fair_coins: bool,
    #[arg(long, value_parser = parse_counts)]
    pub n: Option<List<usize>>,
    #[arg(long, value_enum)]
    pub query: Option<QueryName>,
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_parser = parse_floats)]
    pub alphas: Option<List<f64>>,
    /// Enumeration cap in sample points.
    #[arg(long)]
    pub max_points: Option<u128>,
}

fn set<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

impl Cli {
    /// The config file (if any) with every given flag applied on top.
    pub fn resolve(&self) -> Result<RunConfig, crate::error::CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let name = match &self.command {
            Command::Verify(_) => CommandName::Verify,
            Command::Demo(_) => CommandName::Demo,
            Command::Sweep(_) => CommandName::Sweep,
            Command::Oracle(_) => CommandName::Oracle,
        };
        if let Some(other) = c.command.filter(|c| *c != name) {
            return Err(crate::error::CliError::Usage(format!(
                "config file is for `{other:?}`, not `{name:?}`"
            )));
        }
        c.command = Some(name);
        set(&mut c.out, self.out.clone());
        set(&mut c.format, self.format);
        set(&mut c.tolerance, self.tolerance);
        set(&mut c.dim_cap, self.dim_cap);
        set(&mut c.counterexamples, self.counterexamples.clone());
        match &self.command {
            Command::Verify(a) | Command::Sweep(a) => a.apply(&mut c),
            Command::Demo(a) => {
                set(&mut c.demo, a.name);
                set(&mut c.lambda, a.lambda.clone().map(|l| l.0));
            }
            Command::Oracle(a) => {
                set(&mut c.table, a.table.clone());
                c.fair_coins |= a.fair_coins;
                set(&mut c.n, a.n.clone().map(|l| l.0));
                set(&mut c.query, a.query);
                set(&mut c.t, a.t);
                set(&mut c.k, a.k);
                set(&mut c.alphas, a.alphas.clone().map(|l| l.0));
                set(&mut c.max_points, a.max_points);
            }
        }
        Ok(c)
    }
}

impl RunArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.inequality, self.inequality);
        set(&mut c.n, self.n.clone().map(|l| l.0));
        set(&mut c.dims, self.dims.clone().map(|l| l.0));
        set(&mut c.lambda, self.lambda.clone().map(|l| l.0));
        set(&mut c.alphas, self.alphas.clone().map(|l| l.0));
        set(&mut c.epsilon, self.epsilon);
        set(&mut c.trials, self.trials);
        set(&mut c.seed, self.seed);
        set(&mut c.bounded_by, self.bound);
        c.classical |= self.classical;
        c.fair_coins |= self.fair_coins;
        c.commuting |= self.commuting;
        c.center |= self.center;
    }
}
