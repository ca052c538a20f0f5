//! Cuculescu-type projection chains and the maximal inequalities built on them.
//!
//! Each construction walks the partial sums `s_k` once, cutting off at step `k` the
//! part of the surviving projection `e_{k−1}` where a statistic of `s_k` crosses the
//! threshold. The increments `p_k` localize first crossings.

use serde::{Deserialize, Serialize};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lattice::join_spans;
use crate::operator::dense;
use crate::operator::{
    abs_decomposition, compress, projection_from_basis, spectral_decompose, HermitianOperator, Projection,
    RealInterval, C64,
};
use crate::report::InequalityReport;
use crate::space::{tensor_lift, IndependentSequence, NcSpace};
use crate::tolerance::Tolerances;

/// The chain `e_0 = 1 ≥ e_1 ≥ … ≥ e_n` with increments `p_k` and final projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuculescuTrace {
    pub e_sequence: Vec<Projection>,
    pub p_sequence: Vec<Projection>,
    pub p_final: Projection,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
}

/// Worst defects of the structural invariants of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainAudit {
    /// `max_k max(0, −λ_min(e_{k−1} − e_k))`.
    pub decreasing: f64,
    /// `max_k ‖e_k e_{k−1} − e_k‖_max`.
    pub nesting: f64,
    /// `max_{j≠k} ‖p_j p_k‖_HS`, an upper bound for the operator norm.
    pub orthogonality: f64,
    /// `‖Σ p_k − p_final‖_max`, with `p_final` the join computed from the ranges of the `p_k`.
    pub join_defect: f64,
}

impl ChainAudit {
    pub fn passes(&self) -> bool {
        self.decreasing <= 1e-9 && self.nesting <= 1e-9 && self.orthogonality <= 1e-8 && self.join_defect <= 1e-8
    }

    pub fn report(&self, name: &str) -> InequalityReport {
        let worst = self.decreasing.max(self.nesting).max(self.orthogonality).max(self.join_defect);
        InequalityReport::upper(format!("{name}-chain"), worst, 0.0, 1e-8)
            .and(self.passes())
            .with_aux("decreasing", self.decreasing)
            .with_aux("nesting", self.nesting)
            .with_aux("orthogonality", self.orthogonality)
            .with_aux("join_defect", self.join_defect)
    }
}

impl CuculescuTrace {
    pub fn len(&self) -> usize {
        self.p_sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_sequence.is_empty()
    }

    pub fn e_final(&self) -> &Projection {
        self.e_sequence.last().expect("chain starts with the identity")
    }

    pub fn audit(&self) -> ChainAudit {
        let mut decreasing = 0.0f64;
        let mut nesting = 0.0f64;
        for w in self.e_sequence.windows(2) {
            let (prev, next) = (&w[0], &w[1]);
            decreasing = decreasing.max(-(&**prev - &**next).min_eigenvalue());
            let prod = next.product(prev);
            let defect = prod
                .iter()
                .zip(next.matrix().iter())
                .fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
            nesting = nesting.max(defect);
        }
        let mut orthogonality = 0.0f64;
        let nonzero: Vec<&Projection> = self.p_sequence.iter().filter(|p| p.rank() > 0).collect();
        for (j, pj) in nonzero.iter().enumerate() {
            for pk in &nonzero[j + 1..] {
                orthogonality = orthogonality.max(pj.product(pk).norm());
            }
        }
        let dim = self.p_final.dim();
        let sum = self
            .p_sequence
            .iter()
            .fold(HermitianOperator::zeros(dim), |acc, p| &acc + &**p);
        ChainAudit {
            decreasing,
            nesting,
            orthogonality,
            join_defect: sum.max_abs_diff(&self.p_final),
        }
    }
}

/// Result of the weighted maximal construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HajekRenyiResult {
    pub trace: CuculescuTrace,
    /// `τ(p) ≤ Σ α_k² var(x_k) / λ²`.
    pub report: InequalityReport,
    /// `‖(1 − p) α_k|s_k| (1 − p)‖ ≤ λ` for every `k`.
    pub norm_reports: Vec<InequalityReport>,
    /// `p_k s_k² p_k ≥ (λ/α_k)² p_k`.
    pub step_reports: Vec<InequalityReport>,
}

impl HajekRenyiResult {
    pub fn pass(&self) -> bool {
        self.report.pass && self.norm_reports.iter().all(|r| r.pass) && self.step_reports.iter().all(|r| r.pass)
    }

    pub fn reports(&self) -> impl Iterator<Item = &InequalityReport> {
        std::iter::once(&self.report).chain(&self.norm_reports).chain(&self.step_reports)
    }
}

/// Result of the two-sided construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedResult {
    pub e: Projection,
    pub trace_e: f64,
    pub lower: f64,
    pub upper: f64,
    pub commuting_refinement: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_commuting: Option<f64>,
    pub report: InequalityReport,
    /// `e_n s_k² e_n ≤ λ² e_n` for every `k`.
    pub cutoff_reports: Vec<InequalityReport>,
    pub trace: CuculescuTrace,
}

impl TwoSidedResult {
    pub fn pass(&self) -> bool {
        self.report.pass && self.cutoff_reports.iter().all(|r| r.pass)
    }

    pub fn reports(&self) -> impl Iterator<Item = &InequalityReport> {
        std::iter::once(&self.report).chain(&self.cutoff_reports)
    }
}

/// Result of the threshold-`3λ` construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtemadiResult {
    pub trace: CuculescuTrace,
    /// Main chain, complement bound, refined bound, nonzero witness, commutation of `p`.
    pub reports: Vec<InequalityReport>,
}

impl EtemadiResult {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn report(&self, name: &str) -> Option<&InequalityReport> {
        self.reports.iter().find(|r| r.name == name)
    }
}

/// One row of the series witness: the chain after `m` window steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub m: usize,
    pub tau_e_perp: f64,
    pub lower_bound: f64,
    pub sum_var: f64,
    pub report: InequalityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesWitness {
    pub n: usize,
    pub epsilon: f64,
    pub c: f64,
    pub rows: Vec<WitnessRow>,
    pub monotone: bool,
}

impl SeriesWitness {
    pub fn pass(&self) -> bool {
        self.monotone && self.rows.iter().all(|r| r.report.pass)
    }
}

/// Weighted maximal inequality for mean-zero independent variables.
///
/// `alphas` holds `α_1 ≥ … ≥ α_n > 0`; a list of length `n + 1` is read as
/// `α_0, …, α_n` and its first entry is ignored.
pub fn hajek_renyi(seq: &IndependentSequence, alphas: &[f64], lambda: f64, tol: &Tolerances) -> Result<HajekRenyiResult> {
    hajek_renyi_named("hajek-renyi", seq, alphas, lambda, tol)
}

/// The unweighted case `α_k = 1`.
pub fn kolmogorov_maximal(seq: &IndependentSequence, lambda: f64, tol: &Tolerances) -> Result<HajekRenyiResult> {
    hajek_renyi_named("kolmogorov-maximal", seq, &vec![1.0; seq.len()], lambda, tol)
}

fn hajek_renyi_named(
    name: &str,
    seq: &IndependentSequence,
    alphas: &[f64],
    lambda: f64,
    tol: &Tolerances,
) -> Result<HajekRenyiResult> {
    check_lambda(lambda)?;
    check_centered(seq, tol)?;
    let alphas = normalize_alphas(alphas, seq.len())?;
    let space = seq.space();
    let sums = seq.partial_sums();

    let mut stats = Vec::with_capacity(sums.len());
    for (s, a) in sums.iter().zip(&alphas) {
        stats.push(abs_decomposition(s, tol)?.reconstruct().scaled(*a));
    }
    // The compressed statistic is positive, so [0, λ) and (−∞, λ) select the same part.
    let chain = Chain::run(&stats, &RealInterval::less_than(lambda), tol)?;
    let p_final = chain.join(tol)?;

    let variances = seq.variances()?;
    let weighted: f64 = alphas.iter().zip(&variances).map(|(a, v)| a * a * v).sum();
    let tau_p = space.prob(&p_final)?;
    let report = InequalityReport::upper(name, tau_p, weighted / (lambda * lambda), tol.check)
        .with_param("lambda", lambda)
        .with_param("n", seq.len() as f64)
        .with_aux("tau_p", tau_p)
        .with_aux("tau_e_n", chain.trace_of_e(seq.len()))
        .with_aux("weighted_var", weighted);

    // Cutoffs are measured on the final `1 − p`; on `1 − p_{≤k}` they hold by construction.
    let last = stats.len();
    let mut norm_reports = Vec::with_capacity(last);
    for (k, stat) in stats.iter().enumerate() {
        let norm = chain.e[last].compress(stat).map_or(0.0, |y| y.op_norm());
        norm_reports.push(
            InequalityReport::upper(format!("{name}-cutoff"), norm, lambda, tol.check).with_param("n", (k + 1) as f64),
        );
    }

    let mut step_reports = Vec::with_capacity(stats.len());
    for (k, s) in sums.iter().enumerate() {
        let floor = (lambda / alphas[k]).powi(2);
        let step = match chain.p[k].compress(&s.square()) {
            Some(y) => InequalityReport::upper(format!("{name}-step"), floor, y.min_eigenvalue(), tol.check * floor.max(1.0)),
            None => InequalityReport::not_applicable(format!("{name}-step"), tol.check),
        };
        step_reports.push(step.with_param("k", (k + 1) as f64));
    }

    Ok(HajekRenyiResult {
        trace: chain.into_trace(p_final, lambda, Some(alphas)),
        report,
        norm_reports,
        step_reports,
    })
}

/// Two-sided bound on the trace of `e = 1 − e_n`, where `e_n` keeps the part
/// with `s_k² ≤ λ²` for every `k`.
///
/// The lower bound carries the factor 2 in general; when consecutive partial sums
/// commute the factor-1 bound is asserted as well.
pub fn kolmogorov_type(seq: &IndependentSequence, lambda: f64, tol: &Tolerances) -> Result<TwoSidedResult> {
    check_lambda(lambda)?;
    check_centered(seq, tol)?;
    let space = seq.space();
    let sums = seq.partial_sums();
    let squares: Vec<HermitianOperator> = sums.iter().map(HermitianOperator::square).collect();
    let lambda2 = lambda * lambda;
    let chain = Chain::run(&squares, &RealInterval::at_most(lambda2), tol)?;
    let n = sums.len();
    let e = chain.e[n].projection().complement();
    let trace_e = space.prob(&e)?;

    let c = seq.lifted().iter().fold(0.0f64, |a, x| a.max(x.op_norm()));
    let sum_var: f64 = seq.variances()?.iter().sum();
    let s_n = &sums[n - 1];
    let second_moment = space.trace_of_product(s_n, s_n)?.re;
    let upper = second_moment / lambda2;
    let vacuous = sum_var <= tol.check;
    let lower = if vacuous {
        f64::NEG_INFINITY
    } else {
        1.0 - 2.0 * (lambda + c).powi(2) / sum_var
    };
    let commuting = sums.windows(2).all(|w| w[1].commutes_with(&w[0], tol.commute));
    let lower_commuting = (commuting && !vacuous).then(|| 1.0 - (lambda + c).powi(2) / sum_var);

    let sharpest = lower_commuting.unwrap_or(lower).max(lower);
    let mut report = InequalityReport::two_sided("kolmogorov-type", lower, trace_e, upper, tol.check)
        .with_param("lambda", lambda)
        .with_param("n", n as f64)
        .with_aux("c", c)
        .with_aux("sum_var", sum_var)
        .with_aux("second_moment", second_moment)
        .with_aux("commuting", if commuting { 1.0 } else { 0.0 })
        .with_aux("lower_vacuous", if sharpest <= 0.0 { 1.0 } else { 0.0 });
    if let Some(lc) = lower_commuting {
        report = report.with_aux("lower_commuting", lc).and(trace_e >= lc - tol.check);
        report.slack = report.slack.min(trace_e - lc);
    } else if commuting {
        report = report.with_aux("lower_commuting", f64::NEG_INFINITY);
    }

    let mut cutoff_reports = Vec::with_capacity(n);
    for (k, sq) in squares.iter().enumerate() {
        let top = chain.e[n].compress(sq).map_or(0.0, |y| y.eigenvalues()[y.dim() - 1]);
        cutoff_reports.push(
            InequalityReport::upper("kolmogorov-type-cutoff", top, lambda2, tol.check * lambda2.max(1.0))
                .with_param("k", (k + 1) as f64),
        );
    }

    let p_final = chain.join(tol)?;
    Ok(TwoSidedResult {
        trace: chain.into_trace(p_final, lambda, None),
        e,
        trace_e,
        lower,
        upper,
        commuting_refinement: commuting,
        lower_commuting,
        report,
        cutoff_reports,
    })
}

/// Threshold-`3λ` chain for variables whose partial sums commute with `s_n`.
///
/// Mean zero is not required.
pub fn etemadi(seq: &IndependentSequence, lambda: f64, tol: &Tolerances) -> Result<EtemadiResult> {
    check_lambda(lambda)?;
    let space = seq.space();
    let sums = seq.partial_sums();
    let n = sums.len();
    let s_n = &sums[n - 1];
    for (k, s) in sums.iter().enumerate() {
        if !s.commutes_with(s_n, tol.commute) {
            return Err(Error::Precondition(format!(
                "s_{} does not commute with s_{n} (commutator norm {:e})",
                k + 1,
                s.commutator_norm(s_n)
            )));
        }
    }

    let spectra = sums
        .iter()
        .map(|s| abs_decomposition(s, tol))
        .collect::<Result<Vec<_>>>()?;
    let abs: Vec<HermitianOperator> = spectra.iter().map(|d| d.reconstruct()).collect();
    let three = 3.0 * lambda;
    let chain = Chain::run(&abs, &RealInterval::less_than(three), tol)?;
    let p_final = chain.join(tol)?;
    let tau_p = space.prob(&p_final)?;

    let tails = |b: &RealInterval| -> Vec<f64> { spectra.iter().map(|d| d.fraction_in(b, tol)).collect() };
    let closed = tails(&RealInterval::at_least(lambda));
    let open = tails(&RealInterval::greater_than(lambda));
    let max_closed = closed.iter().fold(0.0f64, |a, v| a.max(*v));
    let max_open = open.iter().fold(0.0f64, |a, v| a.max(*v));
    let closed_rhs = 2.0 * closed[n - 1] + max_closed;
    let open_rhs = 2.0 * open[n - 1] + max_open;

    let mut reports = Vec::with_capacity(5);
    let mut main = InequalityReport::upper("etemadi", tau_p, closed_rhs, tol.check)
        .and(closed_rhs <= 3.0 * max_closed + tol.check)
        .with_param("lambda", lambda)
        .with_param("n", n as f64)
        .with_aux("tau_p", tau_p)
        .with_aux("closed_rhs", closed_rhs)
        .with_aux("open_rhs", open_rhs)
        .with_aux("three_max", 3.0 * max_closed)
        .with_aux("three_max_open", 3.0 * max_open);
    main.slack = main.slack.min(3.0 * max_closed - closed_rhs);
    reports.push(main);

    let first_below = spectra[0].fraction_in(&RealInterval::less_than(three), tol);
    reports.push(
        InequalityReport::upper("etemadi-complement", 1.0 - tau_p, first_below, tol.check)
            .with_param("lambda", lambda),
    );

    let mut m = 0.0f64;
    for s in &sums[..n - 1] {
        let diff = abs_decomposition(&(s_n - s), tol)?;
        m = m.max(diff.fraction_in(&RealInterval::greater_than(lambda / 2.0), tol));
    }
    let refined = if m < 1.0 - tol.refined_margin {
        InequalityReport::upper("etemadi-refined", tau_p, open[n - 1] / (1.0 - m), tol.check)
    } else {
        InequalityReport::not_applicable("etemadi-refined", tol.check)
    };
    reports.push(refined.with_param("lambda", lambda).with_aux("m", m));

    let witness = tails(&RealInterval::at_least(three)).into_iter().fold(0.0f64, f64::max);
    let nonzero = if witness > tol.check {
        InequalityReport::upper("etemadi-nonzero", 0.0, tau_p, 0.0).and(tau_p > tol.check)
    } else {
        InequalityReport::not_applicable("etemadi-nonzero", tol.check)
    };
    reports.push(nonzero.with_param("lambda", lambda).with_aux("witness", witness));

    let comm = p_final.commutator_norm(s_n);
    reports.push(InequalityReport::upper(
        "etemadi-commutation",
        comm,
        0.0,
        tol.check * s_n.op_norm().max(1.0),
    ));

    Ok(EtemadiResult {
        trace: chain.into_trace(p_final, lambda, None),
        reports,
    })
}

/// Finite witness for divergence of `Σ x_k` from the tail starting after index `n`.
///
/// `local_factory(k)` returns the local matrix of `x_k` (indices from 1). The window
/// `x_{n+1}, …, x_{n+m_max}` is lifted to a tensor product and the chain
/// `e_{n,m} = 1_{[0,ε²]}(e_{n,m−1} |s_{n+m} − s_n|² e_{n,m−1}) · e_{n,m−1}` is built.
/// Each row compares `τ(1 − e_{n,m})` with `1 − (2ε² + 2c²) / Σ_{k=n+1}^{n+m} var(x_k)`.
pub fn series_divergence_witness(
    local_factory: impl Fn(usize) -> HermitianOperator,
    epsilon: f64,
    n: usize,
    m_max: usize,
    tol: &Tolerances,
) -> Result<SeriesWitness> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Precondition(format!("epsilon must be positive, got {epsilon}")));
    }
    if m_max == 0 {
        return Err(Error::InvalidArgument("series witness needs m_max >= 1".into()));
    }
    let locals: Vec<HermitianOperator> = (n + 1..=n + m_max).map(&local_factory).collect();
    for (i, a) in locals.iter().enumerate() {
        let t = NcSpace::new(a.dim())?.trace(a)?;
        if t.abs() > tol.centered {
            return Err(Error::Precondition(format!("x_{} has trace {t}, expected 0", n + 1 + i)));
        }
    }
    let seq = tensor_lift(locals, false, tol.dim_cap)?;
    let c = seq.lifted().iter().fold(0.0f64, |a, x| a.max(x.op_norm()));
    let variances = seq.variances()?;
    let squares: Vec<HermitianOperator> = seq.partial_sums().iter().map(HermitianOperator::square).collect();
    let eps2 = epsilon * epsilon;
    let chain = Chain::run(&squares, &RealInterval::at_most(eps2), tol)?;
    let numerator = 2.0 * eps2 + 2.0 * c * c;

    let mut rows = Vec::with_capacity(m_max);
    let mut sum_var = 0.0;
    let mut previous = 0.0f64;
    let mut monotone = true;
    for m in 1..=m_max {
        let tau_e_perp = 1.0 - chain.trace_of_e(m);
        sum_var += variances[m - 1];
        let lower_bound = if sum_var <= tol.check {
            f64::NEG_INFINITY
        } else {
            1.0 - numerator / sum_var
        };
        let step_ok = tau_e_perp >= previous - tol.check;
        monotone &= step_ok;
        previous = tau_e_perp;
        let report = InequalityReport::upper("series-witness", lower_bound, tau_e_perp, tol.check)
            .and(step_ok)
            .with_param("m", m as f64)
            .with_param("epsilon", epsilon)
            .with_aux("c", c)
            .with_aux("sum_var", sum_var);
        rows.push(WitnessRow {
            m,
            tau_e_perp,
            lower_bound,
            sum_var,
            report,
        });
    }
    Ok(SeriesWitness {
        n,
        epsilon,
        c,
        rows,
        monotone,
    })
}

/// A subspace of `ℂ^d`: a set of coordinates, or an orthonormal column basis.
#[derive(Debug, Clone)]
enum Range {
    Mask(Vec<bool>),
    Basis(DMatrix<C64>),
}

impl Range {
    fn rank(&self) -> usize {
        match self {
            Range::Mask(m) => m.iter().filter(|b| **b).count(),
            Range::Basis(b) => b.ncols(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Range::Mask(m) => m.len(),
            Range::Basis(b) => b.nrows(),
        }
    }

    fn projection(&self) -> Projection {
        match self {
            Range::Mask(m) => Projection::from_mask(m),
            Range::Basis(b) => projection_from_basis(b),
        }
    }

    fn basis(&self) -> DMatrix<C64> {
        match self {
            Range::Mask(m) => {
                let idx = indices(m);
                let mut b = DMatrix::zeros(m.len(), idx.len());
                for (col, row) in idx.iter().enumerate() {
                    b[(*row, col)] = C64::new(1.0, 0.0);
                }
                b
            }
            Range::Basis(b) => b.clone(),
        }
    }

    /// `b^* a b` for a basis `b` of the range; `None` if the range is zero.
    fn compress(&self, a: &HermitianOperator) -> Option<HermitianOperator> {
        if self.rank() == 0 {
            return None;
        }
        Some(match self {
            Range::Mask(m) => {
                let idx = indices(m);
                match a.diagonal_values() {
                    Some(d) => HermitianOperator::from_diagonal(idx.iter().map(|i| d[*i]).collect()),
                    None => {
                        let full = a.matrix();
                        HermitianOperator::from_dense_unchecked(full.select_rows(idx.iter()).select_columns(idx.iter()))
                    }
                }
            }
            Range::Basis(b) => compress(a, b),
        })
    }

    /// Splits the range into the parts where the compression of `a` has spectrum
    /// inside and outside `keep`. The first part is `1_keep(e a e) · e`.
    fn split(&self, a: &HermitianOperator, keep: &RealInterval, tol: &Tolerances) -> Result<(Range, Range)> {
        let Some(y) = self.compress(a) else {
            return Ok((self.clone(), self.clone()));
        };
        let decomposition = spectral_decompose(&y, tol)?;
        let inside = |v: f64| keep.contains(v, tol.snap);
        match self {
            Range::Mask(m) if y.is_diagonal() => {
                let local = decomposition.projection_where(inside);
                let flags = local.diagonal_values().expect("diagonal input has a diagonal projection");
                let mut kept = vec![false; m.len()];
                let mut cut = vec![false; m.len()];
                for (i, row) in indices(m).into_iter().enumerate() {
                    if flags[i] > 0.5 {
                        kept[row] = true;
                    } else {
                        cut[row] = true;
                    }
                }
                Ok((Range::Mask(kept), Range::Mask(cut)))
            }
            _ => {
                let b = self.basis();
                Ok((
                    Range::Basis(dense::mul(&b, &decomposition.range_basis(inside))),
                    Range::Basis(dense::mul(&b, &decomposition.range_basis(|v| !inside(v)))),
                ))
            }
        }
    }
}

fn indices(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect()
}

/// The ranges of `e_0, …, e_n` and `p_1, …, p_n`.
struct Chain {
    e: Vec<Range>,
    p: Vec<Range>,
}

impl Chain {
    /// Runs `e_k = 1_keep(e_{k−1} y_k e_{k−1}) · e_{k−1}` and `p_k = e_{k−1} − e_k`
    /// over the statistics `y_k`. Each step works in a basis of the range of
    /// `e_{k−1}`, so `e_k ≤ e_{k−1}` and the orthogonality of the `p_k` hold by
    /// construction.
    fn run(stats: &[HermitianOperator], keep: &RealInterval, tol: &Tolerances) -> Result<Self> {
        let dim = stats.first().map(HermitianOperator::dim).unwrap_or(1);
        let mut e = vec![Range::Mask(vec![true; dim])];
        let mut p = Vec::with_capacity(stats.len());
        for y in stats {
            let (next, cut) = e.last().expect("chain starts with the identity").split(y, keep, tol)?;
            e.push(next);
            p.push(cut);
        }
        Ok(Self { e, p })
    }

    fn trace_of_e(&self, k: usize) -> f64 {
        self.e[k].rank() as f64 / self.e[k].dim() as f64
    }

    /// `∨ p_k`.
    fn join(&self, tol: &Tolerances) -> Result<Projection> {
        let dim = self.e[0].dim();
        if self.p.iter().all(|r| matches!(r, Range::Mask(_))) {
            let mut mask = vec![false; dim];
            for r in &self.p {
                if let Range::Mask(m) = r {
                    mask.iter_mut().zip(m).for_each(|(a, b)| *a |= *b);
                }
            }
            return Ok(Projection::from_mask(&mask));
        }
        let bases: Vec<DMatrix<C64>> = self.p.iter().map(Range::basis).collect();
        join_spans(dim, &bases, tol)
    }

    fn into_trace(self, p_final: Projection, lambda: f64, alphas: Option<Vec<f64>>) -> CuculescuTrace {
        CuculescuTrace {
            e_sequence: self.e.iter().map(Range::projection).collect(),
            p_sequence: self.p.iter().map(Range::projection).collect(),
            p_final,
            lambda,
            alphas,
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("lambda must be positive and finite, got {lambda}")))
    }
}

fn check_centered(seq: &IndependentSequence, tol: &Tolerances) -> Result<()> {
    for (k, x) in seq.lifted().iter().enumerate() {
        let t = seq.space().trace(x)?;
        if t.abs() > tol.centered {
            return Err(Error::Precondition(format!(
                "x_{} has trace {t}, expected 0 (center the sequence first)",
                k + 1
            )));
        }
    }
    Ok(())
}

/// Validates `α_1 ≥ … ≥ α_n > 0`, dropping a leading `α_0` if present.
pub fn normalize_alphas(alphas: &[f64], n: usize) -> Result<Vec<f64>> {
    let alphas = match alphas.len() {
        l if l == n => alphas,
        l if l == n + 1 => &alphas[1..],
        l => {
            return Err(Error::InvalidArgument(format!(
                "expected {n} weights (or {} including α_0), got {l}",
                n + 1
            )))
        }
    };
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::InvalidArgument(format!("weights must be positive, got {a}")));
    }
    if alphas.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument(format!("weights must be non-increasing, got {alphas:?}")));
    }
    Ok(alphas.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{classical_embed, ClassicalTable};
    use crate::operator::C64;

    fn coins(n: usize) -> IndependentSequence {
        classical_embed(&ClassicalTable::fair_coins(n), 1024).unwrap()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn hajek_renyi_two_coins() {
        let r = kolmogorov_maximal(&coins(2), 1.5, &tol()).unwrap();
        assert_eq!(r.trace.e_sequence[1], Projection::identity(4));
        assert_eq!(r.trace.e_sequence[2].rank(), 2);
        assert_eq!(r.report.lhs, 0.5);
        assert!((r.report.rhs - 2.0 / 2.25).abs() < 1e-15);
        assert!(r.pass());
        assert_eq!(r.norm_reports[0].lhs, 1.0);
        assert_eq!(r.norm_reports[1].lhs, 0.0);
    }

    #[test]
    fn hajek_renyi_single_small_variable() {
        let seq = coins(1);
        let r = hajek_renyi(&seq, &[1.0], 2.0, &tol()).unwrap();
        assert!(r.trace.p_final.is_zero(0.0));
        assert_eq!((r.report.lhs, r.report.rhs), (0.0, 0.25));
    }

    #[test]
    fn weights_shrink_the_bound() {
        let seq = coins(2);
        let flat = hajek_renyi(&seq, &[1.0, 1.0], 1.5, &tol()).unwrap();
        let decaying = hajek_renyi(&seq, &[1.0, 0.5], 1.5, &tol()).unwrap();
        assert!((flat.report.rhs - 2.0 / 2.25).abs() < 1e-15);
        assert!((decaying.report.rhs - 1.25 / 2.25).abs() < 1e-15);
        assert!(decaying.pass());
        // with α_2 = 1/2 only |S_1| = 1 could cross 1.5, and it does not
        assert_eq!(decaying.report.lhs, 0.0);
    }

    #[test]
    fn alpha_zero_is_ignored_and_bad_weights_rejected() {
        assert_eq!(normalize_alphas(&[9.0, 1.0, 0.5], 2).unwrap(), vec![1.0, 0.5]);
        assert!(normalize_alphas(&[1.0, 2.0], 2).is_err());
        assert!(normalize_alphas(&[1.0, 0.0], 2).is_err());
        assert!(normalize_alphas(&[1.0], 2).is_err());
    }

    #[test]
    fn kolmogorov_maximal_extremes() {
        let r = kolmogorov_maximal(&coins(2), 100.0, &tol()).unwrap();
        assert!(r.trace.p_final.is_zero(0.0));
        let r = kolmogorov_maximal(&coins(1), 0.5, &tol()).unwrap();
        assert_eq!(r.trace.p_sequence[0], Projection::identity(2));
        assert_eq!((r.report.lhs, r.report.rhs), (1.0, 4.0));
    }

    #[test]
    fn non_centered_input_is_rejected() {
        let seq = tensor_lift(vec![HermitianOperator::from_diagonal(vec![2.0, 0.0])], false, 1024).unwrap();
        assert!(matches!(kolmogorov_maximal(&seq, 1.0, &tol()), Err(Error::Precondition(_))));
        assert!(kolmogorov_maximal(&seq.centered(), 1.0, &tol()).is_ok());
    }

    #[test]
    fn kolmogorov_type_two_coins() {
        let r = kolmogorov_type(&coins(2), 1.0, &tol()).unwrap();
        assert_eq!(r.trace_e, 0.5);
        assert_eq!(r.upper, 2.0);
        assert_eq!(r.lower, -3.0);
        assert!(r.commuting_refinement);
        assert_eq!(r.lower_commuting, Some(-1.0));
        assert!(r.pass());
    }

    #[test]
    fn kolmogorov_type_single_coin_large_lambda() {
        let r = kolmogorov_type(&coins(1), 2.0, &tol()).unwrap();
        assert_eq!(r.trace_e, 0.0);
        assert_eq!(r.upper, 0.25);
        assert_eq!(r.lower, -17.0);
        assert!(r.pass());
        assert_eq!(r.report.aux["lower_vacuous"], 1.0);
    }

    #[test]
    fn kolmogorov_type_ten_coins() {
        let r = kolmogorov_type(&coins(10), 1.0, &tol()).unwrap();
        assert_eq!(r.lower_commuting, Some(0.6));
        assert!(r.trace_e >= 0.6 && r.trace_e <= 10.0);
        assert!(r.pass());
    }

    #[test]
    fn vacuous_lower_bound_for_zero_variance() {
        let seq = tensor_lift(vec![HermitianOperator::zeros(2)], false, 1024).unwrap();
        let r = kolmogorov_type(&seq, 1.0, &tol()).unwrap();
        assert_eq!(r.lower, f64::NEG_INFINITY);
        assert!(r.pass());
    }

    #[test]
    fn etemadi_two_coins() {
        let r = etemadi(&coins(2), 0.5, &tol()).unwrap();
        assert!(r.trace.p_sequence[0].is_zero(0.0));
        assert_eq!(r.trace.p_sequence[1].rank(), 2);
        let main = r.report("etemadi").unwrap();
        assert_eq!(main.lhs, 0.5);
        assert_eq!(main.aux["three_max"], 3.0);
        assert!(r.pass(), "{:?}", r.reports);
    }

    #[test]
    fn etemadi_large_lambda_is_tight_on_complement() {
        let r = etemadi(&coins(3), 10.0, &tol()).unwrap();
        assert!(r.trace.p_final.is_zero(0.0));
        let c = r.report("etemadi-complement").unwrap();
        assert_eq!((c.lhs, c.rhs), (1.0, 1.0));
        assert!(r.pass());
    }

    #[test]
    fn etemadi_requires_commuting_partial_sums() {
        let x = HermitianOperator::from_diagonal(vec![1.0, -1.0]);
        let y = HermitianOperator::from_rows(&[
            vec![C64::new(0., 0.), C64::new(1., 0.)],
            vec![C64::new(1., 0.), C64::new(0., 0.)],
        ])
        .unwrap();
        let seq = IndependentSequence::from_family(vec![x, y]).unwrap();
        assert!(matches!(etemadi(&seq, 1.0, &tol()), Err(Error::Precondition(_))));
    }

    #[test]
    fn chains_pass_their_audit() {
        let t = tol();
        let seq = coins(4);
        for audit in [
            kolmogorov_maximal(&seq, 1.5, &t).unwrap().trace.audit(),
            kolmogorov_type(&seq, 1.0, &t).unwrap().trace.audit(),
            etemadi(&seq, 0.5, &t).unwrap().trace.audit(),
        ] {
            assert!(audit.passes(), "{audit:?}");
        }
    }

    #[test]
    fn series_witness_fair_coins() {
        let coin = HermitianOperator::from_diagonal(vec![1.0, -1.0]);
        let w = series_divergence_witness(|_| coin.clone(), 0.5, 0, 8, &tol()).unwrap();
        assert!(w.pass());
        let last = w.rows.last().unwrap();
        assert_eq!(last.lower_bound, 1.0 - 2.5 / 8.0);
        assert!(last.tau_e_perp >= 0.6875);
        assert!(w.rows[0].lower_bound < 0.0);
    }
}
