//! Named randomized properties. Each entry pairs a formula with a seeded trial.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::crosscheck::{crosscheck_trial, CrosscheckConfig};
use super::inequalities::{inequality_trial, Inequality, InequalityConfig};
use super::instance::{random_hermitian, random_psd, random_unitary, random_unit_vector};
use super::suite::Trial;
use crate::error::{Error, Result};
use crate::lattice::{join, join_spans, meet};
use crate::operator::{apply_function, loewner_leq, spectral_projection, HermitianOperator, Projection, RealInterval, C64};
use crate::report::InequalityReport;
use crate::space::{tensor_lift, NcSpace};
use crate::tolerance::Tolerances;

pub type TrialFn = fn(&mut ChaCha8Rng, &Tolerances) -> Trial;

/// A registered property.
#[derive(Clone, Copy)]
pub struct Property {
    pub name: &'static str,
    /// The checked statement, in formula form.
    pub statement: &'static str,
    pub trial: TrialFn,
}

impl std::fmt::Debug for Property {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Property")
            .field("name", &self.name)
            .field("statement", &self.statement)
            .finish()
    }
}

const PROPERTIES: &[Property] = &[
    Property {
        name: "norm-monotonicity",
        statement: "p ≤ q, x ≥ 0 ⇒ ‖pxp‖ ≤ ‖qxq‖",
        trial: norm_monotonicity,
    },
    Property {
        name: "meet-trace",
        statement: "τ(p ∧ q) ≤ τ(pq)",
        trial: meet_trace,
    },
    Property {
        name: "meet-trace-general",
        statement: "p ≤ q, p ≤ r ⇒ τ(p) ≤ τ(qr)",
        trial: meet_trace_general,
    },
    Property {
        name: "join-subadditivity",
        statement: "τ(∨ p_i) ≤ Σ τ(p_i)",
        trial: join_subadditivity,
    },
    Property {
        name: "orthogonal-join",
        statement: "p_i p_j = 0 (i ≠ j) ⇒ ∨ p_i = Σ p_i",
        trial: orthogonal_join,
    },
    Property {
        name: "markov",
        statement: "x ≥ 0, t > 0 ⇒ τ(1_[t,∞)(x)) ≤ τ(x)/t",
        trial: markov,
    },
    Property {
        name: "chebyshev",
        statement: "τ(1_[λ,∞)(|x − τ(x)|)) ≤ var(x)/λ²",
        trial: chebyshev,
    },
    Property {
        name: "variance-additivity",
        statement: "x, y independent ⇒ var(x + y) = var(x) + var(y)",
        trial: variance_additivity,
    },
    Property {
        name: "hoelder-mccarthy",
        statement: "T ≥ 0, ‖η‖ = 1 ⇒ ⟨Tη, η⟩² ≤ ⟨T²η, η⟩",
        trial: hoelder_mccarthy,
    },
    Property {
        name: "reconstruction",
        statement: "x = Σ λ_i E_i, E_i E_j = δ_ij E_i, Σ E_i = 1",
        trial: reconstruction,
    },
    Property {
        name: "functional-calculus",
        statement: "(fg)(x) = f(x) g(x)",
        trial: functional_calculus,
    },
    Property {
        name: "complementarity",
        statement: "1_[t,∞)(x) + 1_(−∞,t)(x) = 1",
        trial: complementarity,
    },
    Property {
        name: "tracial",
        statement: "τ(ab) = τ(ba), τ(a²) ≥ ‖a‖²/d",
        trial: tracial,
    },
    Property {
        name: "hajek-renyi",
        statement: "τ(p) ≤ Σ α_k² var(x_k) / λ²",
        trial: |rng, tol| inequality_trial(Inequality::HajekRenyi, &InequalityConfig::default(), rng, tol),
    },
    Property {
        name: "kolmogorov-maximal",
        statement: "τ(p) ≤ Σ var(x_k) / λ²",
        trial: |rng, tol| inequality_trial(Inequality::KolmogorovMaximal, &InequalityConfig::default(), rng, tol),
    },
    Property {
        name: "kolmogorov-type",
        statement: "1 − 2(λ + c)² / Σ var(x_k) ≤ τ(e) ≤ Σ var(x_k) / λ²",
        trial: |rng, tol| inequality_trial(Inequality::KolmogorovType, &InequalityConfig::default(), rng, tol),
    },
    Property {
        name: "kolmogorov-type-commuting",
        statement: "commuting partial sums ⇒ τ(e) ≥ 1 − (λ + c)² / Σ var(x_k)",
        trial: |rng, tol| {
            let cfg = InequalityConfig {
                commuting: true,
                ..Default::default()
            };
            inequality_trial(Inequality::KolmogorovType, &cfg, rng, tol)
        },
    },
    Property {
        name: "etemadi",
        statement: "τ(p) ≤ 3 max_k τ(1_[λ,∞)(|s_k|))",
        trial: |rng, tol| inequality_trial(Inequality::Etemadi, &InequalityConfig::default(), rng, tol),
    },
    Property {
        name: "series-witness",
        statement: "τ(1 − e_{n,m}) ≥ 1 − (2ε² + 2c²) / Σ_{k=n+1}^{n+m} var(x_k)",
        trial: |rng, tol| inequality_trial(Inequality::SeriesWitness, &InequalityConfig::default(), rng, tol),
    },
    Property {
        name: "oracle-crosscheck",
        statement: "classical embedding: every trace equals the enumerated probability",
        trial: |rng, tol| crosscheck_trial(&CrosscheckConfig::default(), rng, tol),
    },
];

pub fn properties() -> &'static [Property] {
    PROPERTIES
}

pub fn find_property(name: &str) -> Result<&'static Property> {
    PROPERTIES
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownProperty(name.to_string()))
}

/// `τ(p ∧ q) ≤ Re τ(pq)`, with `τ(pq)` required to be real.
pub fn meet_trace_report(p: &Projection, q: &Projection, tol: &Tolerances) -> Result<InequalityReport> {
    let space = NcSpace::new(p.dim())?;
    let m = meet(&[p.clone(), q.clone()], tol)?;
    let lhs = space.prob(&m)?;
    let tpq = space.trace_of_product(p, q)?;
    Ok(InequalityReport::upper("meet-trace", lhs, tpq.re, tol.check)
        .with_aux("im_tau_pq", tpq.im)
        .and(tpq.im.abs() <= 1e-10))
}

fn records(ops: &[&HermitianOperator]) -> serde_json::Value {
    json!(ops)
}

fn finish(instance: serde_json::Value, f: impl FnOnce() -> Result<Vec<InequalityReport>>) -> Trial {
    Trial {
        instance,
        outcome: f(),
    }
}

/// Orthonormal basis for the span of `common` plus `extra` random directions.
fn span_with(rng: &mut ChaCha8Rng, common: &DMatrix<C64>, extra: usize, tol: &Tolerances) -> Result<Projection> {
    let dim = common.nrows();
    let u = random_unitary(rng, dim);
    join_spans(dim, &[common.clone(), u.columns(0, extra.min(dim)).into_owned()], tol)
}

fn norm_monotonicity(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Trial {
    let d = rng.random_range(2..=8);
    let (rp, rr) = (rng.random_range(0..=d), rng.random_range(0..=d));
    let p = super::instance::random_projection(rng, d, rp);
    let r = super::instance::random_projection(rng, d, rr);
    let x = random_psd(rng, d);
    let instance = records(&[&p, &r, &x]);
    finish(instance, || {
        let q = join(&[p.clone(), r], tol)?;
        let ordered = loewner_leq(&p, &q, 1e-9)?;
        let lhs = x.sandwich(&p).op_norm();
        let rhs = x.sandwich(&q).op_norm();
        Ok(vec![InequalityReport::upper("norm-monotonicity", lhs, rhs, tol.check)
            .with_aux("p_leq_q", f64::from(u8::from(ordered)))
            .and(ordered)])
    })
}

fn meet_trace(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Trial {
    let d = rng.random_range(2..=8);
    let c = rng.random_range(0..=d / 2);
    let u = random_unitary(rng, d);
    let common = u.columns(0, c).into_owned();
    let setup = |rng: &mut ChaCha8Rng| -> Result<(Projection, Projection)> {
        let extra = rng.random_range(0..=d - c);
        let p = span_with(rng, &common, extra, tol)?;
        let q = if rng.random_range(0..8) == 0 {
            p.clone()
        } else {
            let extra = rng.random_range(0..=d - c);
            span_with(rng, &common, extra, tol)?
        };
        Ok((p, q))
    };
    match setup(rng) {
        Ok((p, q)) => finish(records(&[&p, &q]), || Ok(vec![meet_trace_report(&p, &q, tol)?])),
        Err(e) => Trial::failed(json!(null), e),
    }
}

fn meet_trace_general(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Trial {
    let d = rng.random_range(2..=8);
    let c = rng.random_range(1..=d);
    let u = random_unitary(rng, d);
    let common = u.columns(0, c).into_owned();
    let setup = |rng: &mut ChaCha8Rng| -> Result<(Projection, Projection, Projection)> {
        let (eq, er) = (rng.random_range(0..=d - c), rng.random_range(0..=d - c));
        let q = span_with(rng, &common, eq, tol)?;
        let r = span_with(rng, &common, er, tol)?;
        let m = meet(&[q.clone(), r.clone()], tol)?;
        let basis = m.spectral_with(tol)?.range_basis(|v| v > 0.5);
        let k = basis.ncols();
        let j = rng.random_range(0..=k);
        let p = if j == 0 {
            Projection::zero(d)
        } else {
            let w = random_unitary(rng, k);
            super::instance::projection_onto_columns(&(&basis * w.columns(0, j)))
        };
        Ok((p, q, r))
    };
    let (p, q, r) = match setup(rng) {
        Ok(s) => s,
        Err(e) => return Trial::failed(json!(null), e),
    };
    finish(records(&[&p, &q, &r]), || {
        let space = NcSpace::new(d)?;
        let below = loewner_leq(&p, &q, 1e-9)? && loewner_leq(&p, &r, 1e-9)?;
        let tqr = space.trace_of_product(&q, &r)?;
        Ok(vec![InequalityReport::upper("meet-trace-general", space.prob(&p)?, tqr.re, tol.check)
            .with_aux("im_tau_qr", tqr.im)
            .and(below && tqr.im.abs() <= 1e-10)])
    })
}

fn join_subadditivity(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Trial {
    let d = rng.random_range(2..=8);
    let k = rng.random_range(1..=5);
    let ps: Vec<Projection> = (0..k)
        .map(|_| {
            let rank = rng.random_range(0..=d);
            super::instance::random_projection(rng, d, rank)
        })
        .collect();
    let instance = json!(ps.iter().map(|p| p.as_operator()).collect::<Vec<_>>());
    finish(instance, || {
        let space = NcSpace::new(d)?;
        let lhs = space.prob(&join(&ps, tol)?)?;
        let rhs = ps.iter().map(|p| space.prob(p)).sum::<Result<f64>>()?;
        Ok(vec![InequalityReport::upper("join-subadditivity", lhs, rhs, tol.check)])
    })
}

fn orthogonal_join(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Trial {
    let d = rng.random_range(2..=8);
    let u = random_unitary(rng, d);
    let k = rng.random_range(1..=5.min(d));
    let mut cuts: Vec<usize> = (0..k - 1).map(|_| rng.random_range(0..=d)).collect();
    cuts.push(0);
    cuts.push(rng.random_range(0..=d));
    cuts.sort_unstable();
    let ps: Vec<Projection> = cuts
        .windows(2)
        .map(|w| super::instance::projection_onto_columns(&u.columns(w[0], w[1] - w[0]).into_owned()))
        .collect();
    let instance = json!(ps.iter().map(|p| p.as_operator()).collect::<Vec<_>>());
    finish(instance, || {
        let j = join(&ps, tol)?;
        let sum = ps
            .iter()
            .fold(HermitianOperator::zeros(d), |acc, p| &acc + p.as_operator());
        let diff = j.max_abs_diff(&sum);
        Ok(vec![InequalityReport::upper("orthogonal-join", diff, 0.0, tol.check)])
    })
}

fn markov(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Trial {
    let d = rng.random_range(1..=6);
    let x = if rng.random_range(0..6) == 0 {
        HermitianOperator::identity(d).scaled(rng.random_range(0.0..3.0))
    } else {
        random_psd(rng, d)
    };
    let t = rng.random_range(0.01..=1.5 * x.op_norm().max(0.1));
    finish(json!({ "x": x, "t": t }), || {
        Ok(vec![NcSpace::new(d)?.markov_check(&x, t, tol)?])
    })
}

fn chebyshev(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Trial {
    let d = rng.random_range(1..=8);
    let x = random_hermitian(rng, d);
    let lambda = rng.random_range(0.05..=2.0 * x.op_norm().max(0.1));
    finish(json!({ "x": x, "lambda": lambda }), || {
        Ok(vec![NcSpace::new(d)?.chebyshev_check(&x, lambda, tol)?])
    })
}

fn variance_additivity(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Trial {
    let (da, db) = (rng.random_range(2..=3), rng.random_range(2..=3));
    let a = random_hermitian(rng, da);
    let b = random_hermitian(rng, db);
    finish(records(&[&a, &b]), || {
        let seq = tensor_lift(vec![a, b], false, tol.dim_cap)?;
        let space = seq.space();
        let (x, y) = (&seq.lifted()[0], &seq.lifted()[1]);
        let gap = (space.variance(&(x + y))? - space.variance(x)? - space.variance(y)?).abs();
        let scale = x.op_norm().max(1.0) * y.op_norm().max(1.0);
        let product_gap = (space.trace_of_product(x, y)?.re - space.trace(x)? * space.trace(y)?).abs();
        let independent = space.check_independence(x, y, 1e-9, tol)?;
        Ok(vec![
            InequalityReport::upper("variance-additivity", gap, 0.0, tol.check),
            InequalityReport::upper("trace-factorization", product_gap, 0.0, tol.check).with_aux("scale", scale),
            InequalityReport::upper("independence", 0.0, 0.0, 0.0).and(independent),
        ])
    })
}

fn hoelder_mccarthy(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Trial {
    let d = rng.random_range(1..=8);
    let t = random_psd(rng, d);
    let eta = random_unit_vector(rng, d);
    let instance = json!({
        "t": t,
        "eta_re": eta.iter().map(|z| z.re).collect::<Vec<_>>(),
        "eta_im": eta.iter().map(|z| z.im).collect::<Vec<_>>(),
    });
    finish(instance, || {
        let m = t.matrix();
        let te = &*m * &eta;
        let first = eta.dotc(&te).re;
        let second = te.dotc(&te).re;
        let norm = t.op_norm();
        Ok(vec![InequalityReport::upper("hoelder-mccarthy", first * first, second, tol.check.min(1e-10)).with_aux("norm", norm)])
    })
}

/// A Hermitian matrix that has repeated eigenvalues about half the time.
fn hermitian_with_degeneracy(rng: &mut ChaCha8Rng, d: usize) -> HermitianOperator {
    if rng.random_bool(0.5) {
        return random_hermitian(rng, d);
    }
    let u = random_unitary(rng, d);
    let values: Vec<f64> = (0..d).map(|_| f64::from(rng.random_range(-2i32..=2))).collect();
    let diag = DMatrix::from_fn(d, d, |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) });
    crate::operator::hermitize(&(&u * diag * u.adjoint())).expect("square")
}

fn reconstruction(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Trial {
    let d = rng.random_range(1..=8);
    let x = hermitian_with_degeneracy(rng, d);
    finish(records(&[&x]), || {
        let dec = x.spectral_with(tol)?;
        let scale = x.scale().max(1.0);
        let rebuilt = dec.reconstruct();
        let es: Vec<Projection> = dec.eigenprojections().collect();
        let mut worst_orth = 0.0f64;
        for (i, a) in es.iter().enumerate() {
            for b in &es[i + 1..] {
                worst_orth = worst_orth.max(a.product(b).iter().fold(0.0, |m, z| m.max(z.norm())));
            }
        }
        let total = es.iter().fold(HermitianOperator::zeros(d), |acc, p| &acc + p.as_operator());
        Ok(vec![
            InequalityReport::upper("reconstruction", rebuilt.max_abs_diff(&x), 0.0, 1e-9 * scale),
            InequalityReport::upper("eigenprojection-orthogonality", worst_orth, 0.0, 1e-9),
            InequalityReport::upper("eigenprojection-completeness", total.max_abs_diff(&HermitianOperator::identity(d)), 0.0, 1e-9),
        ])
    })
}

fn functional_calculus(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Trial {
    let d = rng.random_range(1..=8);
    let x = hermitian_with_degeneracy(rng, d);
    finish(records(&[&x]), || {
        let f = |v: f64| v * v;
        let g = |v: f64| v.cos();
        let fg = apply_function(&x, |v| f(v) * g(v), tol)?;
        let fx = apply_function(&x, f, tol)?;
        let gx = apply_function(&x, g, tol)?;
        let product = HermitianOperator::new(fx.product(&gx))?;
        let scale = x.scale().max(1.0).powi(2);
        Ok(vec![InequalityReport::upper("functional-calculus", fg.max_abs_diff(&product), 0.0, 1e-9 * scale)])
    })
}

fn complementarity(rng: &mut ChaCha8Rng, tol: &Tolerances) -> Trial {
    let d = rng.random_range(1..=8);
    let x = hermitian_with_degeneracy(rng, d);
    let r = x.op_norm() + 1.0;
    let t = rng.random_range(-r..r);
    finish(json!({ "x": x, "t": t }), || {
        let upper = spectral_projection(&x, &RealInterval::at_least(t), tol)?;
        let lower = spectral_projection(&x, &RealInterval::less_than(t), tol)?;
        let sum = upper.as_operator() + lower.as_operator();
        let diff = sum.max_abs_diff(&HermitianOperator::identity(d));
        Ok(vec![InequalityReport::upper("complementarity", diff, 0.0, 1e-9).with_param("t", t)])
    })
}

fn tracial(rng: &mut ChaCha8Rng, _tol: &Tolerances) -> Trial {
    let d = rng.random_range(1..=8);
    let a = random_hermitian(rng, d);
    let b = random_hermitian(rng, d);
    finish(records(&[&a, &b]), || {
        let space = NcSpace::new(d)?;
        let ab = (a.product(&b).trace()) / d as f64;
        let ba = (b.product(&a).trace()) / d as f64;
        let scale = a.op_norm().max(1.0) * b.op_norm().max(1.0);
        let na = a.op_norm();
        let faithful = space.trace_of_product(&a, &a)?.re;
        Ok(vec![
            InequalityReport::upper("tracial", (ab - ba).norm(), 0.0, 1e-10 * scale),
            InequalityReport::upper("faithful", na * na / d as f64, faithful, 1e-10 * na.max(1.0).powi(2)),
        ])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::suite::run_property;

    #[test]
    fn names_are_unique() {
        let mut names: Vec<&str> = properties().iter().map(|p| p.name).collect();
        names.sort_unstable();
        let before = names.len();
        names.dedup();
        assert_eq!(before, names.len());
        assert!(find_property("no-such-property").is_err());
    }

    #[test]
    fn meet_trace_equal_projections() {
        let tol = Tolerances::default();
        let mut rng = super::super::instance::rng_from_seed(3);
        let p = super::super::instance::random_projection(&mut rng, 5, 2);
        let r = meet_trace_report(&p, &p, &tol).unwrap();
        assert!(r.pass);
        assert!((r.lhs - 0.4).abs() < 1e-9 && (r.rhs - 0.4).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn preliminary_properties_pass_briefly() {
        let tol = Tolerances::default();
        for p in properties().iter().take(13) {
            let out = run_property(p.name, 25, 7, &tol).unwrap();
            assert!(out.pass(), "{}: {:?}", p.name, out.counterexamples.first());
        }
    }
}
