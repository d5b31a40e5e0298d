//! The four commands, each producing one verification report.

use taunets::counterexample::SuiteConfig;
use taunets::gfunction::{BallSpec, Witness};
use taunets::gpoint::Coord;
use taunets::netdsl::{compile_on, parse, parse_list, Compiled};
use taunets::report::{Check, VerificationReport};
use taunets::{Context64, FunctionNet64, GeneralizedPoint64, OpenBox64, XSampleSpec};

use crate::{expected_or_observed, report, Cli, Command, Expect, Failure};

pub(crate) fn dispatch(
    cli: &Cli,
    ctx: &Context64,
    domain: &OpenBox64,
    expr: Option<&str>,
) -> Result<VerificationReport, Failure> {
    let o = &cli.opts;
    let spec = XSampleSpec {
        j_max: o.jmax,
        seed: o.seed.unwrap_or(XSampleSpec::default().seed),
        ..XSampleSpec::default()
    };
    match &cli.command {
        Command::VerifyCounterexample => {
            if expr.is_some() || o.expect.is_some() || !domain.is_whole_space() {
                return Err(Failure::usage(
                    "verify-counterexample takes no --expr, --expr-file, --expect or --box",
                ));
            }
            verify_counterexample(ctx, o.dim, o.jmax, o.seed)
        }
        Command::Classify => {
            let expect = expectation(
                o.expect,
                &[Expect::Moderate, Expect::Negligible, Expect::Neither],
            )?;
            classify(ctx, &function(expr, domain)?, &spec, expect)
        }
        Command::InvertCheck => {
            let expect = expectation(o.expect, &[Expect::Invertible, Expect::NotInvertible])?;
            invert_check(ctx, &function(expr, domain)?, &spec, expect)
        }
        Command::EvalPoint { point } => {
            let expect = expectation(o.expect, &[Expect::Nonzero, Expect::NotNonzero])?;
            let f = function(expr, domain)?;
            let p = generalized_point(ctx, domain, point)?;
            eval_point(ctx, &f, &p, expect)
        }
    }
}

fn expectation(e: Option<Expect>, allowed: &[Expect]) -> Result<Option<Expect>, Failure> {
    match e {
        Some(e) if !allowed.contains(&e) => Err(Failure::usage(format!(
            "--expect {e:?} does not apply here; use one of {allowed:?}"
        ))),
        _ => Ok(e),
    }
}

fn function(expr: Option<&str>, domain: &OpenBox64) -> Result<FunctionNet64, Failure> {
    let src =
        expr.ok_or_else(|| Failure::usage("an expression is required (--expr or --expr-file)"))?;
    let e = parse(src, domain.dim()).map_err(taunets::Error::from)?;
    Ok(compile_on::<f64>(&e, domain.clone())?.into_function(domain.clone()))
}

/// Coordinates are `eps`-expressions, kept in log space so extreme values stay exact.
fn generalized_point(
    ctx: &Context64,
    domain: &OpenBox64,
    src: &str,
) -> Result<GeneralizedPoint64, Failure> {
    let exprs = parse_list(src, domain.dim()).map_err(taunets::Error::from)?;
    if exprs.len() != domain.dim() {
        return Err(Failure::usage(format!(
            "--point has {} coordinates but --dim is {}",
            exprs.len(),
            domain.dim()
        )));
    }
    if exprs.iter().any(|e| e.uses_x()) {
        return Err(Failure::usage("--point coordinates may only depend on eps"));
    }
    let nets = exprs
        .iter()
        .map(|e| match compile_on::<f64>(e, domain.clone())? {
            Compiled::Scalar(s) => Ok(s),
            Compiled::Function(_) => unreachable!("coordinates without x compile to scalar nets"),
        })
        .collect::<Result<Vec<_>, taunets::Error>>()?;
    Ok(ctx.point(domain, src.trim(), move |e| {
        nets.iter()
            .map(|n| Coord::anchored(0.0, n.eval_log(e)))
            .collect()
    })?)
}

pub(crate) fn verify_counterexample(
    ctx: &Context64,
    dim: usize,
    j_max: u32,
    seed: Option<u64>,
) -> Result<VerificationReport, Failure> {
    let defaults = SuiteConfig::default();
    let cfg = SuiteConfig {
        dim,
        j_max,
        max_dilation: j_max.saturating_sub(1),
        seed: seed.unwrap_or(defaults.seed),
        ..defaults
    };
    Ok(ctx.verify_counterexample(&cfg)?)
}

fn classify(
    ctx: &Context64,
    f: &FunctionNet64,
    spec: &XSampleSpec,
    expect: Option<Expect>,
) -> Result<VerificationReport, Failure> {
    let (want_moderate, want_negligible) = match expect {
        Some(Expect::Moderate) => (Some(true), Some(false)),
        Some(Expect::Negligible) => (Some(true), Some(true)),
        Some(_) => (Some(false), Some(false)),
        None => (None, None),
    };
    let cert = ctx.check_moderate(f, spec)?;
    let neg = ctx.check_negligible(f, spec)?;
    let class = match (neg.negligible, cert.is_moderate()) {
        (true, _) => "negligible",
        (false, true) => "moderate",
        (false, false) => "neither",
    };
    let mut checks = vec![
        expected_or_observed("moderate", cert.is_moderate(), want_moderate)
            .margin(cert.worst_margin_scaled)
            .witness(if cert.is_moderate() {
                None
            } else {
                cert.witness.clone()
            })
            .note(match cert.n {
                Some(n) => format!("N = {n}; classification: {class}"),
                None => format!(
                    "no N <= {} bounds the samples; classification: {class}",
                    ctx.thresholds.n_max
                ),
            }),
        expected_or_observed("negligible", neg.negligible, want_negligible)
            .margin(neg.worst_margin_scaled)
            .witness(neg.witness.clone())
            .note(match neg.failing_p {
                Some(p) => format!("bound eps^{p} fails"),
                None => format!("bounded by eps^p for every p <= {}", ctx.thresholds.p_max),
            }),
    ];
    if !neg.negligible {
        let p = ctx.non_negligible_point(f, spec)?;
        checks.push(
            Check::new("non_negligible_point", p.is_some(), p.is_some())
                .witness(p.as_ref().map(|p| smallest_eps_witness(ctx, p)))
                .note(match &p {
                    Some(p) => format!("x = {}", p.label()),
                    None => "no tested point gives a non-negligible value".into(),
                }),
        );
    }
    Ok(report("classify", checks))
}

fn invert_check(
    ctx: &Context64,
    f: &FunctionNet64,
    spec: &XSampleSpec,
    expect: Option<Expect>,
) -> Result<VerificationReport, Failure> {
    let invertible = expect.map(|e| e == Expect::Invertible);
    let recip = ctx.reciprocal_test(f, spec)?;
    let mut checks =
        vec![
            expected_or_observed("reciprocal.invertible", recip.invertible, invertible)
                .witness(recip.witness.clone())
                .note(match (&recip.reciprocal, recip.vanishes) {
                    (_, true) => "the net vanishes at a sample".to_string(),
                    (Some(c), _) => format!(
                        "reciprocal moderate order {:?}, residual negligible: {}, reach eps^-{}",
                        c.n, recip.product_residual_negligible, recip.j_max
                    ),
                    (None, _) => String::new(),
                }),
        ];
    // Global invertibility implies the pointwise notions; the converse is not expected.
    let pointwise_expected = invertible.filter(|&v| v);
    if f.domain().is_whole_space() {
        let ms: Vec<f64> = (0..spec.j_max.max(1)).map(|k| -(k as f64)).collect();
        let sweep = ctx.pointwise_invertibility_sweep(f, &ms, &BallSpec::default())?;
        let orders: Vec<String> = sweep
            .entries
            .iter()
            .map(|v| {
                format!(
                    "m = {}: N = {}",
                    v.m + 0.0,
                    v.n.map_or("none".into(), |n| n.to_string())
                )
            })
            .collect();
        checks.push(
            expected_or_observed("pointwise.unit_ball", sweep.all_pass, pointwise_expected)
                .note(orders.join(", ")),
        );
    } else {
        let points = ctx.sample_moderate_points(f.domain(), 64, spec.seed)?;
        let mut failing = Vec::new();
        for p in &points {
            let v = ctx.evaluate_at_point(f, p)?;
            if !ctx.is_strictly_nonzero(&v)?.holds {
                failing.push(p.label().to_string());
            }
        }
        checks.push(
            expected_or_observed(
                "pointwise.sampled_points",
                failing.is_empty(),
                pointwise_expected,
            )
            .note(if failing.is_empty() {
                format!("{} moderate points, all strictly non-zero", points.len())
            } else {
                format!("failing: {}", failing.join("; "))
            }),
        );
    }
    let witness = ctx.witness_noninvertible_point(f, spec)?;
    checks.push(
        expected_or_observed("witness.none_found", witness.is_none(), pointwise_expected)
            .witness(witness.as_ref().map(|p| smallest_eps_witness(ctx, p)))
            .note(match &witness {
                Some(p) => p.label().to_string(),
                None => "no point with a non-strictly-non-zero value was constructed".into(),
            }),
    );
    Ok(report("invert_check", checks))
}

fn eval_point(
    ctx: &Context64,
    f: &FunctionNet64,
    p: &GeneralizedPoint64,
    expect: Option<Expect>,
) -> Result<VerificationReport, Failure> {
    let v = ctx.evaluate_at_point(f, p)?;
    let strict = ctx.is_strictly_nonzero(&v)?;
    let zero = ctx.eq_in_rtilde(&v, &ctx.constant(0.0)?)?;
    let est = v.estimate();
    let order = if est.exact_zero {
        "exactly zero on the tail".to_string()
    } else {
        format!(
            "|value| ~ eps^{:.6} (fit residual {:.2e})",
            est.slope, est.residual
        )
    };
    let checks = vec![
        expected_or_observed(
            "value.strictly_nonzero",
            strict.holds,
            expect.map(|e| e == Expect::Nonzero),
        )
        .note(match strict.m {
            Some(m) => format!("|value| > eps^{m}; {order}"),
            None => format!("no m <= {} works; {order}", ctx.thresholds.m_max),
        }),
        // With p_max < m_max a value can be both strictly non-zero and negligible up to
        // eps^p_max, so this verdict stays informational.
        expected_or_observed("value.negligible", zero, None).note(format!(
            "bounded by eps^{} on the tail: {zero}; point moderate with N = {}",
            ctx.thresholds.p_max,
            p.moderate_n()
        )),
    ];
    Ok(report("eval_point", checks))
}

/// The point's coordinates at the smallest grid value.
fn smallest_eps_witness(ctx: &Context64, p: &GeneralizedPoint64) -> Witness {
    let eps = ctx.grid.smallest();
    Witness {
        eps,
        x: p.values(eps),
    }
}
