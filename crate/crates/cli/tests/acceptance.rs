//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taunets::asymptotics::random_negligible;
use taunets::counterexample::{g_eps, grad_g_eps, shell_edge, u_eps, u_eps_log};
use taunets::gfunction::{gradient_gap, norm, GRADIENT_FLOOR};
use taunets::gpoint::Coord;
use taunets::netdsl::{compile, parse, pretty_print, Compiled, Expr};
use taunets::report::VerificationReport;
use taunets::{
    Context64, FunctionNet64, OpenBox64, ScalarNet64, SignedLog64, Thresholds, XSampleSpec,
};

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn report_passes(r: &VerificationReport) -> Result<(), String> {
    let failing: Vec<_> = r
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.id.as_str())
        .collect();
    ensure(failing.is_empty(), || {
        format!("{} failing: {}", r.suite, failing.join(", "))
    })
}

fn within(limit: Duration, t: Instant) -> Result<(), String> {
    let el = t.elapsed();
    ensure(el < limit, || {
        format!(
            "took {:.2} s, limit {} s",
            el.as_secs_f64(),
            limit.as_secs()
        )
    })
}

fn ctx() -> Context64 {
    Context64::default()
}

fn c01_shell_sweep() -> Verdict {
    let t = Instant::now();
    let ctx = ctx();
    report_passes(&ctx.verify_shell_estimates(2, 6, 16))?;
    let mut worst_lower = f64::INFINITY;
    let mut worst_edge = 0f64;
    for &e in ctx.grid.values() {
        let le = e.ln();
        for j in 0..=6u32 {
            let (lo, hi) = ((j * j) as f64 * le, ((j + 1) * (j + 1)) as f64 * le);
            for i in 0..16 {
                let s = j as f64 + i as f64 / 16.0;
                let x = [(-s * le).exp() * 0.6, (-s * le).exp() * 0.8];
                let lu = u_eps_log(e, &x).ln_abs();
                // Closed form off the unit ball: ln u = (ln |x|)^2 / ln eps.
                let oracle = if j == 0 && i == 0 {
                    0.0
                } else {
                    norm(&x).ln().powi(2) / le
                };
                ensure((lu - oracle).abs() <= 1e-12 * oracle.abs().max(1.0), || {
                    format!("ln u = {lu} vs closed form {oracle} at eps {e}, s {s}")
                })?;
                ensure(lu > hi, || {
                    format!("lower bound not strict at eps {e}, s {s}")
                })?;
                ensure(lu <= lo + 1e-12 * le.abs(), || {
                    format!("upper bound fails at eps {e}, s {s}")
                })?;
                worst_lower = worst_lower.min((lu - hi) / le.abs());
            }
            let edge = u_eps_log(e, &shell_edge(2, e, j)).ln_abs();
            worst_edge = worst_edge.max(((edge - lo) / le.abs()).abs());
        }
    }
    ensure(worst_edge <= 1e-12, || {
        format!("upper bound not tight at shell edges: {worst_edge:e}")
    })?;
    within(Duration::from_secs(10), t)?;
    Ok(format!(
        "min lower margin {worst_lower:.3e}, max edge gap {worst_edge:.1e}"
    ))
}

fn c02_inner_ball() -> Verdict {
    let t = Instant::now();
    let ctx = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut pts: Vec<[f64; 2]> = vec![[0.0, 0.0], [0.5, 0.0], [0.0, -0.5], [0.3, 0.4]];
    while pts.len() < 1000 {
        let (r, a) = (
            0.5 * rng.gen::<f64>().sqrt(),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        pts.push([r * a.cos(), r * a.sin()]);
    }
    for &e in ctx.grid.values() {
        for x in &pts {
            ensure(u_eps(e, x).to_bits() == 1f64.to_bits(), || {
                format!("u != 1 at eps {e}, x {x:?}")
            })?;
        }
    }
    report_passes(&ctx.verify_inner_ball(2, 1000, 1))?;
    within(Duration::from_secs(1), t)?;
    Ok(format!(
        "{} points x {} grid values",
        pts.len(),
        ctx.grid.len()
    ))
}

fn c03_band() -> Verdict {
    let ctx = ctx();
    let r = ctx.verify_band(2, 1000, 6);
    report_passes(&r)?;
    let printed = r
        .check("band.g_at_least_one")
        .ok_or("band.g_at_least_one missing")?;
    ensure(!printed.holds && !printed.expected, || {
        "printed band should be recorded as not attained".into()
    })?;
    ensure(
        printed
            .note
            .as_deref()
            .unwrap_or("")
            .contains("not attained"),
        || "discrepancy note missing".into(),
    )?;
    ensure(
        r.check("band.u_between_zero_and_three")
            .is_some_and(|c| c.holds),
        || "0 < u < 3 not recorded".into(),
    )?;
    let (mut g_min, mut u_min) = (f64::INFINITY, f64::INFINITY);
    for &e in ctx.grid.values().iter().filter(|&&e| e < 0.5) {
        for i in 0..=1000 {
            let r = 0.5 + 0.5 * i as f64 / 1000.0;
            let x = [r, 0.0];
            let g = (r.ln().powi(2) / e.ln()).exp();
            let u = u_eps(e, &x);
            ensure(
                (g_eps(e, &x).map_err(|e| e.to_string())? - g).abs() <= 1e-15,
                || format!("g mismatch at {e}, {r}"),
            )?;
            ensure(0.5 + 1e-12 < g && g <= 1.0, || {
                format!("g = {g} outside (1/2, 1] at eps {e}, r {r}")
            })?;
            ensure(0.5 < u && u <= 1.0, || {
                format!("u = {u} outside (1/2, 1] at eps {e}, r {r}")
            })?;
            g_min = g_min.min(g);
            u_min = u_min.min(u);
        }
    }
    Ok(format!(
        "g >= {g_min:.6}, u >= {u_min:.6}; printed band 1 <= g < 2 recorded as not attained"
    ))
}

fn c04_point_identity() -> Verdict {
    let ctx = ctx();
    let mut worst = 0f64;
    for &e in ctx.grid.values() {
        for j in 0..=6u32 {
            let want = (j * j) as f64 * e.ln();
            let got = u_eps_log(e, &shell_edge(2, e, j)).ln_abs();
            let rel = if want == 0.0 {
                got.abs()
            } else {
                ((got - want) / want).abs()
            };
            worst = worst.max(rel);
        }
    }
    ensure(worst < 1e-12, || format!("relative error {worst:e}"))?;
    report_passes(&ctx.verify_point_identity(2, 6))?;
    Ok(format!("max relative error on ln {worst:.1e}"))
}

fn c05_noninvertibility() -> Verdict {
    let t = Instant::now();
    let ctx = ctx();
    for n in 0..=5i64 {
        let j = 3 * n + 1;
        ensure(j * j - n * (1 + 2 * j) == 3 * n * n + 3 * n + 1, || {
            format!("identity fails at N = {n}")
        })?;
        let mut prev = f64::NEG_INFINITY;
        for &e in ctx.grid.tail() {
            let x = shell_edge(2, e, j as u32);
            let ln_recip = -u_eps_log(e, &x).ln_abs();
            let ln_bound = -(n as f64) * e.ln() + n as f64 * norm(&x).ln_1p();
            let excess = ln_recip - ln_bound;
            ensure(excess > 0.0 && excess > prev, || {
                format!("N = {n}: excess {excess} not diverging at eps {e}")
            })?;
            prev = excess;
        }
    }
    report_passes(&ctx.verify_noninvertibility(2, &[0, 1, 2, 3, 4, 5]))?;
    within(Duration::from_secs(5), t)?;
    Ok("exponent identity exact; violation factor increases along the tail for N = 0..5".into())
}

fn c06_pointwise() -> Verdict {
    let t = Instant::now();
    let ctx = ctx();
    let r = ctx
        .verify_pointwise_invertibility(2, 5, 64, 7)
        .map_err(|e| e.to_string())?;
    report_passes(&r)?;
    for k in 0..=5u32 {
        let c = r
            .check(&format!("pointwise.dilation_{k}"))
            .ok_or("dilation check missing")?;
        ensure(c.holds, || format!("dilation {k}: {:?}", c.note))?;
    }
    let pts = ctx
        .sample_moderate_points(&OpenBox64::whole_space(2), 64, 7)
        .map_err(|e| e.to_string())?;
    ensure(pts.iter().all(|p| !p.label().contains(" = ")), || {
        "boundary hugger sampled on R^d".into()
    })?;
    within(Duration::from_secs(30), t)?;
    Ok(format!(
        "N(m) = m^2 for m = 0..5; {}",
        r.check("pointwise.sampled_points_strictly_nonzero")
            .unwrap()
            .note
            .clone()
            .unwrap_or_default()
    ))
}

fn random_number(rng: &mut ChaCha8Rng) -> ScalarNet64 {
    let c = rng.gen_range(-3.0..3.0);
    let p = rng.gen_range(-2i32..5) as f64;
    if rng.gen_bool(0.3) {
        let w = rng.gen_range(0.5..2.0);
        ScalarNet64::new(format!("{c} eps^{p} (2 + sin({w}/eps))"), move |e: f64| {
            c * e.powf(p) * (2.0 + (w / e).sin())
        })
    } else {
        ScalarNet64::power(c, p)
    }
}

fn c07_inf_min() -> Verdict {
    let t = Instant::now();
    let ctx = ctx().with_thresholds(Thresholds {
        p_max: 8,
        ..Thresholds::default()
    });
    let mut rng = ChaCha8Rng::seed_from_u64(0x1f);
    let mut trials = 0;
    for tuple in 0..200 {
        let size = rng.gen_range(1..=5);
        let reps: Vec<ScalarNet64> = (0..size).map(|_| random_number(&mut rng)).collect();
        let a: Vec<_> = reps
            .iter()
            .map(|r| ctx.number(r.clone()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let base = ctx.inf_min(&a).map_err(|e| e.to_string())?;
        for k in 0..32 {
            let b: Vec<_> = reps
                .iter()
                .map(|r| ctx.number(r.add(&random_negligible(&mut rng))))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            let m = ctx.inf_min(&b).map_err(|e| e.to_string())?;
            ensure(
                ctx.eq_in_rtilde(&base, &m).map_err(|e| e.to_string())?,
                || format!("tuple {tuple}, perturbation {k}: min changed class"),
            )?;
            trials += 1;
        }
    }
    within(Duration::from_secs(10), t)?;
    Ok(format!("{trials} trials"))
}

fn c08_boundary_distance() -> Verdict {
    let ctx = ctx();
    let b = OpenBox64::unit_cube(2);
    let interior = ctx
        .plain_point(&b, "(1/2, 1/2)", |_| vec![0.5, 0.5])
        .map_err(|e| e.to_string())?;
    let power = ctx.point(&b, "(eps, 1/2)", |e| {
        vec![
            Coord::anchored(0.0, SignedLog64::from_value(e)),
            Coord::plain(0.5),
        ]
    });
    let expo = ctx.point(&b, "(exp(-1/eps), 1/2)", |e| {
        vec![
            Coord::anchored(0.0, SignedLog64::exp_of(-1.0 / e)),
            Coord::plain(0.5),
        ]
    });
    let mut got = Vec::new();
    for p in [Ok(interior), power, expo] {
        let p = p.map_err(|e| e.to_string())?;
        let d = ctx.distance_to_boundary(&p).map_err(|e| e.to_string())?;
        got.push(
            ctx.is_strictly_positive(&d)
                .map_err(|e| e.to_string())?
                .holds,
        );
    }
    ensure(got == [true, true, false], || format!("verdicts {got:?}"))?;
    Ok("constant: positive, eps-hugger: positive, exp(-1/eps)-hugger: not positive".into())
}

fn c09_witness() -> Verdict {
    let ctx = ctx();
    let spec = XSampleSpec::default();
    let b = OpenBox64::unit_cube(1);
    let f = FunctionNet64::new("x1", b.clone(), |_, x: &[f64]| x[0]);
    let w = ctx
        .witness_noninvertible_point(&f, &spec)
        .map_err(|e| e.to_string())?
        .ok_or("no witness for x1")?;
    let v = ctx.evaluate_at_point(&f, &w).map_err(|e| e.to_string())?;
    ensure(
        !ctx.is_strictly_nonzero(&v)
            .map_err(|e| e.to_string())?
            .holds,
        || "witness value strictly non-zero".into(),
    )?;
    for m in 0..=24 {
        let fails = ctx
            .grid
            .tail()
            .iter()
            .any(|&e| v.rep().eval_log(e).ln_abs() <= m as f64 * e.ln());
        ensure(fails, || format!("|v| > eps^{m} on the whole tail"))?;
    }
    let g = FunctionNet64::new("1 + x1^2", b, |_, x: &[f64]| 1.0 + x[0] * x[0]);
    ensure(
        ctx.witness_noninvertible_point(&g, &spec)
            .map_err(|e| e.to_string())?
            .is_none(),
        || "witness for 1 + x1^2".into(),
    )?;
    ensure(
        ctx.reciprocal_test(&g, &spec)
            .map_err(|e| e.to_string())?
            .invertible,
        || "1 + x1^2 not invertible".into(),
    )?;
    Ok(format!("witness `{}`", w.label()))
}

fn compiled(e: &Expr, dim: usize) -> FunctionNet64 {
    compile::<f64>(e, dim)
        .expect("dimension checked")
        .into_function(OpenBox64::whole_space(dim))
}

fn same(a: SignedLog64, b: SignedLog64) -> bool {
    (a.is_nan() && b.is_nan()) || a == b
}

fn c10_scale_map() -> Verdict {
    let ctx = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut finite, mut worst) = (0, 0f64);
    for i in 0..1000 {
        let (f, g) = (
            compiled(&Expr::random(&mut rng, 4, 2), 2),
            compiled(&Expr::random(&mut rng, 4, 2), 2),
        );
        let m = rng.gen_range(-3i32..=3) as f64;
        let e = ctx.grid.values()[rng.gen_range(0..ctx.grid.len())];
        let x = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let lhs = ctx
            .scale_map(&f.mul(&g), m)
            .map_err(|e| e.to_string())?
            .eval_log(e, &x);
        let sf = ctx.scale_map(&f, m).map_err(|e| e.to_string())?;
        let sg = ctx.scale_map(&g, m).map_err(|e| e.to_string())?;
        let rhs = sf.mul(&sg).eval_log(e, &x);
        ensure(same(lhs, rhs), || format!("sample {i}: {lhs:?} != {rhs:?}"))?;
        let back = ctx
            .scale_map(&sf, -m)
            .map_err(|e| e.to_string())?
            .eval(e, &x);
        let orig = f.eval(e, &x);
        if orig.is_finite() && orig != 0.0 {
            finite += 1;
            worst = worst.max(((back - orig) / orig).abs());
        } else {
            ensure(back == orig || (back.is_nan() && orig.is_nan()), || {
                format!("sample {i}: round trip {back} vs {orig}")
            })?;
        }
    }
    ensure(worst <= 1e-12, || {
        format!("round trip relative error {worst:e}")
    })?;
    Ok(format!("1000 samples bit-exact; round trip max relative error {worst:.1e} over {finite} finite values"))
}

fn c11_dsl() -> Verdict {
    let src = "(1 - sigma(|x|)) * eps^(log_eps(|x|)^2) + sigma(|x|)";
    let u = compiled(&parse(src, 2).map_err(|e| e.to_string())?, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0f64;
    for _ in 0..1000 {
        let e = 2f64.powf(-rng.gen_range(1.5..40.0));
        let r = (rng.gen_range(-1.0..6.5) * -e.ln()).exp();
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        let x = [r * a.cos(), r * a.sin()];
        let (p, q) = (u.eval_log(e, &x), u_eps_log(e, &x));
        // Relative error of the value, measured through the logarithm.
        worst = worst.max((p.ln_abs() - q.ln_abs()).abs());
    }
    ensure(worst < 1e-12, || {
        format!("DSL vs built-in relative error {worst:e}")
    })?;
    let err = parse("eps^(", 2).err().ok_or("`eps^(` parsed")?;
    ensure(err.offset == 5 && err.expected == "expression", || {
        format!("golden error: {err}")
    })?;
    let err = parse("x3", 2).err().ok_or("`x3` parsed with dim 2")?;
    ensure(err.offset == 0 && err.to_string().contains("index"), || {
        format!("golden error: {err}")
    })?;
    let prec = pretty_print(&parse("1 + 2 * 3 ^ 4", 1).map_err(|e| e.to_string())?);
    ensure(prec == "(1.0 + (2.0 * (3.0 ^ 4.0)))", || {
        format!("precedence: {prec}")
    })?;
    let right = pretty_print(&parse("2 ^ 3 ^ 2", 1).map_err(|e| e.to_string())?);
    ensure(right == "(2.0 ^ (3.0 ^ 2.0))", || {
        format!("associativity: {right}")
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(1011);
    for i in 0..1000 {
        let e = Expr::random(&mut rng, 6, 3);
        let back = parse(&pretty_print(&e), 3).map_err(|err| format!("AST {i}: {err}"))?;
        ensure(back == e, || {
            format!("AST {i} changed: {}", pretty_print(&e))
        })?;
    }
    let eps_net = match compile::<f64>(&parse("eps", 1).unwrap(), 1).unwrap() {
        Compiled::Scalar(s) => s,
        Compiled::Function(_) => return Err("`eps` compiled to a function net".into()),
    };
    ensure(eps_net.eval(0.125) == 0.125, || "compile(eps)".into())?;
    Ok(format!(
        "max relative error {worst:.1e}; golden tests and 1000 round trips exact"
    ))
}

fn c12_gradient() -> Verdict {
    let ctx = ctx();
    report_passes(&ctx.verify_gradient(2, 10_000, 12))?;
    let mut rng = ChaCha8Rng::seed_from_u64(1212);
    let g = FunctionNet64::new("g", OpenBox64::whole_space(2), |e, x: &[f64]| {
        g_eps(e, x).unwrap_or(f64::NAN)
    });
    let (mut worst_gap, mut worst_bound) = (0f64, f64::NEG_INFINITY);
    for i in 0..10_000 {
        let e = 2f64.powf(-rng.gen_range(2.0..40.0));
        let r = 0.5 * (rng.gen::<f64>() * -3.0 * (2.0 * e).ln()).exp();
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        let x = [r * a.cos(), r * a.sin()];
        let an = grad_g_eps(e, &x).map_err(|e| e.to_string())?;
        let fd = g.fd_gradient(e, &x);
        let floor = GRADIENT_FLOOR * g.eval(e, &x).abs() / (1.0 + r);
        let gap = gradient_gap(&an, &fd, floor);
        ensure(gap <= 1e-5, || {
            format!("sample {i}: gap {gap:e} at eps {e}, x {x:?}")
        })?;
        worst_gap = worst_gap.max(gap);
        let bound = 16.0 * (1.0 + r).powi(2) / (e * e);
        for d in &an {
            ensure(d.abs() <= bound, || {
                format!("sample {i}: |dg| = {} above bound {bound}", d.abs())
            })?;
            worst_bound = worst_bound.max(d.abs() / bound);
        }
    }
    Ok(format!(
        "max relative gap {worst_gap:.1e}; max |dg| / bound {worst_bound:.1e}"
    ))
}

fn c13_determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for name in ["first.json", "second.json"] {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_taunets"))
            .args(["verify-counterexample", "--out", path.to_str().unwrap()])
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.code() == Some(0), || format!("exit status {status}"))?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "reports differ".into())?;
    Ok(format!("{} identical bytes", outputs[0].len()))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 13] = [
        ("shell estimate sweep", c01_shell_sweep),
        ("inner ball u = 1", c02_inner_ball),
        ("band (1/2, 1]", c03_band),
        ("point identity", c04_point_identity),
        ("non-invertibility", c05_noninvertibility),
        ("pointwise invertibility", c06_pointwise),
        ("inf/min well-defined", c07_inf_min),
        ("distance to boundary", c08_boundary_distance),
        ("witness search", c09_witness),
        ("scaling-map homomorphism", c10_scale_map),
        ("net language", c11_dsl),
        ("gradient formula", c12_gradient),
        ("determinism", c13_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let verdict = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2} s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2} s): {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
