//! The explicit non-invertible but pointwise invertible net and its verification suites.
//!
//! `g_eps(x) = eps^((log_eps |x|)^2) = exp((ln|x|)^2 / ln eps)` and
//! `u_eps = (1 - sigma) g_eps + sigma` with a smooth radial cutoff `sigma`: one on
//! `|x| <= 1/2`, zero on `|x| >= 1`. At `|x| = eps^-j` the value is `eps^(j^2)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{log_gt, log_le, SignedLog};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::gfunction::{
    eps_scale, gradient_gap, norm, BallSpec, FunctionNet, Witness, XSampleSpec, GRADIENT_FLOOR,
};
use crate::gpoint::OpenBox;
use crate::report::{Check, VerificationReport};
use crate::Scalar;

/// `phi(t) = exp(-1/t)` for `t > 0`, else `0`.
fn phi<T: Scalar>(t: T) -> T {
    if t > T::zero() {
        (-T::one() / t).exp()
    } else {
        T::zero()
    }
}

/// Smooth cutoff `phi(1-r) / (phi(1-r) + phi(r-1/2))`: exactly `1` on `[0, 1/2]`,
/// exactly `0` on `[1, inf)`, decreasing in between.
pub fn sigma<T: Scalar>(r: T) -> Result<T> {
    if r.is_nan() || r < T::zero() {
        return Err(Error::Domain(format!("cutoff needs r >= 0, got {r}")));
    }
    Ok(sigma_unchecked(r))
}

fn sigma_unchecked<T: Scalar>(r: T) -> T {
    let half = T::lit(0.5);
    if r <= half {
        T::one()
    } else if r >= T::one() {
        T::zero()
    } else {
        let a = phi(T::one() - r);
        a / (a + phi(r - half))
    }
}

/// `d sigma / dr`; zero outside `(1/2, 1)`.
pub fn sigma_prime<T: Scalar>(r: T) -> T {
    let half = T::lit(0.5);
    if r <= half || r >= T::one() {
        return T::zero();
    }
    let (s, t) = (T::one() - r, r - half);
    let (a, b) = (phi(s), phi(t));
    -(a * b) * (T::one() / (s * s) + T::one() / (t * t)) / ((a + b) * (a + b))
}

fn check_eps<T: Scalar>(eps: T) -> Result<()> {
    if eps > T::zero() && eps < T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("eps must lie in (0,1), got {eps}")))
    }
}

/// `ln g_eps` at radius `r > 0`.
pub fn ln_g<T: Scalar>(eps: T, r: T) -> T {
    let l = r.ln();
    l * l / eps.ln()
}

pub fn g_eps<T: Scalar>(eps: T, x: &[T]) -> Result<T> {
    check_eps(eps)?;
    let r = norm(x);
    if !(r > T::zero()) {
        return Err(Error::Domain("g is undefined at x = 0".into()));
    }
    Ok(ln_g(eps, r).exp())
}

/// Radial profile of `u_eps`. Never touches `g` where the cutoff is one.
pub fn u_radial_log<T: Scalar>(eps: T, r: T) -> SignedLog<T> {
    let half = T::lit(0.5);
    if r <= half {
        SignedLog::one()
    } else if r >= T::one() {
        SignedLog::exp_of(ln_g(eps, r))
    } else {
        let s = sigma_unchecked(r);
        SignedLog::from_value((T::one() - s) * ln_g(eps, r).exp() + s)
    }
}

pub fn u_eps_log<T: Scalar>(eps: T, x: &[T]) -> SignedLog<T> {
    u_radial_log(eps, norm(x))
}

pub fn u_eps<T: Scalar>(eps: T, x: &[T]) -> T {
    u_eps_log(eps, x).to_value()
}

/// One-dimensional profile on the half line; the cutoff is one for `x1 <= 1/2`.
pub fn u1_eps_log<T: Scalar>(eps: T, x1: T) -> SignedLog<T> {
    u_radial_log(eps, x1.max(T::zero()))
}

pub fn u1_eps<T: Scalar>(eps: T, x1: T) -> T {
    u1_eps_log(eps, x1).to_value()
}

/// `∂_i g_eps(x) = 2 g_eps(x) x_i ln|x| / (|x|^2 ln eps)`, assembled in log space.
pub fn grad_g_eps<T: Scalar>(eps: T, x: &[T]) -> Result<Vec<T>> {
    check_eps(eps)?;
    let r = norm(x);
    if !(r >= T::lit(0.5)) {
        return Err(Error::Domain(format!(
            "gradient formula needs |x| >= 1/2, got {r}"
        )));
    }
    Ok(grad_g_unchecked(eps, x, r))
}

fn grad_g_unchecked<T: Scalar>(eps: T, x: &[T], r: T) -> Vec<T> {
    let lr = r.ln();
    let common = SignedLog::exp_of(ln_g(eps, r))
        * SignedLog::from_value(T::lit(2.0) * lr / eps.ln())
        / (SignedLog::from_value(r) * SignedLog::from_value(r));
    x.iter()
        .map(|&xi| (common * SignedLog::from_value(xi)).to_value())
        .collect()
}

/// `∇u = (1 - sigma) ∇g + sigma'(|x|) (1 - g) x / |x|`.
pub fn grad_u_eps<T: Scalar>(eps: T, x: &[T]) -> Vec<T> {
    let r = norm(x);
    if r <= T::lit(0.5) {
        return vec![T::zero(); x.len()];
    }
    let gg = grad_g_unchecked(eps, x, r);
    if r >= T::one() {
        return gg;
    }
    let s = sigma_unchecked(r);
    let radial = sigma_prime(r) * (T::one() - ln_g(eps, r).exp()) / r;
    gg.iter()
        .zip(x)
        .map(|(&gi, &xi)| (T::one() - s) * gi + radial * xi)
        .collect()
}

/// `u` as a net on `R^dim` with its analytic gradient.
pub fn counterexample_net<T: Scalar>(dim: usize) -> FunctionNet<T> {
    FunctionNet::from_log("u", OpenBox::whole_space(dim), |e, x| u_eps_log(e, x))
        .with_gradient(|e, x| grad_u_eps(e, x))
}

/// `u(x) = u1(x_1)` on `(0, inf) x R^(dim-1)`.
pub fn half_space_net<T: Scalar>(dim: usize) -> FunctionNet<T> {
    FunctionNet::from_log("u1", OpenBox::half_space(dim), |e, x| u1_eps_log(e, x[0])).with_gradient(
        |e, x: &[T]| {
            let mut g = vec![T::zero(); x.len()];
            g[0] = grad_u_eps(e, &x[..1])[0];
            g
        },
    )
}

/// Parameters of the full verification run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub dim: usize,
    pub j_max: u32,
    pub radii_per_shell: u32,
    pub mesh: usize,
    pub n_list: Vec<u32>,
    /// Dilations `0..=max_dilation` of the unit-ball criterion.
    pub max_dilation: u32,
    pub points: usize,
    pub gradient_samples: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            dim: 2,
            j_max: 6,
            radii_per_shell: 16,
            mesh: 1000,
            n_list: (0..=5).collect(),
            max_dilation: 5,
            points: 64,
            gradient_samples: 10_000,
            seed: 7,
        }
    }
}

/// `e_1`-aligned vector of length `r`.
fn axis<T: Scalar>(dim: usize, r: T) -> Vec<T> {
    let mut x = vec![T::zero(); dim];
    x[0] = r;
    x
}

fn f64_of<T: Scalar>(v: T) -> f64 {
    v.as_f64()
}

/// Deterministic directions on the unit sphere.
fn sphere_points<T: Scalar>(dim: usize, count: usize, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let v: Vec<T> = (0..dim).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
            let n = norm(&v);
            if n > T::lit(0.1) && n <= T::one() {
                break v.into_iter().map(|c| c / n).collect();
            }
        })
        .collect()
}

fn scaled<T: Scalar>(v: &[T], r: T) -> Vec<T> {
    v.iter().map(|&c| c * r).collect()
}

struct Extreme<T> {
    value: T,
    witness: Option<Witness>,
}

impl<T: Scalar> Extreme<T> {
    fn min() -> Self {
        Extreme {
            value: T::infinity(),
            witness: None,
        }
    }
    fn max() -> Self {
        Extreme {
            value: T::neg_infinity(),
            witness: None,
        }
    }
    fn take_min(&mut self, v: T, eps: T, x: &[T]) {
        if v < self.value {
            *self = Extreme {
                value: v,
                witness: Some(witness(eps, x)),
            };
        }
    }
    fn take_max(&mut self, v: T, eps: T, x: &[T]) {
        if v > self.value {
            *self = Extreme {
                value: v,
                witness: Some(witness(eps, x)),
            };
        }
    }
}

fn witness<T: Scalar>(eps: T, x: &[T]) -> Witness {
    Witness {
        eps: eps.as_f64(),
        x: x.iter().map(|&v| v.as_f64()).collect(),
    }
}

impl<T: Scalar> Context<T> {
    /// Shell estimate: `(j+1)^2 ln eps < ln u_eps(x) <= j^2 ln eps` for
    /// `eps^-j <= |x| < eps^-(j+1)`, on log-spaced radii of every shell `j <= j_max` and
    /// every grid `eps`. Upper bound is tight at the left edges.
    pub fn verify_shell_estimates(
        &self,
        dim: usize,
        j_max: u32,
        radii_per_shell: u32,
    ) -> VerificationReport {
        struct Acc<T> {
            lower: Extreme<T>,
            upper: Extreme<T>,
            edge: Extreme<T>,
            lower_ok: bool,
            upper_ok: bool,
        }
        let per_eps: Vec<Acc<T>> = self
            .grid
            .values()
            .par_iter()
            .map(|&e| {
                let le = e.ln();
                let mut acc = Acc {
                    lower: Extreme::min(),
                    upper: Extreme::min(),
                    edge: Extreme::max(),
                    lower_ok: true,
                    upper_ok: true,
                };
                for j in 0..=j_max {
                    let jt = T::from_u32(j).expect("small");
                    let (lo, hi) = (jt * jt * le, (jt + T::one()) * (jt + T::one()) * le);
                    for i in 0..radii_per_shell {
                        let r = if i == 0 {
                            e.powi(-(j as i32))
                        } else {
                            let frac = T::from_u32(i).expect("small")
                                / T::from_u32(radii_per_shell).expect("small");
                            (-(jt + frac) * le).exp()
                        };
                        let x = axis(dim, r);
                        let lu = u_eps_log(e, &x).ln_abs();
                        acc.lower_ok &= log_gt(lu, hi);
                        acc.upper_ok &= log_le(lu, lo);
                        acc.lower.take_min((lu - hi) / le.abs(), e, &x);
                        acc.upper.take_min((lo - lu) / le.abs(), e, &x);
                        if i == 0 {
                            acc.edge.take_max(((lo - lu) / le.abs()).abs(), e, &x);
                        }
                    }
                }
                acc
            })
            .collect();
        let mut lower = Extreme::min();
        let mut upper = Extreme::min();
        let mut edge = Extreme::max();
        let (mut lower_ok, mut upper_ok) = (true, true);
        for a in per_eps {
            lower_ok &= a.lower_ok;
            upper_ok &= a.upper_ok;
            if a.lower.value < lower.value {
                lower = a.lower;
            }
            if a.upper.value < upper.value {
                upper = a.upper;
            }
            if a.edge.value > edge.value {
                edge = a.edge;
            }
        }
        let tight = edge.value <= T::lit(1e-12);
        VerificationReport::new(
            "shell_estimate",
            vec![
                Check::holds("shell.lower_strict", lower_ok && lower.value > T::zero())
                    .margin(f64_of(lower.value))
                    .witness(lower.witness),
                Check::holds("shell.upper", upper_ok)
                    .margin(f64_of(upper.value))
                    .witness(upper.witness),
                Check::holds("shell.upper_tight_at_left_edge", tight)
                    .margin(f64_of(edge.value))
                    .witness(edge.witness),
            ],
        )
    }

    /// `u_eps(eps^-j e_1) = eps^(j^2)` with relative error below `1e-12` on the logarithm.
    pub fn verify_point_identity(&self, dim: usize, j_max: u32) -> VerificationReport {
        let mut worst = Extreme::max();
        for &e in self.grid.values() {
            for j in 0..=j_max {
                let x = axis(dim, e.powi(-(j as i32)));
                let lu = u_eps_log(e, &x).ln_abs();
                let jt = T::from_u32(j * j).expect("small");
                let want = jt * e.ln();
                let rel = if want == T::zero() {
                    lu.abs()
                } else {
                    ((lu - want) / want).abs()
                };
                worst.take_max(rel, e, &x);
            }
        }
        VerificationReport::new(
            "point_identity",
            vec![Check::holds(
                "point_identity.eps_pow_j_squared",
                worst.value < T::lit(1e-12),
            )
            .margin(f64_of(worst.value))
            .witness(worst.witness)],
        )
    }

    /// `u_eps = 1` bit-exactly on a mesh of `|x| <= 1/2`, for every grid `eps`.
    pub fn verify_inner_ball(&self, dim: usize, mesh: usize, seed: u64) -> VerificationReport {
        let dirs = sphere_points::<T>(dim, mesh, seed);
        let n = mesh.max(2);
        let pts: Vec<Vec<T>> = dirs
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let r = T::lit(0.5) * T::from_usize(i).expect("index")
                    / T::from_usize(n - 1).expect("index");
                if i + 1 == n {
                    axis(dim, T::lit(0.5))
                } else {
                    scaled(d, r)
                }
            })
            .collect();
        let bad = self
            .grid
            .values()
            .iter()
            .flat_map(|&e| pts.iter().map(move |x| (e, x)))
            .find(|(e, x)| u_eps(*e, x) != T::one());
        VerificationReport::new(
            "inner_ball",
            vec![Check::holds("inner_ball.u_equals_one", bad.is_none())
                .witness(bad.map(|(e, x)| witness(e, x)))
                .note(format!(
                    "{} mesh points x {} grid values",
                    pts.len(),
                    self.grid.len()
                ))],
        )
    }

    /// Transition band `1/2 <= |x| <= 1`, `eps < 1/2`: `1/2 + 1e-12 < g <= 1`,
    /// `1/2 < u <= 1`; `0 < u < 3` on the band and on shells out to `eps^-j_max`.
    pub fn verify_band(&self, dim: usize, mesh: usize, j_max: u32) -> VerificationReport {
        let n = mesh.max(2);
        let radii: Vec<T> = (0..n)
            .map(|i| {
                T::lit(0.5)
                    + T::lit(0.5) * T::from_usize(i).expect("i") / T::from_usize(n - 1).expect("n")
            })
            .collect();
        let (mut g_lo, mut g_hi, mut u_lo, mut u_hi) = (
            Extreme::min(),
            Extreme::max(),
            Extreme::min(),
            Extreme::max(),
        );
        let mut all_lo = Extreme::min();
        let mut all_hi = Extreme::max();
        for &e in self.grid.values().iter().filter(|&&e| e < T::lit(0.5)) {
            for &r in &radii {
                let x = axis(dim, r);
                let g = g_eps(e, &x).unwrap_or(T::nan());
                let u = u_eps(e, &x);
                g_lo.take_min(g, e, &x);
                g_hi.take_max(g, e, &x);
                u_lo.take_min(u, e, &x);
                u_hi.take_max(u, e, &x);
            }
            let t_max = (T::from_u32(j_max).expect("small") * -e.log2())
                .ceil()
                .to_i32()
                .unwrap_or(0);
            for r in radii
                .iter()
                .copied()
                .chain((-4..=t_max).map(|t| T::lit(2.0).powi(t)))
            {
                let x = axis(dim, r);
                let u = u_eps_log(e, &x);
                all_lo.take_min(u.ln_abs(), e, &x);
                all_hi.take_max(u.ln_abs(), e, &x);
            }
        }
        let half = T::lit(0.5);
        let g_ok = g_lo.value > half + T::lit(1e-12) && g_hi.value <= T::one();
        let u_ok = u_lo.value > half && u_hi.value <= T::one();
        let printed_lower = g_lo.value >= T::one();
        let bounded = all_lo.value > T::neg_infinity() && all_hi.value < T::lit(3.0).ln();
        let range = format!(
            "observed g in [{}, {}], u in [{}, {}]",
            g_lo.value, g_hi.value, u_lo.value, u_hi.value
        );
        VerificationReport::new(
            "transition_band",
            vec![
                Check::holds("band.g_in_half_open_half_one", g_ok)
                    .margin(f64_of(g_lo.value - half))
                    .witness(g_lo.witness.clone())
                    .note(range.clone()),
                Check::holds("band.u_in_half_open_half_one", u_ok)
                    .margin(f64_of(u_lo.value - half))
                    .witness(u_lo.witness),
                Check::new("band.g_at_least_one", printed_lower, false)
                    .margin(f64_of(g_lo.value - T::one()))
                    .witness(g_lo.witness)
                    .note(format!(
                        "the band bound 1 <= g < 2 is not attained: {range}"
                    )),
                Check::holds("band.u_between_zero_and_three", bounded)
                    .margin(f64_of(all_hi.value - T::lit(3.0).ln()))
                    .witness(all_hi.witness)
                    .note("band and shells out to eps^-j_max"),
            ],
        )
    }

    /// For each `N`, `j = 3N + 1`: the exponent identity `j^2 - N(1 + 2j) = 3N^2 + 3N + 1`,
    /// `1/u_eps(eps^-j) = eps^-(j^2)`, and the excess of `1/u` over
    /// `eps^-N (1 + eps^-j)^N` grows strictly along the grid tail.
    pub fn verify_noninvertibility(&self, dim: usize, n_list: &[u32]) -> VerificationReport {
        let mut checks = Vec::new();
        for &n in n_list {
            let j = 3 * n + 1;
            let (j64, n64) = (j as i64, n as i64);
            let identity = j64 * j64 - n64 * (1 + 2 * j64) == 3 * n64 * n64 + 3 * n64 + 1;
            checks.push(
                Check::holds(
                    format!("noninvertible.n{n}.exponent_identity"),
                    identity && 3 * n64 * n64 + 3 * n64 + 1 >= 1,
                )
                .note(format!(
                    "j = {j}, exponent {}",
                    j64 * j64 - n64 * (1 + 2 * j64)
                )),
            );
            let (jt, nt) = (
                T::from_u32(j).expect("small"),
                T::from_u32(n).expect("small"),
            );
            let mut prev = T::neg_infinity();
            let mut monotone = true;
            let mut value_ok = true;
            let mut min_excess = Extreme::min();
            for &e in self.grid.tail() {
                let le = e.ln();
                let r = e.powi(-(j as i32));
                let x = axis(dim, r);
                let ln_v = -u_eps_log(e, &x).ln_abs();
                value_ok &= ((ln_v + jt * jt * le) / (jt * jt * le)).abs() < T::lit(1e-12);
                let ln_bound = -nt * le + nt * (r.ln() + r.recip().ln_1p());
                let excess = ln_v - ln_bound;
                monotone &= excess > prev;
                prev = excess;
                min_excess.take_min(excess / le.abs(), e, &x);
            }
            checks.push(Check::holds(
                format!("noninvertible.n{n}.reciprocal_value"),
                value_ok,
            ));
            checks.push(
                Check::holds(
                    format!("noninvertible.n{n}.bound_violated_diverging"),
                    monotone && min_excess.value > T::zero(),
                )
                .margin(f64_of(min_excess.value))
                .witness(min_excess.witness),
            );
        }
        VerificationReport::new("noninvertibility", checks)
    }

    /// Unit-ball criterion for dilations `0..=max_dilation` with `N(k) = k^2`, and strict
    /// non-vanishing of `u` at seeded moderate points of `R^dim`.
    pub fn verify_pointwise_invertibility(
        &self,
        dim: usize,
        max_dilation: u32,
        points: usize,
        seed: u64,
    ) -> Result<VerificationReport> {
        let u = counterexample_net::<T>(dim);
        let mut checks = Vec::new();
        let ms: Vec<T> = (0..=max_dilation)
            .map(|k| -T::from_u32(k).expect("small"))
            .collect();
        let sweep = self.pointwise_invertibility_sweep(&u, &ms, &BallSpec::default())?;
        for (k, v) in (0..=max_dilation).zip(&sweep.entries) {
            checks.push(
                Check::holds(format!("pointwise.dilation_{k}"), v.n == Some(k * k)).note(format!(
                    "N = {:?}, expected {}",
                    v.n,
                    k * k
                )),
            );
        }
        let family = self.sample_moderate_points(&OpenBox::whole_space(dim), points, seed)?;
        let mut failures = Vec::new();
        let mut worst_m = 0;
        for p in &family {
            let v = self.evaluate_at_point(&u, p)?;
            match self.is_strictly_nonzero(&v)?.m {
                Some(m) => worst_m = worst_m.max(m),
                None => failures.push(p.label().to_string()),
            }
        }
        checks.push(
            Check::holds(
                "pointwise.sampled_points_strictly_nonzero",
                failures.is_empty(),
            )
            .note(if failures.is_empty() {
                format!("{} points, largest exponent m = {worst_m}", family.len())
            } else {
                format!("failing: {}", failures.join("; "))
            }),
        );
        Ok(VerificationReport::new("pointwise_invertibility", checks))
    }

    /// Analytic `∇g` against central differences (relative `1e-5`, see [`gradient_gap`]) and the moderate bound
    /// `|∂_i g| < 16 (1+|x|)^2 eps^-2`, at random `eps in [2^-40, 1/4]`,
    /// `|x| in [1/2, eps^-3]`.
    pub fn verify_gradient(&self, dim: usize, samples: usize, seed: u64) -> VerificationReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = Extreme::max();
        let mut bound_margin = Extreme::max();
        let bound_const = T::lit(self.thresholds.estimate_slack);
        let dirs = sphere_points::<T>(dim, samples, seed ^ 0x5eed);
        for d in dirs {
            let e = T::lit(2f64.powf(-rng.gen_range(2.0..40.0)));
            let t = T::lit(rng.gen_range(0.0..1.0));
            let ln_r = T::lit(0.5).ln() * (T::one() - t) + (-T::lit(3.0) * e.ln()) * t;
            let x = scaled(&d, ln_r.exp());
            let an = grad_g_eps(e, &x).expect("valid region");
            let fd = FunctionNet::from_log("g", OpenBox::whole_space(dim), |e, x| {
                SignedLog::exp_of(ln_g(e, norm(x)))
            })
            .fd_gradient(e, &x);
            let floor = T::lit(GRADIENT_FLOOR) * ln_g(e, norm(&x)).exp() / (T::one() + norm(&x));
            let rel = gradient_gap(&an, &fd, floor);
            worst.take_max(rel, e, &x);
            let ln_bound = bound_const.ln() + T::lit(2.0) * norm(&x).ln_1p() - T::lit(2.0) * e.ln();
            for gi in &an {
                bound_margin.take_max(gi.abs().ln() - ln_bound, e, &x);
            }
        }
        VerificationReport::new(
            "gradient",
            vec![
                Check::holds(
                    "gradient.matches_finite_differences",
                    worst.value < T::lit(1e-5),
                )
                .margin(f64_of(worst.value))
                .witness(worst.witness)
                .note(format!("{samples} samples")),
                Check::holds("gradient.moderate_bound", bound_margin.value < T::zero())
                    .margin(f64_of(bound_margin.value))
                    .witness(bound_margin.witness),
            ],
        )
    }

    /// Classification of `u` itself: moderate of order zero, not negligible (witnessed at
    /// `eps^-1 e_1`), derivatives up to order two moderate, globally not invertible.
    pub fn verify_classification(&self, dim: usize, j_max: u32) -> Result<VerificationReport> {
        let u = counterexample_net::<T>(dim);
        let spec = XSampleSpec {
            j_max,
            ..XSampleSpec::default()
        };
        let cert = self.check_moderate(&u, &spec)?;
        let neg = self.check_negligible(&u, &spec)?;
        let point = self.non_negligible_point(&u, &spec)?;
        let grad = FunctionNet::from_log("|grad u|", u.domain().clone(), |e, x: &[T]| {
            SignedLog::from_value(norm(&grad_u_eps(e, x)))
        });
        let hess = FunctionNet::from_log("|d1 grad u|", u.domain().clone(), |e, x: &[T]| {
            let h = T::lit(1e-6) * (T::one() + norm(x));
            let (mut p, mut m) = (x.to_vec(), x.to_vec());
            p[0] = p[0] + h;
            m[0] = m[0] - h;
            let d: Vec<T> = grad_u_eps(e, &p)
                .iter()
                .zip(grad_u_eps(e, &m))
                .map(|(a, b)| (*a - b) / (h + h))
                .collect();
            SignedLog::from_value(norm(&d))
        });
        let grad_cert = self.check_moderate(&grad, &spec)?;
        let hess_cert = self.check_moderate(&hess, &spec)?;
        let recip = self.reciprocal_test(&u, &spec)?;
        Ok(VerificationReport::new(
            "classification",
            vec![
                Check::holds("moderate.order_zero", cert.n == Some(0))
                    .margin(f64_of(cert.worst_margin_scaled))
                    .note(format!("N = {:?} over {} samples", cert.n, cert.samples)),
                Check::new("negligible", neg.negligible, false)
                    .margin(f64_of(neg.worst_margin_scaled))
                    .witness(neg.witness)
                    .note(format!(
                        "value not negligible at {}",
                        point
                            .as_ref()
                            .map_or("no sampled point".to_string(), |p| p.label().to_string())
                    )),
                Check::holds("moderate.first_derivatives", grad_cert.is_moderate())
                    .note(format!("N = {:?}", grad_cert.n)),
                Check::holds("moderate.second_derivatives", hess_cert.is_moderate()).note(format!(
                    "N = {:?}, finite differences of the gradient",
                    hess_cert.n
                )),
                Check::new("global_invertibility", recip.invertible, false)
                    .witness(recip.witness.clone())
                    .note(format!(
                        "expected-fail confirmed: reciprocal moderate order {:?} at reach eps^-{}",
                        recip.reciprocal.as_ref().and_then(|c| c.n),
                        recip.j_max
                    )),
            ],
        ))
    }

    /// Every suite above, in a fixed order.
    pub fn verify_counterexample(&self, cfg: &SuiteConfig) -> Result<VerificationReport> {
        Ok(VerificationReport::merge(
            "counterexample",
            [
                self.verify_shell_estimates(cfg.dim, cfg.j_max, cfg.radii_per_shell),
                self.verify_point_identity(cfg.dim, cfg.j_max),
                self.verify_inner_ball(cfg.dim, cfg.mesh, cfg.seed),
                self.verify_band(cfg.dim, cfg.mesh, cfg.j_max),
                self.verify_classification(cfg.dim, cfg.j_max)?,
                self.verify_noninvertibility(cfg.dim, &cfg.n_list),
                self.verify_pointwise_invertibility(
                    cfg.dim,
                    cfg.max_dilation,
                    cfg.points,
                    cfg.seed,
                )?,
                self.verify_gradient(cfg.dim, cfg.gradient_samples, cfg.seed),
            ],
        ))
    }
}

/// `eps^-j` along `e_1`, the points where `u` takes the value `eps^(j^2)`.
pub fn shell_edge<T: Scalar>(dim: usize, eps: T, j: u32) -> Vec<T> {
    axis(dim, eps_scale(eps, -T::from_u32(j).expect("small")))
}
