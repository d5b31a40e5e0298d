//! Tempered generalized functions on boxes: classification, point values, scaling maps
//! and invertibility checks.
//!
//! Suprema over the box are taken over a deterministic [`XSampleSpec`] sample whose
//! radial shells grow with `1/eps`, so regions like `|x| ~ eps^-6` are actually visited.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{log_gt, log_le, ScalarNet, Sign, SignedLog};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::gnumber::GeneralizedNumber;
use crate::gpoint::{Coord, GeneralizedPoint, OpenBox};
use crate::Scalar;

type EvalFn<T> = dyn Fn(T, &[T]) -> SignedLog<T> + Send + Sync;
type GradFn<T> = dyn Fn(T, &[T]) -> Vec<T> + Send + Sync;

/// A representative `(eps, x) -> u_eps(x)` on a box.
#[derive(Clone)]
pub struct FunctionNet<T> {
    eval: Arc<EvalFn<T>>,
    gradient: Option<Arc<GradFn<T>>>,
    domain: OpenBox<T>,
    label: Arc<str>,
}

impl<T> fmt::Debug for FunctionNet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionNet")
            .field("label", &self.label)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl<T: Scalar> FunctionNet<T> {
    pub fn new(
        label: impl Into<String>,
        domain: OpenBox<T>,
        f: impl Fn(T, &[T]) -> T + Send + Sync + 'static,
    ) -> Self {
        Self::from_log(label, domain, move |e, x| SignedLog::from_value(f(e, x)))
    }

    pub fn from_log(
        label: impl Into<String>,
        domain: OpenBox<T>,
        f: impl Fn(T, &[T]) -> SignedLog<T> + Send + Sync + 'static,
    ) -> Self {
        FunctionNet {
            eval: Arc::new(f),
            gradient: None,
            domain,
            label: label.into().into(),
        }
    }

    pub fn constant(domain: OpenBox<T>, c: T) -> Self {
        Self::from_log(format!("{c}"), domain, move |_, _| SignedLog::from_value(c))
    }

    pub fn with_gradient(mut self, g: impl Fn(T, &[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn eval(&self, eps: T, x: &[T]) -> T {
        (self.eval)(eps, x).to_value()
    }

    pub fn eval_log(&self, eps: T, x: &[T]) -> SignedLog<T> {
        (self.eval)(eps, x)
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// Analytic gradient if present, else central differences with `h = 1e-6 (1 + |x|)`.
    pub fn gradient(&self, eps: T, x: &[T]) -> Vec<T> {
        match &self.gradient {
            Some(g) => g(eps, x),
            None => self.fd_gradient(eps, x),
        }
    }

    pub fn fd_gradient(&self, eps: T, x: &[T]) -> Vec<T> {
        let h = T::lit(1e-6) * (T::one() + norm(x));
        let mut y = x.to_vec();
        (0..x.len())
            .map(|i| {
                y[i] = x[i] + h;
                let plus = self.eval(eps, &y);
                y[i] = x[i] - h;
                let minus = self.eval(eps, &y);
                y[i] = x[i];
                (plus - minus) / (h + h)
            })
            .collect()
    }

    pub fn domain(&self) -> &OpenBox<T> {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into().into();
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, "+", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, "-", |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.combine(other, "*", |a, b| a * b)
    }

    fn combine(
        &self,
        other: &Self,
        op: &str,
        f: impl Fn(SignedLog<T>, SignedLog<T>) -> SignedLog<T> + Send + Sync + 'static,
    ) -> Self {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Self::from_log(
            format!("({} {op} {})", self.label, other.label),
            self.domain.clone(),
            move |e, x| f(a(e, x), b(e, x)),
        )
    }

    /// Worst relative gap between the analytic gradient and central differences over the
    /// given samples (zero without an analytic gradient).
    pub fn gradient_consistency(&self, samples: &[(T, Vec<T>)]) -> T {
        if self.gradient.is_none() {
            return T::zero();
        }
        samples
            .iter()
            .map(|(e, x)| {
                let floor = T::lit(GRADIENT_FLOOR) * self.eval(*e, x).abs() / (T::one() + norm(x));
                gradient_gap(&self.gradient(*e, x), &self.fd_gradient(*e, x), floor)
            })
            .fold(T::zero(), T::max)
    }
}

/// Relative weight of `|u(x)| / (1 + |x|)` below which gradient gaps count as absolute:
/// central differences cannot resolve gradients much smaller than the function itself.
pub const GRADIENT_FLOOR: f64 = 1e-3;

/// `|a - b| / max(|b|, floor)` in the Euclidean norm.
pub fn gradient_gap<T: Scalar>(a: &[T], b: &[T], floor: T) -> T {
    let diff: Vec<T> = a.iter().zip(b).map(|(&p, &q)| p - q).collect();
    norm(&diff) / norm(b).max(floor).max(T::min_positive_value())
}

/// Overflow-safe Euclidean norm.
pub fn norm<T: Scalar>(x: &[T]) -> T {
    let m = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if m == T::zero() || !m.is_finite() {
        return m;
    }
    m * x
        .iter()
        .fold(T::zero(), |s, &v| s + (v / m) * (v / m))
        .sqrt()
}

/// `eps^m`, exact for integral `m` on dyadic grids.
pub fn eps_scale<T: Scalar>(eps: T, m: T) -> T {
    if m.fract() == T::zero() && m.abs() < T::lit(1e6) {
        eps.powi(m.to_i32().expect("bounded integral exponent"))
    } else {
        (m * eps.ln()).exp()
    }
}

/// Where sup over the box is sampled at a given `eps`.
///
/// Radial shells `|x - c| in {0} ∪ {2^t : t = -2..=T(eps)}` around the box center `c`,
/// with `2^T(eps) >= eps^-j_max`, along a few fixed and seeded directions; plus boundary
/// layers at distances `eps^k` (`k <= boundary_layers`) and `2^-t` (`t <= 8`) from every
/// finite endpoint. Points that are not strictly inside the box are dropped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XSampleSpec {
    pub j_max: u32,
    pub directions: usize,
    pub boundary_layers: u32,
    pub seed: u64,
}

impl Default for XSampleSpec {
    fn default() -> Self {
        XSampleSpec {
            j_max: 6,
            directions: 4,
            boundary_layers: 32,
            seed: 7,
        }
    }
}

impl XSampleSpec {
    pub fn with_j_max(self, j_max: u32) -> Self {
        XSampleSpec { j_max, ..self }
    }

    pub fn directions<T: Scalar>(&self, dim: usize) -> Vec<Vec<T>> {
        let unit = |i: usize, s: T| {
            let mut v = vec![T::zero(); dim];
            v[i] = s;
            v
        };
        let mut dirs = vec![unit(0, T::one()), unit(0, -T::one())];
        if dim > 1 {
            let c = T::one() / T::from_usize(dim).expect("dimension").sqrt();
            dirs.push(vec![c; dim]);
            dirs.push(vec![-c; dim]);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        while dirs.len() < self.directions && dim > 1 {
            let v: Vec<T> = (0..dim).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
            let n = norm(&v);
            if n > T::lit(0.1) {
                dirs.push(v.into_iter().map(|c| c / n).collect());
            }
        }
        dirs.truncate(self.directions.max(2));
        dirs
    }

    /// Sample points at `eps`, deterministic and in a fixed order.
    pub fn points<T: Scalar>(&self, domain: &OpenBox<T>, eps: T) -> Vec<Vec<T>> {
        let dim = domain.dim();
        let center = domain.center();
        let mut out = vec![center.clone()];
        let two = T::lit(2.0);
        let t_max = (T::from_u32(self.j_max).expect("small") * -eps.log2()).ceil();
        let t_max = t_max.to_i32().unwrap_or(0).max(-2);
        let dirs = self.directions::<T>(dim);
        for t in -2..=t_max {
            let r = two.powi(t);
            for d in &dirs {
                out.push(center.iter().zip(d).map(|(&c, &u)| c + r * u).collect());
            }
        }
        for (i, iv) in domain.intervals().iter().enumerate() {
            for (end, s) in [(iv.lo, T::one()), (iv.hi, -T::one())] {
                if !end.is_finite() {
                    continue;
                }
                let layers = (1..=self.boundary_layers)
                    .map(|k| eps.powi(k as i32))
                    .take_while(|v| v.is_normal())
                    .chain((1..=8).map(|t| two.powi(-t)));
                for delta in layers {
                    let mut x = center.clone();
                    x[i] = end + s * delta;
                    out.push(x);
                }
            }
        }
        out.retain(|x| x.iter().all(|v| v.is_finite()) && domain.contains(x));
        out
    }
}

/// Where a sampled quantity is worst (or a bound fails).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub eps: f64,
    pub x: Vec<f64>,
}

impl Witness {
    fn new<T: Scalar>(eps: T, x: &[T]) -> Self {
        Witness {
            eps: eps.as_f64(),
            x: x.iter().map(|v| v.as_f64()).collect(),
        }
    }
}

#[derive(Clone, Debug)]
struct Sample<T> {
    eps: T,
    ln_eps: T,
    x: Vec<T>,
    /// `ln(1 + |x|)`
    ln_weight: T,
    value: SignedLog<T>,
}

/// Outcome of the tempered moderateness test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModerationCertificate<T> {
    /// Smallest `N <= n_max` with `|u_eps(x)| <= slack · eps^-N (1+|x|)^N` on all tail
    /// samples; `None` means not moderate.
    pub n: Option<u32>,
    /// Max of `ln|u| - ln(eps^-N (1+|x|)^N)` at the reported `N` (or `n_max`).
    pub worst_margin: T,
    /// Same margin divided by `|ln eps|`.
    pub worst_margin_scaled: T,
    pub witness: Option<Witness>,
    pub samples: usize,
    pub spec: XSampleSpec,
}

impl<T> ModerationCertificate<T> {
    pub fn is_moderate(&self) -> bool {
        self.n.is_some()
    }
}

/// Outcome of the tempered negligibility test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NegligibilityVerdict<T> {
    pub negligible: bool,
    /// First `p` whose bound `slack · eps^p (1+|x|)^n_max` fails.
    pub failing_p: Option<u32>,
    pub worst_margin_scaled: T,
    pub witness: Option<Witness>,
}

/// One dilation of the unit-ball criterion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallVerdict<T> {
    pub m: T,
    pub holds: bool,
    /// Smallest `N` with sampled `inf |u_eps(eps^m x)| >= eps^N` on the tail.
    pub n: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport<T> {
    pub entries: Vec<BallVerdict<T>>,
    pub all_pass: bool,
}

/// Sampled unit ball: origin plus radii `2^-t`, `t = 0..=extra + ceil(max(0,-m) log2(1/eps))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallSpec {
    pub directions: usize,
    pub extra_shells: u32,
    pub n_search_max: u32,
}

impl Default for BallSpec {
    fn default() -> Self {
        BallSpec {
            directions: 4,
            extra_shells: 4,
            n_search_max: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReciprocalVerdict<T> {
    pub invertible: bool,
    /// `u_eps(x) = 0` exactly at the witness.
    pub vanishes: bool,
    pub reciprocal: Option<ModerationCertificate<T>>,
    pub product_residual_negligible: bool,
    pub witness: Option<Witness>,
    /// Reach actually used for the reciprocal.
    pub j_max: u32,
}

/// Numerical form of the boundary-nudge argument for one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NudgeReport<T> {
    pub m: u32,
    /// `|u(x_eps)| <= |u(y_eps)| + G_eps sqrt(d) eps^m` at every tail `eps`.
    pub bound_holds: bool,
    pub nudged_point_positive_distance: bool,
    pub rows: Vec<NudgeRow<T>>,
    /// Largest `l <= 64` with the bound `<= eps^l` on the tail (`None`: not even `l = 0`).
    pub certified_order: Option<u32>,
    /// Moderate order of the sampled segment gradient sup.
    pub gradient_n: Option<u32>,
    pub point_n: u32,
    /// `m - N(2 + N')`
    pub proof_exponent: Option<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NudgeRow<T> {
    pub eps: T,
    pub abs_u_x: T,
    pub abs_u_y: T,
    pub gradient_sup: T,
    pub bound: T,
    pub ln_bound: T,
}

const ORDER_CAP: u32 = 64;

impl<T: Scalar> Context<T> {
    fn samples(&self, f: &FunctionNet<T>, spec: &XSampleSpec, eps: &[T]) -> Result<Vec<Sample<T>>> {
        let per_eps: Vec<Result<Vec<Sample<T>>>> = eps
            .par_iter()
            .map(|&e| {
                spec.points(f.domain(), e)
                    .into_iter()
                    .map(|x| {
                        let value = f.eval_log(e, &x);
                        // An infinite value is a plain-float overflow, not a measurement.
                        if value.is_nan() || value.ln_abs() == T::infinity() {
                            let what = if value.is_nan() {
                                "is NaN"
                            } else {
                                "is infinite (plain-float overflow or a singularity)"
                            };
                            return Err(Error::eval_at(
                                e.as_f64(),
                                Some(&x.iter().map(|v| v.as_f64()).collect::<Vec<_>>()),
                                format!("`{}` {what}", f.label()),
                            ));
                        }
                        let ln_weight = norm(&x).ln_1p();
                        Ok(Sample {
                            eps: e,
                            ln_eps: e.ln(),
                            x,
                            ln_weight,
                            value,
                        })
                    })
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        for s in per_eps {
            out.extend(s?);
        }
        Ok(out)
    }

    /// Smallest tempered moderateness order on the sampled tail.
    pub fn check_moderate(
        &self,
        f: &FunctionNet<T>,
        spec: &XSampleSpec,
    ) -> Result<ModerationCertificate<T>> {
        let samples = self.samples(f, spec, self.grid.tail())?;
        Ok(self.moderation_of(&samples, *spec))
    }

    fn moderation_of(&self, samples: &[Sample<T>], spec: XSampleSpec) -> ModerationCertificate<T> {
        let ln_slack = self.slack().ln();
        let n_max = self.thresholds.n_max;
        let n = (0..=n_max).find(|&n| {
            let n = T::from_u32(n).expect("small");
            samples
                .iter()
                .all(|s| log_le(s.value.ln_abs(), ln_slack + n * (s.ln_weight - s.ln_eps)))
        });
        let at = T::from_u32(n.unwrap_or(n_max)).expect("small");
        let (worst, witness) = worst_margin(samples, |s| at * (s.ln_weight - s.ln_eps));
        ModerationCertificate {
            n,
            worst_margin: worst.map_or(T::neg_infinity(), |w| w.0),
            worst_margin_scaled: worst.map_or(T::neg_infinity(), |w| w.1),
            witness: if n.is_none() { witness } else { None },
            samples: samples.len(),
            spec,
        }
    }

    /// `∃N <= n_max ∀p <= p_max`: `|u_eps(x)| <= slack · eps^p (1+|x|)^N` on the sampled
    /// tail. The weight is monotone in `N`, so `N = n_max` decides.
    pub fn check_negligible(
        &self,
        f: &FunctionNet<T>,
        spec: &XSampleSpec,
    ) -> Result<NegligibilityVerdict<T>> {
        let samples = self.samples(f, spec, self.grid.tail())?;
        Ok(self.negligibility_of(&samples))
    }

    fn negligibility_of(&self, samples: &[Sample<T>]) -> NegligibilityVerdict<T> {
        let ln_slack = self.slack().ln();
        let n = T::from_u32(self.thresholds.n_max).expect("small");
        let failing_p = (0..=self.thresholds.p_max).find(|&p| {
            let p = T::from_u32(p).expect("small");
            !samples
                .iter()
                .all(|s| log_le(s.value.ln_abs(), ln_slack + p * s.ln_eps + n * s.ln_weight))
        });
        let p = T::from_u32(failing_p.unwrap_or(self.thresholds.p_max)).expect("small");
        let (worst, witness) = worst_margin(samples, |s| p * s.ln_eps + n * s.ln_weight);
        NegligibilityVerdict {
            negligible: failing_p.is_none(),
            failing_p,
            worst_margin_scaled: worst.map_or(T::neg_infinity(), |w| w.1),
            witness: if failing_p.is_some() { witness } else { None },
        }
    }

    /// Point value `eps -> u_eps(x_eps)`, certified moderate.
    pub fn evaluate_at_point(
        &self,
        f: &FunctionNet<T>,
        x: &GeneralizedPoint<T>,
    ) -> Result<GeneralizedNumber<T>> {
        if f.domain() != x.domain() {
            return Err(Error::Domain(format!(
                "point `{}` lives in {}, function `{}` in {}",
                x.label(),
                x.domain(),
                f.label(),
                f.domain()
            )));
        }
        let (f2, x2) = (f.clone(), x.clone());
        let net = ScalarNet::from_log(format!("{}({})", f.label(), x.label()), move |e| {
            f2.eval_log(e, &x2.values(e))
        });
        self.number(net)
    }

    /// The first of `eps^-j e_1` (`j = 1..=j_max`), then the box center, at which the value
    /// net is not negligible.
    pub fn non_negligible_point(
        &self,
        f: &FunctionNet<T>,
        spec: &XSampleSpec,
    ) -> Result<Option<GeneralizedPoint<T>>> {
        let dim = f.dim();
        let mut candidates = Vec::new();
        for j in 1..=spec.j_max {
            let p = self.plain_point(f.domain(), format!("eps^-{j} e_1"), move |e: T| {
                let mut x = vec![T::zero(); dim];
                x[0] = e.powi(-(j as i32));
                x
            });
            if let Ok(p) = p {
                candidates.push(p);
            }
        }
        let c = f.domain().center();
        candidates.push(self.plain_point(f.domain(), "center", move |_| c.clone())?);
        for p in candidates {
            let v = match self.evaluate_at_point(f, &p) {
                Ok(v) => v,
                Err(Error::NotModerate { .. }) => return Ok(Some(p)),
                Err(e) => return Err(e),
            };
            if !self.is_zero_net(v.rep())? {
                return Ok(Some(p));
            }
        }
        Ok(None)
    }

    /// `s_m(u)`: `(eps, x) -> u_eps(eps^m x)` on `R^d`.
    pub fn scale_map(&self, f: &FunctionNet<T>, m: T) -> Result<FunctionNet<T>> {
        if !f.domain().is_whole_space() {
            return Err(Error::Domain(format!(
                "scaling map needs R^d, `{}` lives on {}",
                f.label(),
                f.domain()
            )));
        }
        let g = f.clone();
        let mut out = FunctionNet::from_log(
            format!("s_{m}({})", f.label()),
            f.domain().clone(),
            move |e, x| {
                let s = eps_scale(e, m);
                let y: Vec<T> = x.iter().map(|&v| s * v).collect();
                g.eval_log(e, &y)
            },
        );
        if f.has_analytic_gradient() {
            let g = f.clone();
            out = out.with_gradient(move |e, x| {
                let s = eps_scale(e, m);
                let y: Vec<T> = x.iter().map(|&v| s * v).collect();
                g.gradient(e, &y).into_iter().map(|v| v * s).collect()
            });
        }
        Ok(out)
    }

    /// Smallest `N` with sampled `inf_{|x|<=1} |u_eps(eps^m x)| >= eps^N` on the tail.
    /// Negative `m` dilates: the scaled ball then has radius `eps^-|m|`.
    pub fn unit_ball_strictly_nonzero(
        &self,
        f: &FunctionNet<T>,
        m: T,
        ball: &BallSpec,
    ) -> Result<BallVerdict<T>> {
        let scaled = self.scale_map(f, m)?;
        let dirs = XSampleSpec {
            directions: ball.directions,
            ..XSampleSpec::default()
        }
        .directions::<T>(f.dim());
        let infs: Vec<Result<(T, T)>> = self
            .grid
            .tail()
            .par_iter()
            .map(|&e| {
                let shells = T::from_u32(ball.extra_shells).expect("small")
                    + ((-m).max(T::zero()) * -e.log2()).ceil();
                let shells = shells.to_i32().unwrap_or(0);
                let mut inf = scaled.eval_log(e, &vec![T::zero(); f.dim()]).abs();
                for t in 0..=shells {
                    let r = T::lit(2.0).powi(-t);
                    for d in &dirs {
                        let x: Vec<T> = d.iter().map(|&u| r * u).collect();
                        let v = scaled.eval_log(e, &x);
                        if v.is_nan() || v.ln_abs() == T::infinity() {
                            return Err(Error::eval_at(
                                e.as_f64(),
                                Some(&x.iter().map(|v| v.as_f64()).collect::<Vec<_>>()),
                                format!("`{}` is not finite", scaled.label()),
                            ));
                        }
                        inf = inf.min(v.abs());
                    }
                }
                Ok((e.ln(), inf.ln_abs()))
            })
            .collect();
        let infs: Vec<(T, T)> = infs.into_iter().collect::<Result<_>>()?;
        let n = (0..=ball.n_search_max).find(|&n| {
            let n = T::from_u32(n).expect("small");
            infs.iter().all(|&(le, li)| log_le(n * le, li))
        });
        Ok(BallVerdict {
            m,
            holds: n.is_some(),
            n,
        })
    }

    pub fn pointwise_invertibility_sweep(
        &self,
        f: &FunctionNet<T>,
        m_list: &[T],
        ball: &BallSpec,
    ) -> Result<SweepReport<T>> {
        let entries = m_list
            .iter()
            .map(|&m| self.unit_ball_strictly_nonzero(f, m, ball))
            .collect::<Result<Vec<_>>>()?;
        let all_pass = entries.iter().all(|v| v.holds);
        Ok(SweepReport { entries, all_pass })
    }

    /// Global invertibility through the pointwise reciprocal `v = 1/u`: invertible iff `v`
    /// is moderate and `u v - 1` negligible on the samples.
    ///
    /// Refuting order `N` needs `|x| ~ eps^-(N+1)`, so the reach is raised to at least
    /// `n_max + 2`.
    pub fn reciprocal_test(
        &self,
        f: &FunctionNet<T>,
        spec: &XSampleSpec,
    ) -> Result<ReciprocalVerdict<T>> {
        let spec = spec.with_j_max(spec.j_max.max(self.thresholds.n_max + 2));
        let samples = self.samples(f, &spec, self.grid.tail())?;
        if let Some(s) = samples.iter().find(|s| s.value.is_zero()) {
            return Ok(ReciprocalVerdict {
                invertible: false,
                vanishes: true,
                reciprocal: None,
                product_residual_negligible: false,
                witness: Some(Witness::new(s.eps, &s.x)),
                j_max: spec.j_max,
            });
        }
        let recip: Vec<Sample<T>> = samples
            .iter()
            .map(|s| Sample {
                value: log_recip(s.value),
                ..s.clone()
            })
            .collect();
        let cert = self.moderation_of(&recip, spec);
        let residual: Vec<Sample<T>> = samples
            .iter()
            .zip(&recip)
            .map(|(u, v)| Sample {
                value: log_product(u.value, v.value) - SignedLog::one(),
                ..u.clone()
            })
            .collect();
        let product_ok = self.negligibility_of(&residual).negligible;
        Ok(ReciprocalVerdict {
            invertible: cert.is_moderate() && product_ok,
            vanishes: false,
            witness: cert.witness.clone(),
            reciprocal: Some(cert),
            product_residual_negligible: product_ok,
            j_max: spec.j_max,
        })
    }

    /// Finite form of the witness construction: walk the grid downwards; at each `eps`
    /// take the sample minimizing `|u_eps|` and accept it with the largest index
    /// `K <= k_target` such that `|u_eps(x)| < eps^K`, where `K` must exceed the previous
    /// index (or repeat `k_target` once reached). The point is `x_k` on `[eps_k, eps_{k-1})`.
    ///
    /// `k_target` is `m_max` on bounded boxes and `max(m_max, (j_max+1)^2 + 1)` otherwise,
    /// beyond what the sampled reach can produce for a pointwise invertible net.
    pub fn witness_noninvertible_point(
        &self,
        f: &FunctionNet<T>,
        spec: &XSampleSpec,
    ) -> Result<Option<GeneralizedPoint<T>>> {
        let m_max = self.thresholds.m_max;
        let k_target = if f.domain().is_bounded() {
            m_max
        } else {
            m_max.max((spec.j_max + 1).pow(2) + 1)
        };
        let grid = self.grid.values();
        let minima: Vec<Result<Option<Sample<T>>>> = grid
            .par_iter()
            .map(|&e| {
                let s = self.samples(f, spec, &[e])?;
                Ok(s.into_iter().reduce(|a, b| {
                    if b.value.ln_abs() < a.value.ln_abs() {
                        b
                    } else {
                        a
                    }
                }))
            })
            .collect();
        let mut k = 0u32;
        let mut accepted: Vec<(T, Vec<T>)> = Vec::new();
        for best in minima {
            let Some(s) = best? else { continue };
            let lower = if k == k_target { k_target } else { k + 1 };
            let hit = (lower..=k_target)
                .rev()
                .find(|&kk| log_gt(T::from_u32(kk).expect("small") * s.ln_eps, s.value.ln_abs()));
            if let Some(kk) = hit {
                k = kk;
                accepted.push((s.eps, s.x));
            }
        }
        if k < k_target || accepted.is_empty() {
            return Ok(None);
        }
        let label = format!(
            "witness of `{}` ({} steps, k = {k})",
            f.label(),
            accepted.len()
        );
        let pieces = Arc::new(accepted);
        let p = self.plain_point(f.domain(), label, move |e| {
            pieces
                .iter()
                .find(|(ek, _)| *ek <= e)
                .or_else(|| pieces.last())
                .map(|(_, x)| x.clone())
                .expect("nonempty")
        })?;
        Ok(Some(p))
    }

    /// Nudges `x` inward by `eps^m` along every coordinate and checks
    /// `|u(x_eps)| <= |u(y_eps)| + sup_segment |∇u| · sqrt(d) · eps^m` on the tail.
    pub fn interior_nudge_check(
        &self,
        f: &FunctionNet<T>,
        x: &GeneralizedPoint<T>,
        m: u32,
    ) -> Result<NudgeReport<T>> {
        let domain = f.domain().clone();
        if domain.is_whole_space() {
            return Err(Error::Domain(
                "nudge check needs a box other than R^d".into(),
            ));
        }
        if &domain != x.domain() {
            return Err(Error::Domain(
                "point and function live in different boxes".into(),
            ));
        }
        let mt = T::from_u32(m).expect("small");
        for &e in self.grid.values() {
            if nudge_signs(&domain, &x.coords(e), eps_scale(e, mt)).is_none() {
                return Err(Error::Construction {
                    eps: e.as_f64(),
                    msg: format!(
                        "no sign choice keeps `{}` inside {domain} at distance eps^{m}",
                        x.label()
                    ),
                });
            }
        }
        let (xr, d2) = (x.clone(), domain.clone());
        let y = self.point(&domain, format!("nudge({})", x.label()), move |e| {
            let step = eps_scale(e, mt);
            let c = xr.coords(e);
            let signs = nudge_signs(&d2, &c, step).unwrap_or_else(|| vec![T::one(); c.len()]);
            c.iter()
                .zip(signs)
                .map(|(ci, s)| {
                    Coord::anchored(ci.anchor, ci.offset + SignedLog::from_value(s * step))
                })
                .collect()
        })?;
        let positive = self.has_positive_boundary_distance(&y)?;
        let sqrt_d = T::from_usize(domain.dim()).expect("dimension").sqrt();
        let rows: Vec<NudgeRow<T>> = self
            .grid
            .tail()
            .par_iter()
            .map(|&e| {
                let (xv, yv) = (x.values(e), y.values(e));
                let ux = f.eval_log(e, &xv).abs();
                let uy = f.eval_log(e, &yv).abs();
                let g = (0..=8)
                    .map(|i| {
                        let s = T::from_u32(i).expect("small") / T::lit(8.0);
                        let z: Vec<T> =
                            xv.iter().zip(&yv).map(|(&a, &b)| a + s * (b - a)).collect();
                        norm(&f.gradient(e, &z))
                    })
                    .fold(T::zero(), T::max);
                let mvt = SignedLog::from_value(g * sqrt_d) * SignedLog::exp_of(mt * e.ln());
                let bound = uy + mvt;
                NudgeRow {
                    eps: e,
                    abs_u_x: ux.to_value(),
                    abs_u_y: uy.to_value(),
                    gradient_sup: g,
                    bound: bound.to_value(),
                    ln_bound: bound.ln_abs(),
                }
            })
            .collect();
        let bound_holds = rows.iter().zip(self.grid.tail()).all(|(r, &e)| {
            let ux = f.eval_log(e, &x.values(e)).abs();
            log_le(ux.ln_abs(), r.ln_bound)
        });
        let certified_order = (0..=ORDER_CAP).rev().find(|&l| {
            let l = T::from_u32(l).expect("small");
            rows.iter().all(|r| log_le(r.ln_bound, l * r.eps.ln()))
        });
        let ln_slack = self.slack().ln();
        let gradient_n = (0..=self.thresholds.n_max).find(|&n| {
            let n = T::from_u32(n).expect("small");
            rows.iter().zip(self.grid.tail()).all(|(r, &e)| {
                let w = (norm(&x.values(e)) + T::one()).ln_1p();
                log_le(r.gradient_sup.ln(), ln_slack + n * (w - e.ln()))
            })
        });
        let point_n = x.moderate_n();
        Ok(NudgeReport {
            m,
            bound_holds,
            nudged_point_positive_distance: positive,
            rows,
            certified_order,
            gradient_n,
            point_n,
            proof_exponent: gradient_n.map(|n| m as i64 - n as i64 * (2 + point_n as i64)),
        })
    }
}

/// Signs `delta_i` moving each coordinate away from its nearest finite endpoint (ties to
/// `+1`, the other sign as fallback) so that the moved coordinate keeps distance `>= step`
/// from both ends. `None` if some coordinate admits no such sign.
fn nudge_signs<T: Scalar>(domain: &OpenBox<T>, x: &[Coord<T>], step: T) -> Option<Vec<T>> {
    let step_l = SignedLog::from_value(step);
    x.iter()
        .zip(domain.intervals())
        .map(|(c, iv)| {
            let to_lo = if iv.lo.is_finite() {
                Some(c.minus(iv.lo))
            } else {
                None
            };
            let to_hi = if iv.hi.is_finite() {
                Some(-c.minus(iv.hi))
            } else {
                None
            };
            let preferred = match (to_lo, to_hi) {
                (Some(a), Some(b)) if a < b => T::one(),
                (Some(a), Some(b)) if b < a => -T::one(),
                (Some(_), None) => T::one(),
                (None, Some(_)) => -T::one(),
                _ => T::one(),
            };
            [preferred, -preferred].into_iter().find(|&s| {
                let shift = if s > T::zero() { step_l } else { -step_l };
                let ok_lo = to_lo.is_none_or(|a| at_least(a + shift, step_l));
                let ok_hi = to_hi.is_none_or(|b| at_least(b - shift, step_l));
                ok_lo && ok_hi
            })
        })
        .collect()
}

/// `a >= b > 0` up to log rounding.
fn at_least<T: Scalar>(a: SignedLog<T>, b: SignedLog<T>) -> bool {
    a.is_positive() && log_le(b.ln_abs(), a.ln_abs())
}

/// `1/u` through the logarithm, so that [`log_product`] with `u` is exactly one.
fn log_recip<T: Scalar>(u: SignedLog<T>) -> SignedLog<T> {
    SignedLog::from_ln(u.sign(), -u.ln_abs())
}

fn log_product<T: Scalar>(a: SignedLog<T>, b: SignedLog<T>) -> SignedLog<T> {
    SignedLog::from_ln(a.sign().times(b.sign()), a.ln_abs() + b.ln_abs())
}

/// Max over samples of `ln|u| - ln_bound`, raw and divided by `|ln eps|`, with its location.
fn worst_margin<T: Scalar>(
    samples: &[Sample<T>],
    ln_bound: impl Fn(&Sample<T>) -> T,
) -> (Option<(T, T)>, Option<Witness>) {
    let mut best: Option<(T, T, &Sample<T>)> = None;
    for s in samples {
        if s.value.sign() == Sign::Zero {
            continue;
        }
        let raw = s.value.ln_abs() - ln_bound(s);
        let scaled = raw / s.ln_eps.abs();
        if best.is_none_or(|b| scaled > b.1) {
            best = Some((raw, scaled, s));
        }
    }
    match best {
        Some((raw, scaled, s)) => (Some((raw, scaled)), Some(Witness::new(s.eps, &s.x))),
        None => (None, None),
    }
}
