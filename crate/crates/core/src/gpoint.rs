//! Moderate generalized points of open boxes.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::{log_le, ScalarNet, SignedLog};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::gnumber::GeneralizedNumber;
use crate::Scalar;

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || !(lo < hi) {
            return Err(Error::Domain(format!("interval ({lo}, {hi}) is empty")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn real_line() -> Self {
        Interval {
            lo: T::neg_infinity(),
            hi: T::infinity(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn finite_endpoints(&self) -> impl Iterator<Item = T> {
        [self.lo, self.hi].into_iter().filter(|e| e.is_finite())
    }

    pub fn contains(&self, x: T) -> bool {
        x > self.lo && x < self.hi
    }
}

/// Product of open intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct OpenBox<T> {
    intervals: Vec<Interval<T>>,
}

impl<T: Scalar> OpenBox<T> {
    pub fn new(intervals: Vec<Interval<T>>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Domain("box needs dimension >= 1".into()));
        }
        for iv in &intervals {
            Interval::new(iv.lo, iv.hi)?;
        }
        Ok(OpenBox { intervals })
    }

    pub fn whole_space(dim: usize) -> Self {
        OpenBox {
            intervals: vec![Interval::real_line(); dim.max(1)],
        }
    }

    pub fn unit_cube(dim: usize) -> Self {
        OpenBox {
            intervals: vec![
                Interval {
                    lo: T::zero(),
                    hi: T::one()
                };
                dim.max(1)
            ],
        }
    }

    /// `(0, inf) x R^(dim-1)`.
    pub fn half_space(dim: usize) -> Self {
        let mut intervals = vec![Interval::real_line(); dim.max(1)];
        intervals[0].lo = T::zero();
        OpenBox { intervals }
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[Interval<T>] {
        &self.intervals
    }

    pub fn is_whole_space(&self) -> bool {
        self.intervals
            .iter()
            .all(|iv| !iv.lo.is_finite() && !iv.hi.is_finite())
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals.iter().all(Interval::is_bounded)
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim() && self.intervals.iter().zip(x).all(|(iv, &v)| iv.contains(v))
    }

    /// A fixed interior reference point: midpoints of bounded intervals, `0` on the real
    /// line, one unit inside half-lines.
    pub fn center(&self) -> Vec<T> {
        self.intervals
            .iter()
            .map(|iv| match (iv.lo.is_finite(), iv.hi.is_finite()) {
                (true, true) => (iv.lo + iv.hi) / T::lit(2.0),
                (true, false) => {
                    iv.lo.max(T::zero())
                        + if iv.lo >= T::zero() {
                            T::one()
                        } else {
                            T::zero()
                        }
                }
                (false, true) => {
                    iv.hi.min(T::zero())
                        - if iv.hi <= T::zero() {
                            T::one()
                        } else {
                            T::zero()
                        }
                }
                (false, false) => T::zero(),
            })
            .collect()
    }

    /// Pulls `x` inside: coordinates beyond an end are put at distance `margin` from it (or
    /// at the midpoint if the interval is narrower than `2 margin`).
    pub fn clamp_inside(&self, x: &mut [T], margin: T) {
        for (v, iv) in x.iter_mut().zip(&self.intervals) {
            let lo = iv.lo + margin;
            let hi = iv.hi - margin;
            if iv.is_bounded() && !(lo < hi) {
                *v = (iv.lo + iv.hi) / T::lit(2.0);
            } else if *v < lo {
                *v = lo;
            } else if *v > hi {
                *v = hi;
            }
        }
    }
}

impl<T: Scalar> fmt::Display for OpenBox<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .intervals
            .iter()
            .map(|iv| format!("({}, {})", iv.lo, iv.hi))
            .collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// One coordinate `anchor + offset`; the offset is kept in signed-log form so that points
/// hugging an endpoint at distance `exp(-1/eps)` keep that distance exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coord<T> {
    pub anchor: T,
    pub offset: SignedLog<T>,
}

impl<T: Scalar> Coord<T> {
    pub fn plain(v: T) -> Self {
        Coord {
            anchor: v,
            offset: SignedLog::zero(),
        }
    }

    pub fn anchored(anchor: T, offset: SignedLog<T>) -> Self {
        Coord { anchor, offset }
    }

    pub fn value(&self) -> T {
        (SignedLog::from_value(self.anchor) + self.offset).to_value()
    }

    /// `self - c` without losing the offset to rounding when `anchor == c`.
    pub fn minus(&self, c: T) -> SignedLog<T> {
        SignedLog::from_value(self.anchor - c) + self.offset
    }

    pub fn diff(&self, other: &Coord<T>) -> SignedLog<T> {
        SignedLog::from_value(self.anchor - other.anchor) + (self.offset - other.offset)
    }
}

type PointFn<T> = dyn Fn(T) -> Vec<Coord<T>> + Send + Sync;

/// A net `eps -> Omega` with moderate growth, certified on the grid.
#[derive(Clone)]
pub struct GeneralizedPoint<T> {
    rep: Arc<PointFn<T>>,
    domain: OpenBox<T>,
    label: Arc<str>,
    moderate_n: u32,
}

impl<T: Scalar> GeneralizedPoint<T> {
    pub fn coords(&self, eps: T) -> Vec<Coord<T>> {
        (self.rep)(eps)
    }

    pub fn values(&self, eps: T) -> Vec<T> {
        self.coords(eps).iter().map(Coord::value).collect()
    }

    pub fn domain(&self) -> &OpenBox<T> {
        &self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `N` with `|x_eps| <= slack · eps^-N` on the tail.
    pub fn moderate_n(&self) -> u32 {
        self.moderate_n
    }
}

impl<T> fmt::Debug for GeneralizedPoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralizedPoint")
            .field("label", &self.label)
            .field("moderate_n", &self.moderate_n)
            .finish()
    }
}

impl<T: Scalar> Context<T> {
    /// Certifies containment (at every grid `eps`) and moderateness of a point net.
    pub fn point(
        &self,
        domain: &OpenBox<T>,
        label: impl Into<String>,
        rep: impl Fn(T) -> Vec<Coord<T>> + Send + Sync + 'static,
    ) -> Result<GeneralizedPoint<T>> {
        let label: Arc<str> = label.into().into();
        let mut norms = Vec::with_capacity(self.grid.len());
        for &e in self.grid.values() {
            let x = rep(e);
            if x.len() != domain.dim() {
                return Err(Error::Construction {
                    eps: e.as_f64(),
                    msg: format!(
                        "point `{label}` has {} coordinates, box has {}",
                        x.len(),
                        domain.dim()
                    ),
                });
            }
            for (i, (c, iv)) in x.iter().zip(domain.intervals()).enumerate() {
                let above = !iv.lo.is_finite() || c.minus(iv.lo).is_positive();
                let below = !iv.hi.is_finite() || (-c.minus(iv.hi)).is_positive();
                if !(above && below) || c.value().is_nan() {
                    return Err(Error::Construction {
                        eps: e.as_f64(),
                        msg: format!(
                            "coordinate {} of `{label}` = {} leaves {domain}",
                            i + 1,
                            c.value()
                        ),
                    });
                }
            }
            let norm = x
                .iter()
                .map(|c| c.value() * c.value())
                .fold(T::zero(), |s, v| s + v)
                .sqrt();
            norms.push((e, norm));
        }
        let ln_slack = self.slack().ln();
        let tail_start = self.grid.len() - self.grid.tail().len();
        let moderate_n = (0..=self.thresholds.n_max)
            .find(|&n| {
                let n = T::from_u32(n).expect("small integer");
                norms[tail_start..]
                    .iter()
                    .all(|&(e, r)| r.is_finite() && log_le(r.ln(), ln_slack - n * e.ln()))
            })
            .ok_or_else(|| Error::NotModerate {
                what: format!("point `{label}`"),
                n_max: self.thresholds.n_max,
            })?;
        Ok(GeneralizedPoint {
            rep: Arc::new(rep),
            domain: domain.clone(),
            label,
            moderate_n,
        })
    }

    /// Point from plain coordinate values.
    pub fn plain_point(
        &self,
        domain: &OpenBox<T>,
        label: impl Into<String>,
        rep: impl Fn(T) -> Vec<T> + Send + Sync + 'static,
    ) -> Result<GeneralizedPoint<T>> {
        self.point(domain, label, move |e| {
            rep(e).into_iter().map(Coord::plain).collect()
        })
    }

    /// `x ~ y`: every coordinate difference is negligible.
    pub fn equivalent(&self, x: &GeneralizedPoint<T>, y: &GeneralizedPoint<T>) -> Result<bool> {
        if x.domain != y.domain {
            return Err(Error::Domain("points live in different boxes".into()));
        }
        for i in 0..x.domain.dim() {
            let (xr, yr) = (x.rep.clone(), y.rep.clone());
            let diff =
                ScalarNet::from_log(format!("{}_{i} - {}_{i}", x.label, y.label), move |e| {
                    xr(e)[i].diff(&yr(e)[i])
                });
            if !self.is_zero_net(&diff)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Distance to the boundary as the inf over all finite endpoints of
    /// `|x^(j) - a_j|`, `|x^(j) - b_j|`.
    pub fn distance_to_boundary(&self, x: &GeneralizedPoint<T>) -> Result<GeneralizedNumber<T>> {
        let mut terms = Vec::new();
        for (j, iv) in x.domain.intervals().iter().enumerate() {
            for end in iv.finite_endpoints() {
                let rep = x.rep.clone();
                let net = ScalarNet::from_log(format!("|x{} - {end}|", j + 1), move |e| {
                    rep(e)[j].minus(end).abs()
                });
                terms.push(self.number(net)?);
            }
        }
        if terms.is_empty() {
            return Err(Error::Domain(
                "distance to the boundary of R^d is undefined".into(),
            ));
        }
        self.inf_min(&terms)
    }

    pub fn has_positive_boundary_distance(&self, x: &GeneralizedPoint<T>) -> Result<bool> {
        let d = self.distance_to_boundary(x)?;
        Ok(self.is_strictly_positive(&d)?.holds)
    }

    /// Deterministic family of moderate points of `domain`: constants, power-law escapes
    /// `c · eps^-m` (clamped with margin `eps` in bounded directions), endpoint huggers
    /// `a + eps^m` and `a + exp(-1/eps)` and the witnesses `eps^-j · e_1`.
    ///
    /// Escape and witness exponents stay below [`ESCAPE_EXPONENT_MAX`].
    pub fn sample_moderate_points(
        &self,
        domain: &OpenBox<T>,
        count: usize,
        seed: u64,
    ) -> Result<Vec<GeneralizedPoint<T>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let has_end = domain
            .intervals()
            .iter()
            .any(|iv| iv.finite_endpoints().next().is_some());
        let mut kinds = vec![PointKind::Constant, PointKind::Escape, PointKind::Witness];
        if has_end {
            kinds.extend([PointKind::PowerHugger, PointKind::ExpHugger]);
        }
        (0..count)
            .map(|i| {
                let kind = kinds[i % kinds.len()];
                self.sample_point(domain, kind, &mut rng)
            })
            .collect()
    }

    fn sample_point(
        &self,
        domain: &OpenBox<T>,
        kind: PointKind,
        rng: &mut ChaCha8Rng,
    ) -> Result<GeneralizedPoint<T>> {
        let dim = domain.dim();
        let base: Vec<T> = domain
            .intervals()
            .iter()
            .map(|iv| {
                let u = T::lit(rng.gen_range(0.05..0.95));
                match (iv.lo.is_finite(), iv.hi.is_finite()) {
                    (true, true) => iv.lo + (iv.hi - iv.lo) * u,
                    (true, false) => iv.lo + T::lit(0.1) + u * T::lit(5.0),
                    (false, true) => iv.hi - T::lit(0.1) - u * T::lit(5.0),
                    (false, false) => (u - T::lit(0.5)) * T::lit(10.0),
                }
            })
            .collect();
        let b = domain.clone();
        match kind {
            PointKind::Constant => {
                let label = format!(
                    "const{:?}",
                    base.iter().map(|v| v.as_f64()).collect::<Vec<_>>()
                );
                self.plain_point(domain, label, move |_| base.clone())
            }
            PointKind::Escape => {
                let m = T::from_u32(rng.gen_range(1..=ESCAPE_EXPONENT_MAX)).expect("small");
                let c = T::lit(rng.gen_range(0.5..2.0));
                let mut dir: Vec<T> = (0..dim).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
                let norm = dir
                    .iter()
                    .fold(T::zero(), |s, &v| s + v * v)
                    .sqrt()
                    .max(T::lit(1e-3));
                dir.iter_mut().for_each(|v| *v = *v / norm);
                let label = format!("{c}*eps^-{m} escape");
                self.plain_point(domain, label, move |e| {
                    let r = c * (-m * e.ln()).exp();
                    let mut x: Vec<T> = base.iter().zip(&dir).map(|(&b0, &d)| b0 + d * r).collect();
                    b.clamp_inside(&mut x, e);
                    x
                })
            }
            PointKind::Witness => {
                let j = T::from_u32(rng.gen_range(0..=ESCAPE_EXPONENT_MAX)).expect("small");
                let mut start = vec![T::zero(); dim];
                start[0] = T::one();
                let label = format!("eps^-{j} e_1");
                self.plain_point(domain, label, move |e| {
                    let mut x = start.clone();
                    x[0] = (-j * e.ln()).exp();
                    b.clamp_inside(&mut x, e);
                    x
                })
            }
            PointKind::PowerHugger | PointKind::ExpHugger => {
                let candidates: Vec<(usize, T, T)> = domain
                    .intervals()
                    .iter()
                    .enumerate()
                    .flat_map(|(i, iv)| {
                        let width = iv.hi - iv.lo;
                        [(i, iv.lo, T::one()), (i, iv.hi, -T::one())]
                            .into_iter()
                            .filter(|(_, end, _)| end.is_finite())
                            .map(move |(i, end, s)| (i, end, s * width))
                    })
                    .collect();
                let (i, end, signed_width) = candidates[rng.gen_range(0..candidates.len())];
                let m = T::from_u32(rng.gen_range(1..=6)).expect("small");
                let exp_kind = kind == PointKind::ExpHugger;
                let label = if exp_kind {
                    format!("x{} = {end} + exp(-1/eps)", i + 1)
                } else {
                    format!("x{} = {end} + eps^{m}", i + 1)
                };
                let half_width = SignedLog::from_value(signed_width.abs() / T::lit(2.0));
                let toward = if signed_width > T::zero() {
                    SignedLog::one()
                } else {
                    -SignedLog::one()
                };
                self.point(domain, label, move |e| {
                    let gap = if exp_kind {
                        SignedLog::exp_of(-T::one() / e)
                    } else {
                        SignedLog::exp_of(m * e.ln())
                    };
                    let mut x: Vec<Coord<T>> = base.iter().map(|&v| Coord::plain(v)).collect();
                    x[i] = Coord::anchored(end, toward * gap.min(half_width));
                    x
                })
            }
        }
    }
}

/// Largest `m` used for generated `eps^-m` escapes. At the default `m_max = 24`, values
/// of the counterexample at such points (about `eps^(m^2)`) stay certifiable.
pub const ESCAPE_EXPONENT_MAX: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PointKind {
    Constant,
    Escape,
    Witness,
    PowerHugger,
    ExpHugger,
}
