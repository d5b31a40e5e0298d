//! Generalized numbers: moderate scalar nets modulo negligible nets.
//!
//! Every predicate here is evaluated on the grid tail and, because the defining
//! quantifiers range over all representatives, re-checked on the given representative
//! plus `thresholds.perturbations` random negligible perturbations of it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::asymptotics::{
    estimate_order, log_gt, log_le, negligibility, random_negligible, OrderEstimate, ScalarNet,
    Sign, SignedLog,
};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::Scalar;

/// Element of the ring of generalized numbers, held through one representative.
#[derive(Clone, Debug)]
pub struct GeneralizedNumber<T> {
    rep: ScalarNet<T>,
    moderate_n: u32,
    estimate: OrderEstimate<T>,
}

/// Outcome of a strict lower-bound scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StrictVerdict {
    pub holds: bool,
    /// Smallest integer exponent that wins for every representative tried.
    pub m: Option<u32>,
}

impl StrictVerdict {
    fn from_m(m: Option<u32>) -> Self {
        StrictVerdict {
            holds: m.is_some(),
            m,
        }
    }
}

impl<T: Scalar> GeneralizedNumber<T> {
    pub fn rep(&self) -> &ScalarNet<T> {
        &self.rep
    }

    /// Exponent `N` of the moderateness certificate `|rep| <= slack · eps^-N`.
    pub fn moderate_n(&self) -> u32 {
        self.moderate_n
    }

    pub fn estimate(&self) -> &OrderEstimate<T> {
        &self.estimate
    }

    pub fn eval(&self, eps: T) -> T {
        self.rep.eval(eps)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Bound {
    /// `|x| > eps^m`
    AbsStrict,
    /// `x > eps^m`
    SignedStrict,
    /// `x >= eps^m`
    SignedWeak,
}

impl<T: Scalar> Context<T> {
    /// Certifies moderateness of `net` and wraps it.
    pub fn number(&self, net: ScalarNet<T>) -> Result<GeneralizedNumber<T>> {
        let n = crate::asymptotics::moderate_exponent(
            &net,
            &self.grid,
            self.thresholds.n_max,
            self.slack(),
        )?
        .ok_or_else(|| Error::NotModerate {
            what: format!("`{}`", net.label()),
            n_max: self.thresholds.n_max,
        })?;
        let estimate = estimate_order(&net, &self.grid)?;
        Ok(GeneralizedNumber {
            rep: net,
            moderate_n: n,
            estimate,
        })
    }

    pub fn constant(&self, c: T) -> Result<GeneralizedNumber<T>> {
        self.number(ScalarNet::constant(c))
    }

    pub fn add(
        &self,
        a: &GeneralizedNumber<T>,
        b: &GeneralizedNumber<T>,
    ) -> Result<GeneralizedNumber<T>> {
        self.number(a.rep.add(&b.rep))
    }

    pub fn sub(
        &self,
        a: &GeneralizedNumber<T>,
        b: &GeneralizedNumber<T>,
    ) -> Result<GeneralizedNumber<T>> {
        self.number(a.rep.sub(&b.rep))
    }

    pub fn mul(
        &self,
        a: &GeneralizedNumber<T>,
        b: &GeneralizedNumber<T>,
    ) -> Result<GeneralizedNumber<T>> {
        self.number(a.rep.mul(&b.rep))
    }

    pub fn neg(&self, a: &GeneralizedNumber<T>) -> Result<GeneralizedNumber<T>> {
        self.number(a.rep.neg())
    }

    /// Equality in the quotient: `a - b` passes the negligibility test up to `p_max`.
    pub fn eq_in_rtilde(&self, a: &GeneralizedNumber<T>, b: &GeneralizedNumber<T>) -> Result<bool> {
        self.is_zero_net(&a.rep.sub(&b.rep))
    }

    pub(crate) fn is_zero_net(&self, net: &ScalarNet<T>) -> Result<bool> {
        Ok(negligibility(net, &self.grid, self.thresholds.p_max, self.slack())?.negligible)
    }

    /// `|x_eps| > eps^m` on the tail; reports the smallest such integer `m <= m_max`.
    pub fn is_strictly_nonzero(&self, a: &GeneralizedNumber<T>) -> Result<StrictVerdict> {
        self.lower_bound_all_reps(&a.rep, Bound::AbsStrict)
    }

    /// `x_eps > eps^m` on the tail.
    pub fn is_strictly_positive(&self, a: &GeneralizedNumber<T>) -> Result<StrictVerdict> {
        self.lower_bound_all_reps(&a.rep, Bound::SignedStrict)
    }

    /// `a` strictly smaller than `b`: `b_eps - a_eps >= eps^m` on the tail for some `m`.
    pub fn strict_less(&self, a: &GeneralizedNumber<T>, b: &GeneralizedNumber<T>) -> Result<bool> {
        Ok(self
            .lower_bound_all_reps(&b.rep.sub(&a.rep), Bound::SignedWeak)?
            .holds)
    }

    /// `inf(a_1, ..., a_k)` through the pointwise minimum of representatives.
    pub fn inf_min(&self, items: &[GeneralizedNumber<T>]) -> Result<GeneralizedNumber<T>> {
        let reps: Vec<_> = items.iter().map(|a| a.rep.clone()).collect();
        let net = ScalarNet::pointwise_min(&reps)
            .ok_or_else(|| Error::Domain("inf of an empty list".into()))?;
        self.number(net)
    }

    /// The configured random negligible perturbations, reproducible from the seed.
    pub fn perturbations(&self) -> Vec<ScalarNet<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.thresholds.seed);
        (0..self.thresholds.perturbations)
            .map(|_| random_negligible(&mut rng))
            .collect()
    }

    fn lower_bound_all_reps(&self, net: &ScalarNet<T>, bound: Bound) -> Result<StrictVerdict> {
        let mut worst = match self.lower_exponent(net, bound)? {
            Some(m) => m,
            None => return Ok(StrictVerdict::from_m(None)),
        };
        for n in self.perturbations() {
            match self.lower_exponent(&net.add(&n), bound)? {
                Some(m) => worst = worst.max(m),
                None => return Ok(StrictVerdict::from_m(None)),
            }
        }
        Ok(StrictVerdict::from_m(Some(worst)))
    }

    fn lower_exponent(&self, net: &ScalarNet<T>, bound: Bound) -> Result<Option<u32>> {
        let tail = self.grid.tail();
        let mut samples: Vec<(T, SignedLog<T>)> = Vec::with_capacity(tail.len());
        for &e in tail {
            let v = net.eval_log(e);
            if v.is_nan() {
                return Err(Error::eval_at(
                    e.as_f64(),
                    None,
                    format!("`{}` is NaN", net.label()),
                ));
            }
            samples.push((e.ln(), v));
        }
        Ok((0..=self.thresholds.m_max).find(|&m| {
            let m = T::from_u32(m).expect("small integer");
            samples.iter().all(|&(le, v)| {
                let rhs = m * le;
                match bound {
                    Bound::AbsStrict => !v.is_zero() && log_gt(v.ln_abs(), rhs),
                    Bound::SignedStrict => v.sign() == Sign::Pos && log_gt(v.ln_abs(), rhs),
                    Bound::SignedWeak => v.sign() == Sign::Pos && log_le(rhs, v.ln_abs()),
                }
            })
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Context<f64> {
        Context::default()
    }

    fn num(
        c: &Context<f64>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> GeneralizedNumber<f64> {
        c.number(ScalarNet::new("test", f)).unwrap()
    }

    #[test]
    fn ring_operations() {
        let c = ctx();
        let s = c.add(&num(&c, |e| e), &num(&c, |e| -e)).unwrap();
        assert!(s.estimate().exact_zero);
        let p = c
            .mul(
                &c.number(ScalarNet::power(1.0, -1.0)).unwrap(),
                &num(&c, |e| e * e),
            )
            .unwrap();
        assert!((p.estimate().slope - 1.0).abs() < 1e-9);
        let one = c.constant(1.0).unwrap();
        assert!(c.eq_in_rtilde(&c.mul(&one, &one).unwrap(), &one).unwrap());
    }

    #[test]
    fn moderation_failure() {
        let c = ctx();
        let wild = ScalarNet::from_log("exp(1/e)", |e: f64| SignedLog::exp_of(1.0 / e));
        assert!(matches!(
            c.number(wild),
            Err(Error::NotModerate { n_max: 16, .. })
        ));
        let big = c.number(ScalarNet::power(1.0, -10.0)).unwrap();
        assert!(matches!(c.mul(&big, &big), Err(Error::NotModerate { .. })));
    }

    #[test]
    fn equality_examples() {
        let c = ctx();
        let a = num(&c, |e| e);
        assert!(c
            .eq_in_rtilde(&a, &num(&c, |e| e + (-1.0 / e).exp()))
            .unwrap());
        assert!(!c.eq_in_rtilde(&a, &num(&c, |e| e * e)).unwrap());
        assert!(c.eq_in_rtilde(&a, &a).unwrap());
    }

    #[test]
    fn strictly_nonzero_examples() {
        let c = ctx();
        let v = c
            .is_strictly_nonzero(&c.number(ScalarNet::power(1.0, 5.0)).unwrap())
            .unwrap();
        assert_eq!(
            v,
            StrictVerdict {
                holds: true,
                m: Some(6)
            }
        );
        let v = c
            .is_strictly_nonzero(&c.number(ScalarNet::exp_decay(1.0, 1.0)).unwrap())
            .unwrap();
        assert_eq!(
            v,
            StrictVerdict {
                holds: false,
                m: None
            }
        );
        let v = c.is_strictly_nonzero(&c.constant(1.0).unwrap()).unwrap();
        assert_eq!(v.m, Some(1));
    }

    #[test]
    fn strictly_positive_examples() {
        let c = ctx();
        assert!(c.is_strictly_positive(&num(&c, |e| e)).unwrap().holds);
        assert!(!c.is_strictly_positive(&num(&c, |e| -e)).unwrap().holds);
        // 2 + sin(1/eps) > 1 at every tail point, so eps^1 already wins strictly.
        let osc = num(&c, |e| e * (1.0 / e).sin() + 2.0 * e);
        assert!(c.grid.tail().iter().all(|&e| 2.0 + (1.0 / e).sin() > 1.0));
        assert_eq!(c.is_strictly_positive(&osc).unwrap().m, Some(1));
        assert!(c.is_strictly_nonzero(&num(&c, |e| -e)).unwrap().holds);
    }

    #[test]
    fn inf_min_examples() {
        let c = ctx();
        let a = num(&c, |e| e);
        let b = num(&c, |e| e * e);
        let m = c.inf_min(&[a.clone(), b.clone()]).unwrap();
        for &e in c.grid.values() {
            assert_eq!(m.eval(e), e * e);
        }
        let single = c.inf_min(std::slice::from_ref(&a)).unwrap();
        assert!(c.eq_in_rtilde(&single, &a).unwrap());
        assert!(c.inf_min(&[]).is_err());
    }

    #[test]
    fn strict_less_examples() {
        let c = ctx();
        let zero = c.constant(0.0).unwrap();
        let e1 = num(&c, |e| e);
        let e2 = num(&c, |e| e * e);
        assert!(c.strict_less(&zero, &e1).unwrap());
        assert!(!c.strict_less(&e1, &e1).unwrap());
        assert!(c.strict_less(&e2, &e1).unwrap());
        assert!(!c.strict_less(&e1, &e2).unwrap());
    }
}
