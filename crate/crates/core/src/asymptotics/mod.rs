//! Epsilon grids, log-space power arithmetic and asymptotic-order estimation.

mod grid;
mod net;
mod order;
mod signed_log;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use grid::{EpsGrid, DEFAULT_TAIL_FRACTION, MAX_RATIO, MIN_GRID_LEN};
pub use net::ScalarNet;
pub use order::{
    estimate_order, is_O_eps_power, is_negligible, moderate_exponent, negligibility, Negligibility,
    OrderEstimate,
};
pub use signed_log::{log_gt, log_le, Sign, SignedLog};

use crate::error::{Error, Result};
use crate::Scalar;

/// `eps^t = exp(t · ln eps)`. Underflows to `0` and overflows to `+inf`.
pub fn eps_pow<T: Scalar>(eps: T, t: T) -> Result<T> {
    check_open_unit(eps)?;
    Ok((t * eps.ln()).exp())
}

/// `log_eps(x) = ln x / ln eps`.
pub fn log_eps<T: Scalar>(x: T, eps: T) -> Result<T> {
    check_open_unit(eps)?;
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("log_eps needs x > 0, got {x}")));
    }
    Ok(x.ln() / eps.ln())
}

fn check_open_unit<T: Scalar>(eps: T) -> Result<()> {
    if eps > T::zero() && eps < T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("eps must lie in (0,1), got {eps}")))
    }
}

/// Finite stand-ins for the quantifiers of moderateness, negligibility and strict
/// non-vanishing. Every report echoes them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Negligibility is certified for every integer `p <= p_max`.
    pub p_max: u32,
    /// Moderateness searches `N = 0..=n_max`.
    pub n_max: u32,
    /// Strict non-vanishing searches `m = 0..=m_max`.
    pub m_max: u32,
    /// Constant in structural bounds such as `|x| <= slack · eps^p`.
    pub slack: f64,
    /// Constant in bounds that come with an explicit numerical factor (derivative estimates).
    pub estimate_slack: f64,
    /// Random negligible perturbations tried in addition to the given representative.
    pub perturbations: usize,
    pub seed: u64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            p_max: 8,
            n_max: 16,
            m_max: 24,
            slack: 1.0,
            estimate_slack: 16.0,
            perturbations: 32,
            seed: 0x7a75_6e65_7473,
        }
    }
}

/// Random net that is negligible: `c · eps^-q · exp(-a/eps)` (optionally oscillating).
/// Such nets can be large for coarse `eps` but vanish faster than any power.
pub fn random_negligible<T: Scalar>(rng: &mut impl Rng) -> ScalarNet<T> {
    let c = T::lit(rng.gen_range(0.1..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
    let a = T::lit(rng.gen_range(0.05..2.0));
    let q = T::lit(rng.gen_range(0.0..4.0));
    let oscillating = rng.gen_bool(0.3);
    let c_log = SignedLog::from_value(c);
    ScalarNet::from_log(
        format!(
            "{c}*eps^-{q}*exp(-{a}/eps){}",
            if oscillating { "*cos(1/eps)" } else { "" }
        ),
        move |e: T| {
            let base = c_log * SignedLog::exp_of(-q * e.ln() - a / e);
            if oscillating {
                base * SignedLog::from_value((T::one() / e).cos())
            } else {
                base
            }
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn eps_pow_examples() {
        assert!((eps_pow(0.1f64, 2.0).unwrap() - 0.01).abs() < 1e-17);
        assert_eq!(eps_pow(0.37f64, 0.0).unwrap(), 1.0);
        let by_mult = (0..9).fold(1.0f64, |acc, _| acc * 0.1);
        let v = eps_pow(0.1f64, 9.0).unwrap();
        assert!((v - 1e-9).abs() < 1e-22 && (v - by_mult).abs() < 1e-22);
        assert_eq!(eps_pow(2f64.powi(-40), 49.0).unwrap(), 0.0);
        assert_eq!(eps_pow(2f64.powi(-40), -49.0).unwrap(), f64::INFINITY);
        assert!(eps_pow(1.0f64, 2.0).is_err());
        assert!(eps_pow(0.0f64, 2.0).is_err());
    }

    #[test]
    fn log_eps_examples() {
        assert!((log_eps(10.0f64, 0.1).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(log_eps(1.0f64, 0.3).unwrap(), 0.0);
        assert!((log_eps(0.01f64, 0.1).unwrap() - 2.0).abs() < 1e-15);
        assert!(log_eps(0.0f64, 0.1).is_err());
        assert!(log_eps(-1.0f64, 0.1).is_err());
    }

    #[test]
    fn random_negligible_nets_are_negligible() {
        let g = EpsGrid::<f64>::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = random_negligible::<f64>(&mut rng);
            assert!(is_negligible(&n, &g, 8, 1.0).unwrap(), "{}", n.label());
        }
    }

    #[test]
    fn single_precision_substrate() {
        let g = EpsGrid::<f32>::dyadic(2, 20).unwrap();
        let est = estimate_order(&ScalarNet::<f32>::power(2.0, 3.0), &g).unwrap();
        assert!((est.slope - 3.0).abs() < 1e-4);
        assert!(is_O_eps_power(&ScalarNet::<f32>::power(1.0, 3.0), 2.0, &g, 1.0).unwrap());
    }

    proptest! {
        #[test]
        fn slope_recovers_power_law(c in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3], p in -20.0f64..20.0,
                                    k0 in 1u32..10, len in 8u32..40) {
            let g = EpsGrid::<f64>::dyadic(k0, k0 + len).unwrap();
            let est = estimate_order(&ScalarNet::power(c, p), &g).unwrap();
            prop_assert!((est.slope - p).abs() < 1e-9, "slope {} vs {}", est.slope, p);
            prop_assert!(est.residual < 1e-9);
        }

        #[test]
        fn big_o_is_monotone_in_p(c in 0.01f64..100.0, q in -5.0f64..10.0, p in -5.0f64..10.0, dp in 0.0f64..5.0) {
            let g = EpsGrid::<f64>::default();
            let net = ScalarNet::power(c, q);
            if is_O_eps_power(&net, p, &g, 1.0).unwrap() {
                prop_assert!(is_O_eps_power(&net, p - dp, &g, 1.0).unwrap());
            }
        }

        #[test]
        fn eps_pow_adds_exponents(eps in 1e-6f64..0.999, s in -30.0f64..30.0, t in -30.0f64..30.0) {
            let lhs = eps_pow(eps, s + t).unwrap();
            let rhs = eps_pow(eps, s).unwrap() * eps_pow(eps, t).unwrap();
            prop_assume!(lhs.is_normal() && rhs.is_normal());
            prop_assert!(((lhs - rhs) / lhs).abs() < 1e-12);
        }
    }
}
