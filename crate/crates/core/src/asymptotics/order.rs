use serde::Serialize;

use super::grid::EpsGrid;
use super::net::ScalarNet;
use super::signed_log::log_le;
use crate::error::{Error, Result};
use crate::Scalar;

/// Empirical exponent `p` with `|net(eps)| ≍ eps^p` on a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrderEstimate<T> {
    /// Least-squares slope of `ln|net|` against `ln eps`; `+inf` when the net is exactly zero.
    pub slope: T,
    /// RMS deviation of the fit.
    pub residual: T,
    /// Smallest `ln|net(eps)|` seen; `-inf` if some value was exactly zero.
    pub min_log_value: T,
    pub exact_zero: bool,
    pub points_used: usize,
}

/// Pairs `(ln eps, ln|net(eps)|)`; errors on NaN or infinite values.
pub(crate) fn log_samples<T: Scalar>(net: &ScalarNet<T>, eps: &[T]) -> Result<Vec<(T, T)>> {
    eps.iter()
        .map(|&e| {
            let v = net.eval_log(e);
            if !v.is_finite() {
                return Err(Error::eval_at(
                    e.as_f64(),
                    None,
                    format!("net `{}` is not finite", net.label()),
                ));
            }
            Ok((e.ln(), v.ln_abs()))
        })
        .collect()
}

/// Fits `y = a + slope * x` over the pairs with finite `y`, in a fixed sequential order.
pub(crate) fn fit_order<T: Scalar>(samples: &[(T, T)]) -> OrderEstimate<T> {
    let min_log_value =
        samples
            .iter()
            .map(|&(_, y)| y)
            .fold(T::infinity(), |m, y| if y < m { y } else { m });
    let pts: Vec<(T, T)> = samples
        .iter()
        .copied()
        .filter(|(_, y)| y.is_finite())
        .collect();
    let n = pts.len();
    if n == 0 {
        return OrderEstimate {
            slope: T::infinity(),
            residual: T::zero(),
            min_log_value,
            exact_zero: true,
            points_used: 0,
        };
    }
    if n == 1 {
        let (x, y) = pts[0];
        let slope = if x == T::zero() { T::zero() } else { y / x };
        return OrderEstimate {
            slope,
            residual: T::zero(),
            min_log_value,
            exact_zero: false,
            points_used: 1,
        };
    }
    let nf = T::from_usize(n).expect("count fits in scalar");
    let mx = pts.iter().fold(T::zero(), |s, &(x, _)| s + x) / nf;
    let my = pts.iter().fold(T::zero(), |s, &(_, y)| s + y) / nf;
    let (sxx, sxy) = pts
        .iter()
        .fold((T::zero(), T::zero()), |(sxx, sxy), &(x, y)| {
            let dx = x - mx;
            (sxx + dx * dx, sxy + dx * (y - my))
        });
    let slope = if sxx > T::zero() {
        sxy / sxx
    } else {
        T::zero()
    };
    let sse = pts.iter().fold(T::zero(), |s, &(x, y)| {
        let r = y - (my + slope * (x - mx));
        s + r * r
    });
    OrderEstimate {
        slope,
        residual: (sse / nf).sqrt(),
        min_log_value,
        exact_zero: false,
        points_used: n,
    }
}

/// Empirical order of `net` over the whole grid.
pub fn estimate_order<T: Scalar>(
    net: &ScalarNet<T>,
    grid: &EpsGrid<T>,
) -> Result<OrderEstimate<T>> {
    Ok(fit_order(&log_samples(net, grid.values())?))
}

/// `|net(eps)| <= slack · eps^p` on the grid tail, compared as `ln|net| <= ln slack + p ln eps`.
#[allow(non_snake_case)]
pub fn is_O_eps_power<T: Scalar>(
    net: &ScalarNet<T>,
    p: T,
    grid: &EpsGrid<T>,
    slack: T,
) -> Result<bool> {
    if slack < T::zero() {
        return Err(Error::Domain(format!("slack must be >= 0, got {slack}")));
    }
    let ln_slack = slack.ln();
    Ok(log_samples(net, grid.tail())?
        .iter()
        .all(|&(le, lv)| log_le(lv, ln_slack + p * le)))
}

/// Outcome of the finite negligibility test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Negligibility<T> {
    pub negligible: bool,
    pub exact_zero: bool,
    /// First integer `p <= p_max` whose bound fails on the tail.
    pub failing_p: Option<u32>,
    /// Slope fitted on the grid tail.
    pub tail_slope: T,
}

/// "For every p": the bound `slack · eps^p` holds on the tail for each integer
/// `p = 0..=p_max`, and the slope fitted on the tail is at least `p_max`.
/// Nets vanishing identically on the tail short-circuit to negligible.
pub fn negligibility<T: Scalar>(
    net: &ScalarNet<T>,
    grid: &EpsGrid<T>,
    p_max: u32,
    slack: T,
) -> Result<Negligibility<T>> {
    let samples = log_samples(net, grid.tail())?;
    let est = fit_order(&samples);
    if est.exact_zero {
        return Ok(Negligibility {
            negligible: true,
            exact_zero: true,
            failing_p: None,
            tail_slope: est.slope,
        });
    }
    let ln_slack = slack.ln();
    let failing_p = (0..=p_max).find(|&p| {
        let p = T::from_u32(p).expect("small integer");
        !samples
            .iter()
            .all(|&(le, lv)| log_le(lv, ln_slack + p * le))
    });
    let p_max_t = T::from_u32(p_max).expect("small integer");
    let slope_ok = est.slope >= p_max_t - T::cmp_tol() * (T::one() + p_max_t);
    Ok(Negligibility {
        negligible: failing_p.is_none() && slope_ok,
        exact_zero: false,
        failing_p,
        tail_slope: est.slope,
    })
}

pub fn is_negligible<T: Scalar>(
    net: &ScalarNet<T>,
    grid: &EpsGrid<T>,
    p_max: u32,
    slack: T,
) -> Result<bool> {
    Ok(negligibility(net, grid, p_max, slack)?.negligible)
}

/// Smallest integer `N <= n_max` with `|net| <= slack · eps^-N` on the tail.
pub fn moderate_exponent<T: Scalar>(
    net: &ScalarNet<T>,
    grid: &EpsGrid<T>,
    n_max: u32,
    slack: T,
) -> Result<Option<u32>> {
    let samples = log_samples(net, grid.tail())?;
    let ln_slack = slack.ln();
    Ok((0..=n_max).find(|&n| {
        let n = T::from_u32(n).expect("small integer");
        samples
            .iter()
            .all(|&(le, lv)| log_le(lv, ln_slack - n * le))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let g = EpsGrid::<f64>::default();
        let e = estimate_order(&ScalarNet::new("e^3", |e: f64| e * e * e), &g).unwrap();
        assert!((e.slope - 3.0).abs() < 1e-9 && e.residual < 1e-9);
        let e = estimate_order(&ScalarNet::power(5.0, -2.0), &g).unwrap();
        assert!((e.slope + 2.0).abs() < 1e-9 && e.residual < 1e-9);
    }

    #[test]
    fn exp_decay_outruns_powers() {
        let g = EpsGrid::<f64>::default();
        let e = estimate_order(&ScalarNet::exp_decay(1.0, 1.0), &g).unwrap();
        assert!(e.slope > 20.0, "slope {}", e.slope);
        // Plain evaluation underflows to zero deep in the grid; still fast decay.
        let plain = ScalarNet::new("exp(-1/e)", |e: f64| (-1.0 / e).exp());
        let e = estimate_order(&plain, &g).unwrap();
        assert!(e.slope > 20.0 && e.min_log_value == f64::NEG_INFINITY);
    }

    #[test]
    fn exact_zero_and_errors() {
        let g = EpsGrid::<f64>::default();
        let z = estimate_order(&ScalarNet::zero(), &g).unwrap();
        assert!(z.exact_zero && z.slope == f64::INFINITY);
        let bad = ScalarNet::new("nan", |e: f64| if e < 1e-6 { f64::NAN } else { e });
        match estimate_order(&bad, &g) {
            Err(Error::Evaluation { eps, .. }) => assert!(eps < 1e-6),
            other => panic!("expected evaluation error, got {other:?}"),
        }
    }

    #[test]
    fn big_o_examples() {
        let g = EpsGrid::<f64>::default();
        let cube = ScalarNet::new("e^3", |e: f64| e.powi(3));
        assert!(is_O_eps_power(&cube, 2.0, &g, 1.0).unwrap());
        let lin = ScalarNet::new("e", |e: f64| e);
        assert!(!is_O_eps_power(&lin, 2.0, &g, 1.0).unwrap());
        assert!(is_O_eps_power(&ScalarNet::exp_decay(1.0, 1.0), 50.0, &g, 1.0).unwrap());
        assert!(is_O_eps_power(&lin, 1.0, &g, 1.0).unwrap());
        assert!(is_O_eps_power(&lin, 2.0, &g, -1.0).is_err());
    }

    #[test]
    fn negligibility_thresholds() {
        let g = EpsGrid::<f64>::default();
        assert!(is_negligible(&ScalarNet::exp_decay(3.0, 0.5), &g, 8, 1.0).unwrap());
        assert!(is_negligible(&ScalarNet::zero(), &g, 8, 1.0).unwrap());
        assert!(is_negligible(&ScalarNet::power(1.0, 9.0), &g, 8, 1.0).unwrap());
        let n = negligibility(&ScalarNet::power(1.0, 5.0), &g, 8, 1.0).unwrap();
        assert!(!n.negligible && n.failing_p == Some(6));
    }

    #[test]
    fn moderate_exponents() {
        let g = EpsGrid::<f64>::default();
        assert_eq!(
            moderate_exponent(&ScalarNet::power(1.0, -3.0), &g, 16, 1.0).unwrap(),
            Some(3)
        );
        assert_eq!(
            moderate_exponent(&ScalarNet::constant(5.0), &g, 16, 1.0).unwrap(),
            Some(1)
        );
        let wild = ScalarNet::from_log("exp(1/e)", |e: f64| {
            super::super::SignedLog::exp_of(1.0 / e)
        });
        assert_eq!(moderate_exponent(&wild, &g, 16, 1.0).unwrap(), None);
    }
}
