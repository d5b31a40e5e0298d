use proptest::prelude::*;
use taunets::counterexample::{grad_g_eps, half_space_net, sigma, u_eps, u_eps_log};
use taunets::Context64;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn half_space_net_ignores_transverse_coordinates(k in 2i32..40, x1 in 0.001f64..1e6, y in -1e6f64..1e6, z in -1e6f64..1e6) {
        let u = half_space_net::<f64>(2);
        let e = 2f64.powi(-k);
        prop_assert_eq!(u.eval_log(e, &[x1, y]), u.eval_log(e, &[x1, z]));
    }

    #[test]
    fn inner_ball_is_exactly_one(k in 1i32..40, r in 0.0f64..=0.5, t in 0.0f64..6.3) {
        let e = 2f64.powi(-k);
        prop_assert_eq!(u_eps(e, &[r * t.cos(), r * t.sin()]), 1.0);
    }

    #[test]
    fn u_is_positive_and_below_one(k in 2i32..40, s in -1.0f64..6.5) {
        let e = 2f64.powi(-k);
        let r = (s * -e.ln()).exp();
        let v = u_eps_log(e, &[r]);
        prop_assert!(v.is_positive() && v.ln_abs() <= 1e-15);
    }

    #[test]
    fn sigma_is_monotone(a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(sigma(lo).unwrap() >= sigma(hi).unwrap());
    }

    #[test]
    fn gradient_vanishes_on_unit_sphere(t in 0.0f64..6.3, k in 2i32..40) {
        let g = grad_g_eps(2f64.powi(-k), &[t.cos(), t.sin()]).unwrap();
        prop_assert!(g.iter().all(|v| v.abs() < 1e-12));
    }
}

#[test]
fn full_shell_sweep_and_identities() {
    let ctx = Context64::default();
    for r in [
        ctx.verify_shell_estimates(3, 6, 16),
        ctx.verify_point_identity(3, 6),
        ctx.verify_inner_ball(3, 1000, 1),
        ctx.verify_band(3, 1000, 6),
        ctx.verify_noninvertibility(3, &[0, 1, 2, 3, 4, 5]),
    ] {
        assert!(r.overall, "{r:#?}");
    }
}
