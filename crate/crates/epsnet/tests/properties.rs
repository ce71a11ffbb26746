use epsnet::{
    check_invertible, classify_net, estimate_order, Complex64, EpsGrid, EpsNet, InvertibilityVerdict,
};
use proptest::prelude::*;

fn power_net(grid: &EpsGrid, a: f64) -> EpsNet {
    EpsNet::from_real(grid, |e| e.powf(a)).unwrap()
}

proptest! {
    #[test]
    fn pure_powers_are_fitted_exactly(a in -3i32..=3) {
        let g = EpsGrid::default_dyadic();
        let est = estimate_order(&power_net(&g, a as f64), 0.5).unwrap();
        prop_assert_eq!(est.kappa_hat, a as f64);
        prop_assert_eq!(est.fit_quality, 1.0);
    }

    #[test]
    fn classification_ignores_constant_factors(
        a in -2.0f64..2.0,
        re in -5.0f64..5.0,
        im in -5.0f64..5.0,
        wiggle in 0.0f64..0.5,
    ) {
        prop_assume!(re.abs() + im.abs() > 1e-3);
        let g = EpsGrid::dyadic(1, 30).unwrap();
        let net = EpsNet::from_real(&g, |e| e.powf(a) * (1.0 + wiggle * (1.0 / e).ln().sin())).unwrap();
        let lam = Complex64::new(re, im);
        let scaled = net.scale(lam).unwrap();
        prop_assert_eq!(classify_net(&net, 0.1).unwrap(), classify_net(&scaled, 0.1).unwrap());
    }

    #[test]
    fn invertible_nets_have_tame_reciprocals(a in -4.0f64..4.0, c in 0.1f64..10.0) {
        let g = EpsGrid::dyadic(1, 30).unwrap();
        let net = EpsNet::from_real(&g, |e| c * e.powf(a) * (2.0 + e.sin())).unwrap();
        if let InvertibilityVerdict::Invertible { .. } = check_invertible(&net) {
            let cls = classify_net(&net.recip().unwrap(), 0.1).unwrap();
            prop_assert_ne!(cls, epsnet::Classification::ImmoderateSuspect);
        }
    }

    #[test]
    fn refinement_keeps_power_orders(a in -3i32..=3, extra in prop::collection::vec(-30.0f64..-1.0, 1..10)) {
        let g = EpsGrid::dyadic(1, 30).unwrap();
        let pts: Vec<f64> = extra.iter().map(|l| 2f64.powf(*l + 0.37)).collect();
        let fine = g.refined(&pts).unwrap();
        let coarse = estimate_order(&power_net(&g, a as f64), 0.5).unwrap().kappa_hat;
        let refined = estimate_order(&power_net(&fine, a as f64), 0.5).unwrap().kappa_hat;
        prop_assert!((coarse - refined).abs() < 1e-10);
    }

    #[test]
    fn fractional_powers_within_tolerance(a in -3.0f64..3.0) {
        let g = EpsGrid::default_dyadic();
        let est = estimate_order(&power_net(&g, a), 0.5).unwrap();
        prop_assert!((est.kappa_hat - a).abs() < 1e-9);
    }
}

#[test]
fn csv_interchange_round_trips() {
    let g = EpsGrid::reciprocal(10).unwrap();
    let net = EpsNet::from_fn(&g, |e| Complex64::new(e, e * e)).unwrap();
    assert_eq!(epsnet::read_csv(&epsnet::write_csv(&net)).unwrap(), net);
}
