use epsnet::{EpsGrid, GridKind};
use num_complex::Complex64;
use proptest::prelude::*;
use symbols::library;
use symexpr::{parse, parse_with_nets, Expr};
use wavefront::{estimate_wfg, microlocality_check, rapid_decrease_test, windowed_fft, SampledNetFunction, WaveParams, WindowSpec};

fn grid() -> EpsGrid {
    EpsGrid::dyadic(1, 20).unwrap()
}

fn smooth_u() -> impl Strategy<Value = Expr> {
    (-2.0f64..2.0, 0.5f64..6.0, -1.0f64..1.0, -0.5f64..0.5).prop_map(|(a, b, c, d)| {
        parse(&format!("({a}) * sin(({b}) * x1 + ({c})) + ({d}) * x1^2 + exp(({d}) * x1)"), 1).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn translation_moves_the_estimate(a in -0.5f64..0.5) {
        let u = parse("hstep(x1; eps)", 1).unwrap();
        let moved = Expr::subst(0, Expr::one(), Expr::real(-a), u.clone());
        let cs: Vec<f64> = (-5..=5).map(|k| k as f64 / 10.0).collect();
        let shifted: Vec<f64> = cs.iter().map(|c| c + a).collect();
        let p = WaveParams::default();
        let e0 = estimate_wfg(&u, &cs, 0.1, &grid(), &p, None).unwrap();
        let e1 = estimate_wfg(&moved, &shifted, 0.1, &grid(), &p, None).unwrap();
        for (x, y) in e0.points.iter().zip(&e1.points) {
            prop_assert_eq!(x.regular, y.regular);
            prop_assert_eq!(x.direction, y.direction);
        }
        prop_assert_eq!(e1.singular_support.len(), 1);
        prop_assert!((e1.singular_support[0] - a).abs() < 1e-12);
    }

    #[test]
    fn smooth_families_are_regular_for_any_window(u in smooth_u(), radius in 0.05f64..0.4, c in -1.0f64..1.0) {
        let w = WindowSpec::bump(c, radius).unwrap();
        let s = SampledNetFunction::sample(&u, w.lo(), w.hi(), 4096, grid().values()).unwrap();
        let spec = windowed_fft(&s, &w).unwrap();
        for v in rapid_decrease_test(&spec, &[1.0, -1.0], &WaveParams::default()).unwrap() {
            prop_assert!(v.regular);
            prop_assert!(v.n_hat.iter().all(|n| n.is_none_or(|n| n.abs() <= 0.1)), "{:?}", v.n_hat);
        }
    }

    #[test]
    fn jump_is_seen_by_every_window_size(radius in 0.05f64..0.3) {
        let u = parse("hstep(x1; eps)", 1).unwrap();
        let cs: Vec<f64> = (-3..=3).map(|k| k as f64 * radius).collect();
        let est = estimate_wfg(&u, &cs, radius, &grid(), &WaveParams::default(), None).unwrap();
        prop_assert_eq!(est.singular_support, vec![0.0]);
    }
}

fn resonant_grid(k0: u32) -> EpsGrid {
    let mut v: Vec<f64> = (k0..k0 + 12).flat_map(|k| [1.0 / k as f64, 2.0 / (2 * k + 1) as f64]).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    EpsGrid::new(v, GridKind::Explicit).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    /// A zero divisor in the principal coefficient lets `u` carry a jump that `P u` never sees.
    #[test]
    fn zero_divisor_hides_the_jump(k0 in 1800u32..2400) {
        let g = resonant_grid(k0);
        let (p, mut nets) = library::remark_i(&g);
        nets.insert("r".into(), library::resonance_net("r", &g, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
        let u = parse_with_nets("$r * hstep(x1; eps)", 1, &nets).unwrap();
        let cs: Vec<f64> = (-3..=3).map(|k| k as f64 / 10.0).collect();
        let r = microlocality_check(&p, &u, &cs, 0.1, &g, &WaveParams::default(), None).unwrap();
        prop_assert_eq!(r.wf_u.singular_support.clone(), vec![0.0]);
        prop_assert!(r.wf_pu.is_empty());
        let pu = p.apply(&u);
        for &e in g.values() {
            prop_assert_eq!(pu.eval(&[0.0], e).unwrap(), Complex64::new(0.0, 0.0));
        }
    }
}
