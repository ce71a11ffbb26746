use conditions::*;
use epsnet::EpsGrid;
use num_complex::Complex64;
use proptest::prelude::*;
use symbols::{library, SymbolFamily};
use symexpr::parse;

fn small() -> Sampling {
    Sampling { x_points: 5, radii: 10, ..Sampling::default() }
}

fn grid() -> EpsGrid {
    EpsGrid::dyadic(1, 16).unwrap()
}

fn line() -> ConicRegion {
    ConicRegion::full(vec![-1.0], vec![1.0], 2).unwrap()
}

fn verdicts(p: &SymbolFamily, g: &EpsGrid, region: &ConicRegion) -> [bool; 5] {
    let s = small();
    let m1 = check_mh1(p, region, g, Some(0.0), &s).unwrap();
    let m2 = check_mh2(p, region, g, 1.0, 0.0, 1, &s).unwrap();
    let pr = check_principal(p, region, g, 1, &s).unwrap();
    let part = |id| pr.part(id).unwrap().pass;
    [m1.pass, m2.pass, part(ConditionId::St1), part(ConditionId::St2), part(ConditionId::Inv)]
}

fn cases() -> Vec<(SymbolFamily, EpsGrid)> {
    let r = EpsGrid::reciprocal_midpoints(12).unwrap();
    vec![
        (library::remark_iii(), grid()),
        (library::remark_i(&r).0, r.clone()),
        (library::remark_ii(&r).0, r),
        (library::elliptic1d(), grid()),
        (library::first_order_demo(), grid()),
    ]
}

fn nonzero() -> impl Strategy<Value = Complex64> {
    (0.1f64..10.0, 0.0f64..std::f64::consts::TAU).prop_map(|(m, a)| Complex64::from_polar(m, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn verdicts_are_scaling_invariant(k in nonzero(), which in 0usize..5) {
        let (p, g) = cases().swap_remove(which);
        let q = p.scale(k);
        prop_assert_eq!(verdicts(&p, &g, &line()), verdicts(&q, &g, &line()));
    }

    #[test]
    fn subcones_only_improve(keep in prop::collection::vec(any::<bool>(), 12), c in 0.2f64..3.0) {
        // explicit directions, no refinement
        let p = SymbolFamily::from_terms(2, vec![
            (vec![2, 0], parse(&format!("{c} + sin(x1)"), 2).unwrap()),
            (vec![0, 2], parse("-1", 2).unwrap()),
            (vec![1, 0], parse("i * eps", 2).unwrap()),
        ]).unwrap();
        let all: Vec<Vec<f64>> = (0..12).map(|k| {
            let a = 0.1 + 0.12 * k as f64;
            vec![a.cos(), a.sin()]
        }).collect();
        let sub: Vec<Vec<f64>> = all.iter().zip(&keep).filter(|(_, &k)| k).map(|(d, _)| d.clone()).collect();
        prop_assume!(!sub.is_empty());
        let s = Sampling { refine_rounds: 0, ..small() };
        let region = |d: Vec<Vec<f64>>| ConicRegion::new(vec![-1.0, 0.0], vec![1.0, 1.0], DirectionSet::Explicit { directions: d }).unwrap();
        let (big, little) = (region(all.clone()), region(sub));
        let g = grid();
        let m2b = check_mh2(&p, &big, &g, 1.0, 0.0, 1, &s).unwrap();
        let m2s = check_mh2(&p, &little, &g, 1.0, 0.0, 1, &s).unwrap();
        prop_assert!(!m2b.pass || m2s.pass);
        for (nb, ns) in m2b.nets.iter().zip(&m2s.nets) {
            for (a, b) in nb.values.iter().zip(&ns.values) {
                prop_assert!(b.1 <= a.1);
            }
        }
        let m1b = check_mh1(&p, &big, &g, Some(2.0), &s).unwrap();
        let m1s = check_mh1(&p, &little, &g, Some(2.0), &s).unwrap();
        for (a, b) in m1b.net("L").unwrap().values.iter().zip(&m1s.net("L").unwrap().values) {
            prop_assert!(b.1 >= a.1);
        }
        prop_assert!(m1s.fitted["q_hat"] <= m1b.fitted["q_hat"]);
    }

    #[test]
    fn elliptic_implies_full_scan(a in 0.5f64..3.0, b in -1.0f64..1.0, c in 0.5f64..3.0) {
        let p = SymbolFamily::from_terms(2, vec![
            (vec![2, 0], parse(&format!("{a} + 0.2 * sin(x1)"), 2).unwrap()),
            (vec![0, 2], parse(&format!("{c}"), 2).unwrap()),
            (vec![1, 0], parse(&format!("{b} * i"), 2).unwrap()),
            (vec![0, 0], parse("1", 2).unwrap()),
        ]).unwrap();
        let g = grid();
        let (lo, hi) = ([-1.0, 0.0], [1.0, 1.0]);
        let wh = check_wh_elliptic(&p, &lo, &hi, &g, &small()).unwrap();
        prop_assume!(wh.pass);
        let mode = ScanMode::Mh { m0: None, rho: 1.0, delta: 0.0, alpha_max: 1 };
        let opts = ScanOptions { sampling: small(), ..ScanOptions::new(16) };
        let r = scan_mg(&p, &lo, &hi, &g, &mode, &opts).unwrap();
        prop_assert!(r.all_pass);
    }

    #[test]
    fn ratio_bounds_give_slow_scale_coefficients(w in 0.5f64..2.0, slow in any::<bool>(), fast in any::<bool>()) {
        let width = match (slow, fast) {
            (_, true) => format!("{w} * eps^(1/2)"),
            (true, false) => format!("{w} * loginv^-1"),
            (false, false) => format!("{w}"),
        };
        let p = SymbolFamily::from_terms(1, vec![
            (vec![2], parse(&format!("1 + hstep(x1; {width})"), 1).unwrap()),
            (vec![0], parse("1", 1).unwrap()),
        ]).unwrap();
        let g = grid();
        let s = small();
        let m2 = check_mh2(&p, &line(), &g, 1.0, 0.0, 1, &s).unwrap();
        if m2.pass {
            for n in coefficient_sup_nets(&p, &[-1.0], &[1.0], &g, 1, &s).unwrap() {
                prop_assert!(n.is_slow_scale(), "{}", n.name);
            }
        }
        if fast {
            prop_assert!(!m2.pass);
        }
    }
}
