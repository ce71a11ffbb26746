use adjoint::{
    apply_remainder, build_adjoint_solution, build_remainder, check_assumption_psi, check_assumption_r,
    check_remainder_coefficient_bounds, decompose_fourier, loglog_slope, sup_series, verify_adjoint_identity,
    AdjointError, AdjointSampling, GuardRegion, RationalSymbol,
};
use conditions::{ConicRegion, DirectionSet};
use epsnet::{EpsGrid, RadiusNet};
use num_complex::Complex64;
use symbols::{library, SymbolFamily};
use symexpr::{parse, Expr};

fn sym(n: usize, terms: &[(&[u32], &str)]) -> SymbolFamily {
    SymbolFamily::from_terms(n, terms.iter().map(|(a, s)| (a.to_vec(), parse(s, n).unwrap())).collect()).unwrap()
}

fn guard1() -> GuardRegion {
    GuardRegion::new(vec![-1.0], vec![1.0], 2.0)
}

fn bump1() -> Expr {
    parse("bump(x1; 0; 0.9)", 1).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
    fn range(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.next()
    }
}

fn region1(lo: f64, hi: f64, count: usize) -> ConicRegion {
    ConicRegion::new(vec![lo], vec![hi], DirectionSet::Sphere { count }).unwrap()
}

#[test]
fn remainder_of_a_constant_vanishes() {
    let r = build_remainder(&sym(1, &[(&[0], "3 - 2 * i")]), guard1()).unwrap();
    assert!(r.is_zero());
    let base = r.base.clone();
    let g = RationalSymbol::from_expr(&base, bump1());
    assert!(apply_remainder(&r, &g).is_zero());
}

#[test]
fn remainder_of_xi() {
    let r = build_remainder(&sym(1, &[(&[1], "1")]), guard1()).unwrap();
    assert!(r.coeff(&[0]).is_none());
    let r1 = r.coeff(&[1]).unwrap();
    for &xi in &[2.0, -3.5, 17.0] {
        assert!(close(r1.eval(&[0.3], &[xi], 0.1).unwrap(), c(-1.0 / xi, 0.0), 1e-14));
    }
    // R phi = (1/xi) D phi = -i phi' / xi
    let phi = bump1();
    let g = RationalSymbol::from_expr(&r.base, phi.clone());
    let rg = apply_remainder(&r, &g);
    let dphi = phi.diff(0);
    for &x in &[-0.5, 0.1, 0.7] {
        for &xi in &[2.0, -9.0] {
            let want = dphi.eval(&[x], 0.1).unwrap() * c(0.0, -1.0 / xi);
            assert!(close(rg.eval(&[x], &[xi], 0.1).unwrap(), want, 1e-13));
        }
    }
}

#[test]
fn remainder_of_xi_squared_plus_one() {
    let r = build_remainder(&library::elliptic1d(), guard1()).unwrap();
    assert!(r.coeff(&[0]).is_none());
    let (r1, r2) = (r.coeff(&[1]).unwrap(), r.coeff(&[2]).unwrap());
    for &xi in &[2.0, -4.0, 50.0] {
        let d = xi * xi + 1.0;
        assert!(close(r1.eval(&[0.0], &[xi], 0.5).unwrap(), c(-2.0 * xi / d, 0.0), 1e-14));
        assert!(close(r2.eval(&[0.0], &[xi], 0.5).unwrap(), c(1.0 / d, 0.0), 1e-14));
    }
}

#[test]
fn first_solutions_of_xi() {
    let p = sym(1, &[(&[1], "1")]);
    let phi = bump1();
    let s1 = build_adjoint_solution(&p, &phi, 1, guard1()).unwrap();
    let s2 = build_adjoint_solution(&p, &phi, 2, guard1()).unwrap();
    let dphi = phi.diff(0);
    for &x in &[-0.4, 0.2] {
        for &xi in &[3.0, -6.0] {
            let f = phi.eval(&[x], 0.2).unwrap();
            assert!(close(s1.w.eval(&[x], &[xi], 0.2).unwrap(), f, 1e-14));
            assert!(close(s1.psi.eval(&[x], &[xi], 0.2).unwrap(), f / xi, 1e-14));
            // w = phi + (1/xi) D phi
            let want = f + dphi.eval(&[x], 0.2).unwrap() * c(0.0, -1.0 / xi);
            assert!(close(s2.w.eval(&[x], &[xi], 0.2).unwrap(), want, 1e-13));
        }
    }
}

#[test]
fn iteration_limits_are_explicit() {
    let p = library::elliptic1d();
    let e = build_adjoint_solution(&p, &bump1(), 7, guard1()).unwrap_err();
    assert_eq!(e, AdjointError::Iterations { n: 7, max: 6 });
    assert!(build_adjoint_solution(&p, &bump1(), 0, guard1()).is_err());
}

fn samples_1d(rng: &mut Lcg, k: usize) -> Vec<(Vec<f64>, Vec<f64>, f64)> {
    (0..k)
        .map(|_| {
            let s = if rng.next() < 0.5 { -1.0 } else { 1.0 };
            (vec![rng.range(-1.0, 1.0)], vec![s * rng.range(2.0, 200.0)], 2f64.powf(-rng.range(1.0, 30.0)))
        })
        .collect()
}

#[test]
fn adjoint_identity_constant_and_first_order() {
    let mut rng = Lcg(5);
    let s = samples_1d(&mut rng, 50);
    let cst = build_adjoint_solution(&sym(1, &[(&[0], "2 + i")]), &bump1(), 3, guard1()).unwrap();
    assert_eq!(verify_adjoint_identity(&cst, &s).unwrap(), 0.0);
    let xi = build_adjoint_solution(&sym(1, &[(&[1], "1")]), &bump1(), 4, guard1()).unwrap();
    assert!(verify_adjoint_identity(&xi, &s).unwrap() <= 1e-9);
}

#[test]
fn adjoint_identity_elliptic_matches_direct_expansion() {
    let mut rng = Lcg(9);
    let s = samples_1d(&mut rng, 200);
    for n in 1..=4 {
        let sol = build_adjoint_solution(&library::elliptic1d(), &bump1(), n, guard1()).unwrap();
        let err = verify_adjoint_identity(&sol, &s).unwrap();
        assert!(err <= 1e-9, "N = {n}: {err:e}");
    }
    // independent route: ᵗP = P applied to psi e^{-i xi x} as one expression
    let sol = build_adjoint_solution(&library::elliptic1d(), &bump1(), 3, guard1()).unwrap();
    let xi = 7.5;
    let phase = Expr::var(0).scale(c(0.0, -xi)).exp();
    let lhs = library::elliptic1d().apply(&Expr::mul(vec![sol.psi.materialize(&[xi]), phase.clone()]));
    for &x in &[-0.6, 0.0, 0.45] {
        let got = lhs.eval(&[x], 0.1).unwrap() * c(0.0, xi * x).exp();
        let want = sol.phi.eval(&[x], 0.1).unwrap() - sol.residual.eval(&[x], &[xi], 0.1).unwrap();
        assert!(close(got, want, 1e-10));
    }
}

#[test]
fn adjoint_identity_acoustic_smooth() {
    let p = library::acoustic_smooth();
    let phi = parse("bump(x1; 0; 0.9) * bump(x2; 0; 0.9)", 2).unwrap();
    let guard = GuardRegion::new(vec![-1.0, -1.0], vec![1.0, 1.0], 2.0);
    let mut rng = Lcg(13);
    // directions away from the characteristic set c |xi| = |tau|, c ∈ [1, 2]
    let samples: Vec<_> = (0..60)
        .map(|k| {
            let r = rng.range(2.0, 80.0);
            let th = if k % 2 == 0 { rng.range(-0.3, 0.3) } else { std::f64::consts::FRAC_PI_2 + rng.range(-0.2, 0.2) };
            (vec![rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)], vec![r * th.cos(), r * th.sin()], 2f64.powf(-rng.range(1.0, 20.0)))
        })
        .collect();
    for n in 1..=3 {
        let sol = build_adjoint_solution(&p, &phi, n, guard.clone()).unwrap();
        let err = verify_adjoint_identity(&sol, &samples).unwrap();
        assert!(err <= 1e-8, "N = {n}: {err:e}");
    }
}

#[test]
fn identity_rejects_out_of_guard_samples() {
    let sol = build_adjoint_solution(&library::elliptic1d(), &bump1(), 2, guard1()).unwrap();
    let e = verify_adjoint_identity(&sol, &[(vec![0.0], vec![1.0], 0.5)]).unwrap_err();
    assert!(matches!(e, AdjointError::Guard { .. }));
}

#[test]
fn psi_vanishes_off_the_support() {
    let phi = parse("bump(x1; 0; 0.5)", 1).unwrap();
    let sol = build_adjoint_solution(&library::elliptic1d(), &phi, 3, guard1()).unwrap();
    let mut rng = Lcg(17);
    for _ in 0..100 {
        let x = if rng.next() < 0.5 { rng.range(-1.0, -0.5) } else { rng.range(0.5, 1.0) };
        let xi = rng.range(2.0, 100.0);
        let eps = 2f64.powf(-rng.range(1.0, 30.0));
        assert_eq!(sol.psi.eval(&[x], &[xi], eps).unwrap(), c(0.0, 0.0));
    }
}

fn short_grid() -> EpsGrid {
    EpsGrid::dyadic(1, 20).unwrap()
}

#[test]
fn assumption_r_for_the_elliptic_symbol() {
    let v = check_assumption_r(&library::elliptic1d(), &bump1(), &region1(-1.0, 1.0, 2), 3, &short_grid(), None, &AdjointSampling::default())
        .unwrap();
    assert!(v.pass, "{v:#?}");
    assert!((v.tau_hat - 1.0).abs() <= 0.2, "tau_hat {}", v.tau_hat);
    assert!(v.fitted["M1_hat"] <= 0.1);
    let csv = v.to_csv();
    assert!(csv.starts_with("N,eps,radius,sup_value\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 20 * 16);
}

#[test]
fn assumption_r_for_remark_iii_with_tau_one() {
    let v = check_assumption_r(&library::remark_iii(), &bump1(), &region1(-1.0, 1.0, 2), 3, &EpsGrid::default_dyadic(), Some(1.0), &AdjointSampling::default())
        .unwrap();
    assert!(v.pass, "{v:#?}");
    assert!(v.fitted["M1_hat"].is_finite());
}

#[test]
fn assumption_r_trivial_for_constants() {
    let v = check_assumption_r(&sym(1, &[(&[0], "4")]), &bump1(), &region1(-1.0, 1.0, 2), 3, &short_grid(), None, &AdjointSampling::default())
        .unwrap();
    assert!(v.pass);
    assert_eq!(v.fitted["M1_hat"], 0.0);
}

#[test]
fn assumption_psi_examples() {
    let opts = AdjointSampling::default();
    let v = check_assumption_psi(&library::elliptic1d(), &bump1(), &region1(-1.0, 1.0, 2), 2, 2, &short_grid(), &opts).unwrap();
    assert!(v.pass, "{v:#?}");
    // psi ≈ phi / (xi^2 + 1)
    assert!((v.fitted["tau0_hat"] + 2.0).abs() <= 0.3, "{:?}", v.fitted);
    let k = check_assumption_psi(&sym(1, &[(&[0], "2")]), &bump1(), &region1(-1.0, 1.0, 2), 1, 2, &short_grid(), &opts).unwrap();
    assert!(k.pass);
    assert!(k.fitted["tau0_hat"].abs() <= 1e-9);
    assert!(k.fitted["delta_hat"].abs() <= 1e-9);
}

#[test]
fn coefficient_bounds_examples() {
    let opts = AdjointSampling::default();
    let rep = check_remainder_coefficient_bounds(&library::elliptic1d(), &region1(-1.0, 1.0, 2), &short_grid(), 1.0, 0.0, 1, &opts).unwrap();
    assert!(rep.pass, "{rep:#?}");
    assert!((rep.fitted["r[beta=[1]] d_x^[0] slope_max"] + 1.0).abs() <= 0.1);
    assert!((rep.fitted["r[beta=[2]] d_x^[0] slope_max"] + 2.0).abs() <= 0.1);
    let k = check_remainder_coefficient_bounds(&sym(1, &[(&[0], "5")]), &region1(-1.0, 1.0, 2), &short_grid(), 1.0, 0.0, 1, &opts).unwrap();
    assert!(k.pass && k.nets.is_empty());
    let iii = AdjointSampling { radius_net: RadiusNet::InvEps { factor: 2.0 }, ..opts };
    let rep = check_remainder_coefficient_bounds(&library::remark_iii(), &region1(-1.0, 1.0, 2), &short_grid(), 1.0, 0.0, 1, &iii).unwrap();
    assert!(rep.pass, "{rep:#?}");
}

#[test]
fn fourier_split_examples() {
    let p = library::elliptic1d();
    let phi = parse("bump(x1; 0; 0.8)", 1).unwrap();
    let sol = build_adjoint_solution(&p, &phi, 3, guard1()).unwrap();
    let xis: Vec<f64> = (0..20).map(|k| 2.0 + 5.0 * k as f64).collect();
    let zero = decompose_fourier(&Expr::zero(), &sol, (-1.0, 1.0), &xis[..3], 0.1).unwrap();
    assert!(zero.iter().all(|s| s.j.norm() == 0.0 && s.i.norm() == 0.0 && s.total.norm() == 0.0));
    let u = parse("bump(x1; 0.2; 0.7) * (1 + x1)", 1).unwrap();
    let split = decompose_fourier(&u, &sol, (-1.0, 1.0), &xis, 0.1).unwrap();
    for s in &split {
        assert!(s.identity_error <= 1e-8, "xi = {}: {:e}", s.xi, s.identity_error);
    }
}

#[test]
fn i_term_decays_like_the_residual() {
    let p = library::elliptic1d();
    let phi = parse("bump(x1; 0; 0.8)", 1).unwrap();
    let u = Expr::one();
    let xis: Vec<f64> = (0..12).map(|k| 10f64 * 10f64.powf(2.0 * k as f64 / 11.0)).collect();
    for n in 1..=3 {
        let sol = build_adjoint_solution(&p, &phi, n, guard1()).unwrap();
        let split = decompose_fourier(&u, &sol, (-1.0, 1.0), &xis, 0.1).unwrap();
        // |I| oscillates in xi; bound it through the running envelope of sup_x |R^N phi|
        let xs: Vec<Vec<f64>> = (0..65).map(|k| vec![-1.0 + k as f64 / 32.0]).collect();
        let sup: Vec<f64> = sup_series(&sol.residual, &xs, &[vec![1.0]], &xis, 0.1).unwrap().iter().map(|t| t.0).collect();
        assert!(split.iter().zip(&sup).all(|(s, b)| s.i.norm() <= 2.0 * b * 1.0001));
        let slope = loglog_slope(&xis, &sup);
        assert!(slope <= -(n as f64) + 0.2, "N = {n}: {slope}");
    }
}
