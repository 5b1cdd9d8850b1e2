//! Closed-form reference values for the Nevanlinna functions, operators and
//! the divisor engine.

use std::f64::consts::PI;

use nevlab_core::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn real(x: f64) -> FunctionHandle {
    make_constant(c(x, 0.0))
}

fn exp_z() -> FunctionHandle {
    make_exp_poly(&[(c(1.0, 0.0), c(1.0, 0.0))]).unwrap()
}

#[test]
fn exponential_characteristic_is_r_over_pi() {
    let q = QuadratureConfig::default();
    for r in [10.0, 20.0, 50.0] {
        let m = proximity(&exp_z(), r, &q).unwrap();
        assert!((m.value - r / PI).abs() < 1e-6 * r, "r={r} m={}", m.value);
        assert!(m.certified);
    }
}

#[test]
fn rational_degree_law() {
    let f = make_rational_from_roots(
        c(2.0, 0.0),
        &[(c(1.0, 0.5), 2), (c(-3.0, 0.0), 1)],
        &[(c(0.2, -0.4), 1), (c(4.0, 1.0), 1)],
    )
    .unwrap();
    let s = RadiusSchedule::explicit(vec![10.0, 100.0, 1000.0]).unwrap();
    let t = characteristic(&f, &[], &s, &QuadratureConfig::default(), &EngineOptions::default()).unwrap();
    let last = t.samples.last().unwrap();
    assert!((last.t / last.r_eff.ln() - 3.0).abs() < 0.06 * 3.0, "{}", last.t / last.r_eff.ln());
    assert!(t.monotone && t.certified);
}

#[test]
fn characteristic_invariants_along_schedule() {
    let f = make_rational(&[c(1.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)], &[c(-2.0, 1.0), c(1.0, 0.0)]).unwrap();
    let s = RadiusSchedule::geometric(1.1, 1.35, 14).unwrap();
    let tab = characteristic(&f, &[real(1.0)], &s, &QuadratureConfig::default(), &EngineOptions::default()).unwrap();
    for row in &tab.samples {
        assert!((row.t - (row.m + row.n)).abs() < 1e-12);
        assert!(row.m >= 0.0 && row.n >= 0.0);
    }
    for w in tab.samples.windows(3) {
        let (a, b, cc) = (&w[0], &w[1], &w[2]);
        let (la, lb, lc) = (a.r_eff.ln(), b.r_eff.ln(), cc.r_eff.ln());
        let slope1 = (b.t - a.t) / (lb - la);
        let slope2 = (cc.t - b.t) / (lc - lb);
        assert!(slope2 - slope1 >= -1e-6, "T not convex in log r near r={}", b.r);
    }
}

#[test]
fn sn_characteristic_grows_like_r_squared() {
    let sn = make_jacobi_sn(0.5).unwrap();
    let j = sn.jacobi().unwrap();
    let area = 4.0 * j.quarter_period() * 2.0 * j.quarter_period_prime();
    // Two simple poles per period cell: n(t) ~ 2πt²/A, N(r) ~ πr²/A.
    let lead = PI / area;
    let s = RadiusSchedule::explicit(vec![20.0, 40.0]).unwrap();
    let t = characteristic(&sn, &[], &s, &QuadratureConfig::default(), &EngineOptions::default()).unwrap();
    for row in &t.samples {
        let ratio = row.t / (row.r_eff * row.r_eff);
        assert!((ratio / lead - 1.0).abs() < 0.1, "r={} ratio={ratio} lead={lead}", row.r);
    }
}

#[test]
fn first_main_theorem_bound() {
    let f = make_rational_from_roots(c(1.5, 0.0), &[(c(0.5, 0.5), 1), (c(-2.0, 0.0), 1)], &[(c(3.0, 0.0), 1)]).unwrap();
    let q = QuadratureConfig::default();
    let o = EngineOptions::default();
    let s = RadiusSchedule::geometric(1.2, 1.5, 10).unwrap();
    for a in [0.0, 1.0, -2.5] {
        let fa = combine(CombineOp::Sub, &f, &real(a)).unwrap();
        let inv = combine(CombineOp::Div, &real(1.0), &fa).unwrap();
        let tf = characteristic(&f, &[], &s, &q, &o).unwrap();
        let ti = characteristic(&inv, &[], &s, &q, &o).unwrap();
        let lc = ilc(&fa, c(0.0, 0.0)).unwrap().coefficient.norm().ln().abs();
        let bound = (a.abs().max(1.0)).ln() + 2f64.ln() + lc;
        for (x, y) in tf.samples.iter().zip(&ti.samples) {
            assert_eq!(x.r_eff, x.r_eff);
            assert!((x.t - y.t).abs() <= bound + 1e-9, "a={a} r={} diff={} bound={bound}", x.r, (x.t - y.t).abs());
        }
    }
}

#[test]
fn quadrature_tolerance_refinement() {
    let sn = make_jacobi_sn(0.5).unwrap();
    let coarse = QuadratureConfig { target_tol: 1e-8, ..Default::default() };
    let fine = QuadratureConfig { target_tol: 5e-9, ..Default::default() };
    for r in [3.0, 7.3] {
        let a = proximity(&sn, r, &coarse).unwrap();
        let b = proximity(&sn, r, &fine).unwrap();
        assert!((a.value - b.value).abs() < coarse.target_tol, "r={r}");
    }
}

#[test]
fn jensen_on_families() {
    let q = QuadratureConfig::default();
    let o = EngineOptions::default();
    let sn = make_jacobi_sn(0.5).unwrap();
    for r in [2.0, 4.5, 10.0] {
        let j = jensen_check(&sn, r, &q, &o).unwrap();
        assert!(j.residual < 1e-5, "r={r} {j:?}");
    }
    let ez1 = make_exp_poly(&[(c(1.0, 0.0), c(1.0, 0.0)), (c(-1.0, 0.0), c(0.0, 0.0))]).unwrap();
    for r in [1.5, 8.0, 20.0] {
        let j = jensen_check(&ez1, r, &q, &o).unwrap();
        assert!(j.residual < 1e-8, "r={r} {j:?}");
    }
}

#[test]
fn derivative_rules_match_central_differences() {
    let families = [
        make_rational(&[c(1.0, 0.0), c(-2.0, 0.5), c(1.0, 0.0)], &[c(3.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap(),
        make_exp_poly(&[(c(1.0, 0.0), c(0.5, 1.0)), (c(-2.0, 0.0), c(-1.0, 0.0))]).unwrap(),
        make_jacobi_sn(0.7).unwrap(),
        compose_affine(&make_jacobi_sn(0.3).unwrap(), c(1.0, 0.5), c(0.2, 0.0)).unwrap(),
    ];
    let h = 1e-3;
    for f in &families {
        let df = f.derivative().unwrap();
        let region = Region::centered_disc(4.0).unwrap();
        let poles = f.pole_candidates(region).unwrap();
        for i in 0..200 {
            let z = c(-3.0 + 0.03 * i as f64, 2.5 * (0.37 * i as f64).sin());
            if poles.iter().any(|p| (p - z).norm() < 0.05 + 2.0 * h) {
                continue;
            }
            let cd = (f.eval(z - 2.0 * h) - f.eval(z + 2.0 * h) + (f.eval(z + h) - f.eval(z - h)) * 8.0) / (12.0 * h);
            let d = df.eval(z);
            assert!((d - cd).norm() / (1.0 + d.norm()) < 1e-6, "{} at {z}", f.describe());
        }
    }
}

#[test]
fn sn_double_periodicity() {
    let sn = make_jacobi_sn(0.5).unwrap();
    let j = sn.jacobi().unwrap();
    let (p1, p2) = (c(4.0 * j.quarter_period(), 0.0), c(0.0, 2.0 * j.quarter_period_prime()));
    for i in 0..40 {
        let z = c(-2.0 + 0.11 * i as f64, 0.9 - 0.04 * i as f64);
        assert!((sn.eval(z + p1) - sn.eval(z)).norm() < 1e-8);
        assert!((sn.eval(z + p2) - sn.eval(z)).norm() < 1e-8);
    }
}

#[test]
fn affine_divisor_pullback() {
    let sn = make_jacobi_sn(0.5).unwrap();
    let (a, b) = (c(0.8, 0.6), c(1.0, -0.5));
    let g = compose_affine(&sn, a, b).unwrap();
    let region = Region::centered_disc(5.0).unwrap();
    let d = g.divisor(region).unwrap();
    for p in &d.points {
        let image = sn.divisor(Region::disc(a * p.location + b, 1e-6).unwrap()).unwrap();
        assert_eq!(image.points.len(), 1);
        assert_eq!(image.points[0].signed(), p.signed());
        assert!((image.points[0].location - (a * p.location + b)).norm() < 1e-10);
    }
}

#[test]
fn ilc_matches_divisor_multiplicities() {
    let f = make_rational_from_roots(c(1.0, 0.0), &[(c(0.3, 0.0), 2), (c(-1.0, 1.0), 1)], &[(c(1.5, 0.5), 3)]).unwrap();
    let d = f.divisor(Region::centered_disc(3.0).unwrap()).unwrap();
    for p in &d.points {
        assert_eq!(ilc(&f, p.location).unwrap().order, p.signed());
        assert_eq!(ilc(&f.opaque(), p.location).unwrap().order, p.signed());
    }
}

#[test]
fn ramification_reduction_with_derivative() {
    let f = make_rational_from_roots(c(1.0, 0.0), &[(c(1.0, 0.0), 2), (c(-0.5, 0.5), 1)], &[(c(0.0, 1.5), 2)]).unwrap();
    let s = RadiusSchedule::geometric(1.7, 1.5, 5).unwrap();
    let q = QuadratureConfig::default();
    let o = EngineOptions::default();
    let rep = verify_linear_smt(&f, &OperatorExpr::derivative(1), &[real(0.0)], &s, &q, &o, &ApplyOptions::default()).unwrap();
    let df = f.derivative().unwrap();
    for row in &rep.rows {
        let r = row.r_eff;
        let nf = count_in_disc(&f, r, &o).unwrap();
        let nd = count_in_disc(&df, r, &o).unwrap();
        let pole = |d: &Divisor| -> Vec<(f64, u32)> { d.poles().map(|p| (p.location.norm(), p.multiplicity)).collect() };
        let zero = |d: &Divisor| -> Vec<(f64, u32)> { d.zeros().map(|p| (p.location.norm(), p.multiplicity)).collect() };
        let classical = 2.0 * integrate_counting(&pole(&nf), r) - integrate_counting(&pole(&nd), r)
            + integrate_counting(&zero(&nd), r);
        assert!((row.ramification - classical).abs() < 1e-10, "r={r}");
    }
}

#[test]
fn linear_smt_remainder_ratio_decays_for_sn() {
    let sn = make_jacobi_sn(0.5).unwrap();
    let v = (1.25f64).sqrt() / (2f64.sqrt() * 0.5);
    let t = [real(0.0), real(v), real(-v)];
    let s = RadiusSchedule::spanning(2.0, 14.0, 8).unwrap();
    let rep = verify_linear_smt(
        &sn,
        &OperatorExpr::derivative(2),
        &t,
        &s,
        &QuadratureConfig::default(),
        &EngineOptions::default(),
        &ApplyOptions::default(),
    )
    .unwrap();
    for row in &rep.rows {
        assert!(row.certified && row.slack >= -1e-6, "{row:?}");
    }
    let first = rep.remainder_ratio[0];
    let last = *rep.remainder_ratio.last().unwrap();
    assert!(last < 0.5 * first && last < 0.5, "{:?}", rep.remainder_ratio);
    assert_eq!(rep.applicability.satisfied, Some(true));
}

#[test]
fn shift_and_derivative_commute() {
    let a = ApplyOptions::default();
    let f = make_jacobi_sn(0.5).unwrap();
    let ds = OperatorExpr::derivative(1).compose(&OperatorExpr::shift(c(0.5, 0.25)));
    let sd = OperatorExpr::shift(c(0.5, 0.25)).compose(&OperatorExpr::derivative(1));
    let x = apply(&ds, &f, &a).unwrap();
    let y = apply(&sd, &f, &a).unwrap();
    for z in SampleSpec::default().points() {
        assert!((x.eval(z) - y.eval(z)).norm() < 1e-9 * (1.0 + x.eval(z).norm()));
    }
}

#[test]
fn kernel_invariance_under_apply() {
    let a = ApplyOptions::default();
    let f = make_rational(&[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 1.0)], &[c(5.0, 0.0), c(1.0, 0.0)]).unwrap();
    for (l, k) in [
        (OperatorExpr::derivative(2), identity()),
        (OperatorExpr::difference(), real(3.0)),
        (OperatorExpr::central_second_difference(), identity()),
    ] {
        let sub = combine(CombineOp::Sub, &f, &k).unwrap();
        let x = apply(&l, &sub, &a).unwrap();
        let y = apply(&l, &f, &a).unwrap();
        for z in SampleSpec::default().points() {
            assert!((x.eval(z) - y.eval(z)).norm() < 1e-8 * (1.0 + y.eval(z).norm()));
        }
    }
}

#[test]
fn q_scale_requires_zero_order() {
    let l = OperatorExpr::derivative(1).compose(&OperatorExpr::q_scale(c(2.0, 0.0)));
    assert_eq!(l.applicability(&exp_z()).satisfied, Some(false));
    let f = make_rational(&[c(1.0, 0.0), c(1.0, 0.0)], &[c(2.0, 0.0), c(0.0, 1.0)]).unwrap();
    assert_eq!(l.applicability(&f).satisfied, Some(true));
    let shifted = OperatorExpr::shift(c(1.0, 0.0));
    assert_eq!(shifted.applicability(&make_jacobi_sn(0.5).unwrap()).satisfied, Some(true));
    assert_eq!(shifted.applicability(&exp_z().opaque().with_growth(GrowthMeta::unknown())).satisfied, None);
}

#[test]
fn engine_on_sn_shifted_values() {
    let sn = make_jacobi_sn(0.5).unwrap();
    let h = combine(CombineOp::Sub, &sn, &real(0.4)).unwrap();
    let o = EngineOptions::default();
    let d = count_in_disc(&h, 6.0, &o).unwrap();
    assert!(d.certified);
    for p in d.zeros() {
        assert_eq!(p.multiplicity, 1);
        assert!(h.eval(p.location).norm() < 1e-8);
    }
    // Every period cell holds two a-points and two poles.
    let poles = sn.divisor(Region::centered_disc(6.0).unwrap()).unwrap().count(PointKind::Pole);
    assert_eq!(d.count(PointKind::Pole), poles);
    let zeros = d.count(PointKind::Zero) as i64;
    assert!((zeros - poles as i64).abs() <= 4, "zeros {zeros} poles {poles}");
}

#[test]
fn mcmillan_constant_solutions() {
    let m = McMillan::new(c(-1.0, 0.0), c(0.4, 0.0));
    for g in m.gammas().unwrap() {
        let rep = m.check(&make_constant(g), &SampleSpec::default(), &ApplyOptions::default()).unwrap();
        assert!(rep.equation_residual < 1e-12);
        let d2 = apply(&OperatorExpr::central_second_difference(), &make_constant(g), &ApplyOptions::default()).unwrap();
        assert!(d2.is_identically_zero());
    }
}
