use std::sync::Arc;

use proptest::prelude::*;

use dq_core::cochains::{coboundary, coboundary_op, heuristic_ratio, multiplier_three_point, Cochain, ScalarFn};
use dq_core::geometry::{group_inv, group_mul, phase_s, symmetry, Point, Triangle};
use dq_core::moyal::{moyal_formal, DiffOp, PolyObservable};
use dq_core::multipliers::{cutoff, taylor_fd, tracial_multiplier};
use dq_core::transforms::{eta_of_xi, twist, twist_inv, twist_jacobian, xi_of_eta, SpectralPoint, TwistParams};
use dq_core::{rng, Complex64, SpaceParams};

fn coord() -> impl Strategy<Value = f64> {
    -2.0..2.0f64
}

fn point(n: usize) -> impl Strategy<Value = Point> {
    (coord(), proptest::collection::vec(coord(), 2 * n), coord()).prop_map(|(a, v, l)| Point::new(a, v, l))
}

fn close(p: &Point, q: &Point, tol: f64) -> bool {
    p.dist(q) <= tol * q.max_abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn group_inverse_and_associativity(x in point(1), y in point(1), z in point(1)) {
        let e = Point::origin(1);
        prop_assert!(close(&group_mul(&x, &group_inv(&x)), &e, 1e-12));
        let l = group_mul(&group_mul(&x, &y), &z);
        let r = group_mul(&x, &group_mul(&y, &z));
        prop_assert!(close(&l, &r, 1e-11));
    }

    #[test]
    fn symmetry_is_involutive_with_fixed_point(x in point(2), y in point(2)) {
        // rounding scales with the intermediate point, which can be large
        let mid = symmetry(&x, &y);
        prop_assert!(symmetry(&x, &mid).dist(&y) <= 1e-12 * mid.max_abs().max(y.max_abs()).max(1.0));
        prop_assert!(close(&symmetry(&x, &x), &x, 1e-12));
    }

    #[test]
    fn symmetries_are_left_covariant(g in point(1), x in point(1), y in point(1)) {
        let lhs = group_mul(&g, &symmetry(&x, &y));
        let rhs = symmetry(&group_mul(&g, &x), &group_mul(&g, &y));
        prop_assert!(close(&lhs, &rhs, 1e-9));
    }

    #[test]
    fn phase_is_cyclic_and_odd_under_swap(x in point(1), y in point(1), z in point(1)) {
        let s = phase_s(&Triangle::new(x.clone(), y.clone(), z.clone()));
        let cyc = phase_s(&Triangle::new(y.clone(), z.clone(), x.clone()));
        let swap = phase_s(&Triangle::new(y.clone(), x.clone(), z.clone()));
        prop_assert!((s - cyc).abs() <= 1e-9 * s.abs().max(1.0));
        prop_assert!((s + swap).abs() <= 1e-9 * s.abs().max(1.0));
    }

    #[test]
    fn twist_round_trip(a in coord(), v0 in coord(), v1 in coord(), xi in -3.0..3.0f64, t in 0.05..1.5f64) {
        let tp = TwistParams { theta: t, n: 1 };
        let p = SpectralPoint { a, v: vec![v0, v1], xi };
        let q = twist_inv(&twist(&p, &tp), &tp);
        prop_assert!((q.xi - xi).abs() < 1e-12 * xi.abs().max(1.0));
        prop_assert!((q.v[0] - v0).abs() < 1e-12 && (q.v[1] - v1).abs() < 1e-12);
        prop_assert!((xi_of_eta(t, eta_of_xi(t, xi)) - xi).abs() < 1e-12 * xi.abs().max(1.0));
    }

    #[test]
    fn twist_jacobian_is_positive(xi in -5.0..5.0f64, t in 0.01..2.0f64, n in 0usize..3) {
        let p = SpectralPoint { a: 0.0, v: vec![0.0; 2 * n], xi };
        let tp = TwistParams { theta: t, n };
        prop_assert!(twist_jacobian(&p, &tp) > 0.0);
    }

    #[test]
    fn tracial_multiplier_without_psi_is_real(xi in -4.0..4.0f64, t in 0.05..1.0f64) {
        // without psi the tracial exponent is real: |exp tau|^2 |Jac| = 1
        let m = tracial_multiplier(SpaceParams::new(1), None);
        let z = m.eval(t, eta_of_xi(t, xi));
        let p = SpectralPoint { a: 0.0, v: vec![0.0; 2], xi };
        prop_assert!(z.im.abs() < 1e-14);
        let tp = TwistParams { theta: t, n: 1 };
        prop_assert!(((2.0 * z.re).exp() * twist_jacobian(&p, &tp) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cutoff_is_a_plateau_bump(t in -3.0..3.0f64) {
        let c = cutoff(t);
        prop_assert!((0.0..=1.0).contains(&c));
        if t.abs() <= 0.5 { prop_assert_eq!(c, 1.0); }
        if t.abs() >= 1.0 { prop_assert_eq!(c, 0.0); }
        prop_assert_eq!(c, cutoff(-t));
    }

    #[test]
    fn taylor_fit_recovers_cubics(c0 in -2.0..2.0f64, c1 in -2.0..2.0f64, c2 in -2.0..2.0f64, c3 in -2.0..2.0f64) {
        let f = |t: f64| Complex64::new(c0 + c1 * t + c2 * t * t + c3 * t * t * t, 0.0);
        let c = taylor_fd(f, 3, 0.05);
        for (k, want) in [c0, c1, c2, c3].into_iter().enumerate() {
            prop_assert!((c[k].re - want).abs() < 1e-6, "k={} got {} want {}", k, c[k].re, want);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn moyal_formal_is_bilinear(seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let u = PolyObservable::random(&mut r, 2, 3);
        let w = PolyObservable::random(&mut r, 2, 3);
        let v = PolyObservable::random(&mut r, 2, 3);
        let lhs = moyal_formal(&u.add(&w), &v, 3).unwrap();
        let a = moyal_formal(&u, &v, 3).unwrap();
        let b = moyal_formal(&w, &v, 3).unwrap();
        for k in 0..=3 {
            prop_assert_eq!(&lhs[k], &a[k].add(&b[k]));
        }
    }

    #[test]
    fn moyal_formal_order_zero_and_one(seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let u = PolyObservable::random(&mut r, 4, 2);
        let v = PolyObservable::random(&mut r, 4, 2);
        let uv = moyal_formal(&u, &v, 1).unwrap();
        let vu = moyal_formal(&v, &u, 1).unwrap();
        prop_assert_eq!(&uv[0], &u.mul(&v));
        // the first-order term is antisymmetric
        prop_assert!(uv[1].add(&vu[1]).is_zero());
    }

    #[test]
    fn diffop_composition_matches_sequential_application(seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let p = PolyObservable::random(&mut r, 2, 4);
        let a = DiffOp::deriv(2, 0, 1).compose(&DiffOp::mul_var(2, 1, 2)).add(&DiffOp::deriv(2, 1, 2));
        let b = DiffOp::mul_var(2, 0, 1).compose(&DiffOp::deriv(2, 1, 1));
        prop_assert_eq!(a.compose(&b).apply(&p), a.apply(&b.apply(&p)));
    }

    #[test]
    fn coboundaries_square_to_zero(x in point(1), y in point(1), z in point(1), w in point(1)) {
        let f = Cochain::new(2, |p: &[Point]| Complex64::new((p[0].a - p[1].l).sin(), p[0].l * p[1].a)).unwrap();
        let pts = [x, y, z, w];
        let scale = pts.iter().map(|p| p.max_abs()).fold(1.0, f64::max).powi(2);
        prop_assert!(coboundary(&coboundary(&f)).eval(&pts).unwrap().norm() <= 1e-12 * scale);
        prop_assert!(coboundary_op(&coboundary_op(&f)).eval(&pts).unwrap().norm() <= 1e-12 * scale);
    }

    #[test]
    fn multiplier_term_exponentiates_to_ratio(x in point(0), y in point(0), z in point(0)) {
        let g: Arc<ScalarFn> = Arc::new(|t: f64| Complex64::new(0.2 * t * t, (0.7 * t).sin()));
        let tri = [x, y, z];
        let lhs = multiplier_three_point(g.clone()).eval(&tri).unwrap().exp();
        let rhs = heuristic_ratio(g.as_ref(), &tri);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }
}
