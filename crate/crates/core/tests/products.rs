use std::f64::consts::PI;
use std::sync::Arc;

use dq_core::multipliers::{borel_realize, tracial_multiplier, CutoffSchedule, Multiplier, Tau, XiFn};
use dq_core::products::{
    asymptotic_compare, calibrate_kernel_constant, kernel_constant, star, star_kernel, star_pipeline, trace_symmetry_check, ProductConfig, Route,
};
use dq_core::verify::{non_tracial_witness, product_inputs, PRODUCT_BOUNDARY_TOL};
use dq_core::{Complex64, GridFunction, GridSpec, SpaceParams};

const SWEEP: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

fn setup() -> (ProductConfig, [GridFunction; 3]) {
    let spec = GridSpec::cube(0, -6.0, 6.0, 128).unwrap();
    let cfg = ProductConfig::new(SpaceParams::new(0), 0.5, spec.clone()).unwrap();
    (cfg, product_inputs(&spec).unwrap())
}

fn log_one_plus_sq() -> Vec<Arc<XiFn>> {
    vec![Arc::new(|_| Complex64::new(0.0, 0.0)), Arc::new(|x: f64| Complex64::new((1.0 + x * x).ln(), 0.0))]
}

#[test]
fn kernel_constants_are_frozen() {
    assert_eq!(kernel_constant(0), PI.powi(-2));
    assert_eq!(kernel_constant(1), PI.powi(-4) / 4.0);
}

#[test]
fn calibration_reproduces_the_frozen_constant() {
    let (cfg, [u, v, _]) = setup();
    let c = calibrate_kernel_constant(&u, &v, &cfg).unwrap();
    assert!((c.re / kernel_constant(0) - 1.0).abs() < 1e-5, "{c}");
    assert!(c.im.abs() < 1e-6 * c.re);
}

#[test]
fn tau_one_and_zero_multiplier_agree_bitwise() {
    let (cfg, [u, v, _]) = setup();
    let a = star_pipeline(&u, &v, &cfg).unwrap();
    let b = star_pipeline(&u, &v, &cfg.clone().with_tau(Tau::Multiplier(Multiplier::zero()))).unwrap();
    let bits = |f: &GridFunction| f.values().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn routes_agree_for_one_tracial_and_borel() {
    let (cfg, [u, v, _]) = setup();
    let one = star_kernel(&u, &v, &cfg.clone().with_route(Route::Kernel)).unwrap();
    assert!(one.rel_l2(&star_pipeline(&u, &v, &cfg).unwrap()).unwrap() < 1e-5);

    let tcfg = cfg.clone().with_tau(Tau::Multiplier(tracial_multiplier(SpaceParams::new(0), None)));
    let tk = star_kernel(&u, &v, &tcfg.clone().with_route(Route::TracialKernel)).unwrap();
    assert!(tk.rel_l2(&star_pipeline(&u, &v, &tcfg).unwrap()).unwrap() < 1e-5);

    let bcfg = cfg.with_tau(Tau::Multiplier(borel_realize(log_one_plus_sq(), CutoffSchedule::default()).unwrap()));
    let bk = star_kernel(&u, &v, &bcfg.clone().with_route(Route::Kernel)).unwrap();
    assert!(bk.rel_l2(&star_pipeline(&u, &v, &bcfg).unwrap()).unwrap() < 1e-3);
}

#[test]
fn pipeline_is_associative_for_tracial_tau() {
    let (cfg, [u, v, w]) = setup();
    let cfg = cfg.with_tau(Tau::Multiplier(tracial_multiplier(SpaceParams::new(0), None)));
    let outer = cfg.clone().with_boundary_tol(PRODUCT_BOUNDARY_TOL);
    let l = star(&star(&u, &v, &cfg).unwrap(), &w, &outer).unwrap();
    let r = star(&u, &star(&v, &w, &cfg).unwrap(), &outer).unwrap();
    assert!(l.rel_l2(&r).unwrap() < 1e-4);
}

#[test]
fn kernel_route_is_associative() {
    let (cfg, [u, v, w]) = setup();
    let k = cfg.with_route(Route::Kernel).with_boundary_tol(PRODUCT_BOUNDARY_TOL);
    let l = star(&star(&u, &v, &k).unwrap(), &w, &k).unwrap();
    let r = star(&u, &star(&v, &w, &k).unwrap(), &k).unwrap();
    assert!(l.rel_l2(&r).unwrap() < 1e-4);
}

#[test]
fn trace_is_symmetric_for_every_multiplier_but_closed_only_for_tracial() {
    let (cfg, [u, v, _]) = setup();
    let tr = trace_symmetry_check(&cfg.clone().with_tau(Tau::Multiplier(tracial_multiplier(SpaceParams::new(0), None))), &u, &v).unwrap();
    assert!(tr.all_passed());
    let nt = trace_symmetry_check(&cfg.with_tau(Tau::Multiplier(non_tracial_witness())), &u, &v).unwrap();
    // int T(W) = exp(tau(0)) int W and the Weyl product is tracial, so symmetry survives
    assert!(nt.get("trace.symmetry").unwrap().residual < 1e-10);
    assert!(nt.get("trace.closed").unwrap().residual > 1e-3);
    assert!(nt.get("trace.unitary").unwrap().residual > 1e-3);
}

#[test]
fn borel_multiplier_shifts_the_first_order_term() {
    let (cfg, [u, v, _]) = setup();
    let m = borel_realize(log_one_plus_sq(), CutoffSchedule::default()).unwrap();
    let with_shift = asymptotic_compare(&cfg.clone().with_tau(Tau::Multiplier(m.clone())), &u, &v, 1, &SWEEP).unwrap();
    assert!(with_shift.report.all_passed(), "{:?}", with_shift.report);
    assert!(with_shift.extrapolated[1] > 1.9);
    // same values, Taylor data without the c1 term: the order-1 remainder stays O(theta)
    let zero: Arc<XiFn> = Arc::new(|_| Complex64::new(0.0, 0.0));
    let blind = Multiplier::new("no shift", move |t, x| m.eval(t, x)).with_taylor(vec![zero.clone(), zero]);
    let without = asymptotic_compare(&cfg.with_tau(Tau::Multiplier(blind)), &u, &v, 1, &SWEEP).unwrap();
    assert!(without.extrapolated[1] < 1.2);
}

#[test]
fn weyl_expansion_orders() {
    let (cfg, [u, v, _]) = setup();
    let a = asymptotic_compare(&cfg, &u, &v, 2, &SWEEP).unwrap();
    assert!(a.report.all_passed(), "{:?}", a.report);
    for (k, e) in a.extrapolated.iter().enumerate() {
        assert!((e - (k + 1) as f64).abs() < 0.1, "order {k}: {e}");
    }
}

#[test]
fn invalid_requests_are_rejected() {
    let (cfg, [u, v, _]) = setup();
    assert!(asymptotic_compare(&cfg, &u, &v, 3, &SWEEP).is_err());
    assert!(asymptotic_compare(&cfg, &u, &v, 1, &[0.1, 0.05]).is_err());
    let tr = cfg.clone().with_tau(Tau::Multiplier(tracial_multiplier(SpaceParams::new(0), None)));
    assert!(asymptotic_compare(&tr, &u, &v, 1, &SWEEP).is_err());
    let wide = GridSpec::cube(0, -2.0, 2.0, 32).unwrap();
    let fat = GridFunction::gaussian(&wide, &[0.0, 0.0], 1.5, Complex64::new(1.0, 0.0)).unwrap();
    let wcfg = ProductConfig::new(SpaceParams::new(0), 0.5, wide).unwrap();
    assert!(star(&fat, &fat, &wcfg).is_err());
}
