//! Named verification suites. Every entry carries a short descriptive anchor of the
//! property it tests; parameters are explicit so that callers can pin them.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{build_solvable_algebra, build_transvection_algebra, check_symmetric_triple, invariant_h2_dimension, invariant_two_vectors, SpaceParams};
use crate::cochains::{admissibility_check, coboundary, coboundary_op, heuristic_ratio, multiplier_three_point, Cochain, ScalarFn};
use crate::error::{Error, Result};
use crate::geometry::{amplitude_a1, amplitude_acan, conjugated_symmetry, loos_connection_richardson, phase_s, symmetry, Point, Triangle};
use crate::moyal::{expand_t_inverse, formal_transported_product, moyal_formal, moyal_numeric, PolyObservable};
use crate::multipliers::{borel_realize, check_theta_membership, taylor_fd, tracial_multiplier, CutoffSchedule, Multiplier, Tau, XiFn};
use crate::products::{asymptotic_compare, covariance_residual, inner_product, richardson_slope, star, star_kernel, star_pipeline, trace_symmetry_check, ProductConfig, Route};
use crate::report::Report;
use crate::rng;
use crate::transforms::{partial_fourier, partial_fourier_inv, twist, twist_inv, twist_jacobian, Axis, AxisRole, Direction, GridFunction, GridSpec, SpectralPoint, Transport, TwistParams};

pub const SUITES: [&str; 7] = ["algebra", "geometry", "cochains", "transforms", "moyal", "multipliers", "products"];

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub n: usize,
    pub theta: f64,
    /// points per axis of the square `n = 0` grids
    pub grid: usize,
    pub seed: u64,
    pub tau: Tau,
    pub route: Route,
    pub samples: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { n: 0, theta: 0.5, grid: 128, seed: 7, tau: Tau::One, route: Route::Pipeline, samples: 1000 }
    }
}

pub fn run_suite(name: &str, o: &SuiteOptions) -> Result<Report> {
    match name {
        "algebra" => algebra_suite(o.n, 64),
        "geometry" => {
            let mut r = symmetric_space_axioms(o.n, o.samples, o.seed);
            r.extend(connection_checks(o.n, 20, o.seed)?);
            Ok(r)
        }
        "cochains" => {
            let mut r = phase_identities(o.n, o.samples, o.seed)?;
            r.extend(cochain_identities(o.n, o.samples, o.seed)?);
            Ok(r)
        }
        "transforms" => transforms_suite(o),
        "moyal" => moyal_suite(o),
        "multipliers" => multipliers_suite(o.n),
        "products" => products_suite(o),
        _ => Err(Error::InvalidArgument(format!("unknown suite {name:?}"))),
    }
}

/// Runs the named suites (or all of them for `"all"`), sorted by check id.
pub fn run_suites(names: &[String], o: &SuiteOptions) -> Result<Report> {
    let list: Vec<&str> = if names.iter().any(|s| s == "all") { SUITES.to_vec() } else { names.iter().map(String::as_str).collect() };
    let mut rep = Report::new();
    for s in list {
        rep.extend(run_suite(s, o)?);
    }
    rep.sort();
    Ok(rep)
}

fn rel(a: &Point, b: &Point) -> f64 {
    a.dist(b) / b.max_abs().max(1.0)
}

/// `s_x s_x y = y`, `s_x x = x`, `s_x s_y s_x = s_{s_x y}` and `s_x = L_x s_o L_x^{-1}`
/// at random points with `|coords| <= 2`; residuals relative to `max(1, |result|)`,
/// and for the involution to the intermediate `s_x y` as well.
pub fn symmetric_space_axioms(n: usize, samples: usize, seed: u64) -> Report {
    let mut r = rng::seeded(seed);
    let (mut inv, mut fix, mut triple, mut conj): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        let x = rng::point(&mut r, n, 2.0);
        let y = rng::point(&mut r, n, 2.0);
        let z = rng::point(&mut r, n, 2.0);
        let mid = symmetry(&x, &y);
        inv = inv.max(symmetry(&x, &mid).dist(&y) / mid.max_abs().max(y.max_abs()).max(1.0));
        fix = fix.max(rel(&symmetry(&x, &x), &x));
        let lhs = symmetry(&x, &symmetry(&y, &symmetry(&x, &z)));
        let rhs = symmetry(&symmetry(&x, &y), &z);
        triple = triple.max(rel(&lhs, &rhs));
        conj = conj.max(rel(&conjugated_symmetry(&x, &y), &symmetry(&x, &y)));
    }
    let mut rep = Report::new();
    rep.at_most("geometry.involution", "s_x is involutive", inv, 1e-12);
    rep.at_most("geometry.fixed_point", "x is a fixed point of s_x", fix, 1e-12);
    rep.at_most("geometry.triple", "s_x s_y s_x = s_{s_x y}", triple, 1e-9);
    rep.at_most("geometry.conjugation", "s_x is the conjugate of s_o by the group", conj, 1e-9);
    rep
}

/// Torsion and parallelism of the symplectic form for the Loos connection.
pub fn connection_checks(n: usize, points: usize, seed: u64) -> Result<Report> {
    let mut r = rng::seeded(seed ^ 0xc0);
    let (mut tor, mut nab): (f64, f64) = (0.0, 0.0);
    for _ in 0..points {
        let x = rng::point(&mut r, n, 1.0);
        let c = loos_connection_richardson(&x, 1e-3)?;
        tor = tor.max(c.torsion_residual);
        nab = nab.max(c.nabla_omega_residual);
    }
    let mut rep = Report::new();
    rep.at_most("connection.torsion", "canonical torsion-free connection", tor, 1e-6);
    rep.at_most("connection.parallel_omega", "the symplectic form is parallel", nab, 1e-6);
    Ok(rep)
}

/// Symmetric-triple identities, invariant bivectors and invariant second cohomology.
pub fn algebra_suite(n: usize, samples: usize) -> Result<Report> {
    let params = SpaceParams::new(n);
    let mut rep = check_symmetric_triple(&build_transvection_algebra(params))?;
    let s = build_solvable_algebra(params);
    rep.at_most("algebra.solvable_jacobi", "Jacobi identity of the solvable algebra", s.jacobi_residual(), 1e-12);
    let zh = s.derived_center()?;
    let e_part = if zh.ncols() == 1 { 1.0 - zh[(s.dim - 1, 0)].abs() } else { f64::INFINITY };
    rep.at_most("algebra.heisenberg_center", "centre of the derived ideal is spanned by E", e_part, 1e-12)
        .with_note(format!("centre of s has dimension {}", s.center()?.ncols()));
    if n >= 1 {
        let inv = invariant_two_vectors(params, samples, 1e-9)?;
        rep.at_most("algebra.bivector_dim", "invariant bivectors", (inv.dimension as f64 - (1 + 2 * n) as f64).abs(), 0.0)
            .with_note(format!("dimension {}", inv.dimension));
        rep.at_least("algebra.bivector_gap", "singular-value gap of the invariance system", inv.gap, 10.0);
        let h2 = invariant_h2_dimension(params, samples, 1e-9)?;
        rep.at_most("algebra.h2_dim", "invariant second cohomology vanishes", h2 as f64, 0.0);
    } else {
        rep.degenerate = true;
    }
    Ok(rep)
}

fn triangles(n: usize, samples: usize, seed: u64) -> Vec<[Point; 3]> {
    let mut r = rng::seeded(seed ^ 0x7a);
    (0..samples).map(|_| [rng::point(&mut r, n, 2.0), rng::point(&mut r, n, 2.0), rng::point(&mut r, n, 2.0)]).collect()
}

/// Diagonal invariance of `S`, `A_1`, `A_can` and admissibility of `S`.
pub fn phase_identities(n: usize, samples: usize, seed: u64) -> Result<Report> {
    let tris = triangles(n, samples, seed);
    let mut r = rng::seeded(seed ^ 0x5);
    let (mut ds, mut da1, mut dac): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for t in &tris {
        let w = rng::point(&mut r, n, 2.0);
        let tri = Triangle::new(t[0].clone(), t[1].clone(), t[2].clone());
        let moved = tri.map(|p| symmetry(&w, p));
        let s0 = phase_s(&tri);
        ds = ds.max((phase_s(&moved) - s0).abs() / s0.abs().max(1.0));
        let a = amplitude_a1(&tri);
        da1 = da1.max((amplitude_a1(&moved) - a).abs() / a);
        let c = amplitude_acan(&tri);
        dac = dac.max((amplitude_acan(&moved) - c).abs() / c);
    }
    let mut rep = Report::new();
    rep.at_most("phase.invariance", "S is invariant under the diagonal action", ds, 1e-9);
    rep.at_most("amplitude.a1_invariance", "A_1 is invariant under the diagonal action", da1, 1e-9);
    rep.at_most("amplitude.acan_invariance", "A_can is invariant under the diagonal action", dac, 1e-9);
    let s = Cochain::new(3, |p: &[Point]| Complex64::new(phase_s(&Triangle::new(p[0].clone(), p[1].clone(), p[2].clone())), 0.0))?;
    rep.extend(admissibility_check(&s, &tris)?);
    Ok(rep)
}

/// `delta^2 = 0`, `delta_op^2 = 0` and the multiplier three-point function against
/// the ratio of two-point factors.
pub fn cochain_identities(n: usize, samples: usize, seed: u64) -> Result<Report> {
    let f = Cochain::new(2, |p: &[Point]| {
        let (x, y) = (&p[0], &p[1]);
        Complex64::new((x.a - 0.5 * y.l).sin() + x.l * y.a, (x.a * y.a).cos() + x.v.iter().zip(&y.v).map(|(a, b)| a * b).sum::<f64>())
    })?;
    let dd = coboundary(&coboundary(&f));
    let oo = coboundary_op(&coboundary_op(&f));
    let mut r = rng::seeded(seed ^ 0xd);
    let (mut e1, mut e2, mut e3): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let g: Arc<ScalarFn> = Arc::new(|t: f64| Complex64::new(0.3 * t * t - 0.1 * t, (1.3 * t).sin()));
    let m = multiplier_three_point(g.clone());
    for _ in 0..samples {
        let pts: Vec<Point> = (0..4).map(|_| rng::point(&mut r, n, 2.0)).collect();
        let scale = pts.iter().map(|p| p.max_abs()).fold(1.0, f64::max).powi(2);
        e1 = e1.max(dd.eval(&pts)?.norm() / scale);
        e2 = e2.max(oo.eval(&pts)?.norm() / scale);
        let tri = &pts[..3];
        let lhs = m.eval(tri)?.exp();
        let rhs = heuristic_ratio(g.as_ref(), tri);
        e3 = e3.max((lhs - rhs).norm() / rhs.norm());
    }
    let mut rep = Report::new();
    rep.at_most("cochain.delta_squared", "delta squares to zero", e1, 1e-12);
    rep.at_most("cochain.delta_op_squared", "delta_op squares to zero", e2, 1e-12);
    rep.at_most("cochain.multiplier_ratio", "exp of the three-point multiplier term equals the two-point ratio", e3, 1e-12);
    Ok(rep)
}

/// A Gaussian with boundary decay suited to the default `n = 0` grids.
fn bump(spec: &GridSpec, center: &[f64], width: f64) -> Result<GridFunction> {
    GridFunction::gaussian(spec, center, width, Complex64::new(1.0, 0.0))
}

fn center(n: usize, a: f64, l: f64, v: f64) -> Vec<f64> {
    let mut c = vec![a];
    c.extend((0..2 * n).map(|i| if i % 2 == 0 { v } else { -0.5 * v }));
    c.push(l);
    c
}

/// Partial Fourier transform, twisting map and transport operators (`n = 0` grid).
pub fn transforms_suite(o: &SuiteOptions) -> Result<Report> {
    let mut rep = Report::new();
    let spec = GridSpec::cube(0, -8.0, 8.0, o.grid.max(64))?;
    let g = GridFunction::from_fn(&spec, |x| Complex64::new((-0.5 * x[1] * x[1]).exp() * (-0.5 * x[0] * x[0]).exp(), 0.0));
    let gh = partial_fourier(&g)?;
    let oracle = GridFunction::new(
        spec.clone(),
        crate::transforms::Space::Fourier,
        (0..spec.len()).map(|i| {
            let c = spec.coords_of(i, crate::transforms::Space::Fourier);
            Complex64::new((2.0 * std::f64::consts::PI).sqrt() * (-0.5 * c[1] * c[1]).exp() * (-0.5 * c[0] * c[0]).exp(), 0.0)
        }).collect(),
    )?;
    let err = gh.values().iter().zip(oracle.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    rep.at_most("fourier.gaussian", "partial Fourier transform in l of a Gaussian", err, 1e-8);
    let back = partial_fourier_inv(&gh)?;
    rep.at_most("fourier.round_trip", "inverse partial Fourier transform", back.rel_l2(&g)?, 1e-10);
    let parseval = gh.norm_l2().powi(2) / (2.0 * std::f64::consts::PI * g.norm_l2().powi(2));
    rep.at_most("fourier.parseval", "Plancherel for the partial Fourier transform", (parseval - 1.0).abs(), 1e-10);

    // twisting map
    let mut r = rng::seeded(o.seed ^ 0x71);
    let (mut rt, mut jac): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        for &t in &[0.3, 1.0] {
            let tp = TwistParams { theta: t, n: 1 };
            let p = SpectralPoint { a: r.gen_range(-2.0..2.0), v: vec![r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)], xi: r.gen_range(-2.0..2.0) };
            let q = twist_inv(&twist(&p, &tp), &tp);
            rt = rt.max((q.a - p.a).abs().max((q.xi - p.xi).abs()).max(q.v.iter().zip(&p.v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)));
            let fd = fd_twist_det(&p, &tp);
            jac = jac.max((fd - twist_jacobian(&p, &tp)).abs() / fd.abs());
        }
    }
    rep.at_most("twist.round_trip", "twisting map inverts exactly", rt, 1e-12);
    rep.at_most("twist.jacobian", "closed-form Jacobian of the twisting map", jac, 1e-6);

    // transport: the forward map spreads the spectrum logarithmically, so l gets a fine axis
    let tspec = GridSpec::new(vec![Axis::new(AxisRole::A, -8.0, 8.0, 64)?, Axis::new(AxisRole::L, -10.0, 10.0, 1024)?])?;
    let u = bump(&tspec, &[0.3, -0.2], 1.4)?;
    let tp = TwistParams { theta: 0.5 * o.theta, n: 0 };
    let t = Transport::new(tp, Tau::One);
    let rt = t.apply(&t.apply(&u, Direction::Forward)?, Direction::Inverse)?;
    rep.at_most("transport.round_trip", "T^{-1} T = id on grids", rt.rel_l2(&u)?, 1e-5);
    let tr = Transport::new(tp, Tau::Multiplier(tracial_multiplier(SpaceParams::new(0), None)));
    let tu = tr.apply(&u, Direction::Forward)?;
    rep.at_most("transport.unitary", "tracial transport is L2-unitary", (tu.norm_l2() / u.norm_l2() - 1.0).abs(), 1e-6);
    let slope = t_inverse_slope(&u, &[0.4, 0.2, 0.1, 0.05])?;
    rep.at_most("transport.second_order", "|T^{-1} u - u| decays like theta^2", (slope - 2.0).abs(), 0.2)
        .with_note(format!("slope {slope:.4}"));
    Ok(rep)
}

fn fd_twist_det(p: &SpectralPoint, tp: &TwistParams) -> f64 {
    let h = 1e-6;
    let to_vec = |q: &SpectralPoint| {
        let mut v = vec![q.a];
        v.extend(&q.v);
        v.push(q.xi);
        v
    };
    let from = |c: &[f64]| SpectralPoint { a: c[0], v: c[1..c.len() - 1].to_vec(), xi: c[c.len() - 1] };
    let base = to_vec(p);
    let dim = base.len();
    let m = nalgebra::DMatrix::from_fn(dim, dim, |i, j| {
        let mut up = base.clone();
        let mut dn = base.clone();
        up[j] += h;
        dn[j] -= h;
        (to_vec(&twist(&from(&up), tp))[i] - to_vec(&twist(&from(&dn), tp))[i]) / (2.0 * h)
    });
    m.determinant()
}

/// Extrapolated order of `|T^{-1}_t u - u|` in the twist parameter `t`.
pub fn t_inverse_slope(u: &GridFunction, ts: &[f64]) -> Result<f64> {
    let samples = ts
        .iter()
        .map(|&t| {
            let tr = Transport::new(TwistParams { theta: t, n: u.spec().n() }, Tau::One);
            Ok((t, tr.apply(u, Direction::Inverse)?.sub(u)?.norm_l2()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(richardson_slope(&samples))
}

/// `2 exp(-(a^2 + l^2) / theta) *0 itself = itself` (`n = 0`).
pub fn idempotent_residual(theta: f64, points: usize, half_width: f64) -> Result<f64> {
    let spec = GridSpec::cube(0, -half_width, half_width, points)?;
    let g = GridFunction::from_fn(&spec, |x| Complex64::new(2.0 * (-(x[0] * x[0] + x[1] * x[1]) / theta).exp(), 0.0));
    moyal_numeric(&g, &g, theta)?.rel_l2(&g)
}

/// Gaussian `exp(-((a - ca)^2 + (l - cl)^2) / (2 s^2))` with its analytic gradient.
struct Bump {
    ca: f64,
    cl: f64,
    s: f64,
}

impl Bump {
    fn value(&self, a: f64, l: f64) -> f64 {
        (-((a - self.ca).powi(2) + (l - self.cl).powi(2)) / (2.0 * self.s * self.s)).exp()
    }

    fn grad(&self, a: f64, l: f64) -> (f64, f64) {
        let f = self.value(a, l);
        (-(a - self.ca) / (self.s * self.s) * f, -(l - self.cl) / (self.s * self.s) * f)
    }
}

/// Extrapolated order of `|(u*v - v*u)/(i theta) - {u, v}|` over the sweep (`n = 0`).
pub fn commutator_slope(thetas: &[f64], points: usize, half_width: f64) -> Result<(f64, Vec<f64>)> {
    let spec = GridSpec::cube(0, -half_width, half_width, points)?;
    let bu = Bump { ca: 0.3, cl: -0.2, s: 0.8 };
    let bv = Bump { ca: -0.4, cl: 0.5, s: 1.0 };
    let u = GridFunction::from_fn(&spec, |x| Complex64::new(bu.value(x[0], x[1]), 0.0));
    let v = GridFunction::from_fn(&spec, |x| Complex64::new(bv.value(x[0], x[1]), 0.0));
    // {u, v} = d_a u d_l v - d_l u d_a v
    let pb = GridFunction::from_fn(&spec, |x| {
        let (ua, ul) = bu.grad(x[0], x[1]);
        let (va, vl) = bv.grad(x[0], x[1]);
        Complex64::new(ua * vl - ul * va, 0.0)
    });
    let mut res = Vec::new();
    for &t in thetas {
        let c = moyal_numeric(&u, &v, t)?.sub(&moyal_numeric(&v, &u, t)?)?.scale(Complex64::new(0.0, -1.0 / t));
        res.push(c.rel_l2(&pb)?);
    }
    let samples: Vec<(f64, f64)> = thetas.iter().copied().zip(res.iter().copied()).collect();
    Ok((richardson_slope(&samples), res))
}

/// Exact associativity defect of the formal Moyal product through `order` on random
/// polynomials; returns the number of nonzero coefficients of the defect.
pub fn formal_associativity_defect(n: usize, degree: u32, order: usize, seed: u64) -> Result<usize> {
    let dim = 2 * n + 2;
    let mut r = rng::seeded(seed);
    let u = PolyObservable::random(&mut r, dim, degree);
    let v = PolyObservable::random(&mut r, dim, degree);
    let w = PolyObservable::random(&mut r, dim, degree);
    let uv = moyal_formal(&u, &v, order)?;
    let vw = moyal_formal(&v, &w, order)?;
    let lhs = crate::moyal::moyal_series(&uv, std::slice::from_ref(&w), order)?;
    let rhs = crate::moyal::moyal_series(std::slice::from_ref(&u), &vw, order)?;
    Ok(lhs.iter().zip(&rhs).map(|(a, b)| a.sub(b).terms().count()).sum())
}

pub fn moyal_suite(o: &SuiteOptions) -> Result<Report> {
    let mut rep = Report::new();
    for theta in [0.5, 1.0] {
        let e = idempotent_residual(theta, o.grid.max(64), 6.0)?;
        rep.at_most(&format!("moyal.idempotent_{theta}"), "Gaussian 2 exp(-|x|^2 / theta) is a Weyl idempotent", e, 1e-6);
    }
    let (slope, res) = commutator_slope(&[0.4, 0.2, 0.1, 0.05], o.grid.max(64), 8.0)?;
    rep.at_most("moyal.commutator", "Weyl commutator over i theta tends to the Poisson bracket", (slope - 2.0).abs(), 0.2)
        .with_note(format!("slope {slope:.4}, residuals {res:?}"));
    // bump tails must be periodic to 1e-12 for the Fourier-side guard
    let spec = GridSpec::cube(0, -8.0, 8.0, o.grid.max(64))?;
    let u = bump(&spec, &[0.2, 0.1], 0.8)?;
    let v = bump(&spec, &[-0.3, 0.4], 0.9)?;
    let lhs = moyal_numeric(&u, &v, o.theta)?.integral();
    let rhs = u.mul(&v)?.integral();
    rep.at_most("moyal.trace", "integral of the Weyl product equals integral of uv", (lhs - rhs).norm() / rhs.norm(), 1e-6);
    let w = bump(&spec, &[0.1, -0.5], 0.7)?;
    let l = moyal_numeric(&moyal_numeric(&u, &v, o.theta)?, &w, o.theta)?;
    let r = moyal_numeric(&u, &moyal_numeric(&v, &w, o.theta)?, o.theta)?;
    rep.at_most("moyal.associativity", "Weyl product is associative on grids", l.rel_l2(&r)?, 1e-4);
    let defect = formal_associativity_defect(o.n.min(1), 3, 4, o.seed)?;
    rep.at_most("moyal.formal_associativity", "formal Moyal series is associative", defect as f64, 0.0);
    let params = SpaceParams::new(o.n.min(1));
    let dim = params.dim_m();
    let mut rr = rng::seeded(o.seed ^ 0xf0);
    let p = PolyObservable::random(&mut rr, dim, 3);
    let q = PolyObservable::random(&mut rr, dim, 3);
    let e = expand_t_inverse(params, 3)?.rescale(num_rational::Ratio::new(1, 2));
    let tp = formal_transported_product(&p, &q, &e, 3)?;
    let mp = moyal_formal(&p, &q, 1)?;
    rep.flag("moyal.transported_order1", "transported formal product starts as uv + (i theta / 2){u, v}", tp[0] == p.mul(&q) && tp[1] == mp[1]);
    rep.flag("moyal.t_inverse_odd", "odd coefficients of the formal inverse transport vanish", e.coeff(1).is_zero() && e.coeff(3).is_zero());
    Ok(rep)
}

/// `c_k(xi) = xi^k / k!` for `k = 1..=4`.
pub fn polynomial_borel_coefficients() -> Vec<Arc<XiFn>> {
    let mut c: Vec<Arc<XiFn>> = vec![Arc::new(|_| Complex64::new(0.0, 0.0))];
    for k in 1..=4 {
        let f = (1..=k).product::<i32>() as f64;
        c.push(Arc::new(move |x: f64| Complex64::new(x.powi(k) / f, 0.0)));
    }
    c
}

/// Worst relative mismatch of FD Taylor coefficients of a Borel realisation.
pub fn borel_taylor_mismatch(coeffs: Vec<Arc<XiFn>>, schedule: CutoffSchedule) -> Result<f64> {
    let order = coeffs.len() - 1;
    let m = borel_realize(coeffs.clone(), schedule)?;
    let h = 0.45 * schedule.eps(order) / (order as f64 + 2.0);
    let mut worst: f64 = 0.0;
    for xi in [-2.0, -0.7, 0.5, 1.5, 3.0] {
        let fit = taylor_fd(|t| m.eval(t, xi), order, h);
        for (k, c) in coeffs.iter().enumerate() {
            let target = c(xi);
            worst = worst.max((fit[k] - target).norm() / target.norm().max(1e-3));
        }
    }
    Ok(worst)
}

pub fn multipliers_suite(n: usize) -> Result<Report> {
    let mut rep = Report::new();
    let params = SpaceParams::new(n);
    let thetas = [0.5, 0.2];
    let zero = check_theta_membership(&Tau::One, &thetas, 4.0);
    rep.flag("multiplier.zero_member", "tau = 0 belongs to the multiplier class", zero.all_passed());
    let quad = Tau::Multiplier(Multiplier::new("theta xi^2", |t, x| Complex64::new(t * x * x, 0.0)));
    let q = check_theta_membership(&quad, &thetas, 4.0);
    rep.flag("multiplier.quadratic_rejected", "theta xi^2 fails the rescaled-limit condition", !q.get("multiplier.rescaled_limit").is_none_or(|c| c.passed));
    let tr = Tau::Multiplier(tracial_multiplier(params, None));
    let t = check_theta_membership(&tr, &thetas, 4.0);
    rep.flag("multiplier.tracial_growth", "tracial exp(tau) has polynomial growth", t.get("multiplier.growth").is_some_and(|c| c.passed));
    // the rescaled limit of the tracial multiplier is -(1/2) log(cosh 2s / cosh^{2n} s), not 0
    let limit_ok = t.get("multiplier.rescaled_limit").is_some_and(|c| c.passed);
    rep.flag("multiplier.tracial_rescaled_limit_nonzero", "tracial multiplier has a nonzero rescaled limit", !limit_ok)
        .with_note("the tracial multiplier has a nonvanishing rescaled limit; condition (ii) fails for it");
    // |exp tau|^2 |Jac phi| = 1
    let m = tracial_multiplier(params, None);
    let mut worst: f64 = 0.0;
    for i in -40..=40 {
        let xi = i as f64 * 0.1;
        for &th in &[0.3, 1.0] {
            let p = SpectralPoint { a: 0.0, v: vec![0.0; 2 * n], xi };
            let eta = crate::transforms::eta_of_xi(th, xi);
            let val = m.eval(th, eta).exp().norm_sqr() * twist_jacobian(&p, &TwistParams { theta: th, n });
            worst = worst.max((val - 1.0).abs());
        }
    }
    rep.at_most("multiplier.tracial_condition", "|exp tau|^2 times the twist Jacobian is 1", worst, 1e-12);
    let mismatch = borel_taylor_mismatch(polynomial_borel_coefficients(), CutoffSchedule::default())?;
    rep.at_most("multiplier.borel_taylor", "Borel realization reproduces its Taylor coefficients", mismatch, 1e-4);
    Ok(rep)
}

/// Fourier-side guard for products taking an earlier product as input: the
/// forward transport leaves spectral tails decaying only like `exp(-c asinh(xi)^2)`.
pub const PRODUCT_BOUNDARY_TOL: f64 = 1e-5;

/// Inputs for the product battery: three Gaussians on the square grid.
pub fn product_inputs(spec: &GridSpec) -> Result<[GridFunction; 3]> {
    let n = spec.n();
    Ok([
        GridFunction::gaussian(spec, &center(n, 0.3, -0.2, 0.2), 0.6, Complex64::new(1.0, 0.0))?,
        GridFunction::gaussian(spec, &center(n, -0.2, 0.2, -0.1), 0.65, Complex64::new(0.8, 0.3))?,
        GridFunction::gaussian(spec, &center(n, 0.1, 0.1, 0.3), 0.55, Complex64::new(1.0, -0.2))?,
    ])
}

pub fn products_suite(o: &SuiteOptions) -> Result<Report> {
    let mut rep = Report::new();
    let spec = GridSpec::cube(0, -6.0, 6.0, o.grid)?;
    let cfg = ProductConfig::new(SpaceParams::new(0), o.theta, spec.clone())?.with_tau(o.tau.clone());
    let [u, v, w] = product_inputs(&spec)?;
    let uv = star_pipeline(&u, &v, &cfg)?;
    let outer = cfg.clone().with_boundary_tol(PRODUCT_BOUNDARY_TOL);
    let l = star_pipeline(&uv, &w, &outer)?;
    let r = star_pipeline(&u, &star_pipeline(&v, &w, &cfg)?, &outer)?;
    rep.at_most("products.associativity", "transported product is associative", l.rel_l2(&r)?, 1e-4);
    let k = star_kernel(&u, &v, &cfg.clone().with_route(Route::Kernel))?;
    rep.at_most("products.kernel_vs_pipeline", "oscillatory kernel agrees with the transport route", k.rel_l2(&uv)?, 1e-3);
    // the l-shift of s_w grows like l_w cosh(2(a_w - a)); keep it inside the window
    let wpt = Point::new(0.1, vec![], 5e-5);
    rep.at_most("products.covariance", "product commutes with symmetry pullbacks", covariance_residual(&u, &v, &wpt, &cfg)?, 1e-3);
    let lhs = inner_product(&star(&u, &w, &cfg)?, &v, &outer)?;
    let rhs = inner_product(&u, &star(&v, &w.conj(), &cfg)?, &outer)?;
    rep.at_most("products.hilbert_compatibility", "(u*w | v) = (u | v*conj(w))", (lhs - rhs).norm() / lhs.norm(), 1e-6);
    let ip = inner_product(&u, &v, &cfg)?;
    let moved = inner_product(&crate::transforms::symmetry_pullback(&u, &wpt)?, &crate::transforms::symmetry_pullback(&v, &wpt)?, &cfg)?;
    rep.at_most("products.inner_invariance", "inner product is invariant under symmetries", (moved - ip).norm() / ip.norm(), 1e-6);
    let tcfg = cfg.clone().with_tau(Tau::Multiplier(tracial_multiplier(SpaceParams::new(0), None)));
    rep.extend(trace_symmetry_check(&tcfg, &u, &v)?);
    let ncfg = cfg.clone().with_tau(Tau::Multiplier(non_tracial_witness()));
    let nt = trace_symmetry_check(&ncfg, &u, &v)?;
    if let Some(c) = nt.get("trace.closed") {
        rep.at_least("trace.witness_closed", "non-tracial multiplier breaks the closedness of the integral", c.residual, 1e-3);
    }
    let asym = asymptotic_compare(&cfg.clone().with_tau(Tau::One), &u, &v, 2, &[0.2, 0.1, 0.05, 0.025])?;
    rep.extend(asym.report);
    if o.n == 1 {
        rep.at_most("products.kernel_vs_pipeline_n1", "oscillatory kernel agrees with the transport route", n1_route_agreement()?, 5e-2);
    }
    Ok(rep)
}

/// Grid for the `n = 1` route comparison: `16 x 16 x 16 x 32` on `[-4, 4]^4`.
pub fn n1_grid() -> Result<GridSpec> {
    GridSpec::new(vec![
        Axis::new(AxisRole::A, -4.0, 4.0, 16)?,
        Axis::new(AxisRole::V(0), -4.0, 4.0, 16)?,
        Axis::new(AxisRole::V(1), -4.0, 4.0, 16)?,
        Axis::new(AxisRole::L, -4.0, 4.0, 32)?,
    ])
}

/// Relative L2 distance of the kernel and transport routes at `n = 1`, `theta = 1`.
/// The coarse grid cannot meet the `1e-12` spectral guard, so it is relaxed to `1e-2`.
pub fn n1_route_agreement() -> Result<f64> {
    let spec = n1_grid()?;
    let u = GridFunction::gaussian(&spec, &[0.2, 0.1, -0.1, -0.1], 0.8, Complex64::new(1.0, 0.0))?;
    let v = GridFunction::gaussian(&spec, &[-0.1, -0.1, 0.05, 0.1], 0.84, Complex64::new(0.8, 0.3))?;
    let cfg = ProductConfig::new(SpaceParams::new(1), 1.0, spec)?.with_boundary_tol(1e-2);
    let p = star_pipeline(&u, &v, &cfg)?;
    let k = star_kernel(&u, &v, &cfg.with_route(Route::Kernel))?;
    k.rel_l2(&p)
}

/// `tau_t(xi) = t^2 xi^2 / (1 + xi^2 / 16)`, real and even, not tracial.
pub fn non_tracial_witness() -> Multiplier {
    Multiplier::new("damped quadratic", |t, x| Complex64::new(t * t * x * x / (1.0 + x * x / 16.0), 0.0))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub suites: Vec<String>,
    pub passed: bool,
    pub report: Report,
}
