//! Star products on `M` by the transport route and by direct quadrature of the
//! oscillatory three-point kernel.
//!
//! Conventions. The flat product is the Weyl product with parameter `theta`; the
//! twisting map and the multiplier are evaluated at the twist parameter
//! `theta / 2` (see [`twist_parameter`]). With these, the kernel route reads
//!
//! `u * v (x0) = c_n theta^{-(2n+2)} int A exp[(i/theta) S + m] u(x1) v(x2) dx1 dx2`
//!
//! where `c_n = pi^{-(2n+2)} 4^{-n}` and `m = g(a2-a1) - g(a2-a0) - g(a0-a1)`,
//! `g(t) = tau_{theta/2}(sinh(2t) / theta)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::SpaceParams;
use crate::error::{Error, Result};
use crate::geometry::{amplitude_a1, amplitude_acan, Point, Triangle};
use crate::moyal::{expand_t_inverse, moyal_numeric_with, transported_product_grid};
use crate::multipliers::{fit_slope, Tau};
use crate::report::Report;
use crate::transforms::interp::{self, map_axis};
use crate::transforms::{symmetry_pullback, Direction, GridFunction, GridSpec, Interp, Space, Transport, TwistParams, BOUNDARY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Pipeline,
    Kernel,
    TracialKernel,
}

impl std::str::FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pipeline" => Ok(Route::Pipeline),
            "kernel" => Ok(Route::Kernel),
            "tracial_kernel" | "tracial-kernel" => Ok(Route::TracialKernel),
            _ => Err(Error::InvalidArgument(format!("unknown route {s:?}"))),
        }
    }
}

/// `c_n = pi^{-(2n+2)} 4^{-n}`, frozen after calibration against the pipeline.
pub fn kernel_constant(n: usize) -> f64 {
    PI.powi(-(2 * n as i32 + 2)) * 4f64.powi(-(n as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelOptions {
    /// spectral refinement factor of the `a`-quadrature
    pub refine: usize,
    /// abort when the estimated number of complex multiply-adds exceeds this
    pub cost_limit: f64,
    /// overall constant in front of the integral
    pub constant: Option<f64>,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self { refine: 8, cost_limit: 5e11, constant: None }
    }
}

#[derive(Debug, Clone)]
pub struct ProductConfig {
    pub params: SpaceParams,
    pub theta: f64,
    pub tau: Tau,
    pub route: Route,
    pub grid: GridSpec,
    pub boundary_tol: f64,
    pub kernel: KernelOptions,
}

/// Parameter of the twisting map and of the multiplier for deformation parameter `theta`.
pub fn twist_parameter(theta: f64) -> f64 {
    0.5 * theta
}

impl ProductConfig {
    pub fn new(params: SpaceParams, theta: f64, grid: GridSpec) -> Result<Self> {
        if !(theta.is_finite() && theta != 0.0) {
            return Err(Error::InvalidArgument("theta must be finite and nonzero".into()));
        }
        if grid.n() != params.n {
            return Err(Error::GridMismatch);
        }
        Ok(Self { params, theta, tau: Tau::One, route: Route::Pipeline, grid, boundary_tol: BOUNDARY_TOL, kernel: KernelOptions::default() })
    }

    pub fn with_tau(mut self, tau: Tau) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_route(mut self, route: Route) -> Self {
        self.route = route;
        self
    }

    pub fn with_boundary_tol(mut self, tol: f64) -> Self {
        self.boundary_tol = tol;
        self
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        let mut c = Self::new(self.params, theta, self.grid.clone())?;
        c.tau = self.tau.clone();
        c.route = self.route;
        c.boundary_tol = self.boundary_tol;
        c.kernel = self.kernel;
        Ok(c)
    }

    pub fn transport(&self) -> Transport {
        Transport {
            tp: TwistParams { theta: twist_parameter(self.theta), n: self.params.n },
            tau: self.tau.clone(),
            interp: Interp::Spectral,
            boundary_tol: self.boundary_tol,
        }
    }

    fn check_input(&self, u: &GridFunction) -> Result<()> {
        u.expect_space(Space::Position)?;
        if u.spec() != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

/// Product by the configured route.
pub fn star(u: &GridFunction, v: &GridFunction, cfg: &ProductConfig) -> Result<GridFunction> {
    match cfg.route {
        Route::Pipeline => star_pipeline(u, v, cfg),
        Route::Kernel | Route::TracialKernel => star_kernel(u, v, cfg),
    }
}

/// `T (T^{-1} u *0 T^{-1} v)`.
pub fn star_pipeline(u: &GridFunction, v: &GridFunction, cfg: &ProductConfig) -> Result<GridFunction> {
    cfg.check_input(u)?;
    cfg.check_input(v)?;
    let t = cfg.transport();
    let tu = t.apply(u, Direction::Inverse)?;
    let tv = t.apply(v, Direction::Inverse)?;
    let w = moyal_numeric_with(&tu, &tv, cfg.theta, cfg.boundary_tol)?;
    t.apply(&w, Direction::Forward)
}

/// Kernel amplitude times the exponential of the multiplier cochain term.
fn kernel_weight(cfg: &ProductConfig) -> Result<impl Fn(f64, f64, f64) -> Complex64 + Sync + '_> {
    let n = cfg.params.n;
    let theta = cfg.theta;
    let t = twist_parameter(theta);
    let tracial = cfg.route == Route::TracialKernel;
    if tracial && !cfg.tau.is_tracial() {
        return Err(Error::InvalidArgument("the tracial kernel needs a tracial multiplier".into()));
    }
    let trivial = matches!(cfg.tau, Tau::One);
    let g = move |s: f64| -> Complex64 {
        let eta = (2.0 * s).sinh() / theta;
        if tracial {
            Complex64::new(0.0, cfg.tau.psi(t, eta))
        } else {
            cfg.tau.eval(t, eta)
        }
    };
    Ok(move |a0: f64, a1: f64, a2: f64| {
        let tri = Triangle::new(Point::new(a0, vec![0.0; 2 * n], 0.0), Point::new(a1, vec![0.0; 2 * n], 0.0), Point::new(a2, vec![0.0; 2 * n], 0.0));
        let amp = if tracial { amplitude_acan(&tri) } else { amplitude_a1(&tri) };
        if trivial {
            return Complex64::new(amp, 0.0);
        }
        amp * (g(a2 - a1) - g(a2 - a0) - g(a0 - a1)).exp()
    })
}

/// Direct quadrature of the three-point kernel (`n <= 1`).
///
/// The `l`-integrals are exact Fourier integrals of the samples; `a1, a2` run over a
/// grid refined `refine` times by trigonometric interpolation, restricted to the
/// offsets whose frequencies `sinh(2 (a_i - a_0)) / theta` lie below the `l`-Nyquist
/// limit (the remaining contributions vanish for band-limited data).
pub fn star_kernel(u: &GridFunction, v: &GridFunction, cfg: &ProductConfig) -> Result<GridFunction> {
    cfg.check_input(u)?;
    cfg.check_input(v)?;
    let n = cfg.params.n;
    if n > 1 {
        return Err(Error::InvalidArgument("kernel routes are limited to n <= 1".into()));
    }
    let theta = cfg.theta;
    let spec = &cfg.grid;
    let shape = spec.shape();
    let d = shape.len();
    let na = shape[0];
    let nl = shape[d - 1];
    let nv: usize = shape[1..d - 1].iter().product();
    let r = cfg.kernel.refine.max(1);
    let nf = r * na;
    let a_ax = spec.axis(0);
    let l_ax = spec.l_axis();
    let hf = a_ax.step() / r as f64;
    let af: Vec<f64> = (0..nf).map(|m| a_ax.min + m as f64 * hf).collect();
    let nyq = PI / l_ax.step();
    let dmax = (((nyq * theta.abs()).asinh() / (2.0 * hf)).floor() as usize).min(nf - 1);
    let nd = 2 * dmax + 1;

    let per_triple = if n == 0 { 1.0 } else { 3.0 * (nv * nv) as f64 };
    let work = na as f64 * (nd * nd) as f64 * per_triple + (na * (2 * nd) * nv * nl) as f64;
    if work > cfg.kernel.cost_limit {
        return Err(Error::CostLimit { work, limit: cfg.kernel.cost_limit });
    }
    let weight = kernel_weight(cfg)?;

    // refine in a, then Fourier integrals in l at the admissible frequencies
    let op = interp::trig(a_ax, &af);
    let freqs: Vec<f64> = (0..nd).map(|k| (2.0 * (k as f64 - dmax as f64) * hf).sinh() / theta).collect();
    let dtft = interp::dtft(l_ax, &freqs);
    let table = |f: &GridFunction| -> Vec<Complex64> {
        let (fine, fshape) = map_axis(f.values(), &shape, 0, nf, |_, _| &op);
        let (q, _) = map_axis(&fine, &fshape, d - 1, nd, |_, _| &dtft);
        // [m][v][k] -> [m][k][v]
        let mut out = vec![Complex64::new(0.0, 0.0); q.len()];
        for m in 0..nf {
            for iv in 0..nv {
                for k in 0..nd {
                    out[(m * nd + k) * nv + iv] = q[(m * nv + iv) * nd + k];
                }
            }
        }
        out
    };
    let uq = table(u);
    let vq = table(v);
    let block_max = |t: &[Complex64]| -> Vec<f64> { t.chunks(nv).map(|c| c.iter().fold(0.0, |m: f64, z| m.max(z.norm()))).collect() };
    let (umax, vmax) = (block_max(&uq), block_max(&vq));
    let peak = umax.iter().cloned().fold(0.0, f64::max) * vmax.iter().cloned().fold(0.0, f64::max);

    let vgeom = VGeometry::new(spec, theta);
    let c = cfg.kernel.constant.unwrap_or_else(|| kernel_constant(n));
    let hv = if n == 0 { 1.0 } else { spec.axis(1).step() * spec.axis(2).step() };
    let scale = c * theta.abs().powi(-(2 * n as i32 + 2)) * hf * hf * hv * hv;
    let l0: Vec<f64> = l_ax.coords();

    let rows: Vec<Vec<Complex64>> = (0..na)
        .into_par_iter()
        .map(|i0| {
            let m0 = r * i0;
            let a0 = af[m0];
            let mut acc = vec![Complex64::new(0.0, 0.0); (2 * nd - 1) * nv];
            let mut iv = vec![Complex64::new(0.0, 0.0); nv];
            let mut scratch = VScratch::new(&vgeom);
            for kv in 0..nd {
                // a0 - a1 = (kv - dmax) hf
                let m1 = m0 as isize - (kv as isize - dmax as isize);
                if m1 < 0 || m1 >= nf as isize {
                    continue;
                }
                let m1 = m1 as usize;
                for ku in 0..nd {
                    // a2 - a0 = (ku - dmax) hf
                    let m2 = m0 as isize + ku as isize - dmax as isize;
                    if m2 < 0 || m2 >= nf as isize {
                        continue;
                    }
                    let m2 = m2 as usize;
                    let (bu, bv) = (m1 * nd + ku, m2 * nd + kv);
                    if umax[bu] * vmax[bv] <= 1e-16 * peak {
                        continue;
                    }
                    let (a1, a2) = (af[m1], af[m2]);
                    let w = weight(a0, a1, a2);
                    let us = &uq[bu * nv..(bu + 1) * nv];
                    let vs = &vq[bv * nv..(bv + 1) * nv];
                    if n == 0 {
                        iv[0] = us[0] * vs[0];
                    } else {
                        let (c12, c20, c01) = ((a1 - a2).cosh(), (a2 - a0).cosh(), (a0 - a1).cosh());
                        vgeom.integrate(us, vs, c12 * c20, c20 * c01, c01 * c12, &mut scratch, &mut iv);
                    }
                    let slot = (m1 as isize - m2 as isize + (nd as isize - 1)) as usize;
                    for (a, x) in acc[slot * nv..(slot + 1) * nv].iter_mut().zip(&iv) {
                        *a += w * x;
                    }
                }
            }
            // sum over a1 - a2 with the l0 phase
            let mut row = vec![Complex64::new(0.0, 0.0); nv * nl];
            for slot in 0..2 * nd - 1 {
                let block = &acc[slot * nv..(slot + 1) * nv];
                if block.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                    continue;
                }
                let dd = slot as f64 - (nd - 1) as f64;
                let k = (2.0 * dd * hf).sinh() / theta;
                let ph: Vec<Complex64> = l0.iter().map(|&l| Complex64::from_polar(scale, -k * l)).collect();
                for (ivx, b) in block.iter().enumerate() {
                    for (o, p) in row[ivx * nl..(ivx + 1) * nl].iter_mut().zip(&ph) {
                        *o += b * p;
                    }
                }
            }
            row
        })
        .collect();
    GridFunction::new(spec.clone(), Space::Position, rows.concat())
}

/// `v`-plane coordinates for the `n = 1` fibre integral.
struct VGeometry {
    x: Vec<f64>,
    y: Vec<f64>,
    theta: f64,
}

struct VScratch {
    p: Vec<Complex64>,
    q: Vec<Complex64>,
    ph: Vec<Complex64>,
}

impl VScratch {
    fn new(g: &VGeometry) -> Self {
        let (nx, ny) = (g.x.len(), g.y.len());
        Self { p: vec![Complex64::new(0.0, 0.0); nx * nx * nx], q: vec![Complex64::new(0.0, 0.0); nx * nx * nx], ph: vec![Complex64::new(0.0, 0.0); ny.max(1)] }
    }
}

impl VGeometry {
    fn new(spec: &GridSpec, theta: f64) -> Self {
        if spec.n() == 0 {
            return Self { x: vec![], y: vec![], theta };
        }
        Self { x: spec.axis(1).coords(), y: spec.axis(2).coords(), theta }
    }

    /// `ph[s] = exp(i kappa y_s)` by recurrence.
    fn phases(&self, kappa: f64, ph: &mut [Complex64]) {
        let h = self.y[1] - self.y[0];
        let step = Complex64::from_polar(1.0, kappa * h);
        let mut z = Complex64::from_polar(1.0, kappa * self.y[0]);
        for p in ph.iter_mut() {
            *p = z;
            z *= step;
        }
    }

    /// `I(v0) = sum_{v1, v2} exp[(i/theta)(A O(v0,v1) + B O(v1,v2) + C O(v2,v0))] U(v1) V(v2)`
    /// for `n = 1`, in `O(N^4)` by summing the `v1_2`, `v2_2` directions first.
    #[allow(clippy::too_many_arguments)]
    fn integrate(&self, u: &[Complex64], v: &[Complex64], a: f64, b: f64, c: f64, s: &mut VScratch, out: &mut [Complex64]) {
        let (nx, ny) = (self.x.len(), self.y.len());
        let it = 1.0 / self.theta;
        // P[q][r][p] = sum_s e^{i y_s (A x_q - B x_r)/theta} U[p][s]
        for qi in 0..nx {
            for ri in 0..nx {
                self.phases(it * (a * self.x[qi] - b * self.x[ri]), &mut s.ph);
                for pi in 0..nx {
                    let row = &u[pi * ny..(pi + 1) * ny];
                    s.p[(qi * nx + ri) * nx + pi] = row.iter().zip(&s.ph).map(|(x, y)| x * y).sum();
                }
            }
        }
        // Q[q][p][r] = sum_s e^{i y_s (B x_p - C x_q)/theta} V[r][s]
        for qi in 0..nx {
            for pi in 0..nx {
                self.phases(it * (b * self.x[pi] - c * self.x[qi]), &mut s.ph);
                for ri in 0..nx {
                    let row = &v[ri * ny..(ri + 1) * ny];
                    s.q[(qi * nx + pi) * nx + ri] = row.iter().zip(&s.ph).map(|(x, y)| x * y).sum();
                }
            }
        }
        out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        // I[q][t] = sum_{p,r} e^{i y_t (C x_r - A x_p)/theta} P Q
        for pi in 0..nx {
            for ri in 0..nx {
                self.phases(it * (c * self.x[ri] - a * self.x[pi]), &mut s.ph);
                for qi in 0..nx {
                    let w = s.p[(qi * nx + ri) * nx + pi] * s.q[(qi * nx + pi) * nx + ri];
                    for (o, ph) in out[qi * ny..(qi + 1) * ny].iter_mut().zip(&s.ph) {
                        *o += w * ph;
                    }
                }
            }
        }
    }
}

/// Least-squares constant `c` minimising `|c K - P|` where `K` is the kernel output
/// with unit constant and `P` the pipeline output.
pub fn calibrate_kernel_constant(u: &GridFunction, v: &GridFunction, cfg: &ProductConfig) -> Result<Complex64> {
    let mut kc = cfg.clone();
    kc.route = if cfg.route == Route::Pipeline { Route::Kernel } else { cfg.route };
    kc.kernel.constant = Some(1.0);
    let k = star_kernel(u, v, &kc)?;
    let p = star_pipeline(u, v, cfg)?;
    Ok(k.inner(&p)? / k.inner(&k)?)
}

/// `(a | b) = int T^{-1} a conj(T^{-1} b)`.
pub fn inner_product(a: &GridFunction, b: &GridFunction, cfg: &ProductConfig) -> Result<Complex64> {
    cfg.check_input(a)?;
    cfg.check_input(b)?;
    let t = cfg.transport();
    let ta = t.apply(a, Direction::Inverse)?;
    let tb = t.apply(b, Direction::Inverse)?;
    ta.inner(&tb)
}

/// Trace and unitarity checks for the configured multiplier on the pair `(u, v)`.
///
/// Besides the symmetry `int u*v = int v*u` the report carries the closedness
/// residual `int u*v = int uv`, which is what separates tracial multipliers: the
/// symmetry alone holds for every transported Weyl product.
pub fn trace_symmetry_check(cfg: &ProductConfig, u: &GridFunction, v: &GridFunction) -> Result<Report> {
    let mut rep = Report::new();
    let uv = star(u, v, cfg)?.integral();
    let vu = star(v, u, cfg)?.integral();
    let classical = u.mul(v)?.integral();
    rep.at_most("trace.symmetry", "integral of u*v equals integral of v*u", (uv - vu).norm() / uv.norm(), 1e-6);
    rep.at_most("trace.closed", "integral of u*v equals integral of uv", (uv - classical).norm() / classical.norm(), 1e-6)
        .with_note("int u*v against int uv");
    let tu = cfg.transport().apply(u, Direction::Forward)?;
    rep.at_most("trace.unitary", "transport is L2-unitary", (tu.norm_l2() / u.norm_l2() - 1.0).abs(), 1e-6);
    Ok(rep)
}

/// Residuals `|u * v - sum_{j <= k} theta^j B_j(u, v)| / |uv|` along a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub theta: f64,
    pub order: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Asymptotics {
    pub rows: Vec<AsymptoticRow>,
    /// fitted log-log slope per order
    pub slopes: Vec<f64>,
    /// local slopes extrapolated to `theta = 0`, per order
    pub extrapolated: Vec<f64>,
    pub report: Report,
}

/// The `theta^1` shift `(1/2)[c1(D)(uv) - (c1(D)u) v - u c1(D)v]` caused by a multiplier
/// with first Taylor coefficient `c1`, `D = -i d/dl`.
pub fn multiplier_first_order(u: &GridFunction, v: &GridFunction, c1: &(dyn Fn(f64) -> Complex64 + Send + Sync)) -> Result<GridFunction> {
    let apply = |f: &GridFunction| -> Result<GridFunction> {
        let mut vals = f.values().to_vec();
        let shape = f.spec().shape();
        let d = shape.len();
        let ax = f.spec().l_axis();
        interp::ft_axis(&mut vals, &shape, d - 1, ax, false);
        let xi = f.spec().xi_axis().coords();
        let nk = shape[d - 1];
        for (i, z) in vals.iter_mut().enumerate() {
            *z *= c1(xi[i % nk]);
        }
        interp::ft_axis(&mut vals, &shape, d - 1, ax, true);
        GridFunction::new(f.spec().clone(), Space::Position, vals)
    };
    let uv = u.mul(v)?;
    let a = apply(&uv)?;
    let b = apply(u)?.mul(v)?;
    let c = u.mul(&apply(v)?)?;
    Ok(a.sub(&b)?.sub(&c)?.scale(Complex64::new(0.5, 0.0)))
}

/// Compares the pipeline product with its formal expansion through `order`
/// (`order <= 2`; `order <= 1` when the multiplier is nontrivial, which must then
/// carry Taylor data with vanishing constant term).
pub fn asymptotic_compare(cfg: &ProductConfig, u: &GridFunction, v: &GridFunction, order: usize, thetas: &[f64]) -> Result<Asymptotics> {
    if thetas.len() < 3 {
        return Err(Error::InvalidArgument("need at least three theta values".into()));
    }
    let trivial = matches!(cfg.tau, Tau::One);
    if order > 2 || (!trivial && order > 1) {
        return Err(Error::InvalidArgument(format!("order {order} not supported for this multiplier")));
    }
    let equivalence = expand_t_inverse(cfg.params, order)?.rescale(num_rational::Ratio::new(1, 2));
    let mut terms = transported_product_grid(u, v, &equivalence, order)?;
    if let Tau::Multiplier(m) = &cfg.tau {
        let taylor = m.taylor().ok_or_else(|| Error::InvalidArgument("multiplier has no Taylor data".into()))?;
        let zero = |k: usize| taylor.get(k).is_none_or(|c| (-20..=20).all(|i| c(i as f64 * 0.5).norm() < 1e-14));
        if !zero(0) {
            return Err(Error::InvalidArgument("multiplier must vanish at theta = 0".into()));
        }
        if order >= 1 {
            if let Some(c1) = taylor.get(1) {
                terms[1] = terms[1].add(&multiplier_first_order(u, v, c1.as_ref())?)?;
            }
        }
    }
    let norm = terms[0].norm_l2();
    let mut rows = Vec::new();
    for &theta in thetas {
        let c = cfg.with_theta(theta)?;
        let p = star_pipeline(u, v, &c)?;
        let mut partial = GridFunction::zeros(u.spec(), Space::Position);
        for (k, t) in terms.iter().enumerate() {
            partial = partial.add(&t.scale(Complex64::new(theta.powi(k as i32), 0.0)))?;
            rows.push(AsymptoticRow { theta, order: k, residual: p.sub(&partial)?.norm_l2() / norm });
        }
    }
    let mut report = Report::new();
    let (mut slopes, mut extrapolated) = (Vec::new(), Vec::new());
    for k in 0..=order {
        let pts: Vec<&AsymptoticRow> = rows.iter().filter(|r| r.order == k).collect();
        let xs: Vec<f64> = pts.iter().map(|r| r.theta.ln()).collect();
        let ys: Vec<f64> = pts.iter().map(|r| r.residual.ln()).collect();
        let s = fit_slope(&xs, &ys);
        let e = richardson_slope(&pts.iter().map(|r| (r.theta, r.residual)).collect::<Vec<_>>());
        slopes.push(s);
        extrapolated.push(e);
        report
            .at_least(&format!("asymptotic.order{k}"), "order-k truncation of the formal expansion leaves O(theta^{k+1})", e, (k + 1) as f64)
            .with_note(format!("fitted slope {s:.4}, residuals {:?}", pts.iter().map(|r| r.residual).collect::<Vec<_>>()));
    }
    Ok(Asymptotics { rows, slopes, extrapolated, report })
}

/// Order of decay `p` in `r(theta) ~ c theta^p` as `theta -> 0`: local log-log slopes
/// between consecutive sweep points are extrapolated linearly (in `theta`) from the
/// two smallest intervals. Falls back to the last local slope for two points.
pub fn richardson_slope(samples: &[(f64, f64)]) -> f64 {
    let mut pts = samples.to_vec();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let local: Vec<(f64, f64)> = pts
        .windows(2)
        .map(|w| ((w[0].0 * w[1].0).sqrt(), (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln()))
        .collect();
    match local.as_slice() {
        [] => f64::NAN,
        [only] => only.1,
        [.., (ma, sa), (mb, sb)] => sb - mb * (sa - sb) / (ma - mb),
    }
}

/// Checks `(s_w^* u) * (s_w^* v) = s_w^*(u * v)` on the grid.
pub fn covariance_residual(u: &GridFunction, v: &GridFunction, w: &Point, cfg: &ProductConfig) -> Result<f64> {
    let lhs = star(&symmetry_pullback(u, w)?, &symmetry_pullback(v, w)?, cfg)?;
    let rhs = symmetry_pullback(&star(u, v, cfg)?, w)?;
    lhs.rel_l2(&rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_recovers_order_under_opposite_sign_correction() {
        let pts: Vec<(f64, f64)> = [0.2, 0.1, 0.05, 0.025].iter().map(|&t: &f64| (t, t * t * (1.0 - 0.8 * t))).collect();
        let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
        assert!(fit_slope(&xs, &ys) < 2.0);
        assert!((richardson_slope(&pts) - 2.0).abs() < 5e-3);
    }

    #[test]
    fn route_parsing() {
        assert_eq!("kernel".parse::<Route>().unwrap(), Route::Kernel);
        assert!("nope".parse::<Route>().is_err());
    }

    #[test]
    fn config_rejects_zero_theta() {
        let g = GridSpec::cube(0, -4.0, 4.0, 16).unwrap();
        assert!(ProductConfig::new(SpaceParams::new(0), 0.0, g).is_err());
    }
}
