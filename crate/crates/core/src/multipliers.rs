//! Multipliers `tau_t(xi)` entering `T = F^{-1} M_{exp tau} (phi^{-1})^* F`.
//!
//! The only degrees of freedom are functions of the single Fourier variable `xi`
//! (one family per deformation parameter); nothing else is accepted by the API.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::algebra::SpaceParams;
use crate::error::{Error, Result};
use crate::report::Report;

pub type TauFn = dyn Fn(f64, f64) -> Complex64 + Send + Sync;
pub type XiFn = dyn Fn(f64) -> Complex64 + Send + Sync;
pub type PsiFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Sign in front of `(1/2) log |Jac|` making the transport unitary; fixed by the
/// unitarity test in the transforms suite.
pub const TRACIAL_SIGN: f64 = 1.0;

#[derive(Clone)]
pub struct Multiplier {
    pub name: String,
    eval: Arc<TauFn>,
    taylor: Option<Vec<Arc<XiFn>>>,
    is_tracial: bool,
    psi: Option<Arc<PsiFn>>,
}

impl fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Multiplier")
            .field("name", &self.name)
            .field("taylor_orders", &self.taylor.as_ref().map(|t| t.len()))
            .field("is_tracial", &self.is_tracial)
            .field("psi", &self.psi.is_some())
            .finish()
    }
}

impl Multiplier {
    pub fn new(name: impl Into<String>, eval: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), eval: Arc::new(eval), taylor: None, is_tracial: false, psi: None }
    }

    pub fn zero() -> Self {
        Self::new("zero", |_, _| Complex64::new(0.0, 0.0))
    }

    pub fn with_taylor(mut self, taylor: Vec<Arc<XiFn>>) -> Self {
        self.taylor = Some(taylor);
        self
    }

    pub fn eval(&self, theta: f64, xi: f64) -> Complex64 {
        (self.eval)(theta, xi)
    }

    /// Coefficients `d^k tau / d theta^k |_0 / k!`, index `k`.
    pub fn taylor(&self) -> Option<&[Arc<XiFn>]> {
        self.taylor.as_deref()
    }

    pub fn is_tracial(&self) -> bool {
        self.is_tracial
    }

    pub fn psi(&self, theta: f64, xi: f64) -> f64 {
        self.psi.as_ref().map_or(0.0, |p| p(theta, xi))
    }
}

/// A multiplier or the trivial choice `exp(tau) = 1`.
#[derive(Debug, Clone)]
pub enum Tau {
    One,
    Multiplier(Multiplier),
}

impl Tau {
    pub fn eval(&self, theta: f64, xi: f64) -> Complex64 {
        match self {
            Tau::One => Complex64::new(0.0, 0.0),
            Tau::Multiplier(m) => m.eval(theta, xi),
        }
    }

    pub fn psi(&self, theta: f64, xi: f64) -> f64 {
        match self {
            Tau::One => 0.0,
            Tau::Multiplier(m) => m.psi(theta, xi),
        }
    }

    pub fn is_tracial(&self) -> bool {
        matches!(self, Tau::Multiplier(m) if m.is_tracial())
    }

    pub fn name(&self) -> String {
        match self {
            Tau::One => "one".into(),
            Tau::Multiplier(m) => m.name.clone(),
        }
    }
}

/// `|det D phi_t^{-1}|` at `eta`, in closed form:
/// `((1 + sqrt(1 + 4 t^2 eta^2)) / 2)^n / sqrt(1 + 4 t^2 eta^2)`.
pub fn inverse_twist_jacobian(n: usize, t: f64, eta: f64) -> f64 {
    let r = (1.0 + 4.0 * t * t * eta * eta).sqrt();
    (0.5 * (1.0 + r)).powi(n as i32) / r
}

pub fn tracial_multiplier(params: SpaceParams, psi: Option<Arc<PsiFn>>) -> Multiplier {
    tracial_multiplier_signed(params, psi, TRACIAL_SIGN)
}

/// `tau_t = (sign / 2) log |Jac phi_t^{-1}| + i psi_t`.
pub fn tracial_multiplier_signed(params: SpaceParams, psi: Option<Arc<PsiFn>>, sign: f64) -> Multiplier {
    let n = params.n;
    let p = psi.clone();
    let mut m = Multiplier::new(if psi.is_some() { "tracial:psi" } else { "tracial" }, move |t, xi| {
        let re = 0.5 * sign * inverse_twist_jacobian(n, t, xi).ln();
        let im = p.as_ref().map_or(0.0, |f| f(t, xi));
        Complex64::new(re, im)
    });
    m.is_tracial = sign == TRACIAL_SIGN;
    m.psi = psi;
    m
}

/// Smooth cutoff: 1 on `|t| <= 1/2`, 0 on `|t| >= 1`.
pub fn cutoff(t: f64) -> f64 {
    let f = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let x = t.abs();
    let (p, q) = (f(1.0 - x), f(x - 0.5));
    if p + q == 0.0 {
        0.0
    } else {
        p / (p + q)
    }
}

/// `eps_k = first * ratio^(k-1)` for `k >= 1` (`eps_0 = first`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSchedule {
    pub first: f64,
    pub ratio: f64,
}

impl Default for CutoffSchedule {
    fn default() -> Self {
        Self { first: 1.0, ratio: 0.5 }
    }
}

impl CutoffSchedule {
    pub fn eps(&self, k: usize) -> f64 {
        self.first * self.ratio.powi(k.max(1) as i32 - 1)
    }
}

/// Taylor coefficients in `theta` at `theta = 0` by a least-squares polynomial fit
/// through `theta_j = j h`, `|j| <= order + 2`.
pub fn taylor_fd(f: impl Fn(f64) -> Complex64, order: usize, h: f64) -> Vec<Complex64> {
    let m = order as i64 + 2;
    let deg = order + 2;
    let pts: Vec<f64> = (-m..=m).map(|j| j as f64).collect();
    let vand = DMatrix::from_fn(pts.len(), deg + 1, |i, k| pts[i].powi(k as i32));
    let svd = vand.svd(true, true);
    let solve = |rhs: DVector<f64>| svd.solve(&rhs, 1e-14).expect("svd solve");
    let re = solve(DVector::from_iterator(pts.len(), pts.iter().map(|&s| f(s * h).re)));
    let im = solve(DVector::from_iterator(pts.len(), pts.iter().map(|&s| f(s * h).im)));
    (0..=order).map(|k| Complex64::new(re[k], im[k]) / h.powi(k as i32)).collect()
}

/// Central finite-difference derivative of order `m` (step `h`).
fn fd_derivative(f: &dyn Fn(f64) -> Complex64, x: f64, m: usize, h: f64) -> Complex64 {
    // m-th central difference with offsets (i - m/2) h
    let mut s = Complex64::new(0.0, 0.0);
    let mut binom = 1.0;
    for i in 0..=m {
        let sign = if (m - i) % 2 == 0 { 1.0 } else { -1.0 };
        s += f(x + (i as f64 - 0.5 * m as f64) * h) * (sign * binom);
        binom = binom * (m - i) as f64 / (i + 1) as f64;
    }
    s / h.powi(m as i32)
}

/// Heuristic polynomial-growth probe: largest fitted exponent `k` in
/// `max_{|xi| <= R} |f^(m)| ~ (1 + R)^k`, over `m <= 4` and `R = range * 2^j`, `j < 4`.
pub fn growth_exponent(f: &dyn Fn(f64) -> Complex64, range: f64) -> f64 {
    let radii: Vec<f64> = (0..4).map(|j| range * 2f64.powi(j)).collect();
    let mut worst: f64 = 0.0;
    for m in 0..=4 {
        let maxima: Vec<f64> = radii
            .iter()
            .map(|&r| {
                (0..=128)
                    .map(|i| -r + 2.0 * r * i as f64 / 128.0)
                    .map(|x| fd_derivative(f, x, m, 1e-2).norm())
                    .fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
            })
            .collect();
        for j in 0..radii.len() - 1 {
            let (m0, m1) = (maxima[j], maxima[j + 1]);
            if !m1.is_finite() {
                return f64::INFINITY;
            }
            if m0 < 1e-300 || m1 < 1e-300 {
                continue;
            }
            let k = (m1 / m0).ln() / ((1.0 + radii[j + 1]) / (1.0 + radii[j])).ln();
            worst = worst.max(k);
        }
    }
    worst
}

/// `tau(theta, xi) = sum_k theta^k c_k(xi) chi(theta / eps_k)`; `coeffs[k]` is the
/// `theta^k` coefficient.
pub fn borel_realize(coeffs: Vec<Arc<XiFn>>, schedule: CutoffSchedule) -> Result<Multiplier> {
    if !(schedule.first > 0.0 && schedule.ratio > 0.0 && schedule.ratio <= 1.0) {
        return Err(Error::InvalidArgument("cutoff schedule needs first > 0 and 0 < ratio <= 1".into()));
    }
    for (k, c) in coeffs.iter().enumerate() {
        let g = growth_exponent(&|x| c(x), 4.0);
        if g > 8.0 {
            return Err(Error::InvalidArgument(format!("coefficient {k} fails the polynomial-growth probe (exponent {g:.2})")));
        }
    }
    let cs = coeffs.clone();
    let sched = schedule;
    let m = Multiplier::new("borel", move |t, xi| {
        cs.iter()
            .enumerate()
            .map(|(k, c)| {
                let chi = cutoff(t / sched.eps(k));
                if chi == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    c(xi) * (t.powi(k as i32) * chi)
                }
            })
            .sum()
    })
    .with_taylor(coeffs.clone());
    if coeffs.is_empty() {
        return Ok(m);
    }
    let order = coeffs.len() - 1;
    let h = 0.45 * schedule.eps(order) / (order as f64 + 2.0);
    for &xi in &[-1.3, 0.4, 2.1] {
        let fitted = taylor_fd(|t| m.eval(t, xi), order, h);
        for (k, c) in coeffs.iter().enumerate() {
            let target = c(xi);
            let err = (fitted[k] - target).norm() / target.norm().max(1.0);
            if !(err <= 1e-4) {
                return Err(Error::ScheduleTooAggressive { order: k, error: err });
            }
        }
    }
    Ok(m)
}

/// Checks the two defining conditions of the multiplier space on samples.
///
/// (i) is a heuristic growth probe of `exp(tau_t)` at each `t` in `thetas`;
/// (ii) asks `sup_{|s| <= 2} |tau_t(sinh(2s) / (2t))|` to decrease to zero along
/// `t = 0.2, 0.1, 0.05, 0.025`.
pub fn check_theta_membership(tau: &Tau, thetas: &[f64], xi_range: f64) -> Report {
    let mut rep = Report::new();
    let mut growth: f64 = 0.0;
    for &t in thetas {
        growth = growth.max(growth_exponent(&|x| tau.eval(t, x).exp(), xi_range));
    }
    rep.at_most("multiplier.growth", "exp(tau) is a Schwartz multiplier (heuristic probe)", growth, 8.0)
        .with_note(format!("FD orders 0..4, radii {xi_range}*2^j, thetas {thetas:?}"));
    let sweep = [0.2, 0.1, 0.05, 0.025];
    let sups: Vec<f64> = sweep
        .iter()
        .map(|&t| {
            (0..=400)
                .map(|i| -2.0 + 4.0 * i as f64 / 400.0)
                .map(|s| tau.eval(t, (2.0 * s).sinh() / (2.0 * t)).norm())
                .fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
        })
        .collect();
    let vanishing = sups.iter().all(|&s| s < 1e-12);
    let decreasing = sups.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let slope = if sups.iter().all(|&s| s > 0.0 && s.is_finite()) {
        let xs: Vec<f64> = sweep.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = sups.iter().map(|s| s.ln()).collect();
        fit_slope(&xs, &ys)
    } else {
        f64::NAN
    };
    let ok = vanishing || (decreasing && slope >= 0.5);
    rep.flag("multiplier.rescaled_limit", "rescaled pullback of tau vanishes as the parameter goes to 0", ok)
        .with_note(format!("sups {sups:?}, log-log slope {slope:.3}"));
    rep
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Natural cubic spline through `(xs, ys)`, continued linearly outside. The end
/// curvature of a natural spline is zero, so the continuation stays `C^2`.
fn tabulated(xs: Vec<f64>, ys: Vec<f64>) -> Arc<XiFn> {
    let n = xs.len();
    let mut m = vec![0.0; n];
    if n > 2 {
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
            diag[i] = 2.0 * (h0 + h1);
            rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        }
        for i in 2..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let f = h0 / diag[i - 1];
            diag[i] -= f * h0;
            rhs[i] -= f * rhs[i - 1];
        }
        for i in (1..n - 1).rev() {
            let h1 = xs[i + 1] - xs[i];
            let next = if i + 1 < n - 1 { m[i + 1] } else { 0.0 };
            m[i] = (rhs[i] - h1 * next) / diag[i];
        }
    }
    let (h0, hn) = (xs[1] - xs[0], xs[n - 1] - xs[n - 2]);
    let lo_slope = (ys[1] - ys[0]) / h0 - h0 * m[1] / 6.0;
    let hi_slope = (ys[n - 1] - ys[n - 2]) / hn + hn * m[n - 2] / 6.0;
    Arc::new(move |x: f64| {
        let v = if x <= xs[0] {
            ys[0] + lo_slope * (x - xs[0])
        } else if x >= xs[n - 1] {
            ys[n - 1] + hi_slope * (x - xs[n - 1])
        } else {
            let i = xs.partition_point(|&p| p <= x).saturating_sub(1).min(n - 2);
            let h = xs[i + 1] - xs[i];
            let (a, b) = ((xs[i + 1] - x) / h, (x - xs[i]) / h);
            a * ys[i] + b * ys[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0
        };
        Complex64::new(v, 0.0)
    })
}

/// Reads Borel coefficients from CSV with header `xi,c1,c2,...` (column `c<k>` is the
/// `theta^k` coefficient; missing orders are zero) on an increasing `xi` grid.
pub fn load_borel_coefficients(path: &Path) -> Result<Vec<Arc<XiFn>>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header: Vec<String> = lines.next().ok_or_else(|| Error::Format("empty coefficient file".into()))?.split(',').map(|s| s.trim().to_string()).collect();
    if header.first().map(String::as_str) != Some("xi") {
        return Err(Error::Format("first column must be xi".into()));
    }
    let orders: Vec<usize> = header[1..]
        .iter()
        .map(|h| h.strip_prefix('c').and_then(|k| k.parse().ok()).ok_or_else(|| Error::Format(format!("bad column {h:?}"))))
        .collect::<Result<_>>()?;
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for line in lines {
        let vals: Vec<f64> = line.split(',').map(|s| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("{s:?}: {e}")))).collect::<Result<_>>()?;
        if vals.len() != header.len() {
            return Err(Error::Format("ragged coefficient row".into()));
        }
        for (c, v) in cols.iter_mut().zip(vals) {
            c.push(v);
        }
    }
    if cols[0].len() < 2 || cols[0].windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Format("xi must be strictly increasing with at least two rows".into()));
    }
    let max_order = orders.iter().cloned().max().unwrap_or(0);
    let zero: Arc<XiFn> = Arc::new(|_| Complex64::new(0.0, 0.0));
    let mut out = vec![zero; max_order + 1];
    for (j, &k) in orders.iter().enumerate() {
        out[k] = tabulated(cols[0].clone(), cols[j + 1].clone());
    }
    Ok(out)
}

/// Parses `one`, `tracial`, `tracial:<c>` (phase `psi_t(xi) = c t atan(xi)`) or `borel:<file>`.
pub fn parse_preset(spec: &str, params: SpaceParams) -> Result<Tau> {
    let spec = spec.trim();
    if spec == "one" {
        return Ok(Tau::One);
    }
    if spec == "tracial" {
        return Ok(Tau::Multiplier(tracial_multiplier(params, None)));
    }
    if let Some(c) = spec.strip_prefix("tracial:") {
        let c: f64 = c.parse().map_err(|_| Error::InvalidArgument(format!("bad psi coefficient {c:?}")))?;
        let psi: Arc<PsiFn> = Arc::new(move |t, xi| c * t * xi.atan());
        return Ok(Tau::Multiplier(tracial_multiplier(params, Some(psi))));
    }
    if let Some(file) = spec.strip_prefix("borel:") {
        let coeffs = load_borel_coefficients(Path::new(file))?;
        return Ok(Tau::Multiplier(borel_realize(coeffs, CutoffSchedule::default())?));
    }
    Err(Error::InvalidArgument(format!("unknown multiplier preset {spec:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.0), 1.0);
        assert_eq!(cutoff(0.5), 1.0);
        assert_eq!(cutoff(1.0), 0.0);
        assert!(cutoff(0.75) > 0.0 && cutoff(0.75) < 1.0);
    }

    #[test]
    fn tracial_at_zero_is_phase() {
        let psi: Arc<PsiFn> = Arc::new(|t, xi| 0.3 + t * xi);
        let m = tracial_multiplier(SpaceParams::new(1), Some(psi));
        let z = m.eval(0.4, 0.0);
        assert!(z.re.abs() < 1e-15 && (z.im - 0.3).abs() < 1e-15);
    }

    #[test]
    fn tabulated_coefficients_interpolate_and_continue_smoothly() {
        let path = std::env::temp_dir().join(format!("dq-borel-{}.csv", std::process::id()));
        let mut text = String::from("# log(1 + xi^2)\nxi,c1\n");
        for i in -80..=80 {
            let x = i as f64 * 0.25;
            text.push_str(&format!("{x},{}\n", (1.0 + x * x).ln()));
        }
        std::fs::write(&path, text).unwrap();
        let c = load_borel_coefficients(&path).unwrap();
        std::fs::remove_file(&path).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0](1.3), Complex64::new(0.0, 0.0));
        for x in [-3.1, 0.4, 7.7] {
            assert!((c[1](x).re - (1.0f64 + x * x).ln()).abs() < 1e-3);
        }
        // no kink at the table edge
        let h = 1e-4;
        let left = (c[1](20.0).re - c[1](20.0 - h).re) / h;
        let right = (c[1](20.0 + h).re - c[1](20.0).re) / h;
        assert!((left - right).abs() < 1e-3);
        assert!(borel_realize(c, CutoffSchedule::default()).is_ok());
    }

    #[test]
    fn taylor_fit_of_polynomial() {
        let c = taylor_fd(|t| Complex64::new(1.0 + 2.0 * t - 3.0 * t * t * t, 0.0), 3, 0.01);
        assert!((c[1].re - 2.0).abs() < 1e-8);
        assert!((c[3].re + 3.0).abs() < 1e-6);
    }

    #[test]
    fn presets() {
        let p = SpaceParams::new(0);
        assert!(matches!(parse_preset("one", p).unwrap(), Tau::One));
        assert!(parse_preset("tracial", p).unwrap().is_tracial());
        assert!(parse_preset("tracial:0.5", p).unwrap().is_tracial());
        assert!(parse_preset("bogus", p).is_err());
    }
}
