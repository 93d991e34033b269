//! Grids over the chart, the partial Fourier transform in `l`, the twisting map
//! `phi_t(a, v, xi) = (a, v / cosh(t xi), sinh(2 t xi) / (2 t))`, its pullbacks, and
//! the transport operators
//!
//! * forward `T = F^{-1} M_{exp tau} (phi^{-1})^* F`
//! * inverse `T^{-1} = F^{-1} phi^* M_{exp(-tau)} F`.
//!
//! Fourier convention: `F u(xi) = int exp(-i xi l) u(l) dl`, inverse with `1 / (2 pi)`.
//! A factor `xi^k` on the Fourier side is `(-i d/dl)^k` on the position side.

pub mod interp;
pub mod io;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::multipliers::Tau;
use interp::Resampler;

/// Default boundary-shell threshold relative to the peak modulus.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisRole {
    A,
    V(usize),
    L,
    Xi,
}

impl AxisRole {
    pub fn name(&self) -> String {
        match self {
            AxisRole::A => "a".into(),
            AxisRole::V(i) => format!("v{}", i + 1),
            AxisRole::L => "l".into(),
            AxisRole::Xi => "xi".into(),
        }
    }
}

/// Uniform half-open axis `min + j (max - min) / points`, `j < points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub role: AxisRole,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(role: AxisRole, min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::InvalidArgument(format!("axis {}: need finite max > min", role.name())));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("axis {}: points must be a power of two >= 8", role.name())));
        }
        Ok(Self { role, min, max, points })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / self.points as f64
    }

    pub fn coord(&self, j: usize) -> f64 {
        self.min + j as f64 * self.step()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.coord(j)).collect()
    }

    /// Centred reciprocal axis of the discrete Fourier transform.
    pub fn reciprocal(&self, role: AxisRole) -> Axis {
        let n = self.points as f64;
        let dk = 2.0 * PI / (n * self.step());
        Axis { role, min: -0.5 * n * dk, max: 0.5 * n * dk, points: self.points }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    Position,
    Fourier,
}

/// Axes `(a, v_1..v_2n, l)` of a position-space grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        let d = axes.len();
        if d < 2 || d % 2 != 0 {
            return Err(Error::InvalidArgument("a grid needs 2n + 2 axes".into()));
        }
        let ok = axes[0].role == AxisRole::A
            && axes[d - 1].role == AxisRole::L
            && axes[1..d - 1].iter().enumerate().all(|(i, ax)| ax.role == AxisRole::V(i));
        if !ok {
            return Err(Error::InvalidArgument("axis roles must read a, v1..v2n, l".into()));
        }
        for ax in &axes {
            Axis::new(ax.role, ax.min, ax.max, ax.points)?;
        }
        Ok(Self { axes })
    }

    /// Same extent and resolution on every axis.
    pub fn cube(n: usize, min: f64, max: f64, points: usize) -> Result<Self> {
        Self::build(n, (min, max, points), (min, max, points), (min, max, points))
    }

    /// Separate `(min, max, points)` for the `a`, `v` and `l` axes.
    pub fn build(n: usize, a: (f64, f64, usize), v: (f64, f64, usize), l: (f64, f64, usize)) -> Result<Self> {
        let mut axes = vec![Axis::new(AxisRole::A, a.0, a.1, a.2)?];
        for i in 0..2 * n {
            axes.push(Axis::new(AxisRole::V(i), v.0, v.1, v.2)?);
        }
        axes.push(Axis::new(AxisRole::L, l.0, l.1, l.2)?);
        Self::new(axes)
    }

    pub fn n(&self) -> usize {
        (self.axes.len() - 2) / 2
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn l_axis(&self) -> &Axis {
        self.axes.last().unwrap()
    }

    pub fn xi_axis(&self) -> Axis {
        self.l_axis().reciprocal(AxisRole::Xi)
    }

    /// Axes of the given space (last axis `l` or `xi`).
    pub fn axes_in(&self, space: Space) -> Vec<Axis> {
        let mut ax = self.axes.clone();
        if space == Space::Fourier {
            *ax.last_mut().unwrap() = self.xi_axis();
        }
        ax
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self, space: Space) -> f64 {
        self.axes_in(space).iter().map(|a| a.step()).product()
    }

    /// Multi-index of a flat index.
    pub fn unravel(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        for (k, ax) in self.axes.iter().enumerate().rev() {
            out[k] = idx % ax.points;
            idx /= ax.points;
        }
        out
    }

    pub fn coords_of(&self, idx: usize, space: Space) -> Vec<f64> {
        let ax = self.axes_in(space);
        self.unravel(idx).iter().zip(&ax).map(|(&j, a)| a.coord(j)).collect()
    }
}

/// Complex samples on a grid, tagged with the space they live in.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    space: Space,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, space: Space, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::LengthMismatch { expected: spec.len(), found: values.len() });
        }
        Ok(Self { spec, space, values })
    }

    /// Samples `f(coords)` in position space.
    pub fn from_fn(spec: &GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..spec.len()).map(|i| f(&spec.coords_of(i, Space::Position))).collect();
        Self { spec: spec.clone(), space: Space::Position, values }
    }

    /// `amplitude * exp(-|x - center|^2 / (2 width^2))` in position space.
    pub fn gaussian(spec: &GridSpec, center: &[f64], width: f64, amplitude: Complex64) -> Result<Self> {
        if center.len() != spec.axes().len() {
            return Err(Error::LengthMismatch { expected: spec.axes().len(), found: center.len() });
        }
        if !(width > 0.0) {
            return Err(Error::InvalidArgument("gaussian width must be positive".into()));
        }
        Ok(Self::from_fn(spec, |x| {
            let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
            amplitude * (-r2 / (2.0 * width * width)).exp()
        }))
    }

    pub fn zeros(spec: &GridSpec, space: Space) -> Self {
        Self { spec: spec.clone(), space, values: vec![Complex64::new(0.0, 0.0); spec.len()] }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn expect_space(&self, space: Space) -> Result<()> {
        if self.space != space {
            return Err(Error::WrongSpaceTag { expected: space, found: self.space });
        }
        Ok(())
    }

    pub fn same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.spec != other.spec || self.space != other.space {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    fn with_values(&self, values: Vec<Complex64>) -> Self {
        Self { spec: self.spec.clone(), space: self.space, values }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        self.with_values(self.values.iter().map(|&z| f(z)).collect())
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.same_grid(other)?;
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(&x, &y)| f(x, y)).collect()))
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn mul(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |x, y| x * y)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Riemann sum of the values.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.spec.cell_volume(self.space)
    }

    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.spec.cell_volume(self.space)).sqrt()
    }

    /// `sum u conj(v) dV`
    pub fn inner(&self, other: &GridFunction) -> Result<Complex64> {
        self.same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(x, y)| x * y.conj()).sum::<Complex64>() * self.spec.cell_volume(self.space))
    }

    /// `||self - reference|| / ||reference||`
    pub fn rel_l2(&self, reference: &GridFunction) -> Result<f64> {
        let d = self.sub(reference)?;
        Ok(d.norm_l2() / reference.norm_l2())
    }

    /// Largest modulus on the first/last planes of the listed axes, over the peak.
    pub fn boundary_mass(&self, axes: &[usize]) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let shape = self.spec.shape();
        let mut worst: f64 = 0.0;
        for (i, z) in self.values.iter().enumerate() {
            let idx = self.spec.unravel(i);
            if axes.iter().any(|&k| idx[k] == 0 || idx[k] == shape[k] - 1) {
                worst = worst.max(z.norm());
            }
        }
        worst / peak
    }

    /// Spectral derivative `d^m / dx_axis^m` (periodic; data must be windowed).
    pub fn derivative(&self, axis: usize, m: u32) -> Self {
        let mut v = self.values.clone();
        let h = self.spec.axes_in(self.space)[axis].step();
        interp::spectral_derivative(&mut v, &self.spec.shape(), axis, h, m);
        self.with_values(v)
    }

    /// Pointwise product with a function of the coordinates of the current space.
    pub fn mul_fn(&self, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let vals = self.values.iter().enumerate().map(|(i, z)| z * f(&self.spec.coords_of(i, self.space))).collect();
        self.with_values(vals)
    }
}

fn check_boundary(f: &GridFunction, tol: f64) -> Result<()> {
    let d = f.spec.axes().len();
    let axes: Vec<usize> = (1..d).collect();
    let mass = f.boundary_mass(&axes);
    if mass > tol {
        return Err(Error::BoundaryMass { mass, threshold: tol });
    }
    Ok(())
}

/// `u -> F u` along the last axis.
pub fn partial_fourier(u: &GridFunction) -> Result<GridFunction> {
    u.expect_space(Space::Position)?;
    let mut v = u.values.clone();
    let shape = u.spec.shape();
    interp::ft_axis(&mut v, &shape, shape.len() - 1, u.spec.l_axis(), false);
    Ok(GridFunction { spec: u.spec.clone(), space: Space::Fourier, values: v })
}

pub fn partial_fourier_inv(f: &GridFunction) -> Result<GridFunction> {
    f.expect_space(Space::Fourier)?;
    let mut v = f.values.clone();
    let shape = f.spec.shape();
    interp::ft_axis(&mut v, &shape, shape.len() - 1, f.spec.l_axis(), true);
    Ok(GridFunction { spec: f.spec.clone(), space: Space::Position, values: v })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistParams {
    pub theta: f64,
    pub n: usize,
}

/// A point `(a, v, xi)` of the partially Fourier-transformed chart.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoint {
    pub a: f64,
    pub v: Vec<f64>,
    pub xi: f64,
}

/// `sinh(2 t xi) / (2 t)`, continuous at `t = 0`.
pub fn eta_of_xi(t: f64, xi: f64) -> f64 {
    if t == 0.0 {
        xi
    } else {
        (2.0 * t * xi).sinh() / (2.0 * t)
    }
}

/// Inverse of [`eta_of_xi`].
pub fn xi_of_eta(t: f64, eta: f64) -> f64 {
    if t == 0.0 {
        eta
    } else {
        (2.0 * t * eta).asinh() / (2.0 * t)
    }
}

pub fn twist(p: &SpectralPoint, tp: &TwistParams) -> SpectralPoint {
    let c = (tp.theta * p.xi).cosh();
    SpectralPoint { a: p.a, v: p.v.iter().map(|x| x / c).collect(), xi: eta_of_xi(tp.theta, p.xi) }
}

pub fn twist_inv(p: &SpectralPoint, tp: &TwistParams) -> SpectralPoint {
    let xi = xi_of_eta(tp.theta, p.xi);
    let c = (tp.theta * xi).cosh();
    SpectralPoint { a: p.a, v: p.v.iter().map(|x| x * c).collect(), xi }
}

/// `det D phi_t = cosh(2 t xi) / cosh(t xi)^{2n}`.
pub fn twist_jacobian(p: &SpectralPoint, tp: &TwistParams) -> f64 {
    (2.0 * tp.theta * p.xi).cosh() / (tp.theta * p.xi).cosh().powi(p.v.len() as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwistMap {
    Twist,
    TwistInv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interp {
    /// natural cubic splines along `xi` and `v`
    Spline,
    /// exact evaluation of the `l`-samples' Fourier integral plus trigonometric
    /// interpolation in `v`
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Inverse,
}

/// For a map acting on `(v, xi)` fibrewise: the `xi`-targets and `v`-scale per output `xi`.
fn map_targets(map: TwistMap, t: f64, xi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    match map {
        TwistMap::Twist => (xi.iter().map(|&x| eta_of_xi(t, x)).collect(), xi.iter().map(|&x| 1.0 / (t * x).cosh()).collect()),
        TwistMap::TwistInv => {
            let src: Vec<f64> = xi.iter().map(|&e| xi_of_eta(t, e)).collect();
            let scale = src.iter().map(|&x| (t * x).cosh()).collect();
            (src, scale)
        }
    }
}

/// Resamples `v`-axes by `v -> scale[k] v` where `k` is the last-axis index.
fn rescale_v(values: Vec<Complex64>, spec: &GridSpec, scale: &[f64], interp: Interp) -> Vec<Complex64> {
    let shape = spec.shape();
    let d = shape.len();
    let nk = shape[d - 1];
    let mut vals = values;
    for ax in 1..d - 1 {
        let axis = spec.axis(ax);
        let ops: Vec<Resampler> = scale
            .iter()
            .map(|&s| {
                let targets: Vec<f64> = axis.coords().iter().map(|x| s * x).collect();
                match interp {
                    Interp::Spline => interp::spline(axis, &targets),
                    Interp::Spectral => interp::trig(axis, &targets),
                }
            })
            .collect();
        let (out, _) = interp::map_axis(&vals, &shape, ax, shape[ax], |_, inner| &ops[inner % nk]);
        vals = out;
    }
    vals
}

/// `(map^* f)(p) = f(map(p))` on Fourier-side data.
pub fn pullback(f: &GridFunction, map: TwistMap, tp: &TwistParams, interp: Interp) -> Result<GridFunction> {
    pullback_with(f, map, tp, interp, BOUNDARY_TOL)
}

pub fn pullback_with(f: &GridFunction, map: TwistMap, tp: &TwistParams, interp: Interp, boundary_tol: f64) -> Result<GridFunction> {
    f.expect_space(Space::Fourier)?;
    check_boundary(f, boundary_tol)?;
    let spec = &f.spec;
    let shape = spec.shape();
    let d = shape.len();
    let xi = spec.xi_axis().coords();
    let (xi_src, vscale) = map_targets(map, tp.theta, &xi);
    let along = match interp {
        Interp::Spline => {
            let op = interp::spline(&spec.xi_axis(), &xi_src);
            interp::map_axis(&f.values, &shape, d - 1, shape[d - 1], |_, _| &op).0
        }
        Interp::Spectral => {
            let pos = partial_fourier_inv(f)?;
            let op = interp::dtft(spec.l_axis(), &xi_src);
            interp::map_axis(&pos.values, &shape, d - 1, shape[d - 1], |_, _| &op).0
        }
    };
    let vals = rescale_v(along, spec, &vscale, interp);
    GridFunction::new(spec.clone(), Space::Fourier, vals)
}

/// Transport operator with its options.
#[derive(Debug, Clone)]
pub struct Transport {
    pub tp: TwistParams,
    pub tau: Tau,
    pub interp: Interp,
    pub boundary_tol: f64,
}

impl Transport {
    pub fn new(tp: TwistParams, tau: Tau) -> Self {
        Self { tp, tau, interp: Interp::Spectral, boundary_tol: BOUNDARY_TOL }
    }

    pub fn apply(&self, u: &GridFunction, direction: Direction) -> Result<GridFunction> {
        u.expect_space(Space::Position)?;
        let uh = partial_fourier(u)?;
        check_boundary(&uh, self.boundary_tol)?;
        let spec = &u.spec;
        let shape = spec.shape();
        let d = shape.len();
        let t = self.tp.theta;
        let xi = spec.xi_axis().coords();
        // multiplier is a function of the variable on which F acts before the pullback
        let (map, mult): (TwistMap, Vec<Complex64>) = match direction {
            Direction::Inverse => (TwistMap::Twist, xi.iter().map(|&x| (-self.tau.eval(t, eta_of_xi(t, x))).exp()).collect()),
            Direction::Forward => (TwistMap::TwistInv, xi.iter().map(|&e| self.tau.eval(t, e).exp()).collect()),
        };
        let pulled = match self.interp {
            Interp::Spectral => {
                let (xi_src, vscale) = map_targets(map, t, &xi);
                let op = interp::dtft(spec.l_axis(), &xi_src);
                let along = interp::map_axis(&u.values, &shape, d - 1, shape[d - 1], |_, _| &op).0;
                GridFunction::new(spec.clone(), Space::Fourier, rescale_v(along, spec, &vscale, Interp::Spectral))?
            }
            Interp::Spline => pullback_with(&uh, map, &self.tp, Interp::Spline, self.boundary_tol)?,
        };
        let nk = shape[d - 1];
        let vals = pulled.values.iter().enumerate().map(|(i, z)| z * mult[i % nk]).collect();
        partial_fourier_inv(&GridFunction::new(spec.clone(), Space::Fourier, vals)?)
    }
}

/// `T` (forward) or `T^{-1}` (inverse) with spectral evaluation and default threshold.
pub fn t_apply(u: &GridFunction, tp: &TwistParams, tau: &Tau, direction: Direction) -> Result<GridFunction> {
    Transport::new(*tp, tau.clone()).apply(u, direction)
}

/// `(s_w^* u)(y) = u(s_w(y))` by successive trigonometric interpolation along
/// `a`, each `v_i`, then `l`; targets off the grid read 0.
pub fn symmetry_pullback(u: &GridFunction, w: &Point) -> Result<GridFunction> {
    u.expect_space(Space::Position)?;
    let spec = &u.spec;
    let shape = spec.shape();
    let d = shape.len();
    let n = spec.n();
    if w.n() != n {
        return Err(Error::LengthMismatch { expected: 2 * n, found: w.v.len() });
    }
    let a_ax = spec.axis(0);
    // a -> 2 a_w - a
    let ta: Vec<f64> = a_ax.coords().iter().map(|a| 2.0 * w.a - a).collect();
    let op = interp::trig(a_ax, &ta);
    let mut vals = interp::map_axis(&u.values, &shape, 0, shape[0], |_, _| &op).0;
    // v_i -> 2 cosh(a_w - a) w_i - v_i, per a-index
    for k in 0..2 * n {
        let ax = spec.axis(1 + k);
        let ops: Vec<Resampler> = a_ax
            .coords()
            .iter()
            .map(|a| {
                let c = 2.0 * (w.a - a).cosh() * w.v[k];
                interp::trig(ax, &ax.coords().iter().map(|v| c - v).collect::<Vec<_>>())
            })
            .collect();
        let before: usize = shape[1..1 + k].iter().product();
        vals = interp::map_axis(&vals, &shape, 1 + k, shape[1 + k], |outer, _| &ops[outer / before.max(1)]).0;
    }
    // l -> 2 cosh(2(a_w - a)) l_w + Omega(w_v, v) sinh(a_w - a) - l, per (a, v)
    let l_ax = spec.l_axis();
    let lines = spec.len() / shape[d - 1];
    let sub = GridSpec::new(spec.axes()[..d - 1].iter().cloned().chain(std::iter::once(*l_ax)).collect())?;
    let ops: Vec<Resampler> = (0..lines)
        .map(|o| {
            let c = sub.coords_of(o * shape[d - 1], Space::Position);
            let (a, v) = (c[0], &c[1..d - 1]);
            let shift = 2.0 * (2.0 * (w.a - a)).cosh() * w.l + crate::algebra::omega(&w.v, v) * (w.a - a).sinh();
            interp::trig(l_ax, &l_ax.coords().iter().map(|l| shift - l).collect::<Vec<_>>())
        })
        .collect();
    vals = interp::map_axis(&vals, &shape, d - 1, shape[d - 1], |outer, _| &ops[outer]).0;
    GridFunction::new(spec.clone(), Space::Position, vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss_spec() -> GridSpec {
        GridSpec::cube(0, -8.0, 8.0, 64).unwrap()
    }

    #[test]
    fn axis_validation() {
        assert!(Axis::new(AxisRole::A, 0.0, 1.0, 12).is_err());
        assert!(Axis::new(AxisRole::A, 1.0, 1.0, 16).is_err());
        assert!(Axis::new(AxisRole::A, 0.0, 1.0, 4).is_err());
    }

    #[test]
    fn gaussian_transform() {
        let spec = gauss_spec();
        let u = GridFunction::from_fn(&spec, |c| Complex64::new((-0.5 * c[1] * c[1]).exp(), 0.0));
        let uh = partial_fourier(&u).unwrap();
        let mut err: f64 = 0.0;
        for i in 0..spec.len() {
            let xi = spec.coords_of(i, Space::Fourier)[1];
            let exact = (2.0 * PI).sqrt() * (-0.5 * xi * xi).exp();
            err = err.max((uh.values()[i] - exact).norm());
        }
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn wrong_tag_rejected() {
        let u = GridFunction::zeros(&gauss_spec(), Space::Fourier);
        assert!(matches!(partial_fourier(&u), Err(Error::WrongSpaceTag { .. })));
    }

    #[test]
    fn twist_basics() {
        let tp = TwistParams { theta: 0.7, n: 1 };
        let p = SpectralPoint { a: 0.2, v: vec![0.3, -0.1], xi: 0.0 };
        assert_eq!(twist(&p, &tp), p);
        assert_eq!(twist_jacobian(&p, &tp), 1.0);
    }
}
