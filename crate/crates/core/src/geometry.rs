//! Chart-level geometry of `M = S`: group law, symmetries, left-invariant and
//! fundamental fields, the Loos connection, and the phase / amplitudes of the
//! three-point kernels.
//!
//! The symplectic form preserved by the symmetries in this chart is
//! `da ^ dl + (1/2) Omega` (see [`omega_chart`]).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{omega, omega_entry};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub a: f64,
    pub v: Vec<f64>,
    pub l: f64,
}

impl Point {
    pub fn new(a: f64, v: Vec<f64>, l: f64) -> Self {
        debug_assert!(v.len() % 2 == 0);
        Self { a, v, l }
    }

    pub fn origin(n: usize) -> Self {
        Self::new(0.0, vec![0.0; 2 * n], 0.0)
    }

    pub fn n(&self) -> usize {
        self.v.len() / 2
    }

    pub fn dim(&self) -> usize {
        self.v.len() + 2
    }

    /// Coordinates in the order `(a, v_1..v_2n, l)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.dim());
        c.push(self.a);
        c.extend_from_slice(&self.v);
        c.push(self.l);
        c
    }

    pub fn from_slice(c: &[f64]) -> Self {
        let d = c.len();
        Self::new(c[0], c[1..d - 1].to_vec(), c[d - 1])
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.l.is_finite() && self.v.iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.to_vec().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Max-norm distance.
    pub fn dist(&self, other: &Point) -> f64 {
        self.to_vec().iter().zip(other.to_vec()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    }

    /// Max-norm distance divided by `max(1, |self|, |other|)`.
    pub fn rel_dist(&self, other: &Point) -> f64 {
        self.dist(other) / 1f64.max(self.max_abs()).max(other.max_abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub x0: Point,
    pub x1: Point,
    pub x2: Point,
}

impl Triangle {
    pub fn new(x0: Point, x1: Point, x2: Point) -> Self {
        Self { x0, x1, x2 }
    }

    pub fn map(&self, f: impl Fn(&Point) -> Point) -> Self {
        Self::new(f(&self.x0), f(&self.x1), f(&self.x2))
    }
}

/// Geodesic symmetry `s_x(y)`.
pub fn symmetry(x: &Point, y: &Point) -> Point {
    let d = x.a - y.a;
    let ch = d.cosh();
    Point {
        a: 2.0 * x.a - y.a,
        v: x.v.iter().zip(&y.v).map(|(p, q)| 2.0 * ch * p - q).collect(),
        l: 2.0 * (2.0 * d).cosh() * x.l + omega(&x.v, &y.v) * d.sinh() - y.l,
    }
}

/// Jacobian `D_y s_x(y)` in chart coordinates.
pub fn symmetry_jacobian(x: &Point, y: &Point) -> DMatrix<f64> {
    let n = x.n();
    let dim = x.dim();
    let d = x.a - y.a;
    let mut j = DMatrix::zeros(dim, dim);
    j[(0, 0)] = -1.0;
    for i in 0..2 * n {
        j[(1 + i, 0)] = -2.0 * d.sinh() * x.v[i];
        j[(1 + i, 1 + i)] = -1.0;
        let mut e = vec![0.0; 2 * n];
        e[i] = 1.0;
        j[(dim - 1, 1 + i)] = d.sinh() * omega(&x.v, &e);
    }
    j[(dim - 1, 0)] = -4.0 * (2.0 * d).sinh() * x.l - omega(&x.v, &y.v) * d.cosh();
    j[(dim - 1, dim - 1)] = -1.0;
    j
}

/// Central finite-difference Jacobian of `f` at `y`.
pub fn fd_jacobian(f: impl Fn(&Point) -> Point, y: &Point, h: f64) -> DMatrix<f64> {
    let c = y.to_vec();
    let dim = c.len();
    let mut j = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let mut p = c.clone();
        let mut m = c.clone();
        p[k] += h;
        m[k] -= h;
        let (fp, fm) = (f(&Point::from_slice(&p)).to_vec(), f(&Point::from_slice(&m)).to_vec());
        for i in 0..dim {
            j[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    j
}

/// Group law of `S` in the chart.
pub fn group_mul(g1: &Point, g2: &Point) -> Point {
    let e1 = (-g2.a).exp();
    let x1: Vec<f64> = g1.v.iter().map(|x| e1 * x).collect();
    Point {
        a: g1.a + g2.a,
        l: e1 * e1 * g1.l + g2.l + 0.5 * omega(&x1, &g2.v),
        v: x1.iter().zip(&g2.v).map(|(p, q)| p + q).collect(),
    }
}

pub fn group_inv(g: &Point) -> Point {
    let e = g.a.exp();
    Point { a: -g.a, v: g.v.iter().map(|x| -e * x).collect(), l: -e * e * g.l }
}

/// `exp(t e_i)` for the basis `(H, v_1..v_2n, E)` of `s`.
pub fn group_exp_basis(n: usize, i: usize, t: f64) -> Point {
    let mut c = vec![0.0; 2 * n + 2];
    c[i] = t;
    Point::from_slice(&c)
}

/// `s_x` obtained by conjugating `s_o = -id` with left translation by `x`.
pub fn conjugated_symmetry(x: &Point, y: &Point) -> Point {
    let z = group_mul(&group_inv(x), y);
    let mz = Point { a: -z.a, v: z.v.iter().map(|t| -t).collect(), l: -z.l };
    group_mul(x, &mz)
}

/// Value and Jacobian of a vector field at a point.
#[derive(Debug, Clone)]
pub struct FieldJet {
    pub value: DVector<f64>,
    pub jacobian: DMatrix<f64>,
}

/// Left-invariant frame field `i` of the basis `(H, v_1..v_2n, E)`.
pub fn frame_jet(i: usize, y: &Point) -> FieldJet {
    let n = y.n();
    let dim = y.dim();
    let mut value = DVector::zeros(dim);
    let mut jac = DMatrix::zeros(dim, dim);
    if i == 0 {
        value[0] = 1.0;
        for k in 0..2 * n {
            value[1 + k] = -y.v[k];
            jac[(1 + k, 1 + k)] = -1.0;
        }
        value[dim - 1] = -2.0 * y.l;
        jac[(dim - 1, dim - 1)] = -2.0;
    } else if i < dim - 1 {
        let k = i - 1;
        value[i] = 1.0;
        let mut e = vec![0.0; 2 * n];
        e[k] = 1.0;
        value[dim - 1] = 0.5 * omega(&y.v, &e);
        for j in 0..2 * n {
            jac[(dim - 1, 1 + j)] = 0.5 * omega_entry(n, j, k);
        }
    } else {
        value[dim - 1] = 1.0;
    }
    FieldJet { value, jacobian: jac }
}

pub fn left_invariant_field(i: usize, y: &Point) -> Vec<f64> {
    frame_jet(i, y).value.as_slice().to_vec()
}

/// Fundamental field of the isotropy element `Z = (z_v, z_l)` of `k = V + R`.
pub fn fundamental_jet(z_v: &[f64], z_l: f64, y: &Point) -> FieldJet {
    let n = y.n();
    let dim = y.dim();
    let (sh, ch) = (y.a.sinh(), y.a.cosh());
    let (sh2, ch2) = ((2.0 * y.a).sinh(), (2.0 * y.a).cosh());
    let oxz = omega(&y.v, z_v);
    let mut value = DVector::zeros(dim);
    let mut jac = DMatrix::zeros(dim, dim);
    for k in 0..2 * n {
        value[1 + k] = -2.0 * sh * z_v[k];
        jac[(1 + k, 0)] = -2.0 * ch * z_v[k];
    }
    value[dim - 1] = -(ch * oxz + 2.0 * sh2 * z_l);
    jac[(dim - 1, 0)] = -(sh * oxz + 4.0 * ch2 * z_l);
    for j in 0..2 * n {
        let mut e = vec![0.0; 2 * n];
        e[j] = 1.0;
        jac[(dim - 1, 1 + j)] = -ch * omega(&e, z_v);
    }
    FieldJet { value, jacobian: jac }
}

pub fn fundamental_field(z_v: &[f64], z_l: f64, y: &Point) -> Vec<f64> {
    fundamental_jet(z_v, z_l, y).value.as_slice().to_vec()
}

/// `[X, Y] = DY X - DX Y`.
pub fn lie_bracket(x: &FieldJet, y: &FieldJet) -> DVector<f64> {
    &y.jacobian * &x.value - &x.jacobian * &y.value
}

/// Matrix of the invariant symplectic form `da ^ dl + (1/2) Omega` in chart coordinates.
pub fn omega_chart(n: usize) -> DMatrix<f64> {
    let dim = 2 * n + 2;
    let mut w = DMatrix::zeros(dim, dim);
    w[(0, dim - 1)] = 1.0;
    w[(dim - 1, 0)] = -1.0;
    for i in 0..2 * n {
        for j in 0..2 * n {
            w[(1 + i, 1 + j)] = 0.5 * omega_entry(n, i, j);
        }
    }
    w
}

/// `Omega(v0, v1) + Omega(v1, v2) + Omega(v2, v0)`.
pub fn phase_s0(v0: &[f64], v1: &[f64], v2: &[f64]) -> Result<f64> {
    for w in [v1, v2] {
        if w.len() != v0.len() {
            return Err(Error::LengthMismatch { expected: v0.len(), found: w.len() });
        }
    }
    if v0.len() % 2 != 0 {
        return Err(Error::InvalidArgument("vectors must have even length".into()));
    }
    Ok(omega(v0, v1) + omega(v1, v2) + omega(v2, v0))
}

fn scaled(c: f64, v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| c * x).collect()
}

/// Kernel phase `S`.
pub fn phase_s(t: &Triangle) -> f64 {
    let (x0, x1, x2) = (&t.x0, &t.x1, &t.x2);
    let s0 = omega(&scaled((x1.a - x2.a).cosh(), &x0.v), &scaled((x2.a - x0.a).cosh(), &x1.v))
        + omega(&scaled((x2.a - x0.a).cosh(), &x1.v), &scaled((x0.a - x1.a).cosh(), &x2.v))
        + omega(&scaled((x0.a - x1.a).cosh(), &x2.v), &scaled((x1.a - x2.a).cosh(), &x0.v));
    s0 - ((2.0 * (x0.a - x1.a)).sinh() * x2.l + (2.0 * (x1.a - x2.a)).sinh() * x0.l + (2.0 * (x2.a - x0.a)).sinh() * x1.l)
}

/// Amplitude `A_1` of the transported Weyl kernel.
pub fn amplitude_a1(t: &Triangle) -> f64 {
    let (a0, a1, a2) = (t.x0.a, t.x1.a, t.x2.a);
    let n = t.x0.n() as i32;
    (2.0 * (a1 - a2)).cosh() * ((a2 - a0).cosh() * (a0 - a1).cosh()).powi(2 * n)
}

/// Amplitude `A_can` of the tracial kernels.
pub fn amplitude_acan(t: &Triangle) -> f64 {
    let (a0, a1, a2) = (t.x0.a, t.x1.a, t.x2.a);
    let n = t.x0.n() as i32;
    ((2.0 * (a0 - a1)).cosh() * (2.0 * (a1 - a2)).cosh() * (2.0 * (a2 - a0)).cosh()).sqrt()
        * ((a0 - a1).cosh() * (a1 - a2).cosh() * (a2 - a0).cosh()).powi(n)
}

#[derive(Debug, Clone)]
pub struct LoosConnection {
    /// `gamma[(k * dim + i) * dim + j] = Gamma^k_ij`
    pub christoffel: Vec<f64>,
    pub dim: usize,
    pub torsion_residual: f64,
    pub nabla_omega_residual: f64,
}

impl LoosConnection {
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        self.christoffel[(k * self.dim + i) * self.dim + j]
    }
}

/// `Gamma^k_ij(x) = (1/2) d/dy_i [D s_x(s_x(y))]_{kj}` at `y = x`, central differences.
fn christoffel(x: &Point, h: f64) -> Vec<f64> {
    let dim = x.dim();
    let c = x.to_vec();
    let mut g = vec![0.0; dim * dim * dim];
    for i in 0..dim {
        let mut p = c.clone();
        let mut m = c.clone();
        p[i] += h;
        m[i] -= h;
        let (yp, ym) = (Point::from_slice(&p), Point::from_slice(&m));
        let jp = symmetry_jacobian(x, &symmetry(x, &yp));
        let jm = symmetry_jacobian(x, &symmetry(x, &ym));
        for k in 0..dim {
            for j in 0..dim {
                g[(k * dim + i) * dim + j] = 0.25 * (jp[(k, j)] - jm[(k, j)]) / h;
            }
        }
    }
    g
}

fn finish(dim: usize, gamma: Vec<f64>, n: usize) -> LoosConnection {
    let w = omega_chart(n);
    let mut torsion: f64 = 0.0;
    let mut nabla: f64 = 0.0;
    let gm = |k: usize, i: usize, j: usize| gamma[(k * dim + i) * dim + j];
    for k in 0..dim {
        for i in 0..dim {
            for j in 0..dim {
                torsion = torsion.max((gm(k, i, j) - gm(k, j, i)).abs());
                // (nabla_i omega)_{jk} for a constant form
                let s: f64 = (0..dim).map(|m| gm(m, i, j) * w[(m, k)] + gm(m, i, k) * w[(j, m)]).sum();
                nabla = nabla.max(s.abs());
            }
        }
    }
    LoosConnection { christoffel: gamma, dim, torsion_residual: torsion, nabla_omega_residual: nabla }
}

/// Loos connection at `x` from the symmetry `s_x` with finite-difference step `h`.
pub fn loos_connection_at(x: &Point, h: f64) -> Result<LoosConnection> {
    if !(1e-6..=1e-2).contains(&h) {
        return Err(Error::InvalidArgument(format!("step {h} outside [1e-6, 1e-2]")));
    }
    Ok(finish(x.dim(), christoffel(x, h), x.n()))
}

/// Richardson-refined variant: `(4 Gamma(h/2) - Gamma(h)) / 3`.
pub fn loos_connection_richardson(x: &Point, h: f64) -> Result<LoosConnection> {
    if !(1e-6..=1e-2).contains(&h) {
        return Err(Error::InvalidArgument(format!("step {h} outside [1e-6, 1e-2]")));
    }
    let g1 = christoffel(x, h);
    let g2 = christoffel(x, 0.5 * h);
    let g = g2.iter().zip(&g1).map(|(b, a)| (4.0 * b - a) / 3.0).collect();
    Ok(finish(x.dim(), g, x.n()))
}

/// Geodesic of the Loos connection by classical RK4.
pub fn geodesic(x0: &Point, velocity: &[f64], t_end: f64, steps: usize, h: f64) -> Result<Point> {
    let dim = x0.dim();
    if velocity.len() != dim {
        return Err(Error::LengthMismatch { expected: dim, found: velocity.len() });
    }
    let accel = |x: &[f64], u: &[f64]| -> Result<Vec<f64>> {
        let con = loos_connection_at(&Point::from_slice(x), h)?;
        Ok((0..dim)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..dim {
                    for j in 0..dim {
                        s -= con.gamma(k, i, j) * u[i] * u[j];
                    }
                }
                s
            })
            .collect())
    };
    let dt = t_end / steps as f64;
    let mut x = x0.to_vec();
    let mut u = velocity.to_vec();
    let axpy = |a: &[f64], s: f64, b: &[f64]| a.iter().zip(b).map(|(p, q)| p + s * q).collect::<Vec<_>>();
    for _ in 0..steps {
        let k1x = u.clone();
        let k1u = accel(&x, &u)?;
        let (x2, u2) = (axpy(&x, 0.5 * dt, &k1x), axpy(&u, 0.5 * dt, &k1u));
        let k2x = u2.clone();
        let k2u = accel(&x2, &u2)?;
        let (x3, u3) = (axpy(&x, 0.5 * dt, &k2x), axpy(&u, 0.5 * dt, &k2u));
        let k3x = u3.clone();
        let k3u = accel(&x3, &u3)?;
        let (x4, u4) = (axpy(&x, dt, &k3x), axpy(&u, dt, &k3u));
        let k4x = u4.clone();
        let k4u = accel(&x4, &u4)?;
        for i in 0..dim {
            x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            u[i] += dt / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
        }
    }
    Ok(Point::from_slice(&x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn symmetry_at_origin_is_minus_identity() {
        let o = Point::origin(1);
        let y = Point::new(0.3, vec![-1.0, 2.0], 0.7);
        let s = symmetry(&o, &y);
        assert_eq!(s, Point::new(-0.3, vec![1.0, -2.0], -0.7));
    }

    #[test]
    fn analytic_jacobian_matches_fd() {
        let mut r = rng::seeded(3);
        for _ in 0..20 {
            let x = rng::point(&mut r, 1, 1.0);
            let y = rng::point(&mut r, 1, 1.0);
            let ja = symmetry_jacobian(&x, &y);
            let jf = fd_jacobian(|p| symmetry(&x, p), &y, 1e-5);
            assert!((ja - jf).amax() < 1e-7);
        }
    }

    #[test]
    fn fundamental_jet_is_consistent() {
        let mut r = rng::seeded(4);
        let y = rng::point(&mut r, 1, 1.0);
        let z = fundamental_jet(&[0.4, -0.3], 0.2, &y);
        let h = 1e-6;
        for k in 0..4 {
            let mut p = y.to_vec();
            let mut m = y.to_vec();
            p[k] += h;
            m[k] -= h;
            let fp = fundamental_field(&[0.4, -0.3], 0.2, &Point::from_slice(&p));
            let fm = fundamental_field(&[0.4, -0.3], 0.2, &Point::from_slice(&m));
            for i in 0..4 {
                assert!(((fp[i] - fm[i]) / (2.0 * h) - z.jacobian[(i, k)]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn phase_s0_example() {
        assert_eq!(phase_s0(&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!(phase_s0(&[1.0, 0.0], &[0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn step_range_enforced() {
        assert!(loos_connection_at(&Point::origin(0), 1.0).is_err());
    }
}
