//! Multi-point functions on `M` with the differentials `delta` and
//! `delta_op = -sigma12 . delta . sigma12`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{symmetry, Point};
use crate::report::Report;

pub type CochainFn = dyn Fn(&[Point]) -> Complex64 + Send + Sync;
pub type ScalarFn = dyn Fn(f64) -> Complex64 + Send + Sync;

#[derive(Clone)]
pub struct Cochain {
    arity: usize,
    eval: Arc<CochainFn>,
    /// invariant under the diagonal action of the symmetries
    pub invariant: bool,
    /// depends on the points only through differences of their `a`-coordinates
    pub leafwise_constant: bool,
}

impl fmt::Debug for Cochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Cochain")
            .field("arity", &self.arity)
            .field("invariant", &self.invariant)
            .field("leafwise_constant", &self.leafwise_constant)
            .finish()
    }
}

impl Cochain {
    pub fn new(arity: usize, eval: impl Fn(&[Point]) -> Complex64 + Send + Sync + 'static) -> Result<Self> {
        if arity == 0 {
            return Err(Error::InvalidArgument("cochain arity must be >= 1".into()));
        }
        Ok(Self { arity, eval: Arc::new(eval), invariant: false, leafwise_constant: false })
    }

    pub fn with_flags(mut self, invariant: bool, leafwise_constant: bool) -> Self {
        self.invariant = invariant;
        self.leafwise_constant = leafwise_constant;
        self
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, pts: &[Point]) -> Result<Complex64> {
        if pts.len() != self.arity {
            return Err(Error::LengthMismatch { expected: self.arity, found: pts.len() });
        }
        Ok((self.eval)(pts))
    }

    fn call(&self, pts: &[Point]) -> Complex64 {
        (self.eval)(pts)
    }
}

/// `(delta c)(x_0..x_q) = sum_j (-1)^j c(.. omit x_j ..)`.
pub fn coboundary(c: &Cochain) -> Cochain {
    let inner = c.clone();
    let q = c.arity + 1;
    Cochain {
        arity: q,
        eval: Arc::new(move |pts: &[Point]| {
            let mut s = Complex64::new(0.0, 0.0);
            let mut buf: Vec<Point> = Vec::with_capacity(q - 1);
            for j in 0..q {
                buf.clear();
                buf.extend(pts.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, p)| p.clone()));
                let t = inner.call(&buf);
                if j % 2 == 0 {
                    s += t;
                } else {
                    s -= t;
                }
            }
            s
        }),
        invariant: c.invariant,
        leafwise_constant: c.leafwise_constant,
    }
}

/// Swap of the first two arguments; identity on arity one.
pub fn sigma12(c: &Cochain) -> Cochain {
    if c.arity < 2 {
        return c.clone();
    }
    let inner = c.clone();
    Cochain {
        arity: c.arity,
        eval: Arc::new(move |pts: &[Point]| {
            let mut p = pts.to_vec();
            p.swap(0, 1);
            inner.call(&p)
        }),
        invariant: c.invariant,
        leafwise_constant: c.leafwise_constant,
    }
}

pub fn negate(c: &Cochain) -> Cochain {
    let inner = c.clone();
    Cochain { eval: Arc::new(move |pts: &[Point]| -inner.call(pts)), ..c.clone() }
}

pub fn coboundary_op(c: &Cochain) -> Cochain {
    negate(&sigma12(&coboundary(&sigma12(c))))
}

/// Which argument order embeds a function of one variable as a leafwise-constant
/// two-point function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Embedding {
    /// `c(x0, x1) = g(a0 - a1)`
    Forward,
    /// `c(x0, x1) = g(a1 - a0)`
    Reversed,
}

pub fn leafwise_two_cochain(g: Arc<ScalarFn>, embedding: Embedding) -> Cochain {
    Cochain {
        arity: 2,
        eval: Arc::new(move |p: &[Point]| match embedding {
            Embedding::Forward => g(p[0].a - p[1].a),
            Embedding::Reversed => g(p[1].a - p[0].a),
        }),
        invariant: true,
        leafwise_constant: true,
    }
}

/// Recovers the profile `g(t)` of a leafwise-constant two-point function.
pub fn leafwise_profile(c: &Cochain, n: usize, t: f64, embedding: Embedding) -> Result<Complex64> {
    let x = Point::new(t, vec![0.0; 2 * n], 0.0);
    let o = Point::origin(n);
    match embedding {
        Embedding::Forward => c.eval(&[x, o]),
        Embedding::Reversed => c.eval(&[o, x]),
    }
}

/// `delta_op(sigma12 c)` with `c(x0, x1) = g(a0 - a1)`, composed from the differentials.
pub fn multiplier_three_point(g: Arc<ScalarFn>) -> Cochain {
    multiplier_three_point_with(g, Embedding::Forward)
}

pub fn multiplier_three_point_with(g: Arc<ScalarFn>, embedding: Embedding) -> Cochain {
    coboundary_op(&sigma12(&leafwise_two_cochain(g, embedding)))
}

/// Closed form of [`multiplier_three_point`]: `g(a1-a2) - g(a0-a2) - g(a1-a0)`.
pub fn multiplier_three_point_closed(g: &ScalarFn, t: &[Point]) -> Complex64 {
    let (a0, a1, a2) = (t[0].a, t[1].a, t[2].a);
    g(a1 - a2) - g(a0 - a2) - g(a1 - a0)
}

/// Ratio `P(a1-a2) / (P(a0-a2) P(a1-a0))` with `P = exp(g)`.
pub fn heuristic_ratio(g: &ScalarFn, t: &[Point]) -> Complex64 {
    let (a0, a1, a2) = (t[0].a, t[1].a, t[2].a);
    g(a1 - a2).exp() / (g(a0 - a2).exp() * g(a1 - a0).exp())
}

/// Largest of `|S(x1,x0,x2) + S|`, `|S(x0,x2,x1) + S|`, scaled by the magnitude of `S`.
fn skew_residual(s: &Cochain, t: &[Point]) -> f64 {
    let base = s.call(t);
    let sw01 = s.call(&[t[1].clone(), t[0].clone(), t[2].clone()]);
    let sw12 = s.call(&[t[0].clone(), t[2].clone(), t[1].clone()]);
    let scale = 1f64.max(base.norm());
    ((sw01 + base).norm().max((sw12 + base).norm())) / scale
}

/// Admissibility `S(x, s_x y, z) = -S(x, y, z)` at the sampled triangles.
///
/// Residuals are divided by `max(1, |S(x,y,z)|, |S(x,s_x y,z)|)`: the kernel phase
/// reaches `1e7` on `|a| <= 2` and carries cancellation at that scale.
pub fn admissibility_check(s: &Cochain, samples: &[[Point; 3]]) -> Result<Report> {
    if s.arity != 3 {
        return Err(Error::InvalidArgument("admissibility needs a three-point function".into()));
    }
    let mut skew: f64 = 0.0;
    for t in samples {
        skew = skew.max(skew_residual(s, t));
    }
    if skew > 1e-9 {
        return Err(Error::NotSkewSymmetric(skew));
    }
    let mut worst: f64 = 0.0;
    for t in samples {
        let sy = symmetry(&t[0], &t[1]);
        let lhs = s.call(&[t[0].clone(), sy, t[2].clone()]);
        let rhs = s.call(t);
        worst = worst.max((lhs + rhs).norm() / 1f64.max(lhs.norm()).max(rhs.norm()));
    }
    let mut rep = Report::new();
    rep.at_most("cochain.skew", "three-point function is totally skew", skew, 1e-9);
    rep.at_most("cochain.admissible", "S(x, s_x y, z) = -S(x, y, z)", worst, 1e-9)
        .with_note(format!("{} triangles", samples.len()));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn c1(f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Cochain {
        Cochain::new(1, move |p: &[Point]| Complex64::new(f(&p[0]), 0.0)).unwrap()
    }

    #[test]
    fn zero_arity_rejected() {
        assert!(Cochain::new(0, |_| Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn coboundary_of_coordinate() {
        let d = coboundary(&c1(|p| p.a));
        let x0 = Point::new(0.3, vec![], 1.0);
        let x1 = Point::new(-0.4, vec![], 2.0);
        assert!((d.eval(&[x0, x1]).unwrap().re - (-0.7)).abs() < 1e-15);
    }

    #[test]
    fn op_on_arity_one_is_delta() {
        let c = c1(|p| p.a.sin() + p.l);
        let mut r = rng::seeded(1);
        for _ in 0..50 {
            let pts = [rng::point(&mut r, 0, 2.0), rng::point(&mut r, 0, 2.0)];
            let lhs = coboundary_op(&c).eval(&pts).unwrap();
            let rhs = coboundary(&c).eval(&pts).unwrap();
            assert!((lhs - rhs).norm() < 1e-15);
        }
    }

    #[test]
    fn linear_profile_value() {
        let g: Arc<ScalarFn> = Arc::new(|t| Complex64::new(t, 0.0));
        let m = multiplier_three_point(g.clone());
        let pts = [Point::new(1.0, vec![], 0.0), Point::new(0.25, vec![], 0.0), Point::new(-0.5, vec![], 0.0)];
        let v = m.eval(&pts).unwrap();
        // (a1-a2) - (a0-a2) - (a1-a0) cancels identically for linear g
        assert!(v.norm() < 1e-15);
        assert!((v - multiplier_three_point_closed(g.as_ref(), &pts)).norm() < 1e-15);
    }
}
