//! Exact polynomial observables and differential operators with polynomial
//! coefficients over `Q[i]`, in the chart variables `(a, v_1..v_2n, l)`.

use std::collections::BTreeMap;

use num_complex::{Complex, Complex64};
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::transforms::{GridFunction, Space};

pub type Q = Ratio<i128>;
pub type Cq = Complex<Q>;

pub fn q(n: i128) -> Q {
    Q::from_integer(n)
}

pub fn cq(re: Q, im: Q) -> Cq {
    Complex::new(re, im)
}

pub fn re(r: Q) -> Cq {
    Complex::new(r, Q::zero())
}

/// `i^k`
pub fn i_pow(k: u32) -> Cq {
    match k % 4 {
        0 => re(q(1)),
        1 => cq(q(0), q(1)),
        2 => re(q(-1)),
        _ => cq(q(0), q(-1)),
    }
}

pub fn to_c64(z: &Cq) -> Complex64 {
    Complex64::new(z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))
}

fn falling(n: u32, k: u32) -> i128 {
    (0..k).map(|j| (n - j) as i128).product()
}

fn binom(n: u32, k: u32) -> i128 {
    falling(n, k) / falling(k, k)
}

fn insert(map: &mut BTreeMap<Vec<u32>, Cq>, key: Vec<u32>, c: Cq) {
    if c.is_zero() {
        return;
    }
    let e = map.entry(key.clone()).or_insert_with(Cq::zero);
    *e = *e + c;
    if e.is_zero() {
        map.remove(&key);
    }
}

/// Sparse polynomial: exponent vector over the `dim` chart variables to coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyObservable {
    dim: usize,
    terms: BTreeMap<Vec<u32>, Cq>,
}

impl PolyObservable {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Cq) -> Self {
        Self::monomial(vec![0; dim], c)
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, re(q(1)))
    }

    pub fn monomial(exps: Vec<u32>, c: Cq) -> Self {
        let mut p = Self::zero(exps.len());
        insert(&mut p.terms, exps, c);
        p
    }

    /// The coordinate function `x_i`.
    pub fn var(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self::monomial(e, re(q(1)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Cq)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            insert(&mut out.terms, e.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(re(q(-1))))
    }

    pub fn scale(&self, s: Cq) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            insert(&mut out.terms, e.clone(), *c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                insert(&mut out.terms, e, *c1 * *c2);
            }
        }
        out
    }

    /// `d^m / dx_i^m`
    pub fn derivative(&self, i: usize, m: u32) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[i] >= m {
                let mut e2 = e.clone();
                e2[i] -= m;
                insert(&mut out.terms, e2, *c * re(q(falling(e[i], m))));
            }
        }
        out
    }

    /// `d^alpha` for a multi-index.
    pub fn derivative_multi(&self, alpha: &[u32]) -> Self {
        alpha.iter().enumerate().fold(self.clone(), |p, (i, &m)| if m == 0 { p } else { p.derivative(i, m) })
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms.iter().map(|(e, c)| to_c64(c) * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>()).sum()
    }

    /// Random polynomial of total degree `<= deg` with small integer coefficients.
    pub fn random<R: Rng>(rng: &mut R, dim: usize, deg: u32) -> Self {
        let mut out = Self::zero(dim);
        for e in exponents_up_to(dim, deg) {
            if rng.gen_bool(0.6) {
                let c = cq(q(rng.gen_range(-3..=3)), q(rng.gen_range(-2..=2)));
                insert(&mut out.terms, e, c);
            }
        }
        out
    }
}

/// All exponent vectors of total degree `<= deg`.
pub fn exponents_up_to(dim: usize, deg: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|e: Vec<u32>| {
                let used: u32 = e.iter().sum();
                (0..=deg - used).map(move |k| {
                    let mut e2 = e.clone();
                    e2.push(k);
                    e2
                })
            })
            .collect();
    }
    out
}

/// `sum c x^alpha d^beta`, key `(alpha, beta)`; coefficients act on the left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffOp {
    dim: usize,
    terms: BTreeMap<Vec<u32>, Cq>,
}

impl DiffOp {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::term(vec![0; dim], vec![0; dim], re(q(1)))
    }

    pub fn term(alpha: Vec<u32>, beta: Vec<u32>, c: Cq) -> Self {
        let dim = alpha.len();
        let mut op = Self::zero(dim);
        let mut key = alpha;
        key.extend(beta);
        insert(&mut op.terms, key, c);
        op
    }

    /// `d^m / dx_i^m`
    pub fn deriv(dim: usize, i: usize, m: u32) -> Self {
        let mut b = vec![0; dim];
        b[i] = m;
        Self::term(vec![0; dim], b, re(q(1)))
    }

    /// Multiplication by `x_i^m`.
    pub fn mul_var(dim: usize, i: usize, m: u32) -> Self {
        let mut a = vec![0; dim];
        a[i] = m;
        Self::term(a, vec![0; dim], re(q(1)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `((alpha, beta), c)` triples.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &[u32], &Cq)> {
        self.terms.iter().map(move |(k, c)| (&k[..self.dim], &k[self.dim..], c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            insert(&mut out.terms, k.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(re(q(-1))))
    }

    pub fn scale(&self, s: Cq) -> Self {
        let mut out = Self::zero(self.dim);
        for (k, c) in &self.terms {
            insert(&mut out.terms, k.clone(), *c * s);
        }
        out
    }

    /// `self o other`, normal ordered by the Leibniz rule
    /// `d^b x^g = sum_k C(b, k) g!/(g-k)! x^{g-k} d^{b-k}` per variable.
    pub fn compose(&self, other: &Self) -> Self {
        let d = self.dim;
        let mut out = Self::zero(d);
        for (a1, b1, c1) in self.terms() {
            for (a2, b2, c2) in other.terms() {
                // enumerate kappa <= min(b1, a2) per variable
                let mut partial: Vec<(Vec<u32>, Vec<u32>, Cq)> = vec![(a1.to_vec(), vec![], *c1 * *c2)];
                for i in 0..d {
                    let mut next = Vec::new();
                    for (alpha, beta, c) in &partial {
                        for k in 0..=b1[i].min(a2[i]) {
                            let f = binom(b1[i], k) * falling(a2[i], k);
                            let mut al = alpha.clone();
                            al[i] += a2[i] - k;
                            let mut be = beta.clone();
                            be.push(b1[i] - k + b2[i]);
                            next.push((al, be, *c * re(q(f))));
                        }
                    }
                    partial = next;
                }
                for (alpha, beta, c) in partial {
                    let mut key = alpha;
                    key.extend(beta);
                    insert(&mut out.terms, key, c);
                }
            }
        }
        out
    }

    pub fn pow(&self, m: u32) -> Self {
        (0..m).fold(Self::identity(self.dim), |acc, _| acc.compose(self))
    }

    pub fn apply(&self, u: &PolyObservable) -> PolyObservable {
        let mut out = PolyObservable::zero(self.dim);
        for (alpha, beta, c) in self.terms() {
            let du = u.derivative_multi(beta);
            if du.is_zero() {
                continue;
            }
            out = out.add(&du.mul(&PolyObservable::monomial(alpha.to_vec(), *c)));
        }
        out
    }

    /// Same operator on grid data: spectral derivatives times coordinate monomials.
    pub fn apply_grid(&self, u: &GridFunction) -> Result<GridFunction> {
        u.expect_space(Space::Position)?;
        if u.spec().axes().len() != self.dim {
            return Err(Error::LengthMismatch { expected: self.dim, found: u.spec().axes().len() });
        }
        let mut by_beta: BTreeMap<Vec<u32>, Vec<(Vec<u32>, Complex64)>> = BTreeMap::new();
        for (alpha, beta, c) in self.terms() {
            by_beta.entry(beta.to_vec()).or_default().push((alpha.to_vec(), to_c64(c)));
        }
        let mut out = GridFunction::zeros(u.spec(), Space::Position);
        for (beta, coeffs) in by_beta {
            let du = grid_derivative(u, &beta);
            let term = du.mul_fn(|x| coeffs.iter().map(|(alpha, c)| c * alpha.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>()).sum());
            out = out.add(&term)?;
        }
        Ok(out)
    }
}

fn grid_derivative(u: &GridFunction, beta: &[u32]) -> GridFunction {
    beta.iter().enumerate().fold(u.clone(), |f, (i, &m)| if m == 0 { f } else { f.derivative(i, m) })
}

/// Bidifferential operator `sum c d^alpha u d^beta v`, key `(alpha, beta)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiDiff {
    dim: usize,
    terms: BTreeMap<Vec<u32>, Cq>,
}

impl BiDiff {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, alpha: &[u32], beta: &[u32], c: Cq) {
        let mut key = alpha.to_vec();
        key.extend_from_slice(beta);
        insert(&mut self.terms, key, c);
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &[u32], &Cq)> {
        self.terms.iter().map(move |(k, c)| (&k[..self.dim], &k[self.dim..], c))
    }

    pub fn apply(&self, u: &PolyObservable, v: &PolyObservable) -> PolyObservable {
        let mut out = PolyObservable::zero(self.dim);
        for (alpha, beta, c) in self.terms() {
            let du = u.derivative_multi(alpha);
            if du.is_zero() {
                continue;
            }
            let dv = v.derivative_multi(beta);
            out = out.add(&du.mul(&dv).scale(*c));
        }
        out
    }

    pub fn apply_grid(&self, u: &GridFunction, v: &GridFunction) -> Result<GridFunction> {
        u.same_grid(v)?;
        let mut out = GridFunction::zeros(u.spec(), Space::Position);
        let mut cache_u: BTreeMap<Vec<u32>, GridFunction> = BTreeMap::new();
        let mut cache_v: BTreeMap<Vec<u32>, GridFunction> = BTreeMap::new();
        for (alpha, beta, c) in self.terms() {
            let du = cache_u.entry(alpha.to_vec()).or_insert_with(|| grid_derivative(u, alpha)).clone();
            let dv = cache_v.entry(beta.to_vec()).or_insert_with(|| grid_derivative(v, beta));
            out = out.add(&du.mul(dv)?.scale(to_c64(c)))?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leibniz_compose() {
        // d o x = x d + 1
        let lhs = DiffOp::deriv(1, 0, 1).compose(&DiffOp::mul_var(1, 0, 1));
        let rhs = DiffOp::mul_var(1, 0, 1).compose(&DiffOp::deriv(1, 0, 1)).add(&DiffOp::identity(1));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn compose_matches_apply() {
        let mut rng = crate::rng::seeded(3);
        let p = PolyObservable::random(&mut rng, 2, 4);
        let a = DiffOp::deriv(2, 0, 2).add(&DiffOp::mul_var(2, 1, 1).compose(&DiffOp::deriv(2, 1, 1)));
        let b = DiffOp::mul_var(2, 0, 2).add(&DiffOp::deriv(2, 1, 1));
        assert_eq!(a.compose(&b).apply(&p), a.apply(&b.apply(&p)));
    }

    #[test]
    fn exponent_enumeration() {
        assert_eq!(exponents_up_to(2, 2).len(), 6);
        assert_eq!(exponents_up_to(4, 3).len(), 35);
    }
}
