//! Formal power series in the deformation parameter with differential-operator
//! coefficients: the Moyal series, the expansion of `T^{-1}` and transported
//! products.

use num_traits::{One, Zero};

use super::poly::{i_pow, q, re, BiDiff, Cq, DiffOp, PolyObservable, Q};
use crate::algebra::SpaceParams;
use crate::error::{Error, Result};
use crate::transforms::GridFunction;

/// Largest order accepted by [`expand_t_inverse`].
pub const MAX_T_ORDER: usize = 8;

/// `sum_k theta^k coeffs[k]`, truncated after `coeffs.len() - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalSeries {
    dim: usize,
    coeffs: Vec<DiffOp>,
}

impl FormalSeries {
    pub fn new(dim: usize, coeffs: Vec<DiffOp>) -> Self {
        Self { dim, coeffs }
    }

    pub fn identity(dim: usize, order: usize) -> Self {
        let mut c = vec![DiffOp::zero(dim); order + 1];
        c[0] = DiffOp::identity(dim);
        Self { dim, coeffs: c }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeff(&self, k: usize) -> &DiffOp {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[DiffOp] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, DiffOp::zero(self.dim));
        Self { dim: self.dim, coeffs: c }
    }

    pub fn add(&self, other: &Self) -> Self {
        let k = self.order().min(other.order());
        Self { dim: self.dim, coeffs: (0..=k).map(|i| self.coeffs[i].add(&other.coeffs[i])).collect() }
    }

    pub fn scale(&self, s: Cq) -> Self {
        Self { dim: self.dim, coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect() }
    }

    /// `self o other`
    pub fn compose(&self, other: &Self) -> Self {
        let k = self.order().min(other.order());
        let coeffs = (0..=k)
            .map(|n| (0..=n).fold(DiffOp::zero(self.dim), |acc, i| acc.add(&self.coeffs[i].compose(&other.coeffs[n - i]))))
            .collect();
        Self { dim: self.dim, coeffs }
    }

    pub fn starts_with_identity(&self) -> bool {
        self.coeffs[0] == DiffOp::identity(self.dim)
    }

    /// Two-sided inverse; requires the identity at order 0.
    pub fn inverse(&self) -> Result<Self> {
        if !self.starts_with_identity() {
            return Err(Error::InvalidArgument("series must start with the identity".into()));
        }
        let mut b = vec![DiffOp::identity(self.dim)];
        for k in 1..=self.order() {
            let s = (1..=k).fold(DiffOp::zero(self.dim), |acc, j| acc.add(&self.coeffs[j].compose(&b[k - j])));
            b.push(s.scale(re(q(-1))));
        }
        Ok(Self { dim: self.dim, coeffs: b })
    }

    /// `exp(self)` for a series without order-0 term.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::InvalidArgument("exp needs a vanishing order-0 term".into()));
        }
        let mut out = Self::identity(self.dim, self.order());
        let mut power = Self::identity(self.dim, self.order());
        for m in 1..=self.order() {
            power = power.compose(self).scale(re(Q::new(1, m as i128)));
            out = out.add(&power);
        }
        Ok(out)
    }

    /// Substitutes `theta -> f theta`.
    pub fn rescale(&self, f: Q) -> Self {
        let mut p = Q::one();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            coeffs.push(c.scale(re(p)));
            p *= f;
        }
        Self { dim: self.dim, coeffs }
    }

    /// `[c_0 u, c_1 u, ...]`
    pub fn apply(&self, u: &PolyObservable) -> Vec<PolyObservable> {
        self.coeffs.iter().map(|c| c.apply(u)).collect()
    }

    pub fn apply_grid(&self, u: &GridFunction) -> Result<Vec<GridFunction>> {
        self.coeffs.iter().map(|c| c.apply_grid(u)).collect()
    }
}

/// Poisson tensor `Lambda = -omega^{-1}` of `da ^ dl + (1/2) Omega` as `(i, j, value)`.
pub fn poisson_tensor(params: SpaceParams) -> Vec<(usize, usize, i128)> {
    let n = params.n;
    let l = 2 * n + 1;
    let mut t = vec![(0, l, 1), (l, 0, -1)];
    for i in 0..n {
        t.push((1 + i, 1 + n + i, 2));
        t.push((1 + n + i, 1 + i, -2));
    }
    t
}

/// `theta^k` coefficient of the Moyal product:
/// `(i/2)^k / k! Lambda^{i1 j1} .. Lambda^{ik jk} d_{i1..ik} u d_{j1..jk} v`.
pub fn moyal_bidiff(params: SpaceParams, k: usize) -> BiDiff {
    let dim = params.dim_m();
    let lam = poisson_tensor(params);
    let mut terms: Vec<(Vec<u32>, Vec<u32>, i128)> = vec![(vec![0; dim], vec![0; dim], 1)];
    for _ in 0..k {
        let mut next = Vec::with_capacity(terms.len() * lam.len());
        for (a, b, c) in &terms {
            for &(i, j, l) in &lam {
                let (mut a2, mut b2) = (a.clone(), b.clone());
                a2[i] += 1;
                b2[j] += 1;
                next.push((a2, b2, c * l));
            }
        }
        terms = next;
    }
    let fact: i128 = (1..=k as i128).product();
    let pref = i_pow(k as u32) * re(Q::new(1, fact * (1i128 << k)));
    let mut out = BiDiff::zero(dim);
    for (a, b, c) in terms {
        out.add_term(&a, &b, pref * re(q(c)));
    }
    out
}

fn dim_to_params(dim: usize) -> Result<SpaceParams> {
    if dim < 2 || dim % 2 != 0 {
        return Err(Error::InvalidArgument(format!("chart dimension {dim} is not 2n + 2")));
    }
    Ok(SpaceParams::new((dim - 2) / 2))
}

/// Coefficients `[theta^0, .., theta^K]` of `u *0 v`.
pub fn moyal_formal(u: &PolyObservable, v: &PolyObservable, order: usize) -> Result<Vec<PolyObservable>> {
    let params = dim_to_params(u.dim())?;
    Ok((0..=order).map(|k| moyal_bidiff(params, k).apply(u, v)).collect())
}

/// Moyal product of two formal series of observables, truncated at `order`.
pub fn moyal_series(us: &[PolyObservable], vs: &[PolyObservable], order: usize) -> Result<Vec<PolyObservable>> {
    let dim = us[0].dim();
    let params = dim_to_params(dim)?;
    let ops: Vec<BiDiff> = (0..=order).map(|k| moyal_bidiff(params, k)).collect();
    let mut out = vec![PolyObservable::zero(dim); order + 1];
    for (i, u) in us.iter().enumerate().take(order + 1) {
        for (j, v) in vs.iter().enumerate().take(order + 1 - i) {
            for (m, op) in ops.iter().enumerate().take(order + 1 - i - j) {
                out[i + j + m] = out[i + j + m].add(&op.apply(u, v));
            }
        }
    }
    Ok(out)
}

/// Power series `log cosh x = sum_k lambda_k x^{2k}`, returns `lambda_0..=lambda_kmax`.
fn log_cosh_coeffs(kmax: usize) -> Vec<Q> {
    // y = cosh x - 1 in powers of x^2
    let mut fact = vec![Q::one(); 2 * kmax + 2];
    for i in 1..fact.len() {
        fact[i] = fact[i - 1] * q(i as i128);
    }
    let y: Vec<Q> = (0..=kmax).map(|k| if k == 0 { Q::zero() } else { Q::one() / fact[2 * k] }).collect();
    let mul = |a: &[Q], b: &[Q]| -> Vec<Q> {
        let mut c = vec![Q::zero(); kmax + 1];
        for i in 0..=kmax {
            for j in 0..=kmax - i {
                c[i + j] += a[i] * b[j];
            }
        }
        c
    };
    let mut out = vec![Q::zero(); kmax + 1];
    let mut p = y.clone();
    for m in 1..=kmax {
        let s = if m % 2 == 1 { Q::one() } else { -Q::one() } / q(m as i128);
        for k in 0..=kmax {
            out[k] += s * p[k];
        }
        p = mul(&p, &y);
    }
    out
}

/// Expansion of `T^{-1}` (trivial multiplier) in powers of the twist parameter `t`:
/// `T^{-1} = exp(-log cosh(t D) E_v) o sum_m delta(D)^m / m! o (-i l)^m` with
/// `D = -i d/dl`, `E_v = sum v_i d/dv_i`, `delta(x) = sinh(2 t x) / (2 t) - x`.
pub fn expand_t_inverse(params: SpaceParams, order: usize) -> Result<FormalSeries> {
    if order > MAX_T_ORDER {
        return Err(Error::InvalidArgument(format!("order {order} exceeds {MAX_T_ORDER}")));
    }
    let dim = params.dim_m();
    let l = dim - 1;
    let d_pow = |k: u32| DiffOp::deriv(dim, l, k).scale(i_pow(3 * k));
    let e_v = (1..l).fold(DiffOp::zero(dim), |acc, i| acc.add(&DiffOp::mul_var(dim, i, 1).compose(&DiffOp::deriv(dim, i, 1))));
    let lam = log_cosh_coeffs(order / 2);
    let mut s = vec![DiffOp::zero(dim); order + 1];
    for k in 1..=order / 2 {
        s[2 * k] = d_pow(2 * k as u32).compose(&e_v).scale(re(-lam[k]));
    }
    let dilation = FormalSeries::new(dim, s).exp()?;
    let mut delta = vec![DiffOp::zero(dim); order + 1];
    let mut fact = Q::one();
    for k in 1..=order / 2 {
        // (2k+1)! accumulates
        fact *= q((2 * k) as i128) * q((2 * k + 1) as i128);
        delta[2 * k] = d_pow(2 * k as u32 + 1).scale(re(q(1i128 << (2 * k)) / fact));
    }
    let delta = FormalSeries::new(dim, delta);
    let mul_l = DiffOp::mul_var(dim, l, 1).scale(i_pow(3));
    let mut remap = FormalSeries::identity(dim, order);
    let mut dm = FormalSeries::identity(dim, order);
    let mut lm = DiffOp::identity(dim);
    let mut mfact = Q::one();
    for m in 1..=order / 2 {
        dm = dm.compose(&delta);
        lm = lm.compose(&mul_l);
        mfact *= q(m as i128);
        let term = FormalSeries::new(dim, dm.coeffs().iter().map(|c| c.compose(&lm).scale(re(Q::one() / mfact))).collect());
        remap = remap.add(&term);
    }
    Ok(dilation.compose(&remap))
}

/// `theta^k` coefficients of `E^{-1}(E u *0 E v)` where `E` is the given series
/// (the formal counterpart of `T^{-1}`).
pub fn formal_transported_product(u: &PolyObservable, v: &PolyObservable, equivalence: &FormalSeries, order: usize) -> Result<Vec<PolyObservable>> {
    if !equivalence.starts_with_identity() {
        return Err(Error::InvalidArgument("equivalence must start with the identity".into()));
    }
    if equivalence.order() < order {
        return Err(Error::InvalidArgument(format!("equivalence known to order {} < {order}", equivalence.order())));
    }
    let e = equivalence.truncate(order);
    let w = e.inverse()?;
    let x = moyal_series(&e.apply(u), &e.apply(v), order)?;
    let dim = u.dim();
    Ok((0..=order)
        .map(|k| (0..=k).fold(PolyObservable::zero(dim), |acc, i| acc.add(&w.coeff(i).apply(&x[k - i]))))
        .collect())
}

/// The same coefficients evaluated on grid data (spectral derivatives).
pub fn transported_product_grid(u: &GridFunction, v: &GridFunction, equivalence: &FormalSeries, order: usize) -> Result<Vec<GridFunction>> {
    let params = dim_to_params(equivalence.dim())?;
    let e = equivalence.truncate(order);
    let w = e.inverse()?;
    let us = e.apply_grid(u)?;
    let vs = e.apply_grid(v)?;
    let ops: Vec<BiDiff> = (0..=order).map(|k| moyal_bidiff(params, k)).collect();
    let zero = GridFunction::zeros(u.spec(), u.space());
    let mut x = vec![zero.clone(); order + 1];
    for i in 0..=order {
        for j in 0..=order - i {
            for m in 0..=order - i - j {
                x[i + j + m] = x[i + j + m].add(&ops[m].apply_grid(&us[i], &vs[j])?)?;
            }
        }
    }
    let mut out = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut acc = zero.clone();
        for i in 0..=k {
            if !w.coeff(i).is_zero() {
                acc = acc.add(&w.coeff(i).apply_grid(&x[k - i])?)?;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moyal::poly::cq;

    #[test]
    fn canonical_commutator() {
        let dim = 2;
        let a = PolyObservable::var(dim, 0);
        let l = PolyObservable::var(dim, 1);
        let ab = moyal_formal(&a, &l, 2).unwrap();
        let ba = moyal_formal(&l, &a, 2).unwrap();
        assert_eq!(ab[1].sub(&ba[1]), PolyObservable::constant(dim, cq(q(0), q(1))));
        assert!(ab[2].is_zero());
    }

    #[test]
    fn log_cosh_series() {
        let c = log_cosh_coeffs(3);
        assert_eq!(c[1], Q::new(1, 2));
        assert_eq!(c[2], Q::new(-1, 12));
        assert_eq!(c[3], Q::new(1, 45));
    }

    #[test]
    fn second_order_t_inverse() {
        let p = SpaceParams::new(1);
        let dim = p.dim_m();
        let s = expand_t_inverse(p, 4).unwrap();
        assert!(s.coeff(1).is_zero() && s.coeff(3).is_zero());
        let e_v = (1..3).fold(DiffOp::zero(dim), |acc, i| acc.add(&DiffOp::mul_var(dim, i, 1).compose(&DiffOp::deriv(dim, i, 1))));
        let expected = DiffOp::deriv(dim, 3, 2)
            .compose(&e_v)
            .scale(re(Q::new(1, 2)))
            .add(&DiffOp::deriv(dim, 3, 3).compose(&DiffOp::mul_var(dim, 3, 1)).scale(re(Q::new(2, 3))));
        assert_eq!(s.coeff(2), &expected);
    }

    #[test]
    fn inverse_series() {
        let s = expand_t_inverse(SpaceParams::new(1), 6).unwrap();
        let inv = s.inverse().unwrap();
        assert_eq!(s.compose(&inv), FormalSeries::identity(4, 6));
        assert_eq!(inv.compose(&s), FormalSeries::identity(4, 6));
    }
}
