//! The Weyl product on `(R^{2n+2}, da ^ dl + (1/2) Omega)`.
//!
//! Convention: `a * l - l * a = i theta`; the Poisson tensor is `Lambda = -omega^{-1}`,
//! so `{a, l} = 1` and `{v_i, v_{n+i}} = 2`. On the Fourier side in `l` a factor
//! `xi^k` is `(-i d/dl)^k`.
//!
//! Numerically the product is a twisted convolution: Fourier transform in `(v, l)`,
//! keep `a` as a position variable. With `U(a, p, xi)` the transform of `u`,
//!
//! `W(a, p, xi) = (2 pi)^{-(2n+1)} sum U(a - theta xi_2 / 2, p_1, xi_1)
//!   V(a + theta xi_1 / 2, p_2, xi_2) exp(-i theta Omega(p_1, p_2))`
//!
//! over `p_1 + p_2 = p`, `xi_1 + xi_2 = xi`; the `a`-shifts are exact phases on the
//! Fourier side in `a`.

pub mod formal;
pub mod poly;

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

pub use formal::{expand_t_inverse, formal_transported_product, moyal_bidiff, moyal_formal, moyal_series, transported_product_grid, FormalSeries};
pub use poly::{BiDiff, DiffOp, PolyObservable};

use crate::algebra::omega;
use crate::error::{Error, Result};
use crate::transforms::interp::{ft_axis, fft_wavenumbers};
use crate::transforms::{GridFunction, Space, BOUNDARY_TOL};

/// Contributions whose slab maxima multiply to less than this fraction of the
/// largest product are skipped.
const NEGLIGIBLE: f64 = 1e-18;

pub fn moyal_numeric(u: &GridFunction, v: &GridFunction, theta: f64) -> Result<GridFunction> {
    moyal_numeric_with(u, v, theta, BOUNDARY_TOL)
}

/// Weyl product with a custom boundary-shell threshold (applied to the `(v, xi)`
/// Fourier data, as for the transport operators).
pub fn moyal_numeric_with(u: &GridFunction, v: &GridFunction, theta: f64, boundary_tol: f64) -> Result<GridFunction> {
    u.expect_space(Space::Position)?;
    u.same_grid(v)?;
    if !(theta.is_finite()) {
        return Err(Error::InvalidArgument("theta must be finite".into()));
    }
    let spec = u.spec().clone();
    let shape = spec.shape();
    let d = shape.len();
    let n = spec.n();
    let na = shape[0];
    let nxi = shape[d - 1];
    let np: usize = shape[1..d - 1].iter().product();

    // (v, l) -> (p, xi)
    let to_fourier = |f: &GridFunction| -> Result<Vec<Complex64>> {
        let mut vals = f.values().to_vec();
        for ax in 1..d {
            ft_axis(&mut vals, &shape, ax, spec.axis(ax), false);
        }
        let check = GridFunction::new(spec.clone(), Space::Position, vals.clone())?;
        let mass = check.boundary_mass(&(1..d).collect::<Vec<_>>());
        if mass > boundary_tol {
            return Err(Error::BoundaryMass { mass, threshold: boundary_tol });
        }
        Ok(vals)
    };
    let uf = to_fourier(u)?;
    let vf = to_fourier(v)?;

    // frequency coordinates
    let freq = |ax: usize, m: usize| {
        let axis = spec.axis(ax);
        let dk = 2.0 * std::f64::consts::PI / (axis.points as f64 * axis.step());
        (m as f64 - (axis.points / 2) as f64) * dk
    };
    let xi: Vec<f64> = (0..nxi).map(|m| freq(d - 1, m)).collect();
    let dxi = xi[1] - xi[0];

    // FFT in a, then layout [xi][p][k_a]
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(na);
    let inv = planner.plan_fft_inverse(na);
    let relayout = |vals: &[Complex64]| -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); vals.len()];
        let mut line = vec![Complex64::new(0.0, 0.0); na];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fwd.get_inplace_scratch_len()];
        for p in 0..np {
            for j in 0..nxi {
                for (ia, x) in line.iter_mut().enumerate() {
                    *x = vals[(ia * np + p) * nxi + j];
                }
                fwd.process_with_scratch(&mut line, &mut scratch);
                out[(j * np + p) * na..(j * np + p + 1) * na].copy_from_slice(&line);
            }
        }
        out
    };
    let ut = relayout(&uf);
    let vt = relayout(&vf);
    let slab_max = |t: &[Complex64]| -> Vec<f64> { t.chunks(np * na).map(|c| c.iter().fold(0.0, |m: f64, z| m.max(z.norm()))).collect() };
    let (mu, mv) = (slab_max(&ut), slab_max(&vt));
    let peak = mu.iter().cloned().fold(0.0, f64::max) * mv.iter().cloned().fold(0.0, f64::max);

    // a-wavenumbers and shift phases exp(-i k s)
    let ka = fft_wavenumbers(na, spec.axis(0).step());
    let shift = |s: f64| -> Vec<Complex64> { ka.iter().map(|&k| Complex64::from_polar(1.0, -k * s)).collect() };

    // twisted convolution table over p multi-indices
    let conv = PConv::new(&spec, n, theta, freq);
    let norm = dxi * conv.dp / (2.0 * std::f64::consts::PI).powi(2 * n as i32 + 1) / na as f64 / na as f64;

    let columns: Vec<Vec<Complex64>> = (0..nxi)
        .into_par_iter()
        .map(|j| {
            let mut acc = vec![Complex64::new(0.0, 0.0); na * np];
            let mut us = vec![Complex64::new(0.0, 0.0); na * np];
            let mut vs = vec![Complex64::new(0.0, 0.0); na * np];
            let mut scratch = vec![Complex64::new(0.0, 0.0); inv.get_inplace_scratch_len()];
            let mut touched = false;
            for j1 in 0..nxi {
                let j2 = (j + nxi / 2) as isize - j1 as isize;
                if j2 < 0 || j2 >= nxi as isize {
                    continue;
                }
                let j2 = j2 as usize;
                if mu[j1] * mv[j2] <= NEGLIGIBLE * peak {
                    continue;
                }
                touched = true;
                // u(a - theta xi_2 / 2), v(a + theta xi_1 / 2)
                let su = shift(0.5 * theta * xi[j2]);
                let sv = shift(-0.5 * theta * xi[j1]);
                shifted_slab(&ut[j1 * np * na..(j1 + 1) * np * na], &su, &inv, &mut scratch, &mut us, na);
                shifted_slab(&vt[j2 * np * na..(j2 + 1) * np * na], &sv, &inv, &mut scratch, &mut vs, na);
                conv.accumulate(&us, &vs, &mut acc, na);
            }
            if !touched {
                return acc;
            }
            acc.iter_mut().for_each(|z| *z *= norm);
            acc
        })
        .collect();

    // back to [a][p][xi], then inverse transforms in (v, l)
    let mut out = vec![Complex64::new(0.0, 0.0); na * np * nxi];
    for (j, col) in columns.iter().enumerate() {
        for p in 0..np {
            for ia in 0..na {
                out[(ia * np + p) * nxi + j] = col[p * na + ia];
            }
        }
    }
    for ax in 1..d {
        ft_axis(&mut out, &shape, ax, spec.axis(ax), true);
    }
    GridFunction::new(spec, Space::Position, out)
}

/// Inverse `a`-FFT of each `p`-row of a slab after multiplying by `phase`
/// (unnormalised; the `1 / N_a` factors are folded into the final constant).
fn shifted_slab(src: &[Complex64], phase: &[Complex64], inv: &Arc<dyn Fft<f64>>, scratch: &mut [Complex64], dst: &mut [Complex64], na: usize) {
    for (row_src, row_dst) in src.chunks(na).zip(dst.chunks_mut(na)) {
        for ((d, s), ph) in row_dst.iter_mut().zip(row_src).zip(phase) {
            *d = s * ph;
        }
        inv.process_with_scratch(row_dst, scratch);
    }
}

/// `p_1 + p_2 = p` pairs with phases `exp(-i theta Omega(p_1, p_2))`.
struct PConv {
    np: usize,
    dp: f64,
    pairs: Option<Vec<(u32, u32, u32, Complex64)>>,
    dims: Vec<usize>,
    coords: Vec<Vec<f64>>,
    theta: f64,
}

impl PConv {
    fn new(spec: &crate::transforms::GridSpec, n: usize, theta: f64, freq: impl Fn(usize, usize) -> f64) -> Self {
        let dims: Vec<usize> = (1..=2 * n).map(|ax| spec.axis(ax).points).collect();
        let np: usize = dims.iter().product();
        let coords: Vec<Vec<f64>> = (1..=2 * n).map(|ax| (0..spec.axis(ax).points).map(|m| freq(ax, m)).collect()).collect();
        let dp: f64 = (0..2 * n).map(|i| coords[i][1] - coords[i][0]).product();
        let mut c = Self { np, dp, pairs: None, dims, coords, theta };
        if n > 0 && np * np <= 1 << 20 {
            let mut pairs = Vec::new();
            for p1 in 0..np {
                for p2 in 0..np {
                    if let Some((t, ph)) = c.pair(p1, p2) {
                        pairs.push((p1 as u32, p2 as u32, t as u32, ph));
                    }
                }
            }
            c.pairs = Some(pairs);
        }
        c
    }

    fn unravel(&self, mut p: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims.len()];
        for i in (0..self.dims.len()).rev() {
            idx[i] = p % self.dims[i];
            p /= self.dims[i];
        }
        idx
    }

    fn pair(&self, p1: usize, p2: usize) -> Option<(usize, Complex64)> {
        let (i1, i2) = (self.unravel(p1), self.unravel(p2));
        let mut t = 0usize;
        for k in 0..self.dims.len() {
            let s = (i1[k] + i2[k]) as isize - (self.dims[k] / 2) as isize;
            if s < 0 || s >= self.dims[k] as isize {
                return None;
            }
            t = t * self.dims[k] + s as usize;
        }
        let x1: Vec<f64> = i1.iter().enumerate().map(|(k, &m)| self.coords[k][m]).collect();
        let x2: Vec<f64> = i2.iter().enumerate().map(|(k, &m)| self.coords[k][m]).collect();
        Some((t, Complex64::from_polar(1.0, -self.theta * omega(&x1, &x2))))
    }

    fn accumulate(&self, us: &[Complex64], vs: &[Complex64], acc: &mut [Complex64], na: usize) {
        if self.np == 1 {
            for ((a, x), y) in acc.iter_mut().zip(us).zip(vs) {
                *a += x * y;
            }
            return;
        }
        let mut add = |p1: usize, p2: usize, t: usize, ph: Complex64| {
            let (x, y) = (&us[p1 * na..(p1 + 1) * na], &vs[p2 * na..(p2 + 1) * na]);
            for ((a, x), y) in acc[t * na..(t + 1) * na].iter_mut().zip(x).zip(y) {
                *a += x * y * ph;
            }
        };
        match &self.pairs {
            Some(pairs) => pairs.iter().for_each(|&(p1, p2, t, ph)| add(p1 as usize, p2 as usize, t as usize, ph)),
            None => {
                for p1 in 0..self.np {
                    for p2 in 0..self.np {
                        if let Some((t, ph)) = self.pair(p1, p2) {
                            add(p1, p2, t, ph);
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::GridSpec;

    #[test]
    fn gaussian_idempotent() {
        let theta = 0.5;
        let spec = GridSpec::cube(0, -6.0, 6.0, 64).unwrap();
        let g = GridFunction::from_fn(&spec, |x| Complex64::new(2.0 * (-(x[0] * x[0] + x[1] * x[1]) / theta).exp(), 0.0));
        let gg = moyal_numeric(&g, &g, theta).unwrap();
        assert!(gg.rel_l2(&g).unwrap() < 1e-6);
    }
}
