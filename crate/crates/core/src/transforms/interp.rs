//! Dense one-dimensional resampling operators and their application along one
//! axis of a row-major array.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::Axis;

/// Linear map from samples on a source axis to values at target positions.
#[derive(Debug, Clone)]
pub struct Resampler {
    pub rows: usize,
    pub cols: usize,
    w: Vec<Complex64>,
}

impl Resampler {
    pub fn from_rows(cols: usize, rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let w = rows.into_iter().flat_map(|row| {
            debug_assert_eq!(row.len(), cols);
            row
        });
        Self { rows: r, cols, w: w.collect() }
    }

    pub fn apply(&self, src: &[Complex64], dst: &mut [Complex64]) {
        for (r, d) in dst.iter_mut().enumerate().take(self.rows) {
            let row = &self.w[r * self.cols..(r + 1) * self.cols];
            *d = row.iter().zip(src).map(|(w, s)| w * s).sum();
        }
    }

    pub fn weight(&self, r: usize, c: usize) -> Complex64 {
        self.w[r * self.cols + c]
    }
}

/// `sum_{|k| < N/2} e^{ikt} + cos(N t / 2)` for even `N`.
fn dirichlet(n: usize, t: f64) -> f64 {
    let half = 0.5 * t;
    let s = half.sin();
    let nyq = (0.5 * n as f64 * t).cos();
    if s.abs() < 1e-12 {
        return n as f64 - 1.0 + nyq;
    }
    ((n as f64 - 1.0) * half).sin() / s + nyq
}

/// Periodic trigonometric interpolation (Dirichlet kernel, Nyquist mode split
/// symmetrically); targets outside `[min, max)` read 0.
pub fn trig(axis: &Axis, targets: &[f64]) -> Resampler {
    let n = axis.points;
    let h = axis.step();
    let period = n as f64 * h;
    let rows = targets
        .iter()
        .map(|&x| {
            if !(x >= axis.min && x < axis.max) {
                return vec![Complex64::new(0.0, 0.0); n];
            }
            (0..n)
                .map(|j| {
                    let t = 2.0 * PI * (x - axis.coord(j)) / period;
                    Complex64::new(dirichlet(n, t) / n as f64, 0.0)
                })
                .collect()
        })
        .collect();
    Resampler::from_rows(n, rows)
}

/// Natural cubic spline through the samples; targets outside
/// `[x_0, x_{N-1}]` read 0.
pub fn spline(axis: &Axis, targets: &[f64]) -> Resampler {
    let n = axis.points;
    let h = axis.step();
    // second derivatives M = K y for the natural spline (M_0 = M_{N-1} = 0)
    let m_int = n - 2;
    let mut k = vec![vec![0.0; n]; n];
    if m_int > 0 {
        // tridiagonal (1, 4, 1) M_int = 6/h^2 (y_{i-1} - 2 y_i + y_{i+1}), solved per unit vector
        for col in 0..n {
            let mut rhs: Vec<f64> = (1..n - 1)
                .map(|i| {
                    let y = |j: usize| if j == col { 1.0 } else { 0.0 };
                    6.0 / (h * h) * (y(i - 1) - 2.0 * y(i) + y(i + 1))
                })
                .collect();
            let mut diag = vec![4.0; m_int];
            for i in 1..m_int {
                let f = 1.0 / diag[i - 1];
                diag[i] -= f;
                rhs[i] -= f * rhs[i - 1];
            }
            let mut sol = vec![0.0; m_int];
            sol[m_int - 1] = rhs[m_int - 1] / diag[m_int - 1];
            for i in (0..m_int - 1).rev() {
                sol[i] = (rhs[i] - sol[i + 1]) / diag[i];
            }
            for i in 0..m_int {
                k[i + 1][col] = sol[i];
            }
        }
    }
    let last = axis.coord(n - 1);
    let rows = targets
        .iter()
        .map(|&x| {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            if !(x >= axis.min && x <= last) {
                return row;
            }
            let s = (x - axis.min) / h;
            let i = (s.floor() as usize).min(n - 2);
            let t = s - i as f64;
            let (p, q) = (1.0 - t, t);
            row[i].re += p;
            row[i + 1].re += q;
            let cp = h * h / 6.0 * (p * p * p - p);
            let cq = h * h / 6.0 * (q * q * q - q);
            for (j, r) in row.iter_mut().enumerate() {
                r.re += cp * k[i][j] + cq * k[i + 1][j];
            }
            row
        })
        .collect();
    Resampler::from_rows(n, rows)
}

/// Fourier integral `h sum_j u_j exp(-i w x_j)` at the target frequencies; frequencies
/// beyond the Nyquist limit `pi / h` read 0.
pub fn dtft(axis: &Axis, freqs: &[f64]) -> Resampler {
    let n = axis.points;
    let h = axis.step();
    let nyq = PI / h;
    let rows = freqs
        .iter()
        .map(|&w| {
            if w.abs() > nyq * (1.0 + 1e-12) {
                return vec![Complex64::new(0.0, 0.0); n];
            }
            (0..n).map(|j| Complex64::from_polar(h, -w * axis.coord(j))).collect()
        })
        .collect();
    Resampler::from_rows(n, rows)
}

/// `(outer, len, inner)` decomposition of a row-major shape around `axis`.
pub fn split(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer = shape[..axis].iter().product();
    let inner = shape[axis + 1..].iter().product();
    (outer, shape[axis], inner)
}

/// Applies `pick(outer, inner)` to every line along `axis`; all operators must map
/// `shape[axis]` samples to `new_len` values.
pub fn map_axis<'a, F>(values: &[Complex64], shape: &[usize], axis: usize, new_len: usize, pick: F) -> (Vec<Complex64>, Vec<usize>)
where
    F: Fn(usize, usize) -> &'a Resampler,
{
    let (outer, len, inner) = split(shape, axis);
    let mut out = vec![Complex64::new(0.0, 0.0); outer * new_len * inner];
    let mut line = vec![Complex64::new(0.0, 0.0); len];
    let mut res = vec![Complex64::new(0.0, 0.0); new_len];
    for o in 0..outer {
        for i in 0..inner {
            for (j, x) in line.iter_mut().enumerate() {
                *x = values[(o * len + j) * inner + i];
            }
            let r = pick(o, i);
            debug_assert_eq!((r.rows, r.cols), (new_len, len));
            r.apply(&line, &mut res);
            for (j, x) in res.iter().enumerate() {
                out[(o * new_len + j) * inner + i] = *x;
            }
        }
    }
    let mut new_shape = shape.to_vec();
    new_shape[axis] = new_len;
    (out, new_shape)
}

/// Applies `f(outer, inner, line)` in place to every line along `axis`.
pub fn for_each_line<F>(values: &mut [Complex64], shape: &[usize], axis: usize, mut f: F)
where
    F: FnMut(usize, usize, &mut [Complex64]),
{
    let (outer, len, inner) = split(shape, axis);
    let mut line = vec![Complex64::new(0.0, 0.0); len];
    for o in 0..outer {
        for i in 0..inner {
            if inner == 1 {
                let base = o * len;
                f(o, i, &mut values[base..base + len]);
                continue;
            }
            for (j, x) in line.iter_mut().enumerate() {
                *x = values[(o * len + j) * inner + i];
            }
            f(o, i, &mut line);
            for (j, x) in line.iter().enumerate() {
                values[(o * len + j) * inner + i] = *x;
            }
        }
    }
}

/// Unnormalised FFT (forward `exp(-2 pi i jk/N)`) along `axis`.
pub fn fft_axis(values: &mut [Complex64], shape: &[usize], axis: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let len = shape[axis];
    let plan = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    for_each_line(values, shape, axis, |_, _, line| plan.process_with_scratch(line, &mut scratch));
}

/// Angular wavenumbers of an unshifted FFT of length `n` with spacing `h`.
pub fn fft_wavenumbers(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            2.0 * PI * kk / (n as f64 * h)
        })
        .collect()
}

/// Centred physical Fourier transform along `axis`:
/// forward `h sum_j u_j e^{-i k x_j}` on `k_m = (m - N/2) dk`, inverse with `dk / 2 pi`.
pub fn ft_axis(values: &mut [Complex64], shape: &[usize], axis: usize, ax: &Axis, inverse: bool) {
    let n = ax.points;
    let h = ax.step();
    let dk = 2.0 * PI / (n as f64 * h);
    let x0 = ax.min;
    let freq = |m: usize| (m as f64 - (n / 2) as f64) * dk;
    let mut planner = FftPlanner::<f64>::new();
    let plan = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    let phase: Vec<Complex64> = (0..n).map(|m| Complex64::from_polar(1.0, -freq(m) * x0)).collect();
    for_each_line(values, shape, axis, |_, _, line| {
        if !inverse {
            for (j, x) in line.iter_mut().enumerate() {
                if j % 2 == 1 {
                    *x = -*x;
                }
            }
            plan.process_with_scratch(line, &mut scratch);
            for (m, x) in line.iter_mut().enumerate() {
                *x *= phase[m] * h;
            }
        } else {
            for (m, x) in line.iter_mut().enumerate() {
                *x *= phase[m].conj();
            }
            plan.process_with_scratch(line, &mut scratch);
            let s = dk / (2.0 * PI);
            for (j, x) in line.iter_mut().enumerate() {
                *x *= if j % 2 == 1 { -s } else { s };
            }
        }
    });
}

/// `d^m/dx^m` along `axis` by periodic spectral differentiation.
pub fn spectral_derivative(values: &mut [Complex64], shape: &[usize], axis: usize, h: f64, m: u32) {
    if m == 0 {
        return;
    }
    let n = shape[axis];
    let k = fft_wavenumbers(n, h);
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
    let mult: Vec<Complex64> = (0..n)
        .map(|j| {
            // the unpaired Nyquist mode has no odd derivative
            if n % 2 == 0 && j == n / 2 && m % 2 == 1 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k[j]).powu(m) / n as f64
            }
        })
        .collect();
    for_each_line(values, shape, axis, |_, _, line| {
        fwd.process_with_scratch(line, &mut scratch);
        for (x, w) in line.iter_mut().zip(&mult) {
            *x *= w;
        }
        inv.process_with_scratch(line, &mut scratch);
    });
}
