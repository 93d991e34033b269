//! Transvection algebra `g = a x (h + h)`, solvable algebra `s = a x h`, and the
//! finite-dimensional Lie-theoretic checks.
//!
//! Basis orders: `s` uses `(H, v_1..v_2n, E)`; `g` uses
//! `(H, X_1..X_2n, E_X, Y_1..Y_2n, E_Y)` where `X` and `Y` are the two copies of `h`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use crate::linalg;
use crate::report::Report;
use crate::rng;

/// Relative singular-value threshold for the exact (integer-coefficient) problems.
const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub n: usize,
}

impl SpaceParams {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
    pub fn dim_v(&self) -> usize {
        2 * self.n
    }
    pub fn dim_s(&self) -> usize {
        2 * self.n + 2
    }
    pub fn dim_m(&self) -> usize {
        2 * self.n + 2
    }
    pub fn degenerate(&self) -> bool {
        self.n == 0
    }
}

/// Standard symplectic form on `R^{2n}`: `Omega(e_i, e_{n+i}) = 1`.
pub fn omega(v: &[f64], w: &[f64]) -> f64 {
    let n = v.len() / 2;
    (0..n).map(|i| v[i] * w[n + i] - v[n + i] * w[i]).sum()
}

/// Entry `Omega(e_i, e_j)` of the standard form on `R^{2n}`.
pub fn omega_entry(n: usize, i: usize, j: usize) -> f64 {
    if i < n && j == i + n {
        1.0
    } else if j < n && i == j + n {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct LieAlgebraData {
    pub dim: usize,
    pub basis_labels: Vec<String>,
    /// `c[(i * dim + j) * dim + k]` with `[e_i, e_j] = c^k_ij e_k`
    pub structure_constants: Vec<f64>,
    pub involution: Option<DMatrix<f64>>,
    pub cocycle: Option<DMatrix<f64>>,
    pub degenerate: bool,
}

impl LieAlgebraData {
    fn empty(labels: Vec<String>, degenerate: bool) -> Self {
        let dim = labels.len();
        Self {
            dim,
            basis_labels: labels,
            structure_constants: vec![0.0; dim * dim * dim],
            involution: None,
            cocycle: None,
            degenerate,
        }
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure_constants[(i * self.dim + j) * self.dim + k]
    }

    fn add_bracket(&mut self, i: usize, j: usize, k: usize, val: f64) {
        let d = self.dim;
        self.structure_constants[(i * d + j) * d + k] += val;
        self.structure_constants[(j * d + i) * d + k] -= val;
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        let mut out = DVector::zeros(d);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                if y[j] == 0.0 {
                    continue;
                }
                let s = x[i] * y[j];
                for k in 0..d {
                    out[k] += s * self.c(i, j, k);
                }
            }
        }
        out
    }

    pub fn basis(&self, i: usize) -> DVector<f64> {
        let mut e = DVector::zeros(self.dim);
        e[i] = 1.0;
        e
    }

    /// Matrix of `ad(x)` acting on coordinate vectors.
    pub fn ad(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_columns(&(0..self.dim).map(|j| self.bracket(x, &self.basis(j))).collect::<Vec<_>>())
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let d = self.dim;
        let mut r: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    r = r.max((self.c(i, j, k) + self.c(j, i, k)).abs());
                }
            }
        }
        r
    }

    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim;
        let mut r: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (x, y, z) = (self.basis(i), self.basis(j), self.basis(k));
                    let s = self.bracket(&x, &self.bracket(&y, &z))
                        + self.bracket(&y, &self.bracket(&z, &x))
                        + self.bracket(&z, &self.bracket(&x, &y));
                    r = r.max(s.amax());
                }
            }
        }
        r
    }

    /// `max(|sigma^2 - I|, |sigma[x,y] - [sigma x, sigma y]|)` over basis pairs.
    pub fn involution_residual(&self) -> Result<f64> {
        let s = self.involution.as_ref().ok_or(Error::MissingInvolution)?;
        let d = self.dim;
        let mut r = (s * s - DMatrix::<f64>::identity(d, d)).amax();
        for i in 0..d {
            for j in 0..d {
                let (x, y) = (self.basis(i), self.basis(j));
                let lhs = s * self.bracket(&x, &y);
                let rhs = self.bracket(&(s * &x), &(s * &y));
                r = r.max((lhs - rhs).amax());
            }
        }
        Ok(r)
    }

    /// Orthonormal bases of the `+1` (k) and `-1` (p) eigenspaces of the involution.
    pub fn eigenspaces(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let s = self.involution.as_ref().ok_or(Error::MissingInvolution)?;
        let id = DMatrix::<f64>::identity(self.dim, self.dim);
        let k = linalg::range(&((&id + s) * 0.5), EXACT_TOL)?;
        let p = linalg::range(&((&id - s) * 0.5), EXACT_TOL)?;
        Ok((k, p))
    }

    /// Basis of the centre (common kernel of all `ad(e_j)`).
    pub fn center(&self) -> Result<DMatrix<f64>> {
        let d = self.dim;
        let mut rows = DMatrix::zeros(d * d, d);
        for j in 0..d {
            // [x, e_j] as a linear map of x
            let m = DMatrix::from_columns(&(0..d).map(|i| self.bracket(&self.basis(i), &self.basis(j))).collect::<Vec<_>>());
            rows.view_mut((j * d, 0), (d, d)).copy_from(&m);
        }
        Ok(linalg::nullspace(&rows, EXACT_TOL)?.0)
    }

    /// Orthonormal basis of the derived algebra `[g, g]`.
    pub fn derived(&self) -> Result<DMatrix<f64>> {
        let d = self.dim;
        let cols: Vec<_> = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| self.bracket(&self.basis(i), &self.basis(j))).collect();
        linalg::range(&DMatrix::from_columns(&cols), EXACT_TOL)
    }

    /// Basis of the centre of the derived algebra.
    pub fn derived_center(&self) -> Result<DMatrix<f64>> {
        let b = self.derived()?;
        let (d, r) = b.shape();
        let mut rows = DMatrix::zeros(d * r, r);
        for k in 0..r {
            let bk = b.column(k).into_owned();
            let m = DMatrix::from_columns(&(0..r).map(|i| self.bracket(&b.column(i).into_owned(), &bk)).collect::<Vec<_>>());
            rows.view_mut((k * d, 0), (d, r)).copy_from(&m);
        }
        Ok(&b * linalg::nullspace(&rows, EXACT_TOL)?.0)
    }
}

fn h_labels(n: usize, suffix: &str) -> Vec<String> {
    (1..=2 * n).map(|i| format!("v{i}{suffix}")).chain(std::iter::once(format!("E{suffix}"))).collect()
}

/// `s = a x h`: `[H, v] = v`, `[H, E] = 2E`, `[v, w] = Omega(v, w) E`.
pub fn build_solvable_algebra(params: SpaceParams) -> LieAlgebraData {
    let n = params.n;
    let labels = std::iter::once("H".to_string()).chain(h_labels(n, "")).collect();
    let mut alg = LieAlgebraData::empty(labels, params.degenerate());
    let e = 2 * n + 1;
    for i in 1..=2 * n {
        alg.add_bracket(0, i, i, 1.0);
    }
    alg.add_bracket(0, e, e, 2.0);
    for i in 0..2 * n {
        for j in 0..2 * n {
            if i < j {
                let w = omega_entry(n, i, j);
                if w != 0.0 {
                    alg.add_bracket(1 + i, 1 + j, e, w);
                }
            }
        }
    }
    alg
}

/// `g = a x (h + h)` with `H` acting by `+1/+2` on the first copy and `-1/-2` on the
/// second, the involution swapping the copies and negating `H`, and the cocycle
/// `da ^ dl + Omega` transported to `p`.
pub fn build_transvection_algebra(params: SpaceParams) -> LieAlgebraData {
    let n = params.n;
    let m = 2 * n + 1; // dim h
    let labels = std::iter::once("H".to_string()).chain(h_labels(n, "+")).chain(h_labels(n, "-")).collect();
    let mut alg = LieAlgebraData::empty(labels, params.degenerate());
    let x = |i: usize| 1 + i;
    let y = |i: usize| 1 + m + i;
    for (copy, sign) in [(0usize, 1.0), (1usize, -1.0)] {
        let idx = |i: usize| if copy == 0 { x(i) } else { y(i) };
        for i in 0..2 * n {
            alg.add_bracket(0, idx(i), idx(i), sign);
        }
        alg.add_bracket(0, idx(2 * n), idx(2 * n), 2.0 * sign);
        for i in 0..2 * n {
            for j in (i + 1)..2 * n {
                let w = omega_entry(n, i, j);
                if w != 0.0 {
                    alg.add_bracket(idx(i), idx(j), idx(2 * n), w);
                }
            }
        }
    }
    let d = alg.dim;
    let mut sigma = DMatrix::zeros(d, d);
    sigma[(0, 0)] = -1.0;
    for i in 0..m {
        sigma[(y(i), x(i))] = 1.0;
        sigma[(x(i), y(i))] = 1.0;
    }
    // coordinates of the p-projection: H -> a, (X_i - Y_i)/2 -> v_i, (E_X - E_Y)/2 -> l
    let proj = |e: usize| -> (f64, Vec<f64>, f64) {
        let mut v = vec![0.0; 2 * n];
        let (mut a, mut l) = (0.0, 0.0);
        if e == 0 {
            a = 1.0;
        }
        for i in 0..2 * n {
            if e == x(i) {
                v[i] = 0.5;
            }
            if e == y(i) {
                v[i] = -0.5;
            }
        }
        if e == x(2 * n) {
            l = 0.5;
        }
        if e == y(2 * n) {
            l = -0.5;
        }
        (a, v, l)
    };
    let mut cocycle = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let (ai, vi, li) = proj(i);
            let (aj, vj, lj) = proj(j);
            cocycle[(i, j)] = ai * lj - li * aj + omega(&vi, &vj);
        }
    }
    alg.involution = Some(sigma);
    alg.cocycle = Some(cocycle);
    alg
}

fn form(c: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    (x.transpose() * c * y)[(0, 0)]
}

/// Symmetric-couple and symplectic-triple checks.
pub fn check_symmetric_triple(alg: &LieAlgebraData) -> Result<Report> {
    let sigma = alg.involution.as_ref().ok_or(Error::MissingInvolution)?;
    let omega_b = alg.cocycle.as_ref().ok_or(Error::MissingCocycle)?;
    let tol = 1e-12;
    let mut rep = Report::new();
    rep.degenerate = alg.degenerate;
    rep.at_most("algebra.antisymmetry", "structure constants are antisymmetric", alg.antisymmetry_residual(), tol);
    rep.at_most("algebra.jacobi", "Jacobi identity", alg.jacobi_residual(), tol);
    rep.at_most("triple.involution", "sigma is an involutive automorphism", alg.involution_residual()?, tol);
    let (k, p) = alg.eigenspaces()?;
    let (dk, dp) = (k.ncols(), p.ncols());
    let id = DMatrix::<f64>::identity(alg.dim, alg.dim);
    let proj_p = (&id - sigma) * 0.5;

    // [p, p] lands in k and spans it
    let mut leak: f64 = 0.0;
    let mut brackets = Vec::new();
    for i in 0..dp {
        for j in (i + 1)..dp {
            let b = alg.bracket(&p.column(i).into_owned(), &p.column(j).into_owned());
            leak = leak.max((&proj_p * &b).amax());
            brackets.push(b);
        }
    }
    rep.at_most("triple.pp_in_k", "[p,p] is contained in k", leak, tol);
    let span = if brackets.is_empty() { 0 } else { linalg::rank(&DMatrix::from_columns(&brackets), EXACT_TOL)?.rank };
    rep.at_most("triple.pp_spans_k", "[p,p] = k (rank deficit)", (dk as f64 - span as f64).abs(), 0.0)
        .with_note(format!("dim k = {dk}, rank [p,p] = {span}, dim p = {dp}"));

    // i_k Omega = 0
    let mut ik: f64 = 0.0;
    for i in 0..dk {
        for j in 0..alg.dim {
            ik = ik.max(form(omega_b, &k.column(i).into_owned(), &alg.basis(j)).abs());
        }
    }
    rep.at_most("triple.ik_omega", "k lies in the kernel of the cocycle", ik, tol);

    // Chevalley cocycle identity
    let mut cz: f64 = 0.0;
    for i in 0..alg.dim {
        for j in 0..alg.dim {
            for l in 0..alg.dim {
                let (x, y, z) = (alg.basis(i), alg.basis(j), alg.basis(l));
                let s = form(omega_b, &alg.bracket(&x, &y), &z)
                    + form(omega_b, &alg.bracket(&y, &z), &x)
                    + form(omega_b, &alg.bracket(&z, &x), &y);
                cz = cz.max(s.abs());
            }
        }
    }
    rep.at_most("triple.cocycle", "Chevalley 2-cocycle identity", cz, tol);

    // nondegeneracy on p
    let restricted = p.transpose() * omega_b * &p;
    let smin = if dp == 0 { 0.0 } else { restricted.singular_values().min() };
    rep.at_least("triple.nondegenerate", "cocycle is nondegenerate on p", smin, 1e-8);

    // faithfulness: k -> End(p) injective
    let mut cols = Vec::new();
    for i in 0..dk {
        let adk = alg.ad(&k.column(i).into_owned()) * &p;
        cols.push(DVector::from_column_slice(adk.as_slice()));
    }
    let faithful_rank = if cols.is_empty() { 0 } else { linalg::rank(&DMatrix::from_columns(&cols), EXACT_TOL)?.rank };
    rep.at_most("triple.faithful", "k acts faithfully on p (rank deficit)", (dk - faithful_rank.min(dk)) as f64, 0.0);
    Ok(rep)
}

/// Index pairs `(i, j)`, `i < j`, labelling the basis of `Lambda^2` of a `d`-space.
fn pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|i| ((i + 1)..d).map(move |j| (i, j))).collect()
}

fn antisym(d: usize, coeffs: &[f64]) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(d, d);
    for (c, &(i, j)) in coeffs.iter().zip(pairs(d).iter()) {
        w[(i, j)] += c;
        w[(j, i)] -= c;
    }
    w
}

fn upper(w: &DMatrix<f64>) -> Vec<f64> {
    pairs(w.nrows()).iter().map(|&(i, j)| w[(i, j)]).collect()
}

/// Frame coefficients `C` with `[Z*, X_i] = sum_k C[k, i] X_k` at `y`, for every basis
/// element `Z` of `k = V + R`.
fn isotropy_frame_actions(y: &Point) -> Vec<DMatrix<f64>> {
    let n = y.n();
    let d = 2 * n + 2;
    let frame: Vec<_> = (0..d).map(|i| geometry::frame_jet(i, y)).collect();
    let fmat = DMatrix::from_columns(&frame.iter().map(|f| f.value.clone()).collect::<Vec<_>>());
    let finv = fmat.try_inverse().expect("left-invariant frame is invertible");
    (0..=2 * n)
        .map(|z| {
            let mut zv = vec![0.0; 2 * n];
            let mut zl = 0.0;
            if z < 2 * n {
                zv[z] = 1.0;
            } else {
                zl = 1.0;
            }
            let zf = geometry::fundamental_jet(&zv, zl, y);
            let cols: Vec<_> = frame.iter().map(|x| &finv * geometry::lie_bracket(&zf, x)).collect();
            DMatrix::from_columns(&cols)
        })
        .collect()
}

fn sample_points(n: usize, samples: usize) -> Vec<Point> {
    let mut r = rng::seeded(0x5eed_0000 + n as u64);
    (0..samples).map(|_| rng::point(&mut r, n, 1.0)).collect()
}

#[derive(Debug, Clone)]
pub struct InvariantSpace {
    pub dimension: usize,
    /// columns: coefficients on the `e_i ^ e_j` (`i < j`) basis of the left-invariant frame
    pub basis: DMatrix<f64>,
    pub gap: f64,
}

/// Left-invariant bivectors annihilated by the Lie derivative along every
/// fundamental field of the isotropy algebra, at `samples` sampled points.
pub fn invariant_two_vectors(params: SpaceParams, samples: usize, tol: f64) -> Result<InvariantSpace> {
    if params.n == 0 || samples == 0 || !(tol > 0.0) {
        return Err(Error::InvalidArgument("need n >= 1, samples >= 1 and tol > 0".into()));
    }
    let d = params.dim_s();
    let m = d * (d - 1) / 2;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for y in sample_points(params.n, samples) {
        for c in isotropy_frame_actions(&y) {
            let cols: Vec<Vec<f64>> = (0..m)
                .map(|u| {
                    let mut e = vec![0.0; m];
                    e[u] = 1.0;
                    let w = antisym(d, &e);
                    upper(&(&c * &w + &w * c.transpose()))
                })
                .collect();
            for r in 0..m {
                rows.push(cols.iter().map(|col| col[r]).collect());
            }
        }
    }
    let a = DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j]);
    let (basis, info) = linalg::nullspace(&a, tol)?;
    Ok(InvariantSpace { dimension: basis.ncols(), basis, gap: info.gap })
}

/// Coboundaries `(delta f)(x, y) = -f([x, y])` as columns on the `e^i ^ e^j` basis.
fn coboundary_matrix(alg: &LieAlgebraData) -> DMatrix<f64> {
    let d = alg.dim;
    let pr = pairs(d);
    DMatrix::from_fn(pr.len(), d, |r, k| {
        let (i, j) = pr[r];
        -alg.c(i, j, k)
    })
}

/// Dimension of the full coboundary space `B^2(s)`.
pub fn coboundary_space_dimension(params: SpaceParams) -> Result<usize> {
    let alg = build_solvable_algebra(params);
    Ok(linalg::rank(&coboundary_matrix(&alg), EXACT_TOL)?.rank)
}

/// Dimension of the isotropy-invariant second Chevalley cohomology of `s`.
pub fn invariant_h2_dimension(params: SpaceParams, samples: usize, tol: f64) -> Result<usize> {
    if params.n == 0 || samples == 0 || !(tol > 0.0) {
        return Err(Error::InvalidArgument("need n >= 1, samples >= 1 and tol > 0".into()));
    }
    let alg = build_solvable_algebra(params);
    let d = alg.dim;
    let pr = pairs(d);
    let m = pr.len();
    let unit = |u: usize| {
        let mut e = vec![0.0; m];
        e[u] = 1.0;
        antisym(d, &e)
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    // cocycle identity on basis triples
    for i in 0..d {
        for j in (i + 1)..d {
            for l in (j + 1)..d {
                let (x, y, z) = (alg.basis(i), alg.basis(j), alg.basis(l));
                let (xy, yz, zx) = (alg.bracket(&x, &y), alg.bracket(&y, &z), alg.bracket(&z, &x));
                rows.push((0..m).map(|u| {
                    let c = unit(u);
                    form(&c, &xy, &z) + form(&c, &yz, &x) + form(&c, &zx, &y)
                }).collect());
            }
        }
    }
    // sampled isotropy invariance: L_Z c = -(C^T c + c C)
    for y in sample_points(params.n, samples) {
        for cmat in isotropy_frame_actions(&y) {
            let cols: Vec<Vec<f64>> = (0..m).map(|u| {
                let c = unit(u);
                upper(&(-(cmat.transpose() * &c + &c * &cmat)))
            }).collect();
            for r in 0..m {
                rows.push(cols.iter().map(|col| col[r]).collect());
            }
        }
    }
    let a = DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j]);
    let (z_inv, _) = linalg::nullspace(&a, tol)?;
    let b = coboundary_matrix(&alg);
    let rank_b = linalg::rank(&b, EXACT_TOL)?.rank;
    if z_inv.ncols() == 0 {
        return Ok(0);
    }
    let joined = DMatrix::from_columns(
        &z_inv.column_iter().map(|c| c.into_owned()).chain(b.column_iter().map(|c| c.into_owned())).collect::<Vec<_>>(),
    );
    let rank_joined = linalg::rank(&joined, tol)?.rank;
    Ok(rank_joined - rank_b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solvable_brackets() {
        let s = build_solvable_algebra(SpaceParams::new(1));
        assert_eq!(s.dim, 4);
        assert_eq!(s.c(0, 1, 1), 1.0);
        assert_eq!(s.c(0, 3, 3), 2.0);
        assert_eq!(s.c(1, 2, 3), 1.0);
        assert_eq!(s.c(2, 1, 3), -1.0);
        assert!(s.jacobi_residual() < 1e-12);
    }

    #[test]
    fn n0_solvable_is_two_dimensional() {
        let s = build_solvable_algebra(SpaceParams::new(0));
        assert_eq!(s.dim, 2);
        assert_eq!(s.c(0, 1, 1), 2.0);
        assert!(s.degenerate);
    }

    #[test]
    fn transvection_shapes() {
        for n in 0..=3 {
            let g = build_transvection_algebra(SpaceParams::new(n));
            assert_eq!(g.dim, 4 * n + 3);
            let (k, p) = g.eigenspaces().unwrap();
            assert_eq!(k.ncols(), 2 * n + 1);
            assert_eq!(p.ncols(), 2 * n + 2);
        }
    }

    #[test]
    fn centre_of_s_is_trivial_and_of_h_is_e() {
        for n in 0..=2 {
            let s = build_solvable_algebra(SpaceParams::new(n));
            // [H, E] = 2E kills E from the centre of s itself
            assert_eq!(s.center().unwrap().ncols(), 0);
            assert_eq!(s.derived().unwrap().ncols(), 2 * n + 1);
            let z = s.derived_center().unwrap();
            assert_eq!(z.ncols(), 1);
            assert!((z[(s.dim - 1, 0)].abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_involution_is_an_error() {
        let s = build_solvable_algebra(SpaceParams::new(1));
        assert!(matches!(check_symmetric_triple(&s), Err(Error::MissingInvolution)));
    }

    #[test]
    fn n0_coboundaries() {
        assert_eq!(coboundary_space_dimension(SpaceParams::new(0)).unwrap(), 1);
    }
}
