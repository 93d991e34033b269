//! Numerical rank and nullspace by singular-value gap.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Minimum ratio between the smallest kept and the largest dropped singular value.
pub const GAP_RATIO: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct RankInfo {
    pub rank: usize,
    /// kept / dropped singular value ratio at the cut (infinite when nothing is dropped
    /// and nothing is kept)
    pub gap: f64,
    pub singular_values: Vec<f64>,
}

fn padded(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.nrows() >= a.ncols() {
        a.clone()
    } else {
        let mut p = DMatrix::zeros(a.ncols(), a.ncols());
        p.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
        p
    }
}

fn cut(sv: &[f64], tol: f64) -> Result<RankInfo> {
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let mut sorted = sv.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if smax == 0.0 {
        return Ok(RankInfo { rank: 0, gap: f64::INFINITY, singular_values: sorted });
    }
    let rank = sorted.iter().filter(|&&s| s > tol * smax).count();
    let kept = if rank > 0 { sorted[rank - 1] } else { tol * smax };
    let dropped = if rank < sorted.len() { sorted[rank].max(f64::EPSILON * smax) } else { tol * smax };
    let gap = kept / dropped;
    if gap < GAP_RATIO {
        return Err(Error::RankAmbiguous { ratio: gap, required: GAP_RATIO });
    }
    Ok(RankInfo { rank, gap, singular_values: sorted })
}

/// Numerical rank: singular values below `tol * s_max` count as zero.
pub fn rank(a: &DMatrix<f64>, tol: f64) -> Result<RankInfo> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return Ok(RankInfo { rank: 0, gap: f64::INFINITY, singular_values: vec![] });
    }
    let sv = padded(a).singular_values();
    cut(sv.as_slice(), tol)
}

/// Orthonormal nullspace basis (columns) plus rank diagnostics.
pub fn nullspace(a: &DMatrix<f64>, tol: f64) -> Result<(DMatrix<f64>, RankInfo)> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return Ok((DMatrix::identity(n, n), RankInfo { rank: 0, gap: f64::INFINITY, singular_values: vec![] }));
    }
    let p = padded(a);
    let svd = p.svd(false, true);
    let info = cut(svd.singular_values.as_slice(), tol)?;
    let smax = info.singular_values.first().cloned().unwrap_or(0.0);
    let vt = svd.v_t.expect("requested V^T");
    let cols: Vec<_> = (0..svd.singular_values.len())
        .filter(|&i| smax == 0.0 || svd.singular_values[i] <= tol * smax)
        .map(|i| vt.row(i).transpose())
        .collect();
    let basis = if cols.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&cols) };
    Ok((basis, info))
}

/// Orthonormal basis of the column space.
pub fn range(a: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let svd = a.clone().svd(true, false);
    let info = cut(svd.singular_values.as_slice(), tol)?;
    let u = svd.u.expect("requested U");
    let smax = info.singular_values.first().cloned().unwrap_or(0.0);
    let cols: Vec<_> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > tol * smax)
        .map(|i| u.column(i).into_owned())
        .collect();
    Ok(if cols.is_empty() { DMatrix::zeros(a.nrows(), 0) } else { DMatrix::from_columns(&cols) })
}
