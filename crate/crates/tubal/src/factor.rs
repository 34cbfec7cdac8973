//! Exact tensor SVD under the t-product and the rank/norm diagnostics
//! built on it: multi-rank, tubal rank, tensor nuclear norm, and the
//! truncated rank-r approximation used as the reference for the
//! randomized solver.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::cube::{dft_tubes, half_spectrum, idft_tubes, Cube, CubeError, SpectralCube, C64};

#[derive(Debug, Error)]
pub enum FactorError {
    #[error("rank {r} out of range 1..={max}")]
    RankOutOfRange { r: usize, max: usize },
    #[error(transparent)]
    Cube(#[from] CubeError),
}

/// t-SVD factors `x = u * s * ttranspose(v)` with f-diagonal `s`.
#[derive(Debug, Clone)]
pub struct TsvdFactors {
    pub u: Cube,
    pub s: Cube,
    pub v: Cube,
}

/// Per-Fourier-slice ranks and the threshold that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiRank {
    pub ranks: Vec<usize>,
    pub tolerance: f64,
}

/// Numerical-rank threshold for one slice: `tol` as given, or the
/// scale-invariant auto rule when `tol == 0`.
fn slice_threshold(tol: f64, n1: usize, n2: usize, sigma_max: f64) -> f64 {
    if tol > 0.0 {
        tol
    } else {
        n1.max(n2) as f64 * f64::EPSILON * sigma_max
    }
}

/// Singular values of every Fourier-domain frontal slice, in
/// non-increasing order per slice.
fn spectral_singular_values(x: &Cube) -> Vec<Vec<f64>> {
    let (_, _, n3) = x.dims();
    let xf = dft_tubes(x);
    let half = half_spectrum(n3);
    let mut all: Vec<Vec<f64>> = vec![Vec::new(); n3];
    for k in 0..=half {
        let mut sv: Vec<f64> = xf
            .slice_matrix(k)
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if k >= 1 && k != n3 - k {
            all[n3 - k] = sv.clone();
        }
        all[k] = sv;
    }
    all
}

/// Exact t-SVD via per-slice complex SVD in the Fourier domain.
///
/// Slices in the redundant half of the spectrum are mirrored by conjugation
/// so the reassembled factors are exactly real.
pub fn tsvd(x: &Cube) -> Result<TsvdFactors, FactorError> {
    let (n1, n2, n3) = x.dims();
    let xf = dft_tubes(x);
    let mut uf = SpectralCube::zeros(n1, n1, n3);
    let mut sf = SpectralCube::zeros(n1, n2, n3);
    let mut vf = SpectralCube::zeros(n2, n2, n3);
    let half = half_spectrum(n3);
    for k in 0..=half {
        let (u, s, v) = full_complex_svd(&xf.slice_matrix(k));
        uf.set_slice_matrix(k, &u);
        sf.set_slice_matrix(k, &s);
        vf.set_slice_matrix(k, &v);
    }
    for k in half + 1..n3 {
        uf.mirror_conjugate(n3 - k);
        sf.mirror_conjugate(n3 - k);
        vf.mirror_conjugate(n3 - k);
    }
    Ok(TsvdFactors {
        u: idft_tubes(&uf)?,
        s: idft_tubes(&sf)?,
        v: idft_tubes(&vf)?,
    })
}

/// Full (non-economy) SVD of a complex matrix: returns square `U`, the
/// rectangular diagonal `S`, and square `V` (not adjoint), with singular
/// values in non-increasing order.
fn full_complex_svd(m: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>, DMatrix<C64>) {
    let (n1, n2) = (m.nrows(), m.ncols());
    let p = n1.min(n2);
    let svd = m.clone().svd(true, true);
    let u_thin = svd.u.unwrap();
    let vt_thin = svd.v_t.unwrap();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());

    let mut u = DMatrix::<C64>::zeros(n1, n1);
    let mut s = DMatrix::<C64>::zeros(n1, n2);
    let mut v = DMatrix::<C64>::zeros(n2, n2);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &u_thin.column(src));
        s[(dst, dst)] = C64::new(svd.singular_values[src], 0.0);
        v.set_column(dst, &vt_thin.row(src).adjoint());
    }
    if n1 > p {
        complete_basis(&mut u, p);
    }
    if n2 > p {
        complete_basis(&mut v, p);
    }
    (u, s, v)
}

/// Extend the first `p` orthonormal columns of `m` to a full orthonormal
/// basis by Gram-Schmidt against the standard basis.
fn complete_basis(m: &mut DMatrix<C64>, p: usize) {
    let n = m.nrows();
    let mut filled = p;
    for e in 0..n {
        if filled == n {
            break;
        }
        let mut cand = DMatrix::<C64>::zeros(n, 1);
        cand[(e, 0)] = C64::new(1.0, 0.0);
        for j in 0..filled {
            let col = m.column(j);
            let proj: C64 = col.iter().zip(cand.iter()).map(|(a, b)| a.conj() * b).sum();
            for i in 0..n {
                cand[(i, 0)] -= m[(i, j)] * proj;
            }
        }
        let norm = cand.norm();
        if norm > 1e-8 {
            for i in 0..n {
                m[(i, filled)] = cand[(i, 0)] / norm;
            }
            filled += 1;
        }
    }
    assert_eq!(filled, n, "failed to complete orthonormal basis");
}

/// Rank of each Fourier-domain frontal slice.
pub fn multi_rank(x: &Cube, tol: f64) -> MultiRank {
    let (n1, n2, _) = x.dims();
    let ranks = spectral_singular_values(x)
        .iter()
        .map(|sv| {
            let smax = sv.first().copied().unwrap_or(0.0);
            let thr = slice_threshold(tol, n1, n2, smax);
            sv.iter().filter(|&&s| s > thr).count()
        })
        .collect();
    MultiRank {
        ranks,
        tolerance: tol,
    }
}

/// Tubal rank: the largest multi-rank entry.
pub fn tubal_rank(x: &Cube, tol: f64) -> usize {
    multi_rank(x, tol).ranks.into_iter().max().unwrap_or(0)
}

/// Tensor nuclear norm: sum of singular values over all Fourier slices.
/// Diagnostic only; the solver never minimizes it.
pub fn tnn(x: &Cube) -> f64 {
    spectral_singular_values(x)
        .iter()
        .map(|sv| sv.iter().sum::<f64>())
        .sum()
}

/// Best tubal-rank-r approximation: keep the `r` leading singular triplets
/// in every Fourier slice.
pub fn truncated_tsvd(x: &Cube, r: usize) -> Result<Cube, FactorError> {
    let (n1, n2, n3) = x.dims();
    let max = n1.min(n2);
    if r < 1 || r > max {
        return Err(FactorError::RankOutOfRange { r, max });
    }
    let xf = dft_tubes(x);
    let mut lf = SpectralCube::zeros(n1, n2, n3);
    let half = half_spectrum(n3);
    for k in 0..=half {
        let m = xf.slice_matrix(k);
        let svd = m.svd(true, true);
        let u = svd.u.as_ref().unwrap();
        let vt = svd.v_t.as_ref().unwrap();
        let p = svd.singular_values.len();
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| {
            svd.singular_values[b]
                .partial_cmp(&svd.singular_values[a])
                .unwrap()
        });
        let mut acc = DMatrix::<C64>::zeros(n1, n2);
        for &idx in order.iter().take(r) {
            let sigma = svd.singular_values[idx];
            let col = u.column(idx);
            let row = vt.row(idx);
            for i in 0..n1 {
                for j in 0..n2 {
                    acc[(i, j)] += col[i] * row[j] * C64::new(sigma, 0.0);
                }
            }
        }
        lf.set_slice_matrix(k, &acc);
    }
    for k in half + 1..n3 {
        lf.mirror_conjugate(n3 - k);
    }
    Ok(idft_tubes(&lf)?)
}
