//! Tensor bilateral random projections: a randomized tubal rank-r
//! approximation that replaces the per-slice SVDs of the exact truncated
//! factorization. Sketch with a Gaussian tensor, refine once by reusing
//! the first sketch as the second projector, then solve a small Gram
//! system per Fourier slice.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::cube::{dft_tubes, half_spectrum, idft_tubes, tprod, ttranspose, Cube, CubeError, SpectralCube, C64};
use crate::factor::tubal_rank;

/// Shrink-and-retry rounds allowed when the detected rank keeps dropping.
pub const MAX_RESTARTS: usize = 3;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("rank {r} out of range 1..={max}")]
    RankOutOfRange { r: usize, max: usize },
    #[error("Gram tensor singular at Fourier slice {slice} (cond >= {cond:.3e})")]
    SingularGram { slice: usize, cond: f64 },
    #[error("rank shrinking did not stabilize within {MAX_RESTARTS} restarts")]
    RestartLimitExceeded,
    #[error(transparent)]
    Cube(#[from] CubeError),
}

/// Deterministic RNG seed. Same seed and dims give bitwise-identical draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Derive an independent child seed (splitmix64 finalizer).
    pub fn derive(self, salt: u64) -> RngSeed {
        let mut z = self.0 ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        RngSeed(z ^ (z >> 31))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// Two-sided random sketch of a cube at rank budget `r`.
#[derive(Debug, Clone)]
pub struct BrpSketch {
    pub y1: Cube,
    pub y2: Cube,
    pub a1: Cube,
    pub a2: Cube,
    pub effective_r: usize,
}

/// Cube of i.i.d. standard normal entries (spatial domain), deterministic
/// in the seed.
pub fn gaussian_cube(n1: usize, n2: usize, n3: usize, seed: RngSeed) -> Cube {
    let mut rng = seed.rng();
    let data = (0..n1 * n2 * n3)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    Cube::from_vec(n1, n2, n3, data)
}

/// Build the sketch: `y1 = x * a1` with Gaussian `a1`, reuse `a2 = y1` as
/// the single power-refinement step, then `y2 = x' * a2`.
pub fn brp_sketch(x: &Cube, r: usize, seed: RngSeed) -> Result<BrpSketch, SolverError> {
    let (n1, n2, n3) = x.dims();
    let max = n1.min(n2);
    if r < 1 || r > max {
        return Err(SolverError::RankOutOfRange { r, max });
    }
    let a1 = gaussian_cube(n2, r, n3, seed);
    let y1 = tprod(x, &a1)?;
    let a2 = y1.clone();
    let y2 = tprod(&ttranspose(x), &a2)?;
    Ok(BrpSketch {
        y1,
        y2,
        a1,
        a2,
        effective_r: r,
    })
}

/// Tubal rank detected from the sketch. The check tensor is
/// `a2' * y2` where that product conforms (square spatial dims) and the
/// Gram tensor `a2' * y1` otherwise; both detect `min(r, rank_t(x))` for
/// generic Gaussian projectors.
pub fn brp_rank_check(sketch: &BrpSketch, tol: f64) -> Result<usize, SolverError> {
    let a2t = ttranspose(&sketch.a2);
    let (_, inner, _) = a2t.dims();
    let check = if sketch.y2.dims().0 == inner {
        tprod(&a2t, &sketch.y2)?
    } else {
        tprod(&a2t, &sketch.y1)?
    };
    Ok(tubal_rank(&check, tol))
}

fn gram_condition(gram: &DMatrix<C64>) -> f64 {
    let svd = gram.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    }
}

/// Pseudo-inverse solve `gram^+ . rhs` with the scale-invariant rank cutoff.
fn pinv_solve(gram: &DMatrix<C64>, rhs: &DMatrix<C64>) -> DMatrix<C64> {
    let r = gram.nrows();
    let svd = gram.clone().svd(true, true);
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let smax = svd.singular_values.max();
    let thr = r as f64 * f64::EPSILON * smax;
    let mut out = DMatrix::<C64>::zeros(r, rhs.ncols());
    for idx in 0..svd.singular_values.len() {
        let s = svd.singular_values[idx];
        if s <= thr {
            continue;
        }
        // out += v_idx * (u_idx' * rhs) / s
        let coeff = u.column(idx).adjoint() * rhs;
        let v_col = vt.row(idx).adjoint();
        out += v_col * coeff / C64::new(s, 0.0);
    }
    out
}

fn brp_approx_inner(sketch: &BrpSketch, allow_pinv: bool) -> Result<Cube, SolverError> {
    let (n1, _, n3) = sketch.y1.dims();
    let (n2, _, _) = sketch.y2.dims();
    let y1f = dft_tubes(&sketch.y1);
    let y2f = dft_tubes(&sketch.y2);
    let a2f = dft_tubes(&sketch.a2);
    let mut lf = SpectralCube::zeros(n1, n2, n3);
    let cond_limit = 1.0 / (100.0 * f64::EPSILON);
    let half = half_spectrum(n3);
    for k in 0..=half {
        let y1k = y1f.slice_matrix(k);
        let y2k = y2f.slice_matrix(k);
        let gram = a2f.slice_matrix(k).adjoint() * &y1k;
        let rhs = y2k.adjoint();
        let cond = gram_condition(&gram);
        let z = if cond > cond_limit {
            if !allow_pinv {
                return Err(SolverError::SingularGram { slice: k, cond });
            }
            pinv_solve(&gram, &rhs)
        } else {
            gram.lu()
                .solve(&rhs)
                .ok_or(SolverError::SingularGram { slice: k, cond })?
        };
        lf.set_slice_matrix(k, &(y1k * z));
    }
    for k in half + 1..n3 {
        lf.mirror_conjugate(n3 - k);
    }
    Ok(idft_tubes(&lf)?)
}

/// Rank-r reconstruction `y1 * (a2' * y1)^-1 * y2'`, solved slice-wise in
/// the Fourier domain with partial pivoting.
pub fn brp_approx(sketch: &BrpSketch) -> Result<Cube, SolverError> {
    brp_approx_inner(sketch, false)
}

/// Sketch, detect the rank, shrink and re-sketch if deficient, then
/// reconstruct. Returns the approximation and the final effective rank.
pub fn low_tubal_rank_approx(
    x: &Cube,
    r: usize,
    seed: RngSeed,
    tol: f64,
) -> Result<(Cube, usize), SolverError> {
    let (n1, n2, n3) = x.dims();
    let max = n1.min(n2);
    if r < 1 || r > max {
        return Err(SolverError::RankOutOfRange { r, max });
    }
    let mut r_cur = r;
    let mut seed_cur = seed;
    for attempt in 0..=MAX_RESTARTS {
        let final_attempt = attempt == MAX_RESTARTS;
        let mut sketch = brp_sketch(x, r_cur, seed_cur)?;
        let detected = brp_rank_check(&sketch, tol)?;
        if detected == 0 {
            // low-rank part absent
            return Ok((Cube::zeros(n1, n2, n3), 0));
        }
        if detected < r_cur {
            if final_attempt {
                return Err(SolverError::RestartLimitExceeded);
            }
            r_cur = detected;
            seed_cur = seed.derive(attempt as u64 + 1);
            continue;
        }
        sketch.effective_r = r_cur;
        match brp_approx_inner(&sketch, final_attempt) {
            Ok(l) => return Ok((l, r_cur)),
            Err(SolverError::SingularGram { .. }) if !final_attempt => {
                seed_cur = seed.derive(0x5eed + attempt as u64);
            }
            Err(e) => return Err(e),
        }
    }
    Err(SolverError::RestartLimitExceeded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::truncated_tsvd;

    fn rel_err(a: &Cube, b: &Cube) -> f64 {
        a.sub(b).unwrap().frob_norm() / b.frob_norm().max(f64::MIN_POSITIVE)
    }

    /// Planted cube of exact tubal rank `r` (generic Gaussian factors).
    fn planted(n1: usize, n2: usize, n3: usize, r: usize, seed: u64) -> Cube {
        let g1 = gaussian_cube(n1, r, n3, RngSeed(seed));
        let g2 = gaussian_cube(r, n2, n3, RngSeed(seed).derive(77));
        tprod(&g1, &g2).unwrap()
    }

    #[test]
    fn gaussian_cube_deterministic() {
        let a = gaussian_cube(4, 5, 3, RngSeed(42));
        let b = gaussian_cube(4, 5, 3, RngSeed(42));
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_cube_moments() {
        let x = gaussian_cube(100, 100, 4, RngSeed(7));
        let n = x.len() as f64;
        let mean = x.data().iter().sum::<f64>() / n;
        let var = x.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((0.9..1.1).contains(&var), "var {var}");
    }

    #[test]
    fn gaussian_cube_seed_sensitivity() {
        let a = gaussian_cube(10, 10, 4, RngSeed(1));
        let b = gaussian_cube(10, 10, 4, RngSeed(2));
        let differing = a
            .data()
            .iter()
            .zip(b.data())
            .filter(|(x, y)| x != y)
            .count();
        assert!(differing as f64 >= 0.99 * a.len() as f64);
    }

    #[test]
    fn sketch_of_zero_is_zero() {
        let x = Cube::zeros(4, 4, 3);
        let s = brp_sketch(&x, 2, RngSeed(1)).unwrap();
        assert!(s.y1.frob_norm() == 0.0 && s.y2.frob_norm() == 0.0);
    }

    #[test]
    fn sketch_depth_one_matches_matrix_brp() {
        let x = gaussian_cube(5, 4, 1, RngSeed(3));
        let s = brp_sketch(&x, 2, RngSeed(4)).unwrap();
        let y1 = tprod(&x, &s.a1).unwrap();
        assert!(rel_err(&s.y1, &y1) < 1e-14);
        let y2 = tprod(&ttranspose(&x), &s.y1).unwrap();
        assert!(rel_err(&s.y2, &y2) < 1e-14);
    }

    #[test]
    fn sketch_matches_tprod_recomputation() {
        let x = gaussian_cube(6, 5, 3, RngSeed(5));
        let s = brp_sketch(&x, 2, RngSeed(6)).unwrap();
        assert!(rel_err(&s.y1, &tprod(&x, &s.a1).unwrap()) < 1e-12);
        assert_eq!(s.a2, s.y1);
        assert!(rel_err(&s.y2, &tprod(&ttranspose(&x), &s.a2).unwrap()) < 1e-12);
    }

    #[test]
    fn sketch_rejects_bad_rank() {
        let x = gaussian_cube(4, 4, 2, RngSeed(8));
        assert!(matches!(
            brp_sketch(&x, 0, RngSeed(1)),
            Err(SolverError::RankOutOfRange { .. })
        ));
        assert!(matches!(
            brp_sketch(&x, 5, RngSeed(1)),
            Err(SolverError::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn rank_check_detects_full_requested_rank() {
        let x = planted(12, 12, 3, 5, 10);
        let s = brp_sketch(&x, 3, RngSeed(11)).unwrap();
        assert_eq!(brp_rank_check(&s, 0.0).unwrap(), 3);
    }

    #[test]
    fn rank_check_detects_deficiency() {
        let x = planted(12, 12, 3, 2, 12);
        let s = brp_sketch(&x, 5, RngSeed(13)).unwrap();
        assert_eq!(brp_rank_check(&s, 0.0).unwrap(), 2);
    }

    #[test]
    fn rank_check_on_zero_input() {
        let x = Cube::zeros(6, 6, 2);
        let s = brp_sketch(&x, 3, RngSeed(14)).unwrap();
        assert_eq!(brp_rank_check(&s, 0.0).unwrap(), 0);
    }

    #[test]
    fn rank_check_non_square_uses_gram() {
        let x = planted(10, 7, 3, 2, 15);
        let s = brp_sketch(&x, 5, RngSeed(16)).unwrap();
        assert_eq!(brp_rank_check(&s, 0.0).unwrap(), 2);
    }

    #[test]
    fn approx_exact_at_exact_rank() {
        let x = planted(8, 9, 4, 3, 17);
        let s = brp_sketch(&x, 3, RngSeed(18)).unwrap();
        let l = brp_approx(&s).unwrap();
        assert!(rel_err(&l, &x) <= 1e-8);
        assert!(tubal_rank(&l, 0.0) <= 3);
    }

    #[test]
    fn approx_zero_input_is_singular() {
        let x = Cube::zeros(5, 5, 2);
        let s = brp_sketch(&x, 2, RngSeed(19)).unwrap();
        assert!(matches!(
            brp_approx(&s),
            Err(SolverError::SingularGram { .. })
        ));
    }

    #[test]
    fn approx_depth_one_matches_matrix_formula() {
        let x = planted(6, 6, 1, 2, 20);
        let s = brp_sketch(&x, 2, RngSeed(21)).unwrap();
        let l = brp_approx(&s).unwrap();
        // Y1 (A2' Y1)^-1 Y2' computed directly on the single slice
        let to_m = |c: &Cube| DMatrix::from_fn(c.dims().0, c.dims().1, |i, j| c.get(i, j, 0));
        let (y1, y2, a2) = (to_m(&s.y1), to_m(&s.y2), to_m(&s.a2));
        let gram = a2.transpose() * &y1;
        let direct = &y1 * gram.try_inverse().unwrap() * y2.transpose();
        let lm = to_m(&l);
        assert!((lm - &direct).norm() / direct.norm() < 1e-10);
    }

    #[test]
    fn low_rank_approx_shrinks_to_detected_rank() {
        let x = planted(16, 16, 4, 2, 22);
        let (l, eff) = low_tubal_rank_approx(&x, 6, RngSeed(23), 0.0).unwrap();
        assert_eq!(eff, 2);
        assert!(rel_err(&l, &x) <= 1e-7);
    }

    #[test]
    fn low_rank_approx_matches_truncated_reference() {
        let x = planted(10, 10, 3, 3, 24);
        let reference = truncated_tsvd(&x, 3).unwrap();
        let (l, eff) = low_tubal_rank_approx(&x, 3, RngSeed(25), 0.0).unwrap();
        assert_eq!(eff, 3);
        assert!(rel_err(&l, &reference) <= 1e-7);
    }

    #[test]
    fn low_rank_approx_full_rank_input_within_factor_of_optimal() {
        let x = gaussian_cube(20, 20, 4, RngSeed(26));
        let best = x.sub(&truncated_tsvd(&x, 5).unwrap()).unwrap().frob_norm();
        let (l, eff) = low_tubal_rank_approx(&x, 5, RngSeed(27), 0.0).unwrap();
        assert_eq!(eff, 5);
        let err = x.sub(&l).unwrap().frob_norm();
        assert!(err <= 5.0 * best, "err {err} vs optimal {best}");
    }

    #[test]
    fn low_rank_approx_zero_input_gives_zero() {
        let x = Cube::zeros(6, 6, 3);
        let (l, eff) = low_tubal_rank_approx(&x, 3, RngSeed(28), 0.0).unwrap();
        assert_eq!(eff, 0);
        assert_eq!(l.frob_norm(), 0.0);
    }

    #[test]
    fn low_rank_approx_deterministic() {
        let x = planted(12, 10, 3, 4, 29);
        let (l1, _) = low_tubal_rank_approx(&x, 4, RngSeed(30), 0.0).unwrap();
        let (l2, _) = low_tubal_rank_approx(&x, 4, RngSeed(30), 0.0).unwrap();
        assert_eq!(l1, l2);
    }

    #[test]
    fn rank_cap_holds_on_random_inputs() {
        for seed in 0..5u64 {
            let x = gaussian_cube(10, 8, 3, RngSeed(100 + seed));
            let (l, eff) = low_tubal_rank_approx(&x, 3, RngSeed(200 + seed), 0.0).unwrap();
            assert!(tubal_rank(&l, 0.0) <= eff);
        }
    }
}
