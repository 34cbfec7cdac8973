//! Alternating recovery of a low-tubal-rank clean part and a sparse noise
//! part from a corrupted cube. Each iteration approximates the low-rank
//! part with bilateral random projections, then re-estimates the sparse
//! part by entry-wise hard thresholding of the residual.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::brp::{low_tubal_rank_approx, RngSeed, SolverError};
use crate::cube::{Cube, CubeError};

/// Consecutive residual increases tolerated before giving up on the
/// randomized iteration and returning the best iterate seen.
const DIVERGENCE_PATIENCE: usize = 5;

#[derive(Debug, Error)]
pub enum DenoiseError {
    #[error("input cube has zero Frobenius norm")]
    ZeroInput,
    #[error("invalid config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Cube(#[from] CubeError),
}

/// Solver parameters: rank budget, sparsity budget, stopping threshold.
#[derive(Debug, Clone, Serialize)]
pub struct DenoiseConfig {
    /// Tubal rank budget for the clean part.
    pub r: usize,
    /// Sparsity budget: maximum number of nonzeros in the sparse part.
    pub k: usize,
    /// Relative squared-residual stopping threshold.
    pub eps: f64,
    pub max_iter: usize,
    pub seed: RngSeed,
    pub rank_tol: f64,
}

impl DenoiseConfig {
    pub fn validate(&self) -> Result<(), DenoiseError> {
        if self.r < 1 {
            return Err(DenoiseError::BadConfig("r must be >= 1".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(DenoiseError::BadConfig("eps must be in (0, 1)".into()));
        }
        if self.max_iter < 1 {
            return Err(DenoiseError::BadConfig("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DenoiseResult {
    /// Clean (low-tubal-rank) estimate.
    pub l: Cube,
    /// Sparse noise estimate.
    pub s: Cube,
    pub iterations: usize,
    /// Relative squared residual per iteration.
    pub residual_history: Vec<f64>,
    pub effective_rank_history: Vec<usize>,
    pub elapsed_seconds: f64,
}

/// Keep the `k` largest-magnitude entries, zero the rest. Equal magnitudes
/// at the boundary break toward the lower linear index.
pub fn hard_threshold(x: &Cube, k: usize) -> Cube {
    let (n1, n2, n3) = x.dims();
    let mut out = Cube::zeros(n1, n2, n3);
    if k == 0 {
        return out;
    }
    if k >= x.len() {
        return x.clone();
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| {
        x.data()[b]
            .abs()
            .partial_cmp(&x.data()[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    for &idx in order.iter().take(k) {
        if x.data()[idx] != 0.0 {
            out.data_mut()[idx] = x.data()[idx];
        }
    }
    out
}

/// Squared Frobenius norm of `x - l - s`.
pub fn objective(x: &Cube, l: &Cube, s: &Cube) -> Result<f64, CubeError> {
    if x.dims() != l.dims() || x.dims() != s.dims() {
        return Err(CubeError::DimMismatch(format!(
            "objective: {:?}, {:?}, {:?}",
            x.dims(),
            l.dims(),
            s.dims()
        )));
    }
    Ok(x.data()
        .iter()
        .zip(l.data())
        .zip(s.data())
        .map(|((x, l), s)| {
            let d = x - l - s;
            d * d
        })
        .sum())
}

/// Alternating low-rank / sparse recovery.
pub fn denoise(x: &Cube, cfg: &DenoiseConfig) -> Result<DenoiseResult, DenoiseError> {
    cfg.validate()?;
    let start = Instant::now();
    let norm_sq = x.frob_norm().powi(2);
    if norm_sq == 0.0 {
        return Err(DenoiseError::ZeroInput);
    }
    let (n1, n2, n3) = x.dims();
    let mut l = Cube::zeros(n1, n2, n3);
    let mut s = Cube::zeros(n1, n2, n3);
    let mut residual_history = Vec::new();
    let mut effective_rank_history = Vec::new();

    let mut best: Option<(f64, Cube, Cube, usize)> = None;
    let mut increases = 0usize;
    let mut prev_residual = f64::INFINITY;
    let mut iterations = 0;

    for t in 1..=cfg.max_iter {
        let target = x.sub(&s)?;
        let (l_new, eff) =
            low_tubal_rank_approx(&target, cfg.r, cfg.seed.derive(t as u64), cfg.rank_tol)?;
        l = l_new;
        s = hard_threshold(&x.sub(&l)?, cfg.k);
        iterations = t;
        effective_rank_history.push(eff);
        let residual = objective(x, &l, &s)? / norm_sq;
        residual_history.push(residual);

        if best.as_ref().map_or(true, |(b, ..)| residual < *b) {
            best = Some((residual, l.clone(), s.clone(), eff));
        }
        if residual <= cfg.eps {
            break;
        }
        if residual > prev_residual {
            increases += 1;
            if increases >= DIVERGENCE_PATIENCE {
                let (_, bl, bs, _) = best.take().unwrap();
                l = bl;
                s = bs;
                break;
            }
        } else {
            increases = 0;
        }
        prev_residual = residual;
    }

    Ok(DenoiseResult {
        l,
        s,
        iterations,
        residual_history,
        effective_rank_history,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}
