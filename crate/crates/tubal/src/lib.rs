//! Tubal-tensor algebra and constrained low-tubal-rank recovery for
//! removing mixed Gaussian and sparse noise from 3-way hyperspectral
//! cubes.
//!
//! The building blocks:
//!
//! - [`cube`] — dense 3-way tensors, the tube-wise DFT, and the t-product
//!   algebra (product, conjugate transpose, identity, inverse);
//! - [`factor`] — the exact tensor SVD plus multi-rank, tubal rank, the
//!   tensor nuclear norm, and truncated rank-r approximation;
//! - [`brp`] — tensor bilateral random projections: a fast randomized
//!   rank-r approximation that replaces the per-slice SVDs;
//! - [`denoise`] — the alternating low-rank / sparse recovery loop;
//! - [`noise`] — synthetic corruption recipes (Gaussian, salt-and-pepper,
//!   stripes, deadlines);
//! - [`metrics`] — MPSNR / MSSIM / SAM evaluation;
//! - [`io`] — the HSC1 cube file format, raw imports, configs, reports;
//! - [`cli`] — the `tubal` command-line frontend.
//!
//! Runnable walkthroughs of each capability live in `examples/`.

pub mod brp;
pub mod cli;
pub mod cube;
pub mod denoise;
pub mod factor;
pub mod io;
pub mod metrics;
pub mod noise;

pub use brp::{
    brp_approx, brp_rank_check, brp_sketch, gaussian_cube, low_tubal_rank_approx, BrpSketch,
    RngSeed, SolverError,
};
pub use cube::{
    dft_tubes, identity_tensor, idft_tubes, tinverse, tprod, ttranspose, Cube, CubeError,
    SpectralCube,
};
pub use denoise::{
    denoise, hard_threshold, objective, DenoiseConfig, DenoiseError, DenoiseResult,
};
pub use factor::{
    multi_rank, tnn, truncated_tsvd, tsvd, tubal_rank, FactorError, MultiRank, TsvdFactors,
};
pub use metrics::{evaluate, psnr_band, sam, ssim_band, MetricsError, QualityReport};
pub use noise::{
    add_gaussian, add_impulse, add_stripes_deadlines, apply_spec, normalize_bandwise, NoiseError,
    NoiseSpec,
};
