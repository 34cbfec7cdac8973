//! Low-tubal-rank approximation with bilateral random projections:
//! exact recovery at the planted rank, graceful error at lower ranks, and
//! automatic shrinking when the requested rank exceeds the true one.
//!
//! Run with `cargo run --release --example brp_approximation`.

use std::time::Instant;

use tubal::{gaussian_cube, low_tubal_rank_approx, tprod, truncated_tsvd, RngSeed};

fn main() {
    let seed = RngSeed(23);
    let g1 = gaussian_cube(128, 4, 12, seed);
    let g2 = gaussian_cube(4, 128, 12, seed.derive(1));
    let x = tprod(&g1, &g2).unwrap();
    let norm = x.frob_norm();

    // At the planted rank the sketch captures the whole column space, so
    // recovery is exact up to round-off.
    for r in [2, 3, 4] {
        let t0 = Instant::now();
        let (l, eff) = low_tubal_rank_approx(&x, r, seed.derive(100 + r as u64), 0.0).unwrap();
        println!(
            "r = {r}: effective rank {eff}, error {:.3e}, {:.1} ms",
            l.sub(&x).unwrap().frob_norm() / norm,
            t0.elapsed().as_secs_f64() * 1e3
        );
    }

    // Requesting more than the planted rank triggers the shrink-and-retry
    // path: the returned effective rank drops back to 4.
    let (l, eff) = low_tubal_rank_approx(&x, 10, seed.derive(200), 0.0).unwrap();
    println!(
        "r = 10 requested: effective rank {eff}, error {:.3e}",
        l.sub(&x).unwrap().frob_norm() / norm
    );

    // Against the exact rank-4 truncation for scale.
    let t0 = Instant::now();
    let exact = truncated_tsvd(&x, 4).unwrap();
    println!(
        "exact truncation: error {:.3e}, {:.1} ms",
        exact.sub(&x).unwrap().frob_norm() / norm,
        t0.elapsed().as_secs_f64() * 1e3
    );
}
