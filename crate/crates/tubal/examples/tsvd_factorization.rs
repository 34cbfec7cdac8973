//! Factor a cube with the tensor SVD, inspect its multi-rank and tubal
//! nuclear norm, and compare truncation error against the retained
//! spectrum.
//!
//! Run with `cargo run --release --example tsvd_factorization`.

use tubal::{
    gaussian_cube, multi_rank, tnn, tprod, truncated_tsvd, tsvd, ttranspose, tubal_rank, RngSeed,
};

fn main() {
    // A planted low-rank cube plus a small perturbation.
    let seed = RngSeed(11);
    let g1 = gaussian_cube(30, 4, 8, seed);
    let g2 = gaussian_cube(4, 25, 8, seed.derive(1));
    let planted = tprod(&g1, &g2).unwrap();
    let x = planted.add(&gaussian_cube(30, 25, 8, seed.derive(2)).scale(1e-6)).unwrap();

    let f = tsvd(&x).unwrap();
    println!(
        "U: {:?}  S: {:?}  V: {:?}",
        f.u.dims(),
        f.s.dims(),
        f.v.dims()
    );
    let rec = tprod(&tprod(&f.u, &f.s).unwrap(), &ttranspose(&f.v)).unwrap();
    println!(
        "reconstruction error {:.2e}",
        rec.sub(&x).unwrap().frob_norm() / x.frob_norm()
    );

    // With the automatic tolerance the perturbation is counted; a loose
    // tolerance reveals the planted rank in every Fourier slice.
    let strict = multi_rank(&x, 0.0);
    let loose = multi_rank(&x, 1e-4);
    println!("per-slice ranks (auto tol): {:?}", strict.ranks);
    println!("per-slice ranks (tol 1e-4): {:?}", loose.ranks);
    println!("tubal rank at tol 1e-4: {}", tubal_rank(&x, 1e-4));
    println!("tubal nuclear norm: {:.4}", tnn(&x));

    // Rank-4 truncation captures essentially everything here.
    for r in [1, 2, 4] {
        let lr = truncated_tsvd(&x, r).unwrap();
        println!(
            "rank-{r} truncation error {:.3e}",
            lr.sub(&x).unwrap().frob_norm() / x.frob_norm()
        );
    }
}
