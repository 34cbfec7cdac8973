//! Compare the randomized solver against exact rank truncation as the
//! spatial size grows. The randomized path skips per-slice SVDs, so its
//! advantage widens with the cube.
//!
//! Run with `cargo run --release --example bench_tradeoff` (sizes can be
//! passed as arguments, e.g. `-- 64 128 256`).

use tubal::cli::{bench_csv, run_bench};
use tubal::RngSeed;

fn main() {
    let sizes: Vec<usize> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("sizes must be positive integers"))
        .collect();
    let sizes = if sizes.is_empty() { vec![64, 128, 256] } else { sizes };

    let records = run_bench(&sizes, 5, 16, 3, RngSeed(71)).unwrap();
    println!("{}", bench_csv(&records).trim_end());

    println!();
    for &n in &sizes {
        let get = |m: &str| {
            records
                .iter()
                .find(|r| r.method == m && r.n1 == n)
                .unwrap()
                .wall_seconds
        };
        println!(
            "n = {n:>4}: randomized / exact time ratio {:.3}",
            get("tbrp") / get("tsvd_truncation")
        );
    }
}
