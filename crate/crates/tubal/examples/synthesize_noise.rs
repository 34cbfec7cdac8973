//! Build corrupted test cubes with the two standard degradation recipes
//! and with a hand-rolled spec, and inspect what each stage touches.
//!
//! Run with `cargo run --release --example synthesize_noise`.

use tubal::io::noise_spec_to_text;
use tubal::{apply_spec, gaussian_cube, normalize_bandwise, Cube, NoiseSpec, RngSeed};

fn corrupted_fraction(mask: &Cube) -> f64 {
    mask.data().iter().filter(|&&v| v != 0.0).count() as f64 / mask.len() as f64
}

fn main() {
    let raw = gaussian_cube(48, 48, 16, RngSeed(41));
    let clean = normalize_bandwise(&raw);

    // Case 1: zero-mean Gaussian noise plus 20% salt-and-pepper impulses.
    let case1 = NoiseSpec::case1(RngSeed(42));
    let (noisy1, mask1) = apply_spec(&raw, &case1).unwrap();
    println!(
        "case 1: {:.1}% of entries corrupted, residual norm {:.3}",
        100.0 * corrupted_fraction(&mask1),
        noisy1.sub(&clean).unwrap().frob_norm()
    );

    // Case 2 additionally draws stripes and dead columns in some bands.
    let case2 = NoiseSpec::case2(RngSeed(43));
    let (noisy2, mask2) = apply_spec(&raw, &case2).unwrap();
    println!(
        "case 2: {:.1}% of entries corrupted, residual norm {:.3}",
        100.0 * corrupted_fraction(&mask2),
        noisy2.sub(&clean).unwrap().frob_norm()
    );

    // Specs are plain data; tweak fields directly for custom protocols.
    let custom = NoiseSpec {
        gaussian_sigma: 0.01,
        impulse_fraction: 0.05,
        stripe_bands: 4,
        deadline_bands: 0,
        seed: RngSeed(44),
        ..NoiseSpec::case2(RngSeed(44))
    };
    let (noisy3, mask3) = apply_spec(&raw, &custom).unwrap();
    println!(
        "custom: {:.1}% of entries corrupted, residual norm {:.3}",
        100.0 * corrupted_fraction(&mask3),
        noisy3.sub(&clean).unwrap().frob_norm()
    );

    // The text form round-trips through the CLI's --spec flag.
    println!("\ncustom spec as text:\n{}", noise_spec_to_text(&custom));
}
