//! Persist cubes in the HSC1 container and read them back, in both
//! precisions, plus importing a headerless raw dump.
//!
//! Run with `cargo run --release --example cube_io`.

use tubal::io::{import_raw, read_cube, write_cube, Dtype, Endianness, RawLayout};
use tubal::{gaussian_cube, RngSeed};

fn main() {
    let dir = std::env::temp_dir().join("tubal-cube-io-example");
    std::fs::create_dir_all(&dir).unwrap();
    let x = gaussian_cube(16, 12, 8, RngSeed(61));

    // f64 round-trips bit-exactly.
    let f64_path = dir.join("cube-f64.hsc");
    write_cube(&f64_path, &x, Dtype::F64).unwrap();
    let back = read_cube(&f64_path).unwrap();
    assert_eq!(back, x);
    println!(
        "f64 file: {} bytes, round-trip exact",
        std::fs::metadata(&f64_path).unwrap().len()
    );

    // f32 halves the payload at ~1e-7 relative error.
    let f32_path = dir.join("cube-f32.hsc");
    write_cube(&f32_path, &x, Dtype::F32).unwrap();
    let back32 = read_cube(&f32_path).unwrap();
    println!(
        "f32 file: {} bytes, round-trip error {:.2e}",
        std::fs::metadata(&f32_path).unwrap().len(),
        back32.sub(&x).unwrap().frob_norm() / x.frob_norm()
    );

    // Raw band-sequential dumps (no header) can be imported by declaring
    // the geometry up front.
    let raw_path = dir.join("scene.raw");
    let payload: Vec<u8> = x.data().iter().flat_map(|v| v.to_le_bytes()).collect();
    std::fs::write(&raw_path, payload).unwrap();
    let imported = import_raw(
        &raw_path,
        16,
        12,
        8,
        RawLayout::BandSequential,
        Dtype::F64,
        Endianness::Little,
    )
    .unwrap();
    assert_eq!(imported, x);
    println!("raw import: band-sequential f64 dump matched the original");

    std::fs::remove_dir_all(&dir).ok();
}
