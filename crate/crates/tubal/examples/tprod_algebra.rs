//! Tour of the t-product algebra: multiplication, transpose, identity,
//! and inversion of third-order tensors.
//!
//! Run with `cargo run --release --example tprod_algebra`.

use tubal::{gaussian_cube, identity_tensor, tinverse, tprod, ttranspose, RngSeed};

fn main() {
    let seed = RngSeed(7);
    let a = gaussian_cube(4, 4, 6, seed);
    let b = gaussian_cube(4, 3, 6, seed.derive(1));

    // Multiplication composes like matrix multiplication, slice-wise in
    // the Fourier domain.
    let ab = tprod(&a, &b).unwrap();
    println!("A: {:?}  B: {:?}  A*B: {:?}", a.dims(), b.dims(), ab.dims());

    // The identity tensor is neutral on both sides.
    let i = identity_tensor(4, 6);
    let left = tprod(&i, &a).unwrap();
    println!(
        "|| I*A - A || = {:.2e}",
        left.sub(&a).unwrap().frob_norm()
    );

    // Transpose reverses products: (A*B)^T = B^T * A^T.
    let lhs = ttranspose(&ab);
    let rhs = tprod(&ttranspose(&b), &ttranspose(&a)).unwrap();
    println!(
        "|| (A*B)^T - B^T*A^T || = {:.2e}",
        lhs.sub(&rhs).unwrap().frob_norm()
    );

    // A generic square tensor is invertible; A^-1 * A recovers I.
    let a_inv = tinverse(&a).unwrap();
    let should_be_i = tprod(&a_inv, &a).unwrap();
    println!(
        "|| A^-1*A - I || = {:.2e}",
        should_be_i.sub(&i).unwrap().frob_norm()
    );
}
