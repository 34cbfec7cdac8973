//! End-to-end acceptance suite. Each test prints one PASS line for its
//! criterion; run with `cargo test --test acceptance -- --nocapture` to
//! see them.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tubal::cli::run_bench;
use tubal::cube::{dft_tubes, tprod, ttranspose, Cube};
use tubal::denoise::{denoise, hard_threshold, DenoiseConfig};
use tubal::factor::tsvd;
use tubal::io::{read_cube, write_cube, Dtype, IoError};
use tubal::metrics::sam;
use tubal::noise::{add_gaussian, add_impulse};
use tubal::{gaussian_cube, identity_tensor, low_tubal_rank_approx, RngSeed};

fn random_cube(n1: usize, n2: usize, n3: usize, rng: &mut ChaCha8Rng) -> Cube {
    let data = (0..n1 * n2 * n3).map(|_| rng.gen::<f64>() - 0.5).collect();
    Cube::from_vec(n1, n2, n3, data)
}

fn rel_err(a: &Cube, b: &Cube) -> f64 {
    a.sub(b).unwrap().frob_norm() / b.frob_norm().max(f64::MIN_POSITIVE)
}

fn planted(n1: usize, n2: usize, n3: usize, r: usize, seed: u64) -> Cube {
    let g1 = gaussian_cube(n1, r, n3, RngSeed(seed));
    let g2 = gaussian_cube(r, n2, n3, RngSeed(seed).derive(4242));
    tprod(&g1, &g2).unwrap()
}

/// Independent oracle: explicit block-circulant matrix of `a`.
fn bcirc(a: &Cube) -> DMatrix<f64> {
    let (n1, n2, n3) = a.dims();
    let mut m = DMatrix::zeros(n1 * n3, n2 * n3);
    for bi in 0..n3 {
        for bj in 0..n3 {
            let k = (bi + n3 - bj) % n3;
            for i in 0..n1 {
                for j in 0..n2 {
                    m[(bi * n1 + i, bj * n2 + j)] = a.get(i, j, k);
                }
            }
        }
    }
    m
}

/// Independent oracle: fold(bcirc(a) . unfold(b)).
fn tprod_bcirc(a: &Cube, b: &Cube) -> Cube {
    let (n1, _, n3) = a.dims();
    let (n2b, l, _) = b.dims();
    let mut ub = DMatrix::zeros(n2b * n3, l);
    for k in 0..n3 {
        for i in 0..n2b {
            for j in 0..l {
                ub[(k * n2b + i, j)] = b.get(i, j, k);
            }
        }
    }
    let prod = bcirc(a) * ub;
    let mut out = Cube::zeros(n1, l, n3);
    for k in 0..n3 {
        for i in 0..n1 {
            for j in 0..l {
                out.set(i, j, k, prod[(k * n1 + i, j)]);
            }
        }
    }
    out
}

#[test]
fn criterion_1_algebra_oracle_equivalence() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..100 {
        let n1 = rng.gen_range(1..=6);
        let n2 = rng.gen_range(1..=6);
        let l = rng.gen_range(1..=6);
        let n3 = rng.gen_range(1..=4);
        let a = random_cube(n1, n2, n3, &mut rng);
        let b = random_cube(n2, l, n3, &mut rng);
        let fast = tprod(&a, &b).unwrap();
        let slow = tprod_bcirc(&a, &b);
        let denom = slow.frob_norm().max(1e-300);
        assert!(
            fast.sub(&slow).unwrap().frob_norm() / denom <= 1e-10,
            "tprod deviates from bcirc oracle at dims {:?} x {:?}",
            a.dims(),
            b.dims()
        );
        // block diagonalization: product slices multiply slice-wise
        let af = dft_tubes(&a);
        let bf = dft_tubes(&b);
        let cf = dft_tubes(&fast);
        for k in 0..n3 {
            let direct = af.slice_matrix(k) * bf.slice_matrix(k);
            let diff = (cf.slice_matrix(k) - &direct).norm();
            assert!(diff <= 1e-10 * (1.0 + direct.norm()));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "criterion 1 took {elapsed:.1}s");
    println!("criterion 1 PASS: tprod matches bcirc oracle on 100 instances ({elapsed:.2}s)");
}

#[test]
fn criterion_2_tsvd_validity() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for _ in 0..50 {
        let n1 = rng.gen_range(1..=10);
        let n2 = rng.gen_range(1..=8);
        let n3 = rng.gen_range(1..=6);
        let x = random_cube(n1, n2, n3, &mut rng);
        let f = tsvd(&x).unwrap();
        let orth_u = rel_err(
            &tprod(&ttranspose(&f.u), &f.u).unwrap(),
            &identity_tensor(n1, n3),
        );
        let orth_v = rel_err(
            &tprod(&ttranspose(&f.v), &f.v).unwrap(),
            &identity_tensor(n2, n3),
        );
        assert!(orth_u <= 1e-8 && orth_v <= 1e-8, "orthogonality failed");
        let sf = dft_tubes(&f.s);
        let scale = 1.0 + x.frob_norm();
        for k in 0..n3 {
            let m = sf.slice_matrix(k);
            let mut prev = f64::INFINITY;
            for i in 0..n1 {
                for j in 0..n2 {
                    if i != j {
                        assert!(m[(i, j)].norm() <= 1e-8 * scale, "not f-diagonal");
                    }
                }
                if i < n1.min(n2) {
                    assert!(m[(i, i)].im.abs() <= 1e-8 * scale);
                    assert!(m[(i, i)].re >= -1e-8 * scale && m[(i, i)].re <= prev + 1e-8 * scale);
                    prev = m[(i, i)].re;
                }
            }
        }
        let rec = tprod(&tprod(&f.u, &f.s).unwrap(), &ttranspose(&f.v)).unwrap();
        if x.frob_norm() > 0.0 {
            assert!(rel_err(&rec, &x) <= 1e-8, "reconstruction failed");
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "criterion 2 took {elapsed:.1}s");
    println!("criterion 2 PASS: t-SVD factors valid on 50 cubes ({elapsed:.2}s)");
}

#[test]
fn criterion_3_brp_exact_recovery() {
    let start = std::time::Instant::now();
    for seed in 0..20u64 {
        let r = (seed % 5 + 1) as usize;
        let x = planted(64, 64, 16, r, 300 + seed);
        let (l, eff) = low_tubal_rank_approx(&x, r, RngSeed(9000 + seed), 0.0).unwrap();
        assert_eq!(eff, r);
        let err = rel_err(&l, &x);
        assert!(err <= 1e-7, "seed {seed} rank {r}: err {err:.3e}");
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "criterion 3 took {elapsed:.1}s");
    println!("criterion 3 PASS: exact recovery on 20 seeds, r in 1..=5 ({elapsed:.2}s)");
}

#[test]
fn criterion_4_rank_shrink_path() {
    let x = planted(32, 32, 8, 2, 404);
    let (l, eff) = low_tubal_rank_approx(&x, 6, RngSeed(405), 0.0).unwrap();
    assert_eq!(eff, 2, "expected effective rank 2, got {eff}");
    let err = rel_err(&l, &x);
    assert!(err <= 1e-7, "err {err:.3e}");
    println!("criterion 4 PASS: requested rank 6 shrank to 2, err {err:.1e}");
}

#[test]
fn criterion_5_s_step_brute_force_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let shapes = [(1usize, 1usize, 1usize), (4, 1, 1), (2, 3, 1), (2, 2, 3), (3, 2, 2), (12, 1, 1)];
    let mut checked = 0;
    for &(n1, n2, n3) in &shapes {
        for _ in 0..40 {
            let x = random_cube(n1, n2, n3, &mut rng);
            let n = x.len();
            for k in 0..=3usize.min(n) {
                let s = hard_threshold(&x, k);
                let achieved: f64 = x
                    .data()
                    .iter()
                    .zip(s.data())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                // exhaustive minimum over all supports of size <= k
                let mut best = f64::INFINITY;
                for mask in 0u32..(1 << n) {
                    if mask.count_ones() as usize > k {
                        continue;
                    }
                    let resid: f64 = x
                        .data()
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) == 0)
                        .map(|(_, v)| v * v)
                        .sum();
                    best = best.min(resid);
                }
                assert!(
                    (achieved - best).abs() <= 1e-12 * (1.0 + best),
                    "hard_threshold suboptimal: {achieved} vs {best} (k = {k})"
                );
                assert!(s.data().iter().filter(|&&v| v != 0.0).count() <= k);
                checked += 1;
            }
        }
    }
    println!("criterion 5 PASS: thresholding matched exhaustive enumeration in {checked} cases");
}

/// Planted clean cube with entries in (0, 1] and exact tubal rank r:
/// positive factors keep the t-product positive, and a single global scale
/// preserves the rank.
fn planted_unit_interval(n1: usize, n2: usize, n3: usize, r: usize, seed: u64) -> Cube {
    let mut rng = RngSeed(seed).rng();
    let f1: Vec<f64> = (0..n1 * r * n3).map(|_| rng.gen::<f64>()).collect();
    let f2: Vec<f64> = (0..r * n2 * n3).map(|_| rng.gen::<f64>()).collect();
    let g1 = Cube::from_vec(n1, r, n3, f1);
    let g2 = Cube::from_vec(r, n2, n3, f2);
    let p = tprod(&g1, &g2).unwrap();
    let max = p.data().iter().cloned().fold(0.0, f64::max);
    p.scale(1.0 / max)
}

#[test]
fn criterion_6_planted_end_to_end_recovery() {
    let start = std::time::Instant::now();
    let mut psnr_gains = Vec::new();
    let mut sam_ratios = Vec::new();
    for seed in 0..5u64 {
        let l0 = planted_unit_interval(64, 64, 20, 3, 600 + seed);
        let (with_impulse, mask) = add_impulse(&l0, 0.20, RngSeed(700 + seed));
        let k = mask.data().iter().filter(|&&v| v != 0.0).count();
        let noisy = add_gaussian(&with_impulse, 0.04, RngSeed(800 + seed));
        let cfg = DenoiseConfig {
            r: 3,
            k,
            eps: 1e-6,
            max_iter: 100,
            seed: RngSeed(900 + seed),
            rank_tol: 0.0,
        };
        let res = denoise(&noisy, &cfg).unwrap();
        let mpsnr = |test: &Cube| {
            let mut acc = 0.0;
            for band in 0..20 {
                acc += tubal::psnr_band(l0.slice(band), test.slice(band), 1.0).unwrap();
            }
            acc / 20.0
        };
        psnr_gains.push(mpsnr(&res.l) - mpsnr(&noisy));
        sam_ratios.push(sam(&l0, &res.l).unwrap() / sam(&l0, &noisy).unwrap());
    }
    psnr_gains.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sam_ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let gain = psnr_gains[2];
    let ratio = sam_ratios[2];
    let elapsed = start.elapsed().as_secs_f64();
    assert!(gain >= 15.0, "median MPSNR gain {gain:.2} dB < 15 dB");
    assert!(ratio <= 0.5, "median SAM ratio {ratio:.3} > 0.5");
    assert!(elapsed < 60.0, "criterion 6 took {elapsed:.1}s");
    println!(
        "criterion 6 PASS: median MPSNR gain {gain:.1} dB, median SAM ratio {ratio:.3} ({elapsed:.1}s)"
    );
}

#[test]
fn criterion_7_speed_trend() {
    let start = std::time::Instant::now();
    let records = run_bench(&[64, 128, 256], 5, 16, 3, RngSeed(707)).unwrap();
    let time_of = |method: &str, n: usize| {
        records
            .iter()
            .find(|r| r.method == method && r.n1 == n)
            .unwrap()
            .wall_seconds
    };
    let ratios: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&n| time_of("tbrp", n) / time_of("tsvd_truncation", n))
        .collect();
    assert!(
        ratios[0] > ratios[1] && ratios[1] > ratios[2],
        "ratio not strictly decreasing: {ratios:?}"
    );
    assert!(
        ratios[2] < 1.0,
        "t-BRP not faster than truncation at n = 256: ratio {:.3}",
        ratios[2]
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "criterion 7 took {elapsed:.1}s");
    println!(
        "criterion 7 PASS: time ratios {:.3} > {:.3} > {:.3} ({elapsed:.1}s)",
        ratios[0], ratios[1], ratios[2]
    );
}

#[test]
fn criterion_8_format_golden_tests() {
    let dir = tempfile::tempdir().unwrap();

    // bitwise round-trip at dtype 2
    let x = gaussian_cube(5, 3, 4, RngSeed(808));
    let path = dir.path().join("rt.hsc");
    write_cube(&path, &x, Dtype::F64).unwrap();
    assert_eq!(read_cube(&path).unwrap(), x);

    // hand-written golden header: 3 x 2 x 1 cube of f64 zeros
    let golden = dir.path().join("golden.hsc");
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"HSC1");
    bytes.extend_from_slice(&3u32.to_le_bytes());
    bytes.extend_from_slice(&2u32.to_le_bytes());
    bytes.extend_from_slice(&1u32.to_le_bytes());
    bytes.push(2);
    bytes.extend_from_slice(&[0, 0, 0]);
    bytes.extend_from_slice(&[0u8; 6 * 8]);
    std::fs::write(&golden, &bytes).unwrap();
    let cube = read_cube(&golden).unwrap();
    assert_eq!(cube.dims(), (3, 2, 1));
    assert!(cube.data().iter().all(|&v| v == 0.0));

    // each error class from a crafted corrupt file
    let bad_magic = dir.path().join("magic.hsc");
    let mut b = bytes.clone();
    b[0] = b'Z';
    std::fs::write(&bad_magic, &b).unwrap();
    assert!(matches!(read_cube(&bad_magic), Err(IoError::BadMagic)));

    let truncated = dir.path().join("trunc.hsc");
    std::fs::write(&truncated, &bytes[..bytes.len() - 3]).unwrap();
    assert!(matches!(
        read_cube(&truncated),
        Err(IoError::TruncatedFile { .. })
    ));

    let bad_dtype = dir.path().join("dtype.hsc");
    let mut b = bytes.clone();
    b[16] = 7;
    std::fs::write(&bad_dtype, &b).unwrap();
    assert!(matches!(read_cube(&bad_dtype), Err(IoError::BadDtype(7))));

    println!("criterion 8 PASS: HSC1 golden layout, round-trip, and error classes verified");
}

#[test]
fn criterion_9_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.hsc");
    let x = planted_unit_interval(24, 24, 6, 2, 909);
    let noisy = add_gaussian(&x, 0.02, RngSeed(910));
    write_cube(&input, &noisy, Dtype::F64).unwrap();

    let run_once = |tag: &str| {
        let out_l = dir.path().join(format!("l-{tag}.hsc"));
        let out_s = dir.path().join(format!("s-{tag}.hsc"));
        let report = dir.path().join(format!("report-{tag}.json"));
        let args: Vec<String> = [
            "denoise",
            "--input",
            input.to_str().unwrap(),
            "--rank",
            "2",
            "--card",
            "30",
            "--eps",
            "1e-6",
            "--seed",
            "42",
            "--output-l",
            out_l.to_str().unwrap(),
            "--output-s",
            out_s.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        assert_eq!(tubal::cli::run(&args), 0);
        (
            std::fs::read(&out_l).unwrap(),
            std::fs::read(&out_s).unwrap(),
            std::fs::read_to_string(&report).unwrap(),
        )
    };
    let (l1, s1, r1) = run_once("a");
    let (l2, s2, r2) = run_once("b");
    assert_eq!(l1, l2, "clean-estimate cubes differ between runs");
    assert_eq!(s1, s2, "sparse-estimate cubes differ between runs");
    let v1: serde_json::Value = serde_json::from_str(&r1).unwrap();
    let v2: serde_json::Value = serde_json::from_str(&r2).unwrap();
    assert_eq!(v1["residual_history"], v2["residual_history"]);
    assert_eq!(v1["iterations"], v2["iterations"]);
    println!("criterion 9 PASS: repeated runs byte-identical (timing aside)");
}
