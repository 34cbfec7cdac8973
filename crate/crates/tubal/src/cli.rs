//! Command-line frontend: synth -> denoise -> eval -> bench workflows over
//! HSC1 cube files. Exit codes partition the failure classes: 2 for bad
//! flags or specs, 3 for I/O, 4 for solver errors.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::brp::{low_tubal_rank_approx, RngSeed};
use crate::cube::Cube;
use crate::denoise::{denoise, DenoiseConfig, DenoiseError};
use crate::factor::truncated_tsvd;
use crate::io::{
    self, noise_spec_from_text, noise_spec_to_text, read_cube, write_cube, Dtype, Endianness,
    RawLayout,
};
use crate::metrics::{evaluate, QualityReport};
use crate::noise::{apply_spec, NoiseSpec};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_SOLVER: u8 = 4;

#[derive(Parser)]
#[command(name = "tubal", version, about = "low-tubal-rank hyperspectral cube denoising")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover a low-tubal-rank clean cube and a sparse noise cube.
    Denoise(DenoiseArgs),
    /// Corrupt a clean cube with a synthetic noise recipe.
    Synth(SynthArgs),
    /// Compare a test cube against a reference cube (MPSNR/MSSIM/SAM).
    Eval(EvalArgs),
    /// Time the randomized solver against exact truncation over sizes.
    Bench(BenchArgs),
    /// Convert a headerless raw dump into the HSC1 cube format.
    Import(ImportArgs),
}

#[derive(Args)]
struct DenoiseArgs {
    /// Input cube (HSC1).
    #[arg(long)]
    input: PathBuf,
    /// Tubal rank budget.
    #[arg(long)]
    rank: usize,
    /// Sparsity budget: an entry count, or a fraction like `0.2f`.
    #[arg(long)]
    card: String,
    /// Relative squared-residual stopping threshold.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Numerical-rank tolerance (0 = auto).
    #[arg(long, default_value_t = 0.0)]
    rank_tol: f64,
    /// Output path for the clean estimate.
    #[arg(long)]
    output_l: PathBuf,
    /// Output path for the sparse estimate.
    #[arg(long)]
    output_s: Option<PathBuf>,
    /// Output path for the JSON run report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Clean input cube (HSC1); it is normalized band-wise first.
    #[arg(long)]
    input: PathBuf,
    /// Preset recipe (1 or 2).
    #[arg(long)]
    case: Option<u8>,
    /// Noise spec config file (`key = value` lines).
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    /// Output path for the corrupted cube.
    #[arg(long)]
    output: PathBuf,
    /// Output path for the corruption mask cube.
    #[arg(long)]
    output_mask: Option<PathBuf>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    impulse_fraction: Option<f64>,
    #[arg(long)]
    stripe_bands: Option<usize>,
    #[arg(long)]
    deadline_bands: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Write the full QualityReport as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Append a `mpsnr_db,mssim,sam_degrees` CSV row.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated spatial sizes, e.g. `32,64,128`.
    #[arg(long)]
    sizes: String,
    #[arg(long, default_value_t = 5)]
    rank: usize,
    /// Tube length (number of bands).
    #[arg(long, default_value_t = 16)]
    tube: usize,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: PathBuf,
}

#[derive(Args)]
struct ImportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    #[arg(long)]
    n3: usize,
    /// `bsq` (band-sequential) or `bip` (band-interleaved-by-pixel).
    #[arg(long, default_value = "bsq")]
    layout: String,
    /// `f32` or `f64`.
    #[arg(long, default_value = "f32")]
    dtype: String,
    /// `little` or `big`.
    #[arg(long, default_value = "little")]
    endian: String,
    #[arg(long)]
    output: PathBuf,
}

/// One row of the solver-vs-truncation timing comparison.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRecord {
    pub method: String,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub r: usize,
    pub wall_seconds: f64,
    pub rel_error: f64,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(stage: &str, msg: impl std::fmt::Display) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: format!("{stage}: {msg}"),
        }
    }

    fn io(stage: &str, msg: impl std::fmt::Display) -> Failure {
        Failure {
            code: EXIT_IO,
            message: format!("{stage}: {msg}"),
        }
    }

    fn solver(stage: &str, msg: impl std::fmt::Display) -> Failure {
        Failure {
            code: EXIT_SOLVER,
            message: format!("{stage}: {msg}"),
        }
    }
}

pub fn run(args: &[String]) -> u8 {
    let full = std::iter::once("tubal".to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(full) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Denoise(a) => cmd_denoise(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Import(a) => cmd_import(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

/// `--card` accepts a plain entry count or a fraction suffixed with `f`.
fn parse_card(card: &str, total_entries: usize) -> Result<usize, Failure> {
    if let Some(frac) = card.strip_suffix('f') {
        let f: f64 = frac
            .parse()
            .map_err(|_| Failure::usage("flags", format!("bad --card fraction {card:?}")))?;
        if !(0.0..=1.0).contains(&f) {
            return Err(Failure::usage("flags", "--card fraction must be in [0,1]"));
        }
        Ok((f * total_entries as f64).round() as usize)
    } else {
        card.parse()
            .map_err(|_| Failure::usage("flags", format!("bad --card value {card:?}")))
    }
}

fn load_cube(stage: &str, path: &PathBuf) -> Result<Cube, Failure> {
    read_cube(path).map_err(|e| Failure::io(stage, format!("{}: {e}", path.display())))
}

fn store_cube(stage: &str, path: &PathBuf, x: &Cube) -> Result<(), Failure> {
    write_cube(path, x, Dtype::F64)
        .map_err(|e| Failure::io(stage, format!("{}: {e}", path.display())))
}

fn cmd_denoise(a: DenoiseArgs) -> Result<(), Failure> {
    let x = load_cube("read input", &a.input)?;
    let k = parse_card(&a.card, x.len())?;
    let cfg = DenoiseConfig {
        r: a.rank,
        k,
        eps: a.eps,
        max_iter: a.max_iter,
        seed: RngSeed(a.seed),
        rank_tol: a.rank_tol,
    };
    let result = denoise(&x, &cfg).map_err(|e| match e {
        DenoiseError::BadConfig(_) => Failure::usage("config", e),
        _ => Failure::solver("denoise", e),
    })?;
    store_cube("write clean estimate", &a.output_l, &result.l)?;
    if let Some(path) = &a.output_s {
        store_cube("write sparse estimate", path, &result.s)?;
    }
    if let Some(path) = &a.report {
        let report = io::DenoiseReport::new(&result, &cfg);
        io::write_json(path, &report)
            .map_err(|e| Failure::io("write report", format!("{}: {e}", path.display())))?;
    }
    println!(
        "denoised {:?} in {} iterations, final residual {:.3e}",
        x.dims(),
        result.iterations,
        result.residual_history.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn resolve_spec(a: &SynthArgs) -> Result<NoiseSpec, Failure> {
    let seed = RngSeed(a.seed);
    let mut spec = match (a.case, &a.spec) {
        (Some(_), Some(_)) => {
            return Err(Failure::usage("flags", "--case and --spec are mutually exclusive"))
        }
        (Some(1), None) => NoiseSpec::case1(seed),
        (Some(2), None) => NoiseSpec::case2(seed),
        (Some(other), None) => {
            return Err(Failure::usage("flags", format!("unknown --case {other}")))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::io("read spec", format!("{}: {e}", path.display())))?;
            let mut s = noise_spec_from_text(&text)
                .map_err(|e| Failure::usage("spec", e))?;
            s.seed = seed;
            s
        }
        (None, None) => NoiseSpec::case1(seed),
    };
    if let Some(v) = a.sigma {
        spec.gaussian_sigma = v;
    }
    if let Some(v) = a.impulse_fraction {
        spec.impulse_fraction = v;
    }
    if let Some(v) = a.stripe_bands {
        spec.stripe_bands = v;
    }
    if let Some(v) = a.deadline_bands {
        spec.deadline_bands = v;
    }
    Ok(spec)
}

fn cmd_synth(a: SynthArgs) -> Result<(), Failure> {
    let x = load_cube("read input", &a.input)?;
    let spec = resolve_spec(&a)?;
    let (noisy, mask) = apply_spec(&x, &spec).map_err(|e| Failure::usage("noise spec", e))?;
    store_cube("write corrupted cube", &a.output, &noisy)?;
    if let Some(path) = &a.output_mask {
        store_cube("write mask cube", path, &mask)?;
    }
    print!("{}", noise_spec_to_text(&spec));
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<(), Failure> {
    let reference = load_cube("read reference", &a.reference)?;
    let test = load_cube("read test", &a.test)?;
    let report = evaluate(&reference, &test).map_err(|e| Failure::usage("evaluate", e))?;
    println!(
        "mpsnr_db = {:.4}\nmssim = {:.6}\nsam_degrees = {:.6}",
        report.mpsnr_db, report.mssim, report.sam_degrees
    );
    if let Some(path) = &a.json {
        io::write_json(path, &report)
            .map_err(|e| Failure::io("write json", format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &a.csv {
        let text = format!("{}\n{}\n", QualityReport::CSV_HEADER, report.csv_row());
        io::write_atomic(path, text.as_bytes())
            .map_err(|e| Failure::io("write csv", format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// Planted benchmark instance: a tubal-rank-r cube plus mild Gaussian noise.
fn bench_instance(n: usize, n3: usize, r: usize, seed: RngSeed) -> Cube {
    let g1 = crate::brp::gaussian_cube(n, r, n3, seed);
    let g2 = crate::brp::gaussian_cube(r, n, n3, seed.derive(1));
    let clean = crate::cube::tprod(&g1, &g2).expect("conformable dims");
    let sigma = 0.01 * clean.frob_norm() / (clean.len() as f64).sqrt();
    crate::noise::add_gaussian(&clean, sigma, seed.derive(2))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

/// Time exact truncation and the randomized solver on planted instances.
/// Returns one record per (method, size), medians over `trials`.
pub fn run_bench(
    sizes: &[usize],
    rank: usize,
    tube: usize,
    trials: usize,
    seed: RngSeed,
) -> Result<Vec<BenchRecord>, String> {
    if trials < 1 {
        return Err("trials must be >= 1".into());
    }
    let mut records = Vec::new();
    for &n in sizes {
        let x = bench_instance(n, tube, rank, seed.derive(n as u64));
        let norm = x.frob_norm();
        let mut tsvd_times = Vec::new();
        let mut tsvd_err = 0.0;
        let mut brp_times = Vec::new();
        let mut brp_err = 0.0;
        for trial in 0..trials {
            let t0 = Instant::now();
            let l = truncated_tsvd(&x, rank).map_err(|e| e.to_string())?;
            tsvd_times.push(t0.elapsed().as_secs_f64());
            tsvd_err = x.sub(&l).map_err(|e| e.to_string())?.frob_norm() / norm;

            let t0 = Instant::now();
            let (l, _) =
                low_tubal_rank_approx(&x, rank, seed.derive(1000 + trial as u64), 0.0)
                    .map_err(|e| e.to_string())?;
            brp_times.push(t0.elapsed().as_secs_f64());
            brp_err = x.sub(&l).map_err(|e| e.to_string())?.frob_norm() / norm;
        }
        records.push(BenchRecord {
            method: "tsvd_truncation".into(),
            n1: n,
            n2: n,
            n3: tube,
            r: rank,
            wall_seconds: median(tsvd_times),
            rel_error: tsvd_err,
        });
        records.push(BenchRecord {
            method: "tbrp".into(),
            n1: n,
            n2: n,
            n3: tube,
            r: rank,
            wall_seconds: median(brp_times),
            rel_error: brp_err,
        });
    }
    Ok(records)
}

pub fn bench_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from("method,n1,n2,n3,r,wall_seconds,rel_error\n");
    for rec in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            rec.method, rec.n1, rec.n2, rec.n3, rec.r, rec.wall_seconds, rec.rel_error
        ));
    }
    out
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    let sizes: Result<Vec<usize>, _> = a.sizes.split(',').map(|s| s.trim().parse()).collect();
    let sizes = sizes.map_err(|_| Failure::usage("flags", format!("bad --sizes {:?}", a.sizes)))?;
    if sizes.is_empty() {
        return Err(Failure::usage("flags", "--sizes must list at least one size"));
    }
    let records = run_bench(&sizes, a.rank, a.tube, a.trials, RngSeed(a.seed))
        .map_err(|e| Failure::solver("bench", e))?;
    let csv = bench_csv(&records);
    io::write_atomic(&a.csv, csv.as_bytes())
        .map_err(|e| Failure::io("write csv", format!("{}: {e}", a.csv.display())))?;
    print!("{csv}");
    Ok(())
}

fn cmd_import(a: ImportArgs) -> Result<(), Failure> {
    let layout = RawLayout::parse(&a.layout).map_err(|e| Failure::usage("flags", e))?;
    let dtype = match a.dtype.as_str() {
        "f32" => Dtype::F32,
        "f64" => Dtype::F64,
        other => return Err(Failure::usage("flags", format!("bad --dtype {other:?}"))),
    };
    let endian = match a.endian.as_str() {
        "little" => Endianness::Little,
        "big" => Endianness::Big,
        other => return Err(Failure::usage("flags", format!("bad --endian {other:?}"))),
    };
    if a.n1 == 0 || a.n2 == 0 || a.n3 == 0 {
        return Err(Failure::usage("flags", "dims must be >= 1"));
    }
    let cube = io::import_raw(&a.input, a.n1, a.n2, a.n3, layout, dtype, endian)
        .map_err(|e| Failure::io("import", format!("{}: {e}", a.input.display())))?;
    store_cube("write cube", &a.output, &cube)?;
    println!("imported {:?} from {}", cube.dims(), a.input.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn card_parsing() {
        assert_eq!(parse_card("100", 500).unwrap(), 100);
        assert_eq!(parse_card("0.2f", 500).unwrap(), 100);
        assert_eq!(parse_card("1f", 500).unwrap(), 500);
        assert!(parse_card("abc", 500).is_err());
        assert!(parse_card("1.5f", 500).is_err());
    }

    #[test]
    fn missing_required_flag_is_usage_error() {
        // no --rank
        let code = run(&argv("denoise --input x.hsc --card 10 --output-l y.hsc"));
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(run(&argv("frobnicate")), EXIT_USAGE);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(&argv("--help")), EXIT_OK);
    }

    #[test]
    fn missing_input_file_is_io_error() {
        let code = run(&argv(
            "denoise --input /nonexistent.hsc --rank 2 --card 10 --output-l /tmp/out.hsc",
        ));
        assert_eq!(code, EXIT_IO);
    }

    #[test]
    fn bench_csv_format() {
        let rec = BenchRecord {
            method: "tbrp".into(),
            n1: 8,
            n2: 8,
            n3: 4,
            r: 2,
            wall_seconds: 0.5,
            rel_error: 0.1,
        };
        let csv = bench_csv(&[rec]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "method,n1,n2,n3,r,wall_seconds,rel_error");
        assert_eq!(lines.next().unwrap(), "tbrp,8,8,4,2,0.5,0.1");
    }
}
