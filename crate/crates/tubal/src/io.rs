//! Persistent cube format (HSC1), raw import for external datasets,
//! `key = value` config parsing, and report emission.
//!
//! HSC1 layout: a 20-byte header — magic `HSC1`, `n1 n2 n3` as 32-bit
//! little-endian unsigned, one dtype byte (1 = f32 LE, 2 = f64 LE), three
//! reserved zero bytes — followed by the payload in frontal-slice-major,
//! row-major-within-slice order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::brp::RngSeed;
use crate::cube::Cube;
use crate::denoise::{DenoiseConfig, DenoiseResult};
use crate::noise::NoiseSpec;

pub const MAGIC: [u8; 4] = *b"HSC1";
pub const HEADER_LEN: usize = 20;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("bad magic: expected HSC1")]
    BadMagic,
    #[error("file truncated: expected {expected} bytes, found {found}")]
    TruncatedFile { expected: u64, found: u64 },
    #[error("bad dtype code {0} (expected 1 or 2)")]
    BadDtype(u8),
    #[error("payload size mismatch: expected {expected} bytes, found {found}")]
    SizeMismatch { expected: u64, found: u64 },
    #[error("unknown layout {0:?} (expected bsq or bip)")]
    BadLayout(String),
    #[error("bad header field: {0}")]
    BadHeader(String),
    #[error("config parse error at line {line}: {msg}")]
    BadConfig { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    pub fn code(self) -> u8 {
        match self {
            Dtype::F32 => 1,
            Dtype::F64 => 2,
        }
    }

    pub fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    pub fn from_code(code: u8) -> Result<Self, IoError> {
        match code {
            1 => Ok(Dtype::F32),
            2 => Ok(Dtype::F64),
            other => Err(IoError::BadDtype(other)),
        }
    }
}

/// Raw payload ordering for [`import_raw`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawLayout {
    /// Band-sequential: band slowest, then row, then column.
    BandSequential,
    /// Band-interleaved-by-pixel: row, column, then band fastest.
    BandInterleavedByPixel,
}

impl RawLayout {
    pub fn parse(s: &str) -> Result<Self, IoError> {
        match s.to_ascii_lowercase().as_str() {
            "bsq" | "band-sequential" => Ok(RawLayout::BandSequential),
            "bip" | "band-interleaved-by-pixel" => Ok(RawLayout::BandInterleavedByPixel),
            other => Err(IoError::BadLayout(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endianness {
    Little,
    Big,
}

/// Write `content` to a sibling temp file and rename it into place, so a
/// failure never leaves a partial file at `path`.
pub fn write_atomic(path: &Path, content: &[u8]) -> Result<(), IoError> {
    let tmp = path.with_extension("tmp-write");
    {
        let mut f = BufWriter::new(File::create(&tmp)?);
        f.write_all(content)?;
        f.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_cube(path: &Path, x: &Cube, dtype: Dtype) -> Result<(), IoError> {
    let (n1, n2, n3) = x.dims();
    let mut buf = Vec::with_capacity(HEADER_LEN + x.len() * dtype.size());
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&(n1 as u32).to_le_bytes());
    buf.extend_from_slice(&(n2 as u32).to_le_bytes());
    buf.extend_from_slice(&(n3 as u32).to_le_bytes());
    buf.push(dtype.code());
    buf.extend_from_slice(&[0u8; 3]);
    match dtype {
        Dtype::F32 => {
            for &v in x.data() {
                buf.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        Dtype::F64 => {
            for &v in x.data() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    write_atomic(path, &buf)
}

pub fn read_cube(path: &Path) -> Result<Cube, IoError> {
    let mut f = BufReader::new(File::open(path)?);
    let mut header = [0u8; HEADER_LEN];
    let mut read = 0usize;
    while read < HEADER_LEN {
        let n = f.read(&mut header[read..])?;
        if n == 0 {
            return Err(IoError::TruncatedFile {
                expected: HEADER_LEN as u64,
                found: read as u64,
            });
        }
        read += n;
    }
    if header[0..4] != MAGIC {
        return Err(IoError::BadMagic);
    }
    let n1 = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let n2 = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let n3 = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    if n1 == 0 || n2 == 0 || n3 == 0 {
        return Err(IoError::BadHeader("dims must be >= 1".into()));
    }
    let dtype = Dtype::from_code(header[16])?;
    let len = n1 * n2 * n3;
    let expected = (HEADER_LEN + len * dtype.size()) as u64;
    let mut payload = Vec::new();
    f.read_to_end(&mut payload)?;
    if payload.len() != len * dtype.size() {
        return Err(IoError::TruncatedFile {
            expected,
            found: (HEADER_LEN + payload.len()) as u64,
        });
    }
    let data = decode_scalars(&payload, dtype, Endianness::Little);
    Ok(Cube::from_vec(n1, n2, n3, data))
}

fn decode_scalars(bytes: &[u8], dtype: Dtype, endian: Endianness) -> Vec<f64> {
    match (dtype, endian) {
        (Dtype::F32, Endianness::Little) => bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect(),
        (Dtype::F32, Endianness::Big) => bytes
            .chunks_exact(4)
            .map(|c| f32::from_be_bytes(c.try_into().unwrap()) as f64)
            .collect(),
        (Dtype::F64, Endianness::Little) => bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
        (Dtype::F64, Endianness::Big) => bytes
            .chunks_exact(8)
            .map(|c| f64::from_be_bytes(c.try_into().unwrap()))
            .collect(),
    }
}

/// Import a headerless raw dump with the stated dims, layout, scalar type,
/// and byte order.
pub fn import_raw(
    path: &Path,
    n1: usize,
    n2: usize,
    n3: usize,
    layout: RawLayout,
    dtype: Dtype,
    endian: Endianness,
) -> Result<Cube, IoError> {
    let bytes = std::fs::read(path)?;
    let len = n1 * n2 * n3;
    let expected = (len * dtype.size()) as u64;
    if bytes.len() as u64 != expected {
        return Err(IoError::SizeMismatch {
            expected,
            found: bytes.len() as u64,
        });
    }
    let raw = decode_scalars(&bytes, dtype, endian);
    let mut cube = Cube::zeros(n1, n2, n3);
    match layout {
        RawLayout::BandSequential => cube.data_mut().copy_from_slice(&raw),
        RawLayout::BandInterleavedByPixel => {
            for i in 0..n1 {
                for j in 0..n2 {
                    for k in 0..n3 {
                        cube.set(i, j, k, raw[(i * n2 + j) * n3 + k]);
                    }
                }
            }
        }
    }
    Ok(cube)
}

/// Serialize a noise spec as `key = value` lines.
pub fn noise_spec_to_text(spec: &NoiseSpec) -> String {
    format!(
        "# noise spec\n\
         gaussian_sigma = {}\n\
         impulse_fraction = {}\n\
         stripe_bands = {}\n\
         stripe_width_min = {}\n\
         stripe_width_max = {}\n\
         stripe_amp_min = {}\n\
         stripe_amp_max = {}\n\
         deadline_bands = {}\n\
         deadline_width_min = {}\n\
         deadline_width_max = {}\n\
         seed = {}\n",
        spec.gaussian_sigma,
        spec.impulse_fraction,
        spec.stripe_bands,
        spec.stripe_width_range.0,
        spec.stripe_width_range.1,
        spec.stripe_amplitude_range.0,
        spec.stripe_amplitude_range.1,
        spec.deadline_bands,
        spec.deadline_width_range.0,
        spec.deadline_width_range.1,
        spec.seed.0,
    )
}

/// Parse the `key = value` form produced by [`noise_spec_to_text`].
/// Unknown keys are rejected; omitted keys keep the case-1 defaults.
pub fn noise_spec_from_text(text: &str) -> Result<NoiseSpec, IoError> {
    let mut spec = NoiseSpec::case1(RngSeed(0));
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| IoError::BadConfig {
            line: lineno + 1,
            msg: msg.to_string(),
        };
        let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
        let (key, value) = (key.trim(), value.trim());
        let parse_f = || value.parse::<f64>().map_err(|_| bad("expected a number"));
        let parse_u = || value.parse::<usize>().map_err(|_| bad("expected an integer"));
        match key {
            "gaussian_sigma" => spec.gaussian_sigma = parse_f()?,
            "impulse_fraction" => spec.impulse_fraction = parse_f()?,
            "stripe_bands" => spec.stripe_bands = parse_u()?,
            "stripe_width_min" => spec.stripe_width_range.0 = parse_u()?,
            "stripe_width_max" => spec.stripe_width_range.1 = parse_u()?,
            "stripe_amp_min" => spec.stripe_amplitude_range.0 = parse_f()?,
            "stripe_amp_max" => spec.stripe_amplitude_range.1 = parse_f()?,
            "deadline_bands" => spec.deadline_bands = parse_u()?,
            "deadline_width_min" => spec.deadline_width_range.0 = parse_u()?,
            "deadline_width_max" => spec.deadline_width_range.1 = parse_u()?,
            "seed" => spec.seed = RngSeed(value.parse::<u64>().map_err(|_| bad("expected a u64"))?),
            other => {
                return Err(IoError::BadConfig {
                    line: lineno + 1,
                    msg: format!("unknown key {other:?}"),
                })
            }
        }
    }
    Ok(spec)
}

/// JSON report for a denoise run.
#[derive(Debug, Serialize)]
pub struct DenoiseReport<'a> {
    pub iterations: usize,
    pub final_residual: f64,
    pub residual_history: &'a [f64],
    pub effective_rank_history: &'a [usize],
    pub elapsed_seconds: f64,
    pub config: &'a DenoiseConfig,
}

impl<'a> DenoiseReport<'a> {
    pub fn new(result: &'a DenoiseResult, config: &'a DenoiseConfig) -> Self {
        DenoiseReport {
            iterations: result.iterations,
            final_residual: result.residual_history.last().copied().unwrap_or(f64::NAN),
            residual_history: &result.residual_history,
            effective_rank_history: &result.effective_rank_history,
            elapsed_seconds: result.elapsed_seconds,
            config,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
