//! Reference-based quality metrics for denoising results: band-wise PSNR
//! and SSIM (averaged into MPSNR / MSSIM) and the spectral angle mapper.

use serde::Serialize;
use thiserror::Error;

use crate::cube::Cube;

/// Finite stand-in for the infinite PSNR of an exact match.
pub const PSNR_CAP_DB: f64 = 100.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("band smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window: {rows}x{cols}")]
    TooSmall { rows: usize, cols: usize },
    #[error("every pixel has a zero-norm spectrum on one side")]
    AllPixelsDegenerate,
}

#[derive(Debug, Clone, Serialize)]
pub struct QualityReport {
    pub mpsnr_db: f64,
    pub mssim: f64,
    pub sam_degrees: f64,
    pub per_band_psnr: Vec<f64>,
    pub per_band_ssim: Vec<f64>,
}

impl QualityReport {
    /// One CSV row: `mpsnr_db,mssim,sam_degrees`.
    pub fn csv_row(&self) -> String {
        format!("{},{},{}", self.mpsnr_db, self.mssim, self.sam_degrees)
    }

    pub const CSV_HEADER: &'static str = "mpsnr_db,mssim,sam_degrees";
}

/// PSNR of one band: `10 log10(peak^2 / MSE)`, capped at 100 dB when the
/// bands match exactly.
pub fn psnr_band(reference: &[f64], test: &[f64], peak: f64) -> Result<f64, MetricsError> {
    if reference.len() != test.len() {
        return Err(MetricsError::DimMismatch(format!(
            "{} vs {} samples",
            reference.len(),
            test.len()
        )));
    }
    let mse = reference
        .iter()
        .zip(test)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / reference.len() as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (peak * peak / mse).log10()).min(PSNR_CAP_DB))
}

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as isize;
    let mut w = Vec::with_capacity(SSIM_WINDOW * SSIM_WINDOW);
    for i in -half..=half {
        for j in -half..=half {
            w.push((-((i * i + j * j) as f64) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp());
        }
    }
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Mean local SSIM of one band over all positions where the 11x11 Gaussian
/// window fits, with K1 = 0.01, K2 = 0.03 and dynamic range 1.
pub fn ssim_band(
    reference: &[f64],
    test: &[f64],
    rows: usize,
    cols: usize,
) -> Result<f64, MetricsError> {
    if reference.len() != rows * cols || test.len() != rows * cols {
        return Err(MetricsError::DimMismatch(format!(
            "expected {rows}x{cols} bands, got {} and {} samples",
            reference.len(),
            test.len()
        )));
    }
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return Err(MetricsError::TooSmall { rows, cols });
    }
    let w = gaussian_window();
    let c1 = (SSIM_K1 * 1.0f64).powi(2);
    let c2 = (SSIM_K2 * 1.0f64).powi(2);
    let mut acc = 0.0;
    let mut count = 0usize;
    for r0 in 0..=rows - SSIM_WINDOW {
        for c0 in 0..=cols - SSIM_WINDOW {
            let (mut mu_x, mut mu_y) = (0.0, 0.0);
            for wi in 0..SSIM_WINDOW {
                for wj in 0..SSIM_WINDOW {
                    let idx = (r0 + wi) * cols + c0 + wj;
                    let wt = w[wi * SSIM_WINDOW + wj];
                    mu_x += wt * reference[idx];
                    mu_y += wt * test[idx];
                }
            }
            let (mut var_x, mut var_y, mut cov) = (0.0, 0.0, 0.0);
            for wi in 0..SSIM_WINDOW {
                for wj in 0..SSIM_WINDOW {
                    let idx = (r0 + wi) * cols + c0 + wj;
                    let wt = w[wi * SSIM_WINDOW + wj];
                    let dx = reference[idx] - mu_x;
                    let dy = test[idx] - mu_y;
                    var_x += wt * dx * dx;
                    var_y += wt * dy * dy;
                    cov += wt * dx * dy;
                }
            }
            let num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2);
            let den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2);
            acc += num / den;
            count += 1;
        }
    }
    Ok(acc / count as f64)
}

/// Spectral angle mapper: mean angle in degrees between per-pixel spectra.
/// Pixels with a zero-norm spectrum on either side are skipped.
pub fn sam(reference: &Cube, test: &Cube) -> Result<f64, MetricsError> {
    if reference.dims() != test.dims() {
        return Err(MetricsError::DimMismatch(format!(
            "{:?} vs {:?}",
            reference.dims(),
            test.dims()
        )));
    }
    let (n1, n2, n3) = reference.dims();
    let mut acc = 0.0;
    let mut count = 0usize;
    for i in 0..n1 {
        for j in 0..n2 {
            let (mut na, mut nb) = (0.0, 0.0);
            for k in 0..n3 {
                let a = reference.get(i, j, k);
                let b = test.get(i, j, k);
                na += a * a;
                nb += b * b;
            }
            if na == 0.0 || nb == 0.0 {
                continue;
            }
            let (na, nb) = (na.sqrt(), nb.sqrt());
            // 2 atan2(|a nb - b na|, |a nb + b na|) is acos of the clamped
            // cosine, but stays exact at 0 and pi
            let (mut diff, mut sum) = (0.0, 0.0);
            for k in 0..n3 {
                let a = reference.get(i, j, k) * nb;
                let b = test.get(i, j, k) * na;
                diff += (a - b) * (a - b);
                sum += (a + b) * (a + b);
            }
            acc += 2.0 * diff.sqrt().atan2(sum.sqrt());
            count += 1;
        }
    }
    if count == 0 {
        return Err(MetricsError::AllPixelsDegenerate);
    }
    Ok((acc / count as f64).to_degrees())
}

/// Assemble MPSNR / MSSIM / SAM plus per-band detail, with peak 1.0.
pub fn evaluate(reference: &Cube, test: &Cube) -> Result<QualityReport, MetricsError> {
    if reference.dims() != test.dims() {
        return Err(MetricsError::DimMismatch(format!(
            "{:?} vs {:?}",
            reference.dims(),
            test.dims()
        )));
    }
    let (n1, n2, n3) = reference.dims();
    let mut per_band_psnr = Vec::with_capacity(n3);
    let mut per_band_ssim = Vec::with_capacity(n3);
    for k in 0..n3 {
        per_band_psnr.push(psnr_band(reference.slice(k), test.slice(k), 1.0)?);
        per_band_ssim.push(ssim_band(reference.slice(k), test.slice(k), n1, n2)?);
    }
    let mpsnr_db = per_band_psnr.iter().sum::<f64>() / n3 as f64;
    let mssim = per_band_ssim.iter().sum::<f64>() / n3 as f64;
    Ok(QualityReport {
        mpsnr_db,
        mssim,
        sam_degrees: sam(reference, test)?,
        per_band_psnr,
        per_band_ssim,
    })
}
