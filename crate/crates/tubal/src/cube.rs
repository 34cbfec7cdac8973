//! Dense 3-way tensors and the t-product algebra.
//!
//! A [`Cube`] stores a real `n1 x n2 x n3` tensor in frontal-slice-major
//! order (slice index slowest, row-major within each slice). All t-product
//! arithmetic is carried out slice-wise in the Fourier domain on the
//! companion [`SpectralCube`], obtained by a DFT along every tube
//! `(i, j, :)`.

use nalgebra::{Complex, DMatrix};
use rustfft::FftPlanner;
use thiserror::Error;

pub type C64 = Complex<f64>;

#[derive(Debug, Error)]
pub enum CubeError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("conjugate symmetry violated: max imaginary residue {residue:.3e} exceeds {bound:.3e}")]
    SymmetryViolation { residue: f64, bound: f64 },
    #[error("Fourier slice {slice} is numerically singular (cond >= {cond:.3e})")]
    SingularSlice { slice: usize, cond: f64 },
}

/// Dense real 3-way tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Cube {
    dims: (usize, usize, usize),
    data: Vec<f64>,
}

/// Complex 3-way tensor holding the tube-wise DFT of a [`Cube`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCube {
    dims: (usize, usize, usize),
    data: Vec<C64>,
}

impl Cube {
    pub fn zeros(n1: usize, n2: usize, n3: usize) -> Self {
        assert!(n1 >= 1 && n2 >= 1 && n3 >= 1, "cube dims must be >= 1");
        Cube {
            dims: (n1, n2, n3),
            data: vec![0.0; n1 * n2 * n3],
        }
    }

    pub fn from_vec(n1: usize, n2: usize, n3: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n1 * n2 * n3, "data length must be n1*n2*n3");
        Cube {
            dims: (n1, n2, n3),
            data,
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let (n1, n2, _) = self.dims;
        debug_assert!(i < n1 && j < n2 && k < self.dims.2);
        k * n1 * n2 + i * n2 + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let idx = self.index(i, j, k);
        self.data[idx] = v;
    }

    /// Contiguous view of frontal slice `k` (row-major `n1 x n2`).
    pub fn slice(&self, k: usize) -> &[f64] {
        let (n1, n2, _) = self.dims;
        &self.data[k * n1 * n2..(k + 1) * n1 * n2]
    }

    pub fn slice_mut(&mut self, k: usize) -> &mut [f64] {
        let (n1, n2, _) = self.dims;
        &mut self.data[k * n1 * n2..(k + 1) * n1 * n2]
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Element-wise `self - other`.
    pub fn sub(&self, other: &Cube) -> Result<Cube, CubeError> {
        if self.dims != other.dims {
            return Err(CubeError::DimMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Cube {
            dims: self.dims,
            data,
        })
    }

    /// Element-wise `self + other`.
    pub fn add(&self, other: &Cube) -> Result<Cube, CubeError> {
        if self.dims != other.dims {
            return Err(CubeError::DimMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Cube {
            dims: self.dims,
            data,
        })
    }

    pub fn scale(&self, alpha: f64) -> Cube {
        Cube {
            dims: self.dims,
            data: self.data.iter().map(|v| v * alpha).collect(),
        }
    }
}

impl SpectralCube {
    pub fn zeros(n1: usize, n2: usize, n3: usize) -> Self {
        SpectralCube {
            dims: (n1, n2, n3),
            data: vec![C64::new(0.0, 0.0); n1 * n2 * n3],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let (n1, n2, _) = self.dims;
        k * n1 * n2 + i * n2 + j
    }

    pub fn slice(&self, k: usize) -> &[C64] {
        let (n1, n2, _) = self.dims;
        &self.data[k * n1 * n2..(k + 1) * n1 * n2]
    }

    /// Frontal slice `k` as a nalgebra matrix.
    pub fn slice_matrix(&self, k: usize) -> DMatrix<C64> {
        let (n1, n2, _) = self.dims;
        let s = self.slice(k);
        DMatrix::from_fn(n1, n2, |i, j| s[i * n2 + j])
    }

    pub fn set_slice_matrix(&mut self, k: usize, m: &DMatrix<C64>) {
        let (n1, n2, _) = self.dims;
        assert_eq!(m.nrows(), n1);
        assert_eq!(m.ncols(), n2);
        let base = k * n1 * n2;
        for i in 0..n1 {
            for j in 0..n2 {
                self.data[base + i * n2 + j] = m[(i, j)];
            }
        }
    }

    /// Mirror slice `k` into slice `n3 - k` as its conjugate. Used to fill
    /// the redundant half of a spectrum built from real data.
    pub fn mirror_conjugate(&mut self, k: usize) {
        let (n1, n2, n3) = self.dims;
        debug_assert!(k >= 1 && k < n3);
        let src = k * n1 * n2;
        let dst = (n3 - k) * n1 * n2;
        for off in 0..n1 * n2 {
            self.data[dst + off] = self.data[src + off].conj();
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Index of the last non-redundant Fourier slice for a real tensor:
/// slices `0..=half` determine the rest by conjugate symmetry.
#[inline]
pub fn half_spectrum(n3: usize) -> usize {
    n3 / 2
}

/// Forward DFT (unnormalized) along every tube.
pub fn dft_tubes(x: &Cube) -> SpectralCube {
    let (n1, n2, n3) = x.dims();
    let mut out = SpectralCube::zeros(n1, n2, n3);
    let fft = FftPlanner::new().plan_fft_forward(n3);
    let stride = n1 * n2;
    let mut buf = vec![C64::new(0.0, 0.0); n3];
    for t in 0..stride {
        for k in 0..n3 {
            buf[k] = C64::new(x.data()[k * stride + t], 0.0);
        }
        fft.process(&mut buf);
        for k in 0..n3 {
            out.data_mut()[k * stride + t] = buf[k];
        }
    }
    out
}

/// Inverse DFT (with `1/n3` normalization) along every tube, discarding the
/// imaginary residue after checking it stays below `1e-6 * max |xf|`.
pub fn idft_tubes(xf: &SpectralCube) -> Result<Cube, CubeError> {
    let (n1, n2, n3) = xf.dims();
    let mut out = Cube::zeros(n1, n2, n3);
    let fft = FftPlanner::new().plan_fft_inverse(n3);
    let stride = n1 * n2;
    let mut buf = vec![C64::new(0.0, 0.0); n3];
    let scale = 1.0 / n3 as f64;
    let mut max_imag = 0.0f64;
    for t in 0..stride {
        for k in 0..n3 {
            buf[k] = xf.data()[k * stride + t];
        }
        fft.process(&mut buf);
        for k in 0..n3 {
            let v = buf[k] * scale;
            max_imag = max_imag.max(v.im.abs());
            out.data_mut()[k * stride + t] = v.re;
        }
    }
    let bound = 1e-6 * xf.max_abs();
    if max_imag > bound && max_imag > 0.0 {
        return Err(CubeError::SymmetryViolation {
            residue: max_imag,
            bound,
        });
    }
    Ok(out)
}

/// Identity tensor: first frontal slice is `I_n`, the rest are zero.
pub fn identity_tensor(n: usize, n3: usize) -> Cube {
    let mut e = Cube::zeros(n, n, n3);
    for i in 0..n {
        e.set(i, i, 0, 1.0);
    }
    e
}

/// t-product `a * b`, computed as per-slice complex matrix products in the
/// Fourier domain. Only slices `0..=n3/2` are multiplied; the rest follow
/// by conjugate symmetry of real inputs.
pub fn tprod(a: &Cube, b: &Cube) -> Result<Cube, CubeError> {
    let (n1, n2a, n3a) = a.dims();
    let (n2b, l, n3b) = b.dims();
    if n2a != n2b || n3a != n3b {
        return Err(CubeError::DimMismatch(format!(
            "tprod: {:?} * {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let n3 = n3a;
    let af = dft_tubes(a);
    let bf = dft_tubes(b);
    let mut cf = SpectralCube::zeros(n1, l, n3);
    let half = half_spectrum(n3);
    for k in 0..=half {
        let prod = af.slice_matrix(k) * bf.slice_matrix(k);
        cf.set_slice_matrix(k, &prod);
    }
    for k in half + 1..n3 {
        cf.mirror_conjugate(n3 - k);
    }
    idft_tubes(&cf)
}

/// t-algebra conjugate transpose: slice 1 transposed, slices `2..n3`
/// transposed and reversed in order.
pub fn ttranspose(a: &Cube) -> Cube {
    let (n1, n2, n3) = a.dims();
    let mut out = Cube::zeros(n2, n1, n3);
    for k in 0..n3 {
        let src = if k == 0 { 0 } else { n3 - k };
        for i in 0..n1 {
            for j in 0..n2 {
                out.set(j, i, k, a.get(i, j, src));
            }
        }
    }
    out
}

/// Inverse of a square tensor via per-slice inversion in the Fourier domain.
pub fn tinverse(a: &Cube) -> Result<Cube, CubeError> {
    let (n1, n2, n3) = a.dims();
    if n1 != n2 {
        return Err(CubeError::DimMismatch(format!(
            "tinverse requires a square tensor, got {:?}",
            a.dims()
        )));
    }
    let af = dft_tubes(a);
    let mut invf = SpectralCube::zeros(n1, n1, n3);
    let cond_limit = 1.0 / (100.0 * f64::EPSILON);
    let half = half_spectrum(n3);
    for k in 0..=half {
        let m = af.slice_matrix(k);
        let svd = m.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if cond > cond_limit {
            return Err(CubeError::SingularSlice { slice: k, cond });
        }
        let inv = m
            .lu()
            .try_inverse()
            .ok_or(CubeError::SingularSlice { slice: k, cond })?;
        invf.set_slice_matrix(k, &inv);
    }
    for k in half + 1..n3 {
        invf.mirror_conjugate(n3 - k);
    }
    idft_tubes(&invf)
}
