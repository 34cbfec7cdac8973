//! Synthetic corruption of clean cubes: band-wise normalization, Gaussian
//! noise, salt-and-pepper impulses, and the column-structured stripe /
//! deadline artifacts typical of pushbroom sensors. Every generator is
//! deterministic in its seed and reports a mask of the entries it touched.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::brp::RngSeed;
use crate::cube::Cube;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("noise spec exceeds cube dims: {0}")]
    SpecExceedsDims(String),
    #[error("invalid noise spec: {0}")]
    BadSpec(String),
}

/// Full corruption recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub gaussian_sigma: f64,
    /// Fraction of entries hit by salt-and-pepper impulses.
    pub impulse_fraction: f64,
    pub stripe_bands: usize,
    /// Stripe width range in lines, inclusive.
    pub stripe_width_range: (usize, usize),
    /// Per-stripe constant offset magnitude range; sign is random.
    pub stripe_amplitude_range: (f64, f64),
    pub deadline_bands: usize,
    pub deadline_width_range: (usize, usize),
    pub seed: RngSeed,
}

impl NoiseSpec {
    /// Gaussian sigma 0.04 plus 20% salt-and-pepper, no stripes.
    pub fn case1(seed: RngSeed) -> NoiseSpec {
        NoiseSpec {
            gaussian_sigma: 0.04,
            impulse_fraction: 0.20,
            stripe_bands: 0,
            stripe_width_range: (1, 3),
            stripe_amplitude_range: (0.2, 0.5),
            deadline_bands: 0,
            deadline_width_range: (1, 3),
            seed,
        }
    }

    /// Gaussian sigma 0.02 plus 20% salt-and-pepper, with stripes and
    /// deadlines on 10 bands each, widths one to three lines.
    pub fn case2(seed: RngSeed) -> NoiseSpec {
        NoiseSpec {
            gaussian_sigma: 0.02,
            impulse_fraction: 0.20,
            stripe_bands: 10,
            stripe_width_range: (1, 3),
            stripe_amplitude_range: (0.2, 0.5),
            deadline_bands: 10,
            deadline_width_range: (1, 3),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(0.0..=1.0).contains(&self.impulse_fraction) {
            return Err(NoiseError::BadSpec("impulse_fraction must be in [0,1]".into()));
        }
        if self.gaussian_sigma < 0.0 {
            return Err(NoiseError::BadSpec("gaussian_sigma must be >= 0".into()));
        }
        for (name, (lo, hi)) in [
            ("stripe_width_range", self.stripe_width_range),
            ("deadline_width_range", self.deadline_width_range),
        ] {
            if lo < 1 || hi < lo {
                return Err(NoiseError::BadSpec(format!("{name} must satisfy 1 <= min <= max")));
            }
        }
        Ok(())
    }
}

/// Map each band affinely onto [0, 1]; constant bands map to all zeros.
pub fn normalize_bandwise(x: &Cube) -> Cube {
    let (_, _, n3) = x.dims();
    let mut out = x.clone();
    for k in 0..n3 {
        let band = out.slice_mut(k);
        let min = band.iter().copied().fold(f64::INFINITY, f64::min);
        let max = band.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max > min {
            let scale = 1.0 / (max - min);
            for v in band.iter_mut() {
                *v = (*v - min) * scale;
            }
        } else {
            band.fill(0.0);
        }
    }
    out
}

/// Add i.i.d. zero-mean Gaussian noise with the given standard deviation.
/// No clipping is applied.
pub fn add_gaussian(x: &Cube, sigma: f64, seed: RngSeed) -> Cube {
    let mut rng = seed.rng();
    let mut out = x.clone();
    for v in out.data_mut() {
        *v += sigma * rng.sample::<f64, _>(StandardNormal);
    }
    out
}

/// Salt-and-pepper corruption of exactly `round(fraction * len)` entries
/// chosen uniformly without replacement, each set to 0 or 1 with equal
/// probability. Returns the corrupted cube and a mask of hit entries.
pub fn add_impulse(x: &Cube, fraction: f64, seed: RngSeed) -> (Cube, Cube) {
    let (n1, n2, n3) = x.dims();
    let mut out = x.clone();
    let mut mask = Cube::zeros(n1, n2, n3);
    let count = (fraction * x.len() as f64).round() as usize;
    let mut rng = seed.rng();
    for idx in sample(&mut rng, x.len(), count.min(x.len())) {
        out.data_mut()[idx] = if rng.gen::<bool>() { 1.0 } else { 0.0 };
        mask.data_mut()[idx] = 1.0;
    }
    (out, mask)
}

/// Add constant-offset stripes and zeroed deadline columns to randomly
/// selected bands. Returns the corrupted cube and a mask of affected
/// entries.
pub fn add_stripes_deadlines(x: &Cube, spec: &NoiseSpec) -> Result<(Cube, Cube), NoiseError> {
    spec.validate()?;
    let (n1, n2, n3) = x.dims();
    if spec.stripe_bands > n3 || spec.deadline_bands > n3 {
        return Err(NoiseError::SpecExceedsDims(format!(
            "{} stripe / {} deadline bands requested, cube has {} bands",
            spec.stripe_bands, spec.deadline_bands, n3
        )));
    }
    if spec.stripe_bands > 0 && spec.stripe_width_range.1 > n2
        || spec.deadline_bands > 0 && spec.deadline_width_range.1 > n2
    {
        return Err(NoiseError::SpecExceedsDims(format!(
            "column widths exceed {} columns",
            n2
        )));
    }
    let mut out = x.clone();
    let mut mask = Cube::zeros(n1, n2, n3);
    let mut rng = spec.seed.derive(0x57e1).rng();

    let mut bands: Vec<usize> = (0..n3).collect();
    bands.shuffle(&mut rng);
    let stripe_bands: Vec<usize> = bands.iter().copied().take(spec.stripe_bands).collect();
    bands.shuffle(&mut rng);
    let deadline_bands: Vec<usize> = bands.iter().copied().take(spec.deadline_bands).collect();

    for &k in &stripe_bands {
        let groups = rng.gen_range(1..=3usize);
        for _ in 0..groups {
            let w = rng.gen_range(spec.stripe_width_range.0..=spec.stripe_width_range.1);
            let start = rng.gen_range(0..=n2 - w);
            let (lo, hi) = spec.stripe_amplitude_range;
            let mag = rng.gen_range(lo..=hi);
            let offset = if rng.gen::<bool>() { mag } else { -mag };
            for j in start..start + w {
                for i in 0..n1 {
                    let idx = out.index(i, j, k);
                    out.data_mut()[idx] += offset;
                    mask.data_mut()[idx] = 1.0;
                }
            }
        }
    }
    for &k in &deadline_bands {
        let groups = rng.gen_range(1..=3usize);
        for _ in 0..groups {
            let w = rng.gen_range(spec.deadline_width_range.0..=spec.deadline_width_range.1);
            let start = rng.gen_range(0..=n2 - w);
            for j in start..start + w {
                for i in 0..n1 {
                    let idx = out.index(i, j, k);
                    out.data_mut()[idx] = 0.0;
                    mask.data_mut()[idx] = 1.0;
                }
            }
        }
    }
    Ok((out, mask))
}

/// Full recipe: normalize, then impulses and stripes/deadlines, then
/// Gaussian noise. The returned mask covers impulse and stripe/deadline
/// entries (Gaussian noise touches everything).
pub fn apply_spec(x: &Cube, spec: &NoiseSpec) -> Result<(Cube, Cube), NoiseError> {
    spec.validate()?;
    let clean = normalize_bandwise(x);
    let (with_impulse, impulse_mask) =
        add_impulse(&clean, spec.impulse_fraction, spec.seed.derive(0x1354));
    let (with_structure, structure_mask) = add_stripes_deadlines(&with_impulse, spec)?;
    let noisy = add_gaussian(&with_structure, spec.gaussian_sigma, spec.seed.derive(0x6a55));
    let mut mask = impulse_mask;
    for (m, s) in mask.data_mut().iter_mut().zip(structure_mask.data()) {
        if *s != 0.0 {
            *m = 1.0;
        }
    }
    Ok((noisy, mask))
}
