//! Measurement synthesis `y_ℓ = bin(|P_z(d_ℓ ⊙ u)|²) + ω`.

mod masks;
mod noise;

pub use masks::{
    generate_mask_set, generate_shifted_with_offsets, raster_offsets, MaskKind, MaskParams, MaskSet,
};
pub use noise::{add_gaussian_noise, add_gaussian_noise_clamped, add_poisson_noise};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{bin_intensity, hadamard_modulate, ComplexField, IntensityImage};
use crate::propagation::{OpticalConfig, Propagator};

/// Noise applied to a [`MeasurementStack`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    None,
    Poisson { photon_level: f64, seed: u64 },
    Gaussian { snr_db: f64, seed: u64, clamped: bool },
}

impl Noise {
    pub fn kind_str(&self) -> &'static str {
        match self {
            Noise::None => "none",
            Noise::Poisson { .. } => "poisson",
            Noise::Gaussian { .. } => "gaussian",
        }
    }
}

/// One low-resolution intensity frame per mask.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementStack {
    frames: Vec<IntensityImage>,
    noise: Noise,
}

impl MeasurementStack {
    pub fn new(frames: Vec<IntensityImage>, noise: Noise) -> Result<Self> {
        if let Some(first) = frames.first() {
            for f in &frames[1..] {
                first.check_same_grid(f)?;
            }
        }
        Ok(Self { frames, noise })
    }

    pub fn frames(&self) -> &[IntensityImage] {
        &self.frames
    }

    pub fn noise(&self) -> Noise {
        self.noise
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Sum of all frame samples.
    pub fn total(&self) -> f64 {
        self.frames.iter().map(|f| f.sum()).sum()
    }

    pub fn truncated(&self, n: usize) -> Result<MeasurementStack> {
        if n > self.frames.len() {
            return Err(Error::invalid(format!(
                "cannot truncate {} frames to {n}",
                self.frames.len()
            )));
        }
        Ok(MeasurementStack {
            frames: self.frames[..n].to_vec(),
            noise: self.noise,
        })
    }
}

/// Noiseless low-resolution frames of `u` under every mask in `masks`.
pub fn simulate_measurements(u: &ComplexField, masks: &MaskSet, optics: &OpticalConfig) -> Result<MeasurementStack> {
    if masks.is_empty() {
        return Err(Error::invalid("mask set is empty"));
    }
    u.check_same_grid(&masks.masks()[0])?;
    optics.geometry.lr_dims(u.width(), u.height())?;
    let prop = Propagator::for_field(u, optics)?;
    let frames = masks
        .masks()
        .par_iter()
        .map(|d| {
            let w = prop.forward(&hadamard_modulate(u, d)?)?;
            bin_intensity(&w.intensity(), &optics.geometry)
        })
        .collect::<Result<Vec<_>>>()?;
    MeasurementStack::new(frames, Noise::None)
}
