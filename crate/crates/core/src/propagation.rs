//! Angular-spectrum free-space propagation.
//!
//! The field spectrum is multiplied by the band-limited transfer function
//!
//! ```text
//! H(fx, fy; z) = exp(i·2π/λ·z·sqrt(1 − λ²(fx² + fy²)))   if fx² + fy² ≤ 1/λ²
//!              = 0                                       otherwise
//! ```
//!
//! and transformed back. Boundaries are periodic unless zero padding is
//! enabled, in which case the field is embedded in a grid twice as large in
//! each direction and the center window is cropped back out.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft2::Fft2;
use crate::field::{ComplexField, SamplingGeometry};

/// Optical parameters of a simulated or real lensless setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalConfig {
    /// Illumination wavelength in micrometers.
    pub wavelength: f64,
    /// Propagation distance in micrometers; negative values back-propagate.
    pub distance: f64,
    pub geometry: SamplingGeometry,
    /// Zero-pad by a factor of two to suppress wrap-around.
    pub padded: bool,
}

impl OpticalConfig {
    pub fn new(wavelength: f64, distance: f64, geometry: SamplingGeometry) -> Result<Self> {
        let cfg = Self {
            wavelength,
            distance,
            geometry,
            padded: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_padding(mut self, padded: bool) -> Self {
        self.padded = padded;
        self
    }

    pub fn with_distance(mut self, distance: f64) -> Self {
        self.distance = distance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::invalid(format!(
                "wavelength must be positive, got {}",
                self.wavelength
            )));
        }
        if !self.distance.is_finite() {
            return Err(Error::invalid("propagation distance must be finite"));
        }
        Ok(())
    }
}

/// Angular-spectrum transfer function at spatial frequency `(fx, fy)` in
/// cycles/µm. Unit modulus inside the band (boundary included), exactly zero
/// outside.
pub fn transfer_function(fx: f64, fy: f64, z: f64, wavelength: f64) -> Complex64 {
    let arg = wavelength * wavelength * (fx * fx + fy * fy);
    if arg > 1.0 {
        return Complex64::new(0.0, 0.0);
    }
    // kz·√(1−a) = kz − kz·a/(1+√(1−a)). The first term is common to every
    // frequency, so its rounding error is a global phase; reducing it mod 2π
    // keeps the frequency-dependent part accurate at large kz. Reducing |kz|
    // keeps H(−z) the exact conjugate of H(z).
    let kz = 2.0 * PI / wavelength * z;
    let q = arg / (1.0 + (1.0 - arg).sqrt());
    let carrier = (kz.abs() % (2.0 * PI)).copysign(kz);
    Complex64::from_polar(1.0, carrier - kz * q)
}

/// DFT sample frequencies for `n` samples at `pitch`: `k/(n·pitch)` for
/// `k < n/2`, `(k − n)/(n·pitch)` otherwise.
pub fn frequency_grid(n: usize, pitch: f64) -> Vec<f64> {
    let span = n as f64 * pitch;
    (0..n)
        .map(|k| {
            if 2 * k < n {
                k as f64 / span
            } else {
                (k as f64 - n as f64) / span
            }
        })
        .collect()
}

/// Transfer-function grid in DFT ordering for a `width × height` grid.
pub fn transfer_grid(width: usize, height: usize, pitch: f64, z: f64, wavelength: f64) -> Vec<Complex64> {
    let fx = frequency_grid(width, pitch);
    let fy = frequency_grid(height, pitch);
    let mut h = Vec::with_capacity(width * height);
    for &y in &fy {
        for &x in &fx {
            h.push(transfer_function(x, y, z, wavelength));
        }
    }
    h
}

/// A planned propagator for one grid shape, pitch, wavelength and distance.
///
/// [`Propagator::forward`] propagates by `+z` and [`Propagator::backward`] by
/// `−z`, using the conjugate transfer function.
#[derive(Debug, Clone)]
pub struct Propagator {
    width: usize,
    height: usize,
    pitch: f64,
    padded: bool,
    fft: Fft2,
    transfer: Vec<Complex64>,
}

impl Propagator {
    pub fn new(width: usize, height: usize, pitch: f64, optics: &OpticalConfig) -> Result<Self> {
        optics.validate()?;
        if width < 2 || height < 2 {
            return Err(Error::shape(format!(
                "propagation needs at least a 2x2 grid, got {width}x{height}"
            )));
        }
        if !(pitch > 0.0) {
            return Err(Error::invalid("pitch must be positive"));
        }
        let (cw, ch) = if optics.padded {
            (2 * width, 2 * height)
        } else {
            (width, height)
        };
        Ok(Self {
            width,
            height,
            pitch,
            padded: optics.padded,
            fft: Fft2::new(cw, ch),
            transfer: transfer_grid(cw, ch, pitch, optics.distance, optics.wavelength),
        })
    }

    /// Propagator matching `field`'s grid.
    pub fn for_field(field: &ComplexField, optics: &OpticalConfig) -> Result<Self> {
        Self::new(field.width(), field.height(), field.pitch(), optics)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn forward(&self, field: &ComplexField) -> Result<ComplexField> {
        self.run(field, false)
    }

    pub fn backward(&self, field: &ComplexField) -> Result<ComplexField> {
        self.run(field, true)
    }

    fn run(&self, field: &ComplexField, conjugate: bool) -> Result<ComplexField> {
        self.check(field)?;
        let data = if self.padded {
            let mut buf = embed(field.data(), self.width, self.height);
            self.apply(&mut buf, conjugate);
            crop(&buf, self.width, self.height)
        } else {
            let mut buf = field.data().to_vec();
            self.apply(&mut buf, conjugate);
            buf
        };
        Ok(ComplexField::from_parts(self.width, self.height, self.pitch, data))
    }

    /// Applies the transfer function on the computational grid in place.
    fn apply(&self, buf: &mut [Complex64], conjugate: bool) {
        self.fft.forward(buf);
        if conjugate {
            for (b, h) in buf.iter_mut().zip(&self.transfer) {
                *b *= h.conj();
            }
        } else {
            for (b, h) in buf.iter_mut().zip(&self.transfer) {
                *b *= h;
            }
        }
        self.fft.inverse(buf);
    }

    fn check(&self, field: &ComplexField) -> Result<()> {
        if field.width() != self.width || field.height() != self.height {
            return Err(Error::shape(format!(
                "propagator planned for {}x{}, got {}x{}",
                self.width,
                self.height,
                field.width(),
                field.height()
            )));
        }
        if !crate::field::same_pitch(field.pitch(), self.pitch) {
            return Err(Error::shape(format!(
                "propagator planned for pitch {}, got {}",
                self.pitch,
                field.pitch()
            )));
        }
        Ok(())
    }
}

/// Propagates `field` by `optics.distance` using its own pitch.
pub fn propagate(field: &ComplexField, optics: &OpticalConfig) -> Result<ComplexField> {
    Propagator::for_field(field, optics)?.forward(field)
}

/// Propagates on the zero-padded computational grid and returns the whole
/// padded result (twice the size in each direction) rather than cropping.
///
/// Nothing is discarded, so this is the form in which energy bookkeeping and
/// exact round trips hold even when diffraction carries light outside the
/// original window.
pub fn propagate_padded(field: &ComplexField, optics: &OpticalConfig) -> Result<ComplexField> {
    let padded = pad_field(field);
    propagate(&padded, &optics.with_padding(false))
}

/// Embeds `field` at the center of a zero grid of twice its size.
pub fn pad_field(field: &ComplexField) -> ComplexField {
    let (w, h) = (field.width(), field.height());
    ComplexField::from_parts(2 * w, 2 * h, field.pitch(), embed(field.data(), w, h))
}

/// Inverse of [`pad_field`]: extracts the center `width/2 × height/2` window.
pub fn crop_padded(field: &ComplexField) -> Result<ComplexField> {
    let (w2, h2) = (field.width(), field.height());
    if w2 % 2 != 0 || h2 % 2 != 0 {
        return Err(Error::shape(format!("padded grid {w2}x{h2} has odd size")));
    }
    let (w, h) = (w2 / 2, h2 / 2);
    Ok(ComplexField::from_parts(w, h, field.pitch(), crop(field.data(), w, h)))
}

fn embed(data: &[Complex64], w: usize, h: usize) -> Vec<Complex64> {
    let (cw, ch) = (2 * w, 2 * h);
    let (ox, oy) = (w / 2, h / 2);
    let mut buf = vec![Complex64::new(0.0, 0.0); cw * ch];
    for r in 0..h {
        buf[(r + oy) * cw + ox..(r + oy) * cw + ox + w].copy_from_slice(&data[r * w..(r + 1) * w]);
    }
    buf
}

fn crop(buf: &[Complex64], w: usize, h: usize) -> Vec<Complex64> {
    let cw = 2 * w;
    let (ox, oy) = (w / 2, h / 2);
    let mut out = Vec::with_capacity(w * h);
    for r in 0..h {
        out.extend_from_slice(&buf[(r + oy) * cw + ox..(r + oy) * cw + ox + w]);
    }
    out
}
