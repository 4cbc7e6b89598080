//! Sampled complex fields and real-valued images on regular grids.
//!
//! All grids are row-major with `(row, col)` indexing; `width` counts columns
//! and `height` counts rows. Pitches are in micrometers per pixel.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance used when comparing pixel pitches for equality.
const PITCH_RTOL: f64 = 1e-12;

pub(crate) fn same_pitch(a: f64, b: f64) -> bool {
    (a - b).abs() <= PITCH_RTOL * a.abs().max(b.abs())
}

/// A 2-D grid of complex samples (amplitude dimensionless, phase in radians).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    width: usize,
    height: usize,
    pitch: f64,
    data: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(width: usize, height: usize, pitch: f64, data: Vec<Complex64>) -> Result<Self> {
        check_grid(width, height, pitch, data.len())?;
        if data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("complex field contains non-finite samples"));
        }
        Ok(Self {
            width,
            height,
            pitch,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize, pitch: f64) -> Result<Self> {
        Self::filled(width, height, pitch, Complex64::new(0.0, 0.0))
    }

    pub fn filled(width: usize, height: usize, pitch: f64, value: Complex64) -> Result<Self> {
        Self::new(width, height, pitch, vec![value; width * height])
    }

    /// Builds a field from separate amplitude and phase images of equal shape.
    pub fn from_polar(amplitude: &RealImage, phase: &RealImage) -> Result<Self> {
        amplitude.check_same_grid(phase)?;
        let data = amplitude
            .data()
            .iter()
            .zip(phase.data())
            .map(|(&a, &p)| Complex64::from_polar(a, p))
            .collect();
        Self::new(amplitude.width(), amplitude.height(), amplitude.pitch(), data)
    }

    /// Internal constructor for results of arithmetic on already valid data.
    pub(crate) fn from_parts(width: usize, height: usize, pitch: f64, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            pitch,
            data,
        }
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

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.width + col]
    }

    /// `|u|` per sample.
    pub fn amplitude(&self) -> RealImage {
        self.map_real(|c| c.norm())
    }

    /// `arg(u)` per sample, wrapped to `(-π, π]`.
    pub fn phase(&self) -> RealImage {
        self.map_real(|c| c.arg())
    }

    /// `|u|²` per sample.
    pub fn intensity(&self) -> RealImage {
        self.map_real(|c| c.norm_sqr())
    }

    /// Total energy `Σ|u|²`.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    fn map_real(&self, f: impl Fn(&Complex64) -> f64) -> RealImage {
        RealImage::from_parts(
            self.width,
            self.height,
            self.pitch,
            self.data.iter().map(f).collect(),
        )
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> ComplexField {
        ComplexField::from_parts(
            self.width,
            self.height,
            self.pitch,
            self.data.iter().map(|&c| f(c)).collect(),
        )
    }

    pub fn conj(&self) -> ComplexField {
        self.map(|c| c.conj())
    }

    pub fn scale(&self, s: Complex64) -> ComplexField {
        self.map(|c| c * s)
    }

    pub fn check_same_grid(&self, other: &ComplexField) -> Result<()> {
        check_same(
            (self.width, self.height, self.pitch),
            (other.width, other.height, other.pitch),
        )
    }

    /// L2 norm of the difference, `‖a − b‖₂`.
    pub fn distance(&self, other: &ComplexField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn max_abs_diff(&self, other: &ComplexField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// A 2-D grid of finite real samples.
///
/// Measurement frames are intensity images and are nonnegative unless
/// additive Gaussian noise was injected without clamping, so nonnegativity
/// is checked by the callers that need it rather than by the type.
#[derive(Debug, Clone, PartialEq)]
pub struct RealImage {
    width: usize,
    height: usize,
    pitch: f64,
    data: Vec<f64>,
}

/// Detector-plane or HR-plane intensity image.
pub type IntensityImage = RealImage;

impl RealImage {
    pub fn new(width: usize, height: usize, pitch: f64, data: Vec<f64>) -> Result<Self> {
        check_grid(width, height, pitch, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("image contains non-finite samples"));
        }
        Ok(Self {
            width,
            height,
            pitch,
            data,
        })
    }

    /// Like [`RealImage::new`] but additionally rejects negative samples.
    pub fn new_intensity(width: usize, height: usize, pitch: f64, data: Vec<f64>) -> Result<Self> {
        let img = Self::new(width, height, pitch, data)?;
        if !img.is_nonnegative() {
            return Err(Error::invalid("intensity image contains negative samples"));
        }
        Ok(img)
    }

    pub fn filled(width: usize, height: usize, pitch: f64, value: f64) -> Result<Self> {
        Self::new(width, height, pitch, vec![value; width * height])
    }

    pub(crate) fn from_parts(width: usize, height: usize, pitch: f64, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            pitch,
            data,
        }
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

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealImage {
        RealImage::from_parts(
            self.width,
            self.height,
            self.pitch,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Same grid, new samples. Fails if the lengths disagree.
    pub fn with_data(&self, data: Vec<f64>) -> Result<RealImage> {
        RealImage::new(self.width, self.height, self.pitch, data)
    }

    pub fn check_same_grid(&self, other: &RealImage) -> Result<()> {
        check_same(
            (self.width, self.height, self.pitch),
            (other.width, other.height, other.pitch),
        )
    }

    /// Rotates by 90° counter-clockwise.
    pub fn rot90(&self) -> RealImage {
        let (w, h) = (self.width, self.height);
        let mut out = vec![0.0; w * h];
        // new dims: width' = h, height' = w; out[r'][c'] = in[c'][w-1-r']
        for r in 0..w {
            for c in 0..h {
                out[r * h + c] = self.data[c * w + (w - 1 - r)];
            }
        }
        RealImage::from_parts(h, w, self.pitch, out)
    }

    /// Mirrors left-right.
    pub fn flip_horizontal(&self) -> RealImage {
        let w = self.width;
        let data = self
            .data
            .chunks(w)
            .flat_map(|row| row.iter().rev().copied())
            .collect();
        RealImage::from_parts(w, self.height, self.pitch, data)
    }
}

fn check_grid(width: usize, height: usize, pitch: f64, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::shape(format!("empty grid {width}x{height}")));
    }
    if len != width * height {
        return Err(Error::shape(format!(
            "data length {len} does not match {width}x{height}"
        )));
    }
    if !(pitch > 0.0 && pitch.is_finite()) {
        return Err(Error::invalid(format!("pitch must be positive, got {pitch}")));
    }
    Ok(())
}

fn check_same(a: (usize, usize, f64), b: (usize, usize, f64)) -> Result<()> {
    if a.0 != b.0 || a.1 != b.1 {
        return Err(Error::shape(format!(
            "grid {}x{} does not match {}x{}",
            a.0, a.1, b.0, b.1
        )));
    }
    if !same_pitch(a.2, b.2) {
        return Err(Error::shape(format!("pitch {} does not match {}", a.2, b.2)));
    }
    Ok(())
}

/// Relation between the high-resolution object grid and the detector grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingGeometry {
    theta: usize,
    hr_pitch: f64,
}

impl SamplingGeometry {
    pub fn new(theta: usize, hr_pitch: f64) -> Result<Self> {
        if theta == 0 {
            return Err(Error::invalid("undersampling factor must be >= 1"));
        }
        if !(hr_pitch > 0.0 && hr_pitch.is_finite()) {
            return Err(Error::invalid(format!(
                "HR pitch must be positive, got {hr_pitch}"
            )));
        }
        Ok(Self { theta, hr_pitch })
    }

    /// Geometry for a detector of pitch `lr_pitch`; the HR pitch is `lr_pitch / θ`.
    pub fn from_detector(theta: usize, lr_pitch: f64) -> Result<Self> {
        if theta == 0 {
            return Err(Error::invalid("undersampling factor must be >= 1"));
        }
        Self::new(theta, lr_pitch / theta as f64)
    }

    pub fn theta(&self) -> usize {
        self.theta
    }

    pub fn hr_pitch(&self) -> f64 {
        self.hr_pitch
    }

    pub fn lr_pitch(&self) -> f64 {
        self.theta as f64 * self.hr_pitch
    }

    /// Detector-grid dimensions for an HR grid, or a shape error when the HR
    /// dimensions are not multiples of θ.
    pub fn lr_dims(&self, hr_width: usize, hr_height: usize) -> Result<(usize, usize)> {
        let t = self.theta;
        if !hr_width.is_multiple_of(t) || !hr_height.is_multiple_of(t) {
            return Err(Error::shape(format!(
                "HR grid {hr_width}x{hr_height} is not a multiple of theta={t}"
            )));
        }
        Ok((hr_width / t, hr_height / t))
    }
}

/// Elementwise product `field ⊙ mask`.
pub fn hadamard_modulate(field: &ComplexField, mask: &ComplexField) -> Result<ComplexField> {
    field.check_same_grid(mask)?;
    let data = field
        .data
        .iter()
        .zip(&mask.data)
        .map(|(a, b)| a * b)
        .collect();
    Ok(ComplexField::from_parts(field.width, field.height, field.pitch, data))
}

/// Sums every θ×θ patch of `hr` into one detector pixel.
pub fn bin_intensity(hr: &RealImage, geom: &SamplingGeometry) -> Result<RealImage> {
    let t = geom.theta();
    let (lw, lh) = geom.lr_dims(hr.width, hr.height)?;
    if t == 1 {
        return Ok(hr.clone());
    }
    let mut out = vec![0.0; lw * lh];
    for r in 0..hr.height {
        let lr_row = &mut out[(r / t) * lw..(r / t + 1) * lw];
        let hr_row = &hr.data[r * hr.width..(r + 1) * hr.width];
        for (lc, acc) in lr_row.iter_mut().enumerate() {
            *acc += hr_row[lc * t..(lc + 1) * t].iter().sum::<f64>();
        }
    }
    Ok(RealImage::from_parts(lw, lh, hr.pitch * t as f64, out))
}

/// Replicates every detector pixel over its θ×θ patch. With `normalize`, each
/// copy is divided by θ² so that binning the result returns `lr`.
pub fn upsample_replicate(lr: &RealImage, geom: &SamplingGeometry, normalize: bool) -> RealImage {
    let t = geom.theta();
    if t == 1 {
        return lr.clone();
    }
    let (hw, hh) = (lr.width * t, lr.height * t);
    let scale = if normalize { 1.0 / (t * t) as f64 } else { 1.0 };
    let mut out = Vec::with_capacity(hw * hh);
    for r in 0..hh {
        let lr_row = &lr.data[(r / t) * lr.width..(r / t + 1) * lr.width];
        for &v in lr_row {
            out.extend(std::iter::repeat_n(v * scale, t));
        }
    }
    RealImage::from_parts(hw, hh, lr.pitch / t as f64, out)
}
