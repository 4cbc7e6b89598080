//! Unit-modulus phase masks.
//!
//! Two generators are provided. `IidPhase` draws an independent phase screen
//! per mask. `ShiftedDiffuser` draws a single master screen on an enlarged grid
//! and crops each mask at an integer offset, which models one thin diffuser
//! moved to a raster of lateral positions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::ComplexField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskKind {
    IidPhase,
    ShiftedDiffuser,
}

impl MaskKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MaskKind::IidPhase => "iid-phase",
            MaskKind::ShiftedDiffuser => "shifted-diffuser",
        }
    }
}

impl std::str::FromStr for MaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid-phase" => Ok(MaskKind::IidPhase),
            "shifted-diffuser" => Ok(MaskKind::ShiftedDiffuser),
            other => Err(Error::config(format!("unknown mask kind `{other}`"))),
        }
    }
}

/// Everything needed to regenerate a [`MaskSet`] bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskParams {
    pub kind: MaskKind,
    pub count: usize,
    pub width: usize,
    pub height: usize,
    /// HR pixel pitch in micrometers.
    pub pitch: f64,
    pub seed: u64,
    /// Box-smoothing width in HR pixels; 1 disables smoothing.
    pub feature_scale: usize,
    /// Phases are drawn from `Uniform[0, phase_excursion)`.
    pub phase_excursion: f64,
    /// Raster spacing between diffuser positions, in HR pixels.
    pub shift_step: usize,
}

impl MaskParams {
    pub fn new(kind: MaskKind, count: usize, width: usize, height: usize, pitch: f64, seed: u64) -> Self {
        Self {
            kind,
            count,
            width,
            height,
            pitch,
            seed,
            feature_scale: match kind {
                MaskKind::IidPhase => 1,
                MaskKind::ShiftedDiffuser => 3,
            },
            phase_excursion: 2.0 * PI,
            shift_step: 2,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::invalid("mask count must be >= 1"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::shape("mask grid must be non-empty"));
        }
        if !(self.pitch > 0.0) {
            return Err(Error::invalid("mask pitch must be positive"));
        }
        if self.feature_scale == 0 {
            return Err(Error::invalid("feature_scale must be >= 1"));
        }
        if !(self.phase_excursion > 0.0 && self.phase_excursion.is_finite()) {
            return Err(Error::invalid("phase_excursion must be positive"));
        }
        Ok(())
    }
}

/// An ordered set of unit-modulus masks plus the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSet {
    pub params: MaskParams,
    /// `(dx, dy)` crop offsets into the master screen; empty for `IidPhase`.
    pub shift_offsets: Vec<(usize, usize)>,
    masks: Vec<ComplexField>,
}

impl MaskSet {
    /// Wraps externally supplied masks (e.g. calibrated ones). Masks need not
    /// be unit modulus; the solver guards demodulation with an ε floor.
    pub fn from_masks(params: MaskParams, shift_offsets: Vec<(usize, usize)>, masks: Vec<ComplexField>) -> Result<Self> {
        if masks.is_empty() {
            return Err(Error::invalid("mask set is empty"));
        }
        for m in &masks[1..] {
            masks[0].check_same_grid(m)?;
        }
        Ok(Self {
            params,
            shift_offsets,
            masks,
        })
    }

    pub fn masks(&self) -> &[ComplexField] {
        &self.masks
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    /// Keeps only the first `n` masks (and offsets).
    pub fn truncated(&self, n: usize) -> Result<MaskSet> {
        if n == 0 || n > self.masks.len() {
            return Err(Error::invalid(format!(
                "cannot truncate {} masks to {n}",
                self.masks.len()
            )));
        }
        let mut params = self.params.clone();
        params.count = n;
        Ok(MaskSet {
            params,
            shift_offsets: self.shift_offsets.iter().take(n).copied().collect(),
            masks: self.masks[..n].to_vec(),
        })
    }
}

/// Generates a mask set. A `ShiftedDiffuser` set lays its positions on a
/// `√count × √count` raster, so `count` must be a perfect square; use
/// [`generate_shifted_with_offsets`] for other layouts.
pub fn generate_mask_set(params: &MaskParams) -> Result<MaskSet> {
    params.validate()?;
    match params.kind {
        MaskKind::IidPhase => {
            let masks = (0..params.count)
                .map(|l| {
                    let data = phase_screen(params, params.width, params.height, l as u64);
                    ComplexField::from_parts(params.width, params.height, params.pitch, data)
                })
                .collect();
            Ok(MaskSet {
                params: params.clone(),
                shift_offsets: Vec::new(),
                masks,
            })
        }
        MaskKind::ShiftedDiffuser => {
            let side = exact_sqrt(params.count).ok_or_else(|| {
                Error::config(format!(
                    "shifted-diffuser count {} is not a perfect square; supply explicit offsets",
                    params.count
                ))
            })?;
            let offsets = raster_offsets(side, params.shift_step);
            generate_shifted_with_offsets(params, &offsets)
        }
    }
}

/// Shifted-diffuser masks cropped at explicit `(dx, dy)` offsets.
pub fn generate_shifted_with_offsets(params: &MaskParams, offsets: &[(usize, usize)]) -> Result<MaskSet> {
    params.validate()?;
    if offsets.len() != params.count {
        return Err(Error::config(format!(
            "{} offsets supplied for {} masks",
            offsets.len(),
            params.count
        )));
    }
    let max_dx = offsets.iter().map(|o| o.0).max().unwrap_or(0);
    let max_dy = offsets.iter().map(|o| o.1).max().unwrap_or(0);
    let (mw, mh) = (params.width + max_dx, params.height + max_dy);
    let master = phase_screen(params, mw, mh, 0);
    let masks = offsets
        .iter()
        .map(|&(dx, dy)| {
            let mut data = Vec::with_capacity(params.width * params.height);
            for r in 0..params.height {
                let start = (r + dy) * mw + dx;
                data.extend_from_slice(&master[start..start + params.width]);
            }
            ComplexField::from_parts(params.width, params.height, params.pitch, data)
        })
        .collect();
    let mut params = params.clone();
    params.kind = MaskKind::ShiftedDiffuser;
    Ok(MaskSet {
        params,
        shift_offsets: offsets.to_vec(),
        masks,
    })
}

/// Row-major `side × side` raster of offsets spaced by `step`.
pub fn raster_offsets(side: usize, step: usize) -> Vec<(usize, usize)> {
    (0..side)
        .flat_map(|r| (0..side).map(move |c| (c * step, r * step)))
        .collect()
}

fn exact_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// Smoothed unit-modulus phase screen; stream `stream` of the params' seed.
fn phase_screen(params: &MaskParams, w: usize, h: usize, stream: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(stream);
    let raw: Vec<Complex64> = (0..w * h)
        .map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * params.phase_excursion))
        .collect();
    if params.feature_scale == 1 {
        return raw;
    }
    box_smooth_periodic(&raw, w, h, params.feature_scale)
        .into_iter()
        .map(|c| {
            let n = c.norm();
            if n > 0.0 {
                c / n
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect()
}

fn box_smooth_periodic(src: &[Complex64], w: usize, h: usize, k: usize) -> Vec<Complex64> {
    let lo = (k / 2) as isize;
    let wrap = |i: isize, n: usize| i.rem_euclid(n as isize) as usize;
    // separable: rows then columns
    let mut tmp = vec![Complex64::new(0.0, 0.0); w * h];
    for r in 0..h {
        for c in 0..w {
            let mut s = Complex64::new(0.0, 0.0);
            for d in 0..k as isize {
                s += src[r * w + wrap(c as isize + d - lo, w)];
            }
            tmp[r * w + c] = s;
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); w * h];
    for r in 0..h {
        for c in 0..w {
            let mut s = Complex64::new(0.0, 0.0);
            for d in 0..k as isize {
                s += tmp[wrap(r as isize + d - lo, h) * w + c];
            }
            out[r * w + c] = s;
        }
    }
    out
}
