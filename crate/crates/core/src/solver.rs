//! GAP reconstruction: a measurement-fidelity projection alternated with a
//! prior (denoising) step.
//!
//! One outer iteration runs a fidelity epoch over every mask, producing `u`,
//! then sets `v = EN(u)` with the configured denoiser. The fidelity step for
//! one mask propagates `d ⊙ v` to the detector, moves the intensity of each
//! θ×θ patch toward the measured pixel while keeping the wave's phase, and
//! back-propagates and demodulates.
//!
//! With the identity denoiser this is the conventional fidelity-only
//! alternating-projection baseline.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{
    bin_intensity, hadamard_modulate, upsample_replicate, ComplexField, IntensityImage, RealImage,
};
use crate::forward::{MaskSet, MeasurementStack};
use crate::metrics::complex_psnr;
use crate::priors::{denoise_complex, DenoiserHandle};
use crate::propagation::{OpticalConfig, Propagator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    /// Random phase, uniform amplitude matched to the measured energy.
    Random,
    /// Zero phase, uniform amplitude matched to the measured energy.
    Flat,
    /// Mean over masks of the demodulated back-propagated detector amplitude.
    BackpropMean,
}

impl std::str::FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Init::Random),
            "flat" => Ok(Init::Flat),
            "backprop-mean" => Ok(Init::BackpropMean),
            other => Err(Error::config(format!("unknown init `{other}`"))),
        }
    }
}

impl Init {
    pub fn as_str(&self) -> &'static str {
        match self {
            Init::Random => "random",
            Init::Flat => "flat",
            Init::BackpropMean => "backprop-mean",
        }
    }
}

/// How the per-mask projections of one fidelity epoch are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    /// Each projection starts from the previous one's output.
    Sequential,
    /// All projections start from the same iterate and are averaged.
    ParallelAverage,
}

impl std::str::FromStr for Ordering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequential" => Ok(Ordering::Sequential),
            "parallel-average" => Ok(Ordering::ParallelAverage),
            other => Err(Error::config(format!("unknown ordering `{other}`"))),
        }
    }
}

impl Ordering {
    pub fn as_str(&self) -> &'static str {
        match self {
            Ordering::Sequential => "sequential",
            Ordering::ParallelAverage => "parallel-average",
        }
    }
}

/// How a patch's intensity target `S + η·r` is distributed over its θ×θ pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchUpdate {
    /// Rescale the whole patch by `sqrt(target / S)`: the nearest wave (in L2)
    /// whose patch intensity equals the target.
    Scale,
    /// Add `η·r/θ²` to every pixel intensity, clamping at zero while keeping
    /// the patch sum.
    Spread,
}

impl std::str::FromStr for PatchUpdate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scale" => Ok(PatchUpdate::Scale),
            "spread" => Ok(PatchUpdate::Spread),
            other => Err(Error::config(format!("unknown patch update `{other}`"))),
        }
    }
}

impl PatchUpdate {
    pub fn as_str(&self) -> &'static str {
        match self {
            PatchUpdate::Scale => "scale",
            PatchUpdate::Spread => "spread",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconConfig {
    /// Step weight η on the intensity residual.
    pub eta: f64,
    /// Weight β on the predicted intensity inside the residual.
    pub beta: f64,
    pub outer_iters: usize,
    pub init: Init,
    pub rng_seed: u64,
    /// Floor on `|d|²` when demodulating.
    pub epsilon: f64,
    /// Stop when `‖v_{j+1} − v_j‖ / ‖v_j‖` falls below this.
    pub convergence_tol: f64,
    pub ordering: Ordering,
    pub patch_update: PatchUpdate,
}

impl Default for ReconConfig {
    fn default() -> Self {
        Self {
            eta: 1.0,
            beta: 1.0,
            outer_iters: 100,
            init: Init::BackpropMean,
            rng_seed: 0,
            epsilon: 1e-9,
            convergence_tol: 1e-6,
            ordering: Ordering::Sequential,
            patch_update: PatchUpdate::Scale,
        }
    }
}

impl ReconConfig {
    pub fn validate(&self) -> Result<()> {
        let in_range = |x: f64| x > 0.0 && x <= 2.0;
        if !in_range(self.eta) || !in_range(self.beta) {
            return Err(Error::config(format!(
                "eta and beta must lie in (0, 2], got {} and {}",
                self.eta, self.beta
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon must be positive"));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(Error::config("convergence_tol must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Number of completed outer iterations, starting at 1.
    pub iteration: usize,
    /// `‖y − bin|P(d ⊙ v)|²‖₂` over the whole stack.
    pub residual: f64,
    pub psnr_amplitude: Option<f64>,
    pub psnr_phase: Option<f64>,
    /// Wall time since the start of the reconstruction.
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct ReconResult {
    pub field: ComplexField,
    pub per_iteration: Vec<IterationRecord>,
    pub wall_time: Duration,
    /// True when the loop ended on the relative-change criterion.
    pub converged: bool,
}

impl ReconResult {
    /// Equality of everything except timing.
    pub fn same_numbers(&self, other: &ReconResult) -> bool {
        self.field == other.field
            && self.converged == other.converged
            && self.per_iteration.len() == other.per_iteration.len()
            && self
                .per_iteration
                .iter()
                .zip(&other.per_iteration)
                .all(|(a, b)| {
                    a.iteration == b.iteration
                        && a.residual.to_bits() == b.residual.to_bits()
                        && a.psnr_amplitude.map(f64::to_bits) == b.psnr_amplitude.map(f64::to_bits)
                        && a.psnr_phase.map(f64::to_bits) == b.psnr_phase.map(f64::to_bits)
                })
    }
}

/// Planned per-mask fidelity projection for one grid and optical setup.
#[derive(Debug, Clone)]
pub struct FidelityProjector {
    prop: Propagator,
    optics: OpticalConfig,
}

impl FidelityProjector {
    pub fn new(width: usize, height: usize, pitch: f64, optics: &OpticalConfig) -> Result<Self> {
        optics.geometry.lr_dims(width, height)?;
        Ok(Self {
            prop: Propagator::new(width, height, pitch, optics)?,
            optics: *optics,
        })
    }

    /// Detector-plane HR wave `P_z(d ⊙ v)`.
    pub fn detector_wave(&self, v: &ComplexField, mask: &ComplexField) -> Result<ComplexField> {
        self.prop.forward(&hadamard_modulate(v, mask)?)
    }

    /// Predicted frame `bin(|P_z(d ⊙ v)|²)`.
    pub fn predict(&self, v: &ComplexField, mask: &ComplexField) -> Result<IntensityImage> {
        bin_intensity(&self.detector_wave(v, mask)?.intensity(), &self.optics.geometry)
    }

    /// One fidelity update of `v` against `frame` measured through `mask`.
    pub fn project(
        &self,
        v: &ComplexField,
        frame: &IntensityImage,
        mask: &ComplexField,
        cfg: &ReconConfig,
    ) -> Result<ComplexField> {
        let (eta, beta) = (cfg.eta, cfg.beta);
        let geom = &self.optics.geometry;
        let mut w = self.detector_wave(v, mask)?;
        let intensity = w.intensity();
        let predicted = bin_intensity(&intensity, geom)?;
        predicted.check_same_grid(frame).map_err(|_| {
            Error::shape(format!(
                "frame {}x{} does not match detector grid {}x{}",
                frame.width(),
                frame.height(),
                predicted.width(),
                predicted.height()
            ))
        })?;
        let residual: Vec<f64> = frame
            .data()
            .iter()
            .zip(predicted.data())
            .map(|(y, s)| y - beta * s)
            .collect();
        let residual = RealImage::from_parts(frame.width(), frame.height(), frame.pitch(), residual);
        let updated = match cfg.patch_update {
            PatchUpdate::Scale => scale_patch_intensity(&intensity, &predicted, &residual, eta, geom.theta()),
            PatchUpdate::Spread => {
                let step = upsample_replicate(&residual, geom, true);
                spread_patch_intensity(&intensity, &predicted, &step, eta, geom.theta())
            }
        };

        // w ← w' − w, the detector-plane change
        for ((c, &old), &new) in w.data_mut().iter_mut().zip(intensity.data()).zip(&updated) {
            *c = if old > 0.0 {
                *c * ((new / old).sqrt() - 1.0)
            } else {
                Complex64::new(new.sqrt(), 0.0)
            };
        }
        // Only the propagating part of d ⊙ v is observed; adding the
        // back-propagated change keeps the evanescent part as it was.
        let delta = demodulate(&self.prop.backward(&w)?, mask, cfg.epsilon);
        let data = v.data().iter().zip(delta.data()).map(|(a, b)| a + b).collect();
        Ok(ComplexField::from_parts(v.width(), v.height(), v.pitch(), data))
    }
}

/// `conj(d) ⊙ x / max(|d|², ε)`.
fn demodulate(x: &ComplexField, mask: &ComplexField, epsilon: f64) -> ComplexField {
    let data = x
        .data()
        .iter()
        .zip(mask.data())
        .map(|(a, d)| a * d.conj() / d.norm_sqr().max(epsilon))
        .collect();
    ComplexField::from_parts(x.width(), x.height(), x.pitch(), data)
}

/// New HR intensities `I·max(S + η·r, 0)/S` per patch; an empty patch
/// (`S = 0`) receives the target uniformly.
fn scale_patch_intensity(
    intensity: &RealImage,
    predicted: &RealImage,
    residual: &RealImage,
    eta: f64,
    theta: usize,
) -> Vec<f64> {
    let w = intensity.width();
    let lw = predicted.width();
    let i_data = intensity.data();
    let mut out = vec![0.0; i_data.len()];
    for (r, row) in out.chunks_exact_mut(w).enumerate() {
        let lr = r / theta;
        for (c, o) in row.iter_mut().enumerate() {
            let k = lr * lw + c / theta;
            let s = predicted.data()[k];
            let target = (s + eta * residual.data()[k]).max(0.0);
            *o = if s > 0.0 {
                i_data[r * w + c] * (target / s)
            } else {
                target / (theta * theta) as f64
            };
        }
    }
    out
}

/// New HR intensities: `I + η·upsample(r)/θ²`, with negative entries clamped.
///
/// Where the clamp activates inside a patch, the common offset is re-solved
/// so that the patch still sums to its target `S + η·r` (the Euclidean
/// projection of the patch onto `{I ≥ 0, ΣI = target}`).
fn spread_patch_intensity(
    intensity: &RealImage,
    predicted: &RealImage,
    step: &RealImage,
    eta: f64,
    theta: usize,
) -> Vec<f64> {
    let w = intensity.width();
    let i_data = intensity.data();
    let mut out: Vec<f64> = i_data
        .iter()
        .zip(step.data())
        .map(|(i, s)| i + eta * s)
        .collect();
    if out.iter().all(|&v| v >= 0.0) {
        return out;
    }
    let lw = predicted.width();
    let n = theta * theta;
    let mut patch = Vec::with_capacity(n);
    for lr in 0..predicted.height() {
        for lc in 0..lw {
            let idx = |k: usize| (lr * theta + k / theta) * w + lc * theta + k % theta;
            if (0..n).all(|k| out[idx(k)] >= 0.0) {
                continue;
            }
            let target = predicted.data()[lr * lw + lc] + eta * step.data()[idx(0)] * n as f64;
            patch.clear();
            patch.extend((0..n).map(|k| i_data[idx(k)]));
            let tau = simplex_offset(&patch, target);
            for k in 0..n {
                out[idx(k)] = (i_data[idx(k)] + tau).max(0.0);
            }
        }
    }
    out
}

/// Offset `τ` with `Σ max(a_i + τ, 0) = target`; `−∞`-like (all zero) when
/// `target ≤ 0`.
fn simplex_offset(a: &[f64], target: f64) -> f64 {
    if target <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut sorted = a.to_vec();
    sorted.sort_by(|x, y| y.total_cmp(x));
    let mut prefix = 0.0;
    let mut tau = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        prefix += v;
        let t = (target - prefix) / (k + 1) as f64;
        if v + t > 0.0 {
            tau = t;
        } else {
            break;
        }
    }
    tau
}

/// One fidelity update, planning the propagator on the fly. Prefer
/// [`FidelityProjector`] in loops.
pub fn psr_project(
    v: &ComplexField,
    frame: &IntensityImage,
    mask: &ComplexField,
    optics: &OpticalConfig,
    cfg: &ReconConfig,
) -> Result<ComplexField> {
    cfg.validate()?;
    FidelityProjector::new(v.width(), v.height(), v.pitch(), optics)?
        .project(v, frame, mask, cfg)
}

/// `‖y − |Av|²‖₂` over all frames.
pub fn data_residual(
    projector: &FidelityProjector,
    v: &ComplexField,
    stack: &MeasurementStack,
    masks: &MaskSet,
) -> Result<f64> {
    let per_frame = masks
        .masks()
        .par_iter()
        .zip(stack.frames())
        .map(|(d, y)| {
            let pred = projector.predict(v, d)?;
            Ok(y.data()
                .iter()
                .zip(pred.data())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_frame.iter().sum::<f64>().sqrt())
}

fn initial_field(
    projector: &FidelityProjector,
    stack: &MeasurementStack,
    masks: &MaskSet,
    cfg: &ReconConfig,
) -> Result<ComplexField> {
    let template = &masks.masks()[0];
    let (w, h, pitch) = (template.width(), template.height(), template.pitch());
    let hr_pixels = (w * h) as f64;
    let mean_intensity = stack
        .frames()
        .iter()
        .map(|f| f.data().iter().map(|v| v.max(0.0)).sum::<f64>())
        .sum::<f64>()
        / (stack.len() as f64 * hr_pixels);
    let amp = mean_intensity.sqrt();
    match cfg.init {
        Init::Flat => ComplexField::filled(w, h, pitch, Complex64::new(amp, 0.0)),
        Init::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
            let data = (0..w * h)
                .map(|_| Complex64::from_polar(amp, rng.random::<f64>() * std::f64::consts::TAU))
                .collect();
            ComplexField::new(w, h, pitch, data)
        }
        Init::BackpropMean => {
            let geom = &projector.optics.geometry;
            let parts = masks
                .masks()
                .par_iter()
                .zip(stack.frames())
                .map(|(d, y)| {
                    let amp_hr = upsample_replicate(&y.map(|v| v.max(0.0)), geom, true).map(f64::sqrt);
                    let wave = ComplexField::from_parts(
                        w,
                        h,
                        pitch,
                        amp_hr.data().iter().map(|&a| Complex64::new(a, 0.0)).collect(),
                    );
                    Ok(demodulate(&projector.prop.backward(&wave)?, d, cfg.epsilon))
                })
                .collect::<Result<Vec<_>>>()?;
            let scale = 1.0 / parts.len() as f64;
            let mut acc = vec![Complex64::new(0.0, 0.0); w * h];
            for p in &parts {
                for (a, b) in acc.iter_mut().zip(p.data()) {
                    *a += b;
                }
            }
            ComplexField::new(w, h, pitch, acc.into_iter().map(|c| c * scale).collect())
        }
    }
}

fn check_inputs(stack: &MeasurementStack, masks: &MaskSet, optics: &OpticalConfig) -> Result<()> {
    if stack.is_empty() {
        return Err(Error::config("measurement stack is empty"));
    }
    if masks.len() != stack.len() {
        return Err(Error::config(format!(
            "{} masks for {} frames",
            masks.len(),
            stack.len()
        )));
    }
    let m = &masks.masks()[0];
    let (lw, lh) = optics.geometry.lr_dims(m.width(), m.height())?;
    let f = &stack.frames()[0];
    if (f.width(), f.height()) != (lw, lh) {
        return Err(Error::shape(format!(
            "frames are {}x{}, expected {lw}x{lh} for theta={}",
            f.width(),
            f.height(),
            optics.geometry.theta()
        )));
    }
    Ok(())
}

/// Callback invoked after every outer iteration with the record and the
/// current iterate `v`.
pub type Observer<'a> = dyn FnMut(&IterationRecord, &ComplexField) -> Result<()> + 'a;

/// GAP reconstruction with a plug-in prior.
pub fn reconstruct_do_psr(
    stack: &MeasurementStack,
    masks: &MaskSet,
    optics: &OpticalConfig,
    cfg: &ReconConfig,
    denoiser: &DenoiserHandle,
    truth: Option<&ComplexField>,
) -> Result<ReconResult> {
    reconstruct_observed(stack, masks, optics, cfg, denoiser, truth, &mut |_, _| Ok(()))
}

/// Fidelity-only baseline: [`reconstruct_do_psr`] with the identity prior.
pub fn reconstruct_conv_psr(
    stack: &MeasurementStack,
    masks: &MaskSet,
    optics: &OpticalConfig,
    cfg: &ReconConfig,
    truth: Option<&ComplexField>,
) -> Result<ReconResult> {
    reconstruct_do_psr(stack, masks, optics, cfg, &DenoiserHandle::identity(), truth)
}

/// [`reconstruct_do_psr`] with a per-iteration observer (checkpoints, logs).
pub fn reconstruct_observed(
    stack: &MeasurementStack,
    masks: &MaskSet,
    optics: &OpticalConfig,
    cfg: &ReconConfig,
    denoiser: &DenoiserHandle,
    truth: Option<&ComplexField>,
    observer: &mut Observer<'_>,
) -> Result<ReconResult> {
    let start = Instant::now();
    cfg.validate()?;
    denoiser.validate()?;
    check_inputs(stack, masks, optics)?;
    let template = &masks.masks()[0];
    if let Some(t) = truth {
        t.check_same_grid(template)?;
    }
    let projector = FidelityProjector::new(template.width(), template.height(), template.pitch(), optics)?;
    let mut v = initial_field(&projector, stack, masks, cfg)?;
    let mut records = Vec::with_capacity(cfg.outer_iters);
    let mut converged = false;

    for j in 0..cfg.outer_iters {
        let u = fidelity_epoch(&projector, &v, stack, masks, cfg)?;
        let next = denoise_complex(&u, denoiser, j).map_err(|e| Error::Prior {
            iteration: j + 1,
            source: Box::new(e),
        })?;
        let norm = v.energy().sqrt();
        let change = next.distance(&v)? / if norm > 0.0 { norm } else { 1.0 };
        v = next;

        let residual = data_residual(&projector, &v, stack, masks)?;
        let (psnr_amplitude, psnr_phase) = match truth {
            Some(t) => {
                let (a, p) = complex_psnr(t, &v)?;
                (Some(a), Some(p))
            }
            None => (None, None),
        };
        let rec = IterationRecord {
            iteration: j + 1,
            residual,
            psnr_amplitude,
            psnr_phase,
            elapsed: start.elapsed(),
        };
        observer(&rec, &v)?;
        records.push(rec);
        if change < cfg.convergence_tol {
            converged = true;
            break;
        }
    }
    Ok(ReconResult {
        field: v,
        per_iteration: records,
        wall_time: start.elapsed(),
        converged,
    })
}

fn fidelity_epoch(
    projector: &FidelityProjector,
    v: &ComplexField,
    stack: &MeasurementStack,
    masks: &MaskSet,
    cfg: &ReconConfig,
) -> Result<ComplexField> {
    match cfg.ordering {
        Ordering::Sequential => {
            let mut u = v.clone();
            for (d, y) in masks.masks().iter().zip(stack.frames()) {
                u = projector.project(&u, y, d, cfg)?;
            }
            Ok(u)
        }
        Ordering::ParallelAverage => {
            let parts = masks
                .masks()
                .par_iter()
                .zip(stack.frames())
                .map(|(d, y)| projector.project(v, y, d, cfg))
                .collect::<Result<Vec<_>>>()?;
            let scale = 1.0 / parts.len() as f64;
            let mut acc = vec![Complex64::new(0.0, 0.0); v.len()];
            for p in &parts {
                for (a, b) in acc.iter_mut().zip(p.data()) {
                    *a += b;
                }
            }
            Ok(ComplexField::from_parts(
                v.width(),
                v.height(),
                v.pitch(),
                acc.into_iter().map(|c| c * scale).collect(),
            ))
        }
    }
}
