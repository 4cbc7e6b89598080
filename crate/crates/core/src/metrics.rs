//! PSNR and SSIM, plus the amplitude/phase report used by the harness.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, RealImage};
use crate::io::wrap_phase;
use crate::kv::KvRecord;

/// Returned by [`psnr`] when the images are identical.
pub const PSNR_CAP_DB: f64 = 100.0;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

fn check_shapes(a: &RealImage, b: &RealImage) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::shape(format!(
            "metric inputs {}x{} and {}x{} differ",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// `10·log10(peak² / MSE)`, clamped to `[0, PSNR_CAP_DB]`.
pub fn psnr(reference: &RealImage, test: &RealImage, peak: f64) -> Result<f64> {
    check_shapes(reference, test)?;
    if !(peak > 0.0) {
        return Err(Error::invalid(format!("PSNR peak must be positive, got {peak}")));
    }
    let mse = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / reference.len() as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (peak * peak / mse).log10()).clamp(0.0, PSNR_CAP_DB))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub peak: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: SSIM_WINDOW,
            sigma: SSIM_SIGMA,
            k1: SSIM_K1,
            k2: SSIM_K2,
            peak: 1.0,
        }
    }
}

fn gaussian_window(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size / 2) as f64;
    let g: Vec<f64> = (0..size)
        .map(|i| (-(i as f64 - c).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

/// Separable Gaussian filtering restricted to windows fully inside the image.
fn filter_valid(x: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let (ow, oh) = (w + 1 - n, h + 1 - n);
    let mut rows = vec![0.0; ow * h];
    for r in 0..h {
        for c in 0..ow {
            rows[r * ow + c] = (0..n).map(|i| k[i] * x[r * w + c + i]).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = (0..n).map(|i| k[i] * rows[(r + i) * ow + c]).sum();
        }
    }
    out
}

/// Mean local SSIM with a Gaussian window, over windows fully inside the image.
pub fn ssim_with(reference: &RealImage, test: &RealImage, p: &SsimParams) -> Result<f64> {
    check_shapes(reference, test)?;
    if p.window.is_multiple_of(2) {
        return Err(Error::invalid(format!("SSIM window must be odd, got {}", p.window)));
    }
    let (w, h) = (reference.width(), reference.height());
    if p.window > w || p.window > h {
        return Err(Error::shape(format!(
            "SSIM window {} larger than image {w}x{h}",
            p.window
        )));
    }
    let k = gaussian_window(p.window, p.sigma);
    let (x, y) = (reference.data(), test.data());
    let prod = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).collect::<Vec<_>>();
    let mu_x = filter_valid(x, w, h, &k);
    let mu_y = filter_valid(y, w, h, &k);
    let e_xx = filter_valid(&prod(x, x), w, h, &k);
    let e_yy = filter_valid(&prod(y, y), w, h, &k);
    let e_xy = filter_valid(&prod(x, y), w, h, &k);
    let c1 = (p.k1 * p.peak).powi(2);
    let c2 = (p.k2 * p.peak).powi(2);
    let n = mu_x.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let sxx = e_xx[i] - mx * mx;
            let syy = e_yy[i] - my * my;
            let sxy = e_xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2))
        })
        .sum();
    Ok(total / n as f64)
}

pub fn ssim(reference: &RealImage, test: &RealImage, peak: f64) -> Result<f64> {
    ssim_with(
        reference,
        test,
        &SsimParams {
            peak,
            ..SsimParams::default()
        },
    )
}

/// Multiplies `test` by the unit phasor minimizing `‖truth − e^{ic}·test‖`.
pub fn align_global_phase(truth: &ComplexField, test: &ComplexField) -> Result<ComplexField> {
    truth.check_same_grid(test)?;
    let s: Complex64 = truth
        .data()
        .iter()
        .zip(test.data())
        .map(|(t, u)| t * u.conj())
        .sum();
    let n = s.norm();
    Ok(if n > 0.0 { test.scale(s / n) } else { test.clone() })
}

/// Wrapped phase image in `[−π, π)`.
pub fn wrapped_phase(field: &ComplexField) -> RealImage {
    field.phase().map(wrap_phase)
}

/// Amplitude and phase PSNR of `test` against `truth`. Amplitude peak is the
/// truth's maximum amplitude; phase is compared after global-phase alignment,
/// wrapped, with peak 2π.
pub fn complex_psnr(truth: &ComplexField, test: &ComplexField) -> Result<(f64, f64)> {
    let aligned = align_global_phase(truth, test)?;
    let ta = truth.amplitude();
    let peak = ta.max();
    let amp = psnr(&ta, &test.amplitude(), if peak > 0.0 { peak } else { 1.0 })?;
    let phase = psnr(&wrapped_phase(truth), &wrapped_phase(&aligned), 2.0 * PI)?;
    Ok((amp, phase))
}

/// Quality figures of a reconstruction against ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub psnr_amplitude: f64,
    pub psnr_phase: f64,
    pub ssim_amplitude: f64,
    pub ssim_phase: f64,
    pub cell_count: Option<usize>,
    /// Percentage error of `cell_count` against a reference count.
    pub counting_error: Option<f64>,
}

pub const REPORT_CSV_HEADER: &str =
    "psnr_amp_db,psnr_phase_db,ssim_amp,ssim_phase,cell_count,counting_error_pct";

impl MetricsReport {
    pub fn evaluate(truth: &ComplexField, test: &ComplexField) -> Result<Self> {
        let (psnr_amplitude, psnr_phase) = complex_psnr(truth, test)?;
        let aligned = align_global_phase(truth, test)?;
        let ta = truth.amplitude();
        let peak = if ta.max() > 0.0 { ta.max() } else { 1.0 };
        let ssim_amplitude = ssim(&ta, &test.amplitude(), peak)?;
        let ssim_phase = ssim(&wrapped_phase(truth), &wrapped_phase(&aligned), 2.0 * PI)?;
        Ok(Self {
            psnr_amplitude,
            psnr_phase,
            ssim_amplitude,
            ssim_phase,
            cell_count: None,
            counting_error: None,
        })
    }

    pub fn with_count(mut self, count: usize, reference: Option<usize>) -> Self {
        self.cell_count = Some(count);
        self.counting_error = reference
            .filter(|&r| r > 0)
            .map(|r| 100.0 * (count as f64 - r as f64).abs() / r as f64);
        self
    }

    pub fn to_kv(&self) -> KvRecord {
        let mut rec = KvRecord::new();
        rec.set("psnr_amplitude", self.psnr_amplitude)
            .set("psnr_phase", self.psnr_phase)
            .set("ssim_amplitude", self.ssim_amplitude)
            .set("ssim_phase", self.ssim_phase);
        if let Some(c) = self.cell_count {
            rec.set("cell_count", c);
        }
        if let Some(e) = self.counting_error {
            rec.set("counting_error", e);
        }
        rec
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.6},{:.6},{:.6},{:.6},{},{}",
            self.psnr_amplitude,
            self.psnr_phase,
            self.ssim_amplitude,
            self.ssim_phase,
            self.cell_count.map(|c| c.to_string()).unwrap_or_default(),
            self.counting_error.map(|e| format!("{e:.4}")).unwrap_or_default()
        )
    }
}
