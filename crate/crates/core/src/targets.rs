//! Built-in complex test targets.
//!
//! The amplitude and phase images are drawn procedurally from resolution
//! independent shapes, so any grid size gives the same scene. The same pair is
//! also stored as 16-bit PNGs under `fixtures/` (see the `export_targets`
//! example); [`load_png_pair`] reads such a pair back.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{ComplexField, RealImage};
use crate::io::load_png_gray;

/// Amplitude scene in `[0, 1]`: shaded background, discs, a ring and bars.
pub fn amplitude_image(width: usize, height: usize, pitch: f64) -> RealImage {
    let data = grid(width, height)
        .map(|(x, y)| {
            let mut a = 0.35 + 0.15 * x + 0.1 * y;
            if disc(x, y, 0.28, 0.3, 0.16) {
                a = 0.95;
            }
            if disc(x, y, 0.72, 0.28, 0.12) {
                a = 0.15;
            }
            let r = ((x - 0.62).powi(2) + (y - 0.7).powi(2)).sqrt();
            if (0.12..0.2).contains(&r) {
                a = 0.8;
            }
            if (0.12..0.42).contains(&x) && (0.62..0.9).contains(&y) && ((y * 20.0) as i64) % 2 == 0 {
                a = 0.6;
            }
            a.clamp(0.0, 1.0)
        })
        .collect();
    RealImage::from_parts(width, height, pitch, data)
}

/// Phase scene in `[−π/2, π/2]`: smooth bumps, a plateau and a tilted edge.
pub fn phase_image(width: usize, height: usize, pitch: f64) -> RealImage {
    let data = grid(width, height)
        .map(|(x, y)| {
            let bump = |cx: f64, cy: f64, s: f64| (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * s * s)).exp();
            let mut p = 0.9 * bump(0.3, 0.65, 0.12) - 0.7 * bump(0.7, 0.35, 0.1);
            if (0.55..0.85).contains(&x) && (0.62..0.88).contains(&y) {
                p += 0.5;
            }
            if x + 0.5 * y < 0.35 {
                p -= 0.4;
            }
            (p * FRAC_PI_2).clamp(-FRAC_PI_2, FRAC_PI_2)
        })
        .collect();
    RealImage::from_parts(width, height, pitch, data)
}

/// The built-in complex target `a·e^{iφ}`.
pub fn builtin_target(width: usize, height: usize, pitch: f64) -> Result<ComplexField> {
    ComplexField::from_polar(&amplitude_image(width, height, pitch), &phase_image(width, height, pitch))
}

/// Builds a target from gray images in `[0, 1]`: amplitude is taken as is,
/// phase maps `[0, 1]` onto `[−π/2, π/2]`.
pub fn target_from_levels(amplitude: &RealImage, phase_levels: &RealImage) -> Result<ComplexField> {
    amplitude.check_same_grid(phase_levels)?;
    ComplexField::from_polar(amplitude, &phase_levels.map(|l| (l - 0.5) * PI))
}

/// Gray level of a phase value, inverse of the mapping in [`target_from_levels`].
pub fn phase_to_level(p: f64) -> f64 {
    p / PI + 0.5
}

/// Loads an amplitude/phase PNG pair; both must have the same size.
pub fn load_png_pair(amplitude: &Path, phase: &Path, pitch: f64) -> Result<ComplexField> {
    let a = load_png_gray(amplitude, pitch)?;
    let p = load_png_gray(phase, pitch)?;
    if (a.width(), a.height()) != (p.width(), p.height()) {
        return Err(Error::shape(format!(
            "amplitude {}x{} and phase {}x{} images differ",
            a.width(),
            a.height(),
            p.width(),
            p.height()
        )));
    }
    target_from_levels(&a, &p)
}

fn grid(width: usize, height: usize) -> impl Iterator<Item = (f64, f64)> {
    (0..height).flat_map(move |r| {
        (0..width).map(move |c| ((c as f64 + 0.5) / width as f64, (r as f64 + 0.5) / height as f64))
    })
}

fn disc(x: f64, y: f64, cx: f64, cy: f64, r: f64) -> bool {
    (x - cx).powi(2) + (y - cy).powi(2) < r * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{save_png, BitDepth, PngScaling};

    #[test]
    fn ranges() {
        let a = amplitude_image(64, 48, 1.0);
        let p = phase_image(64, 48, 1.0);
        assert!(a.min() >= 0.0 && a.max() <= 1.0);
        assert!(p.min() >= -FRAC_PI_2 && p.max() <= FRAC_PI_2);
        // no dark holes where phase would be undefined
        assert!(a.min() > 0.1);
        assert!(a.max() - a.min() > 0.5 && p.max() - p.min() > 1.0);
    }

    #[test]
    fn level_mapping_inverts() {
        for p in [-FRAC_PI_2, 0.0, 0.3, FRAC_PI_2] {
            let l = phase_to_level(p);
            assert!((0.0..=1.0).contains(&l));
            assert!(((l - 0.5) * PI - p).abs() < 1e-15);
        }
    }

    #[test]
    fn png_pair_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (pa, pp) = (dir.path().join("a.png"), dir.path().join("p.png"));
        let a = amplitude_image(32, 32, 0.7);
        let p = phase_image(32, 32, 0.7);
        save_levels(&a, &pa);
        save_levels(&p.map(phase_to_level), &pp);
        let t = load_png_pair(&pa, &pp, 0.7).unwrap();
        let truth = builtin_target(32, 32, 0.7).unwrap();
        assert!(t.max_abs_diff(&truth).unwrap() < 1e-4);
    }

    fn save_levels(img: &RealImage, path: &Path) {
        save_png(img, path, PngScaling::Unit, BitDepth::Sixteen).unwrap();
    }
}
