//! Row-major 2-D DFT on top of `rustfft`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned forward/inverse 2-D transforms for a fixed `width × height` grid.
///
/// The inverse is normalized by `1/(width·height)`, so `inverse(forward(x)) = x`.
#[derive(Clone)]
pub(crate) struct Fft2 {
    width: usize,
    height: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish()
    }
}

impl Fft2 {
    pub(crate) fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            width,
            height,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, &self.row_fwd, &self.col_fwd);
    }

    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, &self.row_inv, &self.col_inv);
        let norm = 1.0 / (self.width * self.height) as f64;
        for c in data.iter_mut() {
            *c *= norm;
        }
    }

    fn apply(&self, data: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        let (w, h) = (self.width, self.height);
        assert_eq!(data.len(), w * h);
        rows.process(data);
        let mut t = vec![Complex64::new(0.0, 0.0); w * h];
        transpose(data, &mut t, w, h);
        cols.process(&mut t);
        transpose(&t, data, h, w);
    }
}

/// `src` is `rows × cols` (given as width `cols`, height `rows`); writes the transpose.
fn transpose(src: &[Complex64], dst: &mut [Complex64], cols: usize, rows: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn matches_direct_dft() {
        let (w, h) = (6, 4);
        let x: Vec<Complex64> = (0..w * h)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let mut got = x.clone();
        Fft2::new(w, h).forward(&mut got);
        for kr in 0..h {
            for kc in 0..w {
                let mut s = Complex64::new(0.0, 0.0);
                for r in 0..h {
                    for c in 0..w {
                        let ang = -2.0 * PI * ((kr * r) as f64 / h as f64 + (kc * c) as f64 / w as f64);
                        s += x[r * w + c] * Complex64::from_polar(1.0, ang);
                    }
                }
                assert!((got[kr * w + kc] - s).norm() < 1e-12);
            }
        }
        Fft2::new(w, h).inverse(&mut got);
        for (a, b) in got.iter().zip(&x) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
