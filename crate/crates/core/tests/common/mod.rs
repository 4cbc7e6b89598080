//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the library's numerics.
#![allow(dead_code)]

use std::f64::consts::PI;

use cdpsr::field::{ComplexField, RealImage};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(w: usize, h: usize, seed: u64) -> RealImage {
    let mut r = rng(seed);
    RealImage::new(w, h, 1.0, (0..w * h).map(|_| r.random::<f64>()).collect()).unwrap()
}

pub fn random_field(w: usize, h: usize, pitch: f64, seed: u64) -> ComplexField {
    let mut r = rng(seed);
    let data = (0..w * h)
        .map(|_| Complex64::from_polar(0.2 + r.random::<f64>(), (r.random::<f64>() - 0.5) * PI))
        .collect();
    ComplexField::new(w, h, pitch, data).unwrap()
}

/// Sum of plane waves on DFT grid frequencies inside `fraction` of the
/// propagating band.
pub fn band_limited_field(n: usize, pitch: f64, wavelength: f64, fraction: f64, seed: u64) -> ComplexField {
    let mut r = rng(seed);
    let span = n as f64 * pitch;
    let kmax = (fraction / wavelength * span).floor() as i64;
    let kmax = kmax.min(n as i64 / 2 - 1);
    let waves: Vec<(i64, i64, Complex64)> = (0..24)
        .map(|_| {
            let kx = r.random_range(-kmax..=kmax);
            let ky = r.random_range(-kmax..=kmax);
            let a = Complex64::from_polar(r.random::<f64>(), r.random::<f64>() * 2.0 * PI);
            (kx, ky, a)
        })
        .filter(|(kx, ky, _)| ((kx * kx + ky * ky) as f64).sqrt() <= kmax as f64)
        .collect();
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for (row, line) in data.chunks_mut(n).enumerate() {
        for (col, v) in line.iter_mut().enumerate() {
            for (kx, ky, a) in &waves {
                let ph = 2.0 * PI * ((*kx * col as i64 + *ky * row as i64) as f64) / n as f64;
                *v += a * Complex64::from_polar(1.0, ph);
            }
        }
    }
    ComplexField::new(n, n, pitch, data).unwrap()
}

pub fn energy(f: &ComplexField) -> f64 {
    f.data().iter().map(|c| c.norm_sqr()).sum()
}

/// Naive 2-D DFT; `sign` −1 forward, +1 inverse (inverse is normalized).
pub fn dft2(data: &[Complex64], w: usize, h: usize, sign: f64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); w * h];
    // rows then columns
    let mut tmp = vec![Complex64::new(0.0, 0.0); w * h];
    for y in 0..h {
        for k in 0..w {
            tmp[y * w + k] = (0..w)
                .map(|x| data[y * w + x] * Complex64::from_polar(1.0, sign * 2.0 * PI * (k * x) as f64 / w as f64))
                .sum();
        }
    }
    for x in 0..w {
        for k in 0..h {
            out[k * w + x] = (0..h)
                .map(|y| tmp[y * w + x] * Complex64::from_polar(1.0, sign * 2.0 * PI * (k * y) as f64 / h as f64))
                .sum();
        }
    }
    if sign > 0.0 {
        let s = 1.0 / (w * h) as f64;
        out.iter_mut().for_each(|v| *v *= s);
    }
    out
}

fn freq(k: usize, n: usize, pitch: f64) -> f64 {
    let k = if 2 * k < n { k as f64 } else { k as f64 - n as f64 };
    k / (n as f64 * pitch)
}

/// `bin(|P_z(d ⊙ u)|²)` written out step by step with a naive DFT.
pub fn forward_oracle(u: &ComplexField, d: &ComplexField, z: f64, wavelength: f64, theta: usize) -> Vec<f64> {
    let (w, h, pitch) = (u.width(), u.height(), u.pitch());
    let mut m = Vec::with_capacity(w * h);
    for i in 0..w * h {
        m.push(u.data()[i] * d.data()[i]);
    }
    let mut spec = dft2(&m, w, h, -1.0);
    for ky in 0..h {
        for kx in 0..w {
            let (fx, fy) = (freq(kx, w, pitch), freq(ky, h, pitch));
            let s = 1.0 - wavelength * wavelength * (fx * fx + fy * fy);
            // the carrier e^{ikz} is dropped; it cannot change an intensity
            spec[ky * w + kx] *= if s >= 0.0 {
                Complex64::from_polar(1.0, 2.0 * PI * z * (s - 1.0) / (wavelength * (1.0 + s.sqrt())))
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
    }
    let field = dft2(&spec, w, h, 1.0);
    let (lw, lh) = (w / theta, h / theta);
    let mut out = vec![0.0; lw * lh];
    for y in 0..h {
        for x in 0..w {
            out[(y / theta) * lw + x / theta] += field[y * w + x].norm_sqr();
        }
    }
    out
}

pub fn psnr_oracle(a: &[f64], b: &[f64], peak: f64) -> f64 {
    let mse = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64;
    if mse == 0.0 {
        100.0
    } else {
        (10.0 * (peak * peak / mse).log10()).clamp(0.0, 100.0)
    }
}

/// Mean SSIM over all fully contained 11×11 windows with Gaussian weights
/// (σ = 1.5), population statistics, computed window by window.
pub fn ssim_oracle(a: &RealImage, b: &RealImage, peak: f64) -> f64 {
    let (w, h) = (a.width(), a.height());
    let r = 5usize;
    let mut k = vec![0.0; 11 * 11];
    for i in 0..11 {
        for j in 0..11 {
            let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
            k[i * 11 + j] = (-(di * di + dj * dj) / (2.0 * 1.5 * 1.5)).exp();
        }
    }
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    let (c1, c2) = ((0.01 * peak).powi(2), (0.03 * peak).powi(2));
    let mut total = 0.0;
    let mut count = 0;
    for cy in r..h - r {
        for cx in r..w - r {
            let (mut mx, mut my, mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for i in 0..11 {
                for j in 0..11 {
                    let p = (cy + i - r) * w + cx + j - r;
                    let (x, y, g) = (a.data()[p], b.data()[p], k[i * 11 + j]);
                    mx += g * x;
                    my += g * y;
                    xx += g * x * x;
                    yy += g * y * y;
                    xy += g * x * y;
                }
            }
            let (vx, vy, cxy) = (xx - mx * mx, yy - my * my, xy - mx * my);
            total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    total / count as f64
}

/// Total variation averaged over the four forward/backward difference
/// pairings, Neumann boundaries.
pub fn tv_oracle(x: &[f64], w: usize, h: usize) -> f64 {
    let at = |r: usize, c: usize| x[r * w + c];
    let mut tv = 0.0;
    for r in 0..h {
        for c in 0..w {
            let fx = if c + 1 < w { at(r, c + 1) - at(r, c) } else { 0.0 };
            let bx = if c > 0 { at(r, c) - at(r, c - 1) } else { 0.0 };
            let fy = if r + 1 < h { at(r + 1, c) - at(r, c) } else { 0.0 };
            let by = if r > 0 { at(r, c) - at(r - 1, c) } else { 0.0 };
            for (dx, dy) in [(fx, fy), (fx, by), (bx, fy), (bx, by)] {
                tv += 0.25 * (dx * dx + dy * dy).sqrt();
            }
        }
    }
    tv
}

/// Minimizes `½‖x − f‖² + λ·TV_ε(x)` (TV smoothed by ε) with Nesterov
/// accelerated gradient descent.
pub fn rof_oracle(f: &[f64], w: usize, h: usize, lambda: f64, eps: f64, iters: usize) -> Vec<f64> {
    let grad = |x: &[f64], g: &mut [f64]| {
        for i in 0..x.len() {
            g[i] = x[i] - f[i];
        }
        let idx = |r: usize, c: usize| r * w + c;
        for r in 0..h {
            for c in 0..w {
                let p = idx(r, c);
                // differences as (plus, minus) index pairs; None at the Neumann edge
                let fx = (c + 1 < w).then(|| (idx(r, c + 1), p));
                let bx = (c > 0).then(|| (p, idx(r, c - 1)));
                let fy = (r + 1 < h).then(|| (idx(r + 1, c), p));
                let by = (r > 0).then(|| (p, idx(r - 1, c)));
                for (dx, dy) in [(fx, fy), (fx, by), (bx, fy), (bx, by)] {
                    let a = dx.map_or(0.0, |(u, v)| x[u] - x[v]);
                    let b = dy.map_or(0.0, |(u, v)| x[u] - x[v]);
                    let t = (a * a + b * b + eps * eps).sqrt();
                    let s = 0.25 * lambda / t;
                    if let Some((u, v)) = dx {
                        g[u] += s * a;
                        g[v] -= s * a;
                    }
                    if let Some((u, v)) = dy {
                        g[u] += s * b;
                        g[v] -= s * b;
                    }
                }
            }
        }
    };
    let lip = 1.0 + lambda * 8.0 / eps;
    let step = 1.0 / lip;
    let mut x = f.to_vec();
    let mut y = x.clone();
    let mut g = vec![0.0; x.len()];
    let mut t = 1.0f64;
    for _ in 0..iters {
        grad(&y, &mut g);
        let next: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        let tn = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let mom = (t - 1.0) / tn;
        for i in 0..x.len() {
            y[i] = next[i] + mom * (next[i] - x[i]);
        }
        x = next;
        t = tn;
    }
    x
}

pub fn rof_value(x: &[f64], f: &[f64], w: usize, h: usize, lambda: f64) -> f64 {
    0.5 * x.iter().zip(f).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + lambda * tv_oracle(x, w, h)
}
