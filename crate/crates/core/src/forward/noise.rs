//! Shot noise and additive white Gaussian noise.
//!
//! Every frame draws from its own ChaCha stream keyed by `(seed, frame index)`,
//! so results do not depend on the order or parallelism of frame processing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use super::{MeasurementStack, Noise};
use crate::error::{Error, Result};

fn frame_rng(seed: u64, frame: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame as u64);
    rng
}

/// Replaces each pixel `y` by `Poisson(y·photon_level) / photon_level`.
pub fn add_poisson_noise(stack: &MeasurementStack, photon_level: f64, seed: u64) -> Result<MeasurementStack> {
    if stack.noise != Noise::None {
        return Err(Error::NoiseAlreadyApplied(stack.noise.kind_str()));
    }
    if !(photon_level > 0.0 && photon_level.is_finite()) {
        return Err(Error::invalid(format!(
            "photon level must be positive, got {photon_level}"
        )));
    }
    if stack.frames.iter().any(|f| !f.is_nonnegative()) {
        return Err(Error::invalid("shot noise needs nonnegative frames"));
    }
    let frames = stack
        .frames
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let mut rng = frame_rng(seed, i);
            let data = f
                .data()
                .iter()
                .map(|&y| {
                    let mean = y * photon_level;
                    if mean > 0.0 {
                        let d = Poisson::new(mean).map_err(|e| Error::invalid(e.to_string()))?;
                        Ok(d.sample(&mut rng) / photon_level)
                    } else {
                        Ok(0.0)
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            f.with_data(data)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasurementStack {
        frames,
        noise: Noise::Poisson { photon_level, seed },
    })
}

/// Adds `N(0, σ²)` to every pixel with `σ² = mean(y²) / 10^(snr_db/10)`,
/// the mean taken over the whole stack. `snr_db = +∞` leaves the stack as is.
/// Results may be negative.
pub fn add_gaussian_noise(stack: &MeasurementStack, snr_db: f64, seed: u64) -> Result<MeasurementStack> {
    gaussian(stack, snr_db, seed, false)
}

/// As [`add_gaussian_noise`], then clamps every pixel at zero.
pub fn add_gaussian_noise_clamped(stack: &MeasurementStack, snr_db: f64, seed: u64) -> Result<MeasurementStack> {
    gaussian(stack, snr_db, seed, true)
}

fn gaussian(stack: &MeasurementStack, snr_db: f64, seed: u64, clamped: bool) -> Result<MeasurementStack> {
    if stack.noise != Noise::None {
        return Err(Error::NoiseAlreadyApplied(stack.noise.kind_str()));
    }
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::invalid(format!("bad SNR {snr_db} dB")));
    }
    if snr_db == f64::INFINITY {
        return Ok(stack.clone());
    }
    let n: usize = stack.frames.iter().map(|f| f.len()).sum();
    let power = stack
        .frames
        .iter()
        .map(|f| f.data().iter().map(|y| y * y).sum::<f64>())
        .sum::<f64>()
        / n.max(1) as f64;
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    let frames = stack
        .frames
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let mut rng = frame_rng(seed, i);
            let data = f
                .data()
                .iter()
                .map(|&y| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let v = y + sigma * z;
                    if clamped {
                        v.max(0.0)
                    } else {
                        v
                    }
                })
                .collect();
            f.with_data(data)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasurementStack {
        frames,
        noise: Noise::Gaussian {
            snr_db,
            seed,
            clamped,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::RealImage;

    fn constant_stack(value: f64, frames: usize, side: usize) -> MeasurementStack {
        let f = RealImage::filled(side, side, 1.4, value).unwrap();
        MeasurementStack::new(vec![f; frames], Noise::None).unwrap()
    }

    fn moments(stack: &MeasurementStack) -> (f64, f64) {
        let all: Vec<f64> = stack.frames().iter().flat_map(|f| f.data().to_vec()).collect();
        let n = all.len() as f64;
        let mean = all.iter().sum::<f64>() / n;
        let var = all.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        (mean, var)
    }

    #[test]
    fn poisson_zero_stays_zero() {
        let s = add_poisson_noise(&constant_stack(0.0, 2, 8), 1e4, 1).unwrap();
        assert!(s.frames().iter().all(|f| f.data().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn poisson_moments() {
        let s = add_poisson_noise(&constant_stack(1.0, 1, 1000), 1e4, 7).unwrap();
        let (mean, var) = moments(&s);
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        assert!((var / 1e-4 - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn poisson_high_photon_limit() {
        let base = constant_stack(0.7, 2, 64);
        let s = add_poisson_noise(&base, 1e9, 3).unwrap();
        let rms = s.frames().iter().zip(base.frames())
            .flat_map(|(a, b)| a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).collect::<Vec<_>>())
            .sum::<f64>() / (2.0 * 64.0 * 64.0);
        assert!(rms.sqrt() / 0.7 < 1e-3);
    }

    #[test]
    fn noise_twice_rejected() {
        let s = add_poisson_noise(&constant_stack(1.0, 1, 4), 10.0, 1).unwrap();
        assert!(matches!(add_poisson_noise(&s, 10.0, 1), Err(Error::NoiseAlreadyApplied(_))));
        assert!(matches!(add_gaussian_noise(&s, 10.0, 1), Err(Error::NoiseAlreadyApplied(_))));
        assert!(add_poisson_noise(&constant_stack(1.0, 1, 4), 0.0, 1).is_err());
    }

    #[test]
    fn gaussian_infinite_snr_is_identity() {
        let base = constant_stack(2.0, 2, 4);
        assert_eq!(add_gaussian_noise(&base, f64::INFINITY, 1).unwrap(), base);
    }

    #[test]
    fn gaussian_std_from_snr() {
        let base = constant_stack(2.0, 1, 1000);
        let s = add_gaussian_noise(&base, 20.0, 11).unwrap();
        let (mean, var) = moments(&s);
        assert!((mean - 2.0).abs() < 1e-3);
        assert!((var.sqrt() / 0.2 - 1.0).abs() < 0.02, "std {}", var.sqrt());
    }

    #[test]
    fn gaussian_clamped_is_nonnegative() {
        let s = add_gaussian_noise_clamped(&constant_stack(0.1, 2, 16), 0.0, 4).unwrap();
        assert!(s.frames().iter().all(|f| f.is_nonnegative()));
        let s = add_gaussian_noise(&constant_stack(0.1, 2, 16), 0.0, 4).unwrap();
        assert!(s.frames().iter().any(|f| !f.is_nonnegative()));
    }

    #[test]
    fn per_frame_streams_commute_with_order() {
        let a = RealImage::filled(8, 8, 1.4, 1.0).unwrap();
        let b = RealImage::filled(8, 8, 1.4, 3.0).unwrap();
        let s = MeasurementStack::new(vec![a.clone(), b.clone()], Noise::None).unwrap();
        let one = MeasurementStack::new(vec![a], Noise::None).unwrap();
        let noisy = add_poisson_noise(&s, 100.0, 5).unwrap();
        let noisy_one = add_poisson_noise(&one, 100.0, 5).unwrap();
        assert_eq!(noisy.frames()[0], noisy_one.frames()[0]);
    }
}
