//! PSNR and SSIM of progressively degraded copies of the target.
//!
//! cargo run --release --example metrics

use cdpsr::metrics::{complex_psnr, psnr, ssim};
use cdpsr::targets::{amplitude_image, builtin_target};
use num_complex::Complex64;

fn main() -> cdpsr::Result<()> {
    let a = amplitude_image(128, 128, 1.0);
    println!("identical: psnr {} dB, ssim {}", psnr(&a, &a, 1.0)?, ssim(&a, &a, 1.0)?);
    for sigma in [0.01, 0.05, 0.1, 0.2] {
        // deterministic pseudo-noise, enough for a demo
        let noisy = a.with_data(
            a.data()
                .iter()
                .enumerate()
                .map(|(i, v)| v + sigma * ((i as f64 * 12.9898).sin() * 43_758.545).fract())
                .collect(),
        )?;
        println!(
            "sigma {sigma:<4}: psnr {:6.2} dB, ssim {:.4}",
            psnr(&a, &noisy, 1.0)?,
            ssim(&a, &noisy, 1.0)?
        );
    }

    // Phase metrics ignore a global phase offset.
    let u = builtin_target(64, 64, 1.0)?;
    let shifted = u.scale(Complex64::from_polar(1.0, 0.7));
    let (amp, phase) = complex_psnr(&u, &shifted)?;
    println!("global phase shift: amplitude {amp:.1} dB, phase {phase:.1} dB");
    Ok(())
}
