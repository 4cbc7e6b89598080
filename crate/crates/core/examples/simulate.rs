//! Simulates a noisy low-resolution measurement stack and saves it.
//!
//! cargo run --release --example simulate -- [OUT_DIR]

use std::path::PathBuf;

use cdpsr::field::SamplingGeometry;
use cdpsr::forward::{add_gaussian_noise, add_poisson_noise, generate_mask_set, simulate_measurements, MaskKind, MaskParams};
use cdpsr::io::{save_png, BitDepth, PngScaling};
use cdpsr::propagation::OpticalConfig;
use cdpsr::store::save_stack;
use cdpsr::targets::builtin_target;

fn main() -> cdpsr::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/simulate".into()));
    let theta = 4;
    let geom = SamplingGeometry::from_detector(theta, 1.4)?;
    let optics = OpticalConfig::new(0.532, 21_550.0, geom)?;
    let truth = builtin_target(128, 128, geom.hr_pitch())?;
    let masks = generate_mask_set(&MaskParams::new(MaskKind::IidPhase, 20, 128, 128, geom.hr_pitch(), 1))?;

    let clean = simulate_measurements(&truth, &masks, &optics)?;
    let frame = &clean.frames()[0];
    println!("{} frames of {}x{} at {} um", clean.len(), frame.width(), frame.height(), frame.pitch());

    let gaussian = add_gaussian_noise(&clean, 10.0, 2)?;
    let poisson = add_poisson_noise(&clean, 500.0, 2)?;
    // Noise is applied once; a second call is refused.
    assert!(add_gaussian_noise(&gaussian, 10.0, 3).is_err());

    save_stack(&gaussian, &out.join("gaussian"))?;
    save_stack(&poisson, &out.join("poisson"))?;
    save_png(frame, &out.join("frame_clean.png"), PngScaling::MinMax, BitDepth::Eight)?;
    save_png(&gaussian.frames()[0], &out.join("frame_gaussian.png"), PngScaling::MinMax, BitDepth::Eight)?;
    println!("wrote {}", out.display());
    Ok(())
}
