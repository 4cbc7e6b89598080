//! Conv-PSR against DOTV-PSR on a noisy stack.
//!
//! cargo run --release --example reconstruct

use cdpsr::field::SamplingGeometry;
use cdpsr::forward::{add_gaussian_noise, generate_mask_set, simulate_measurements, MaskKind, MaskParams};
use cdpsr::metrics::MetricsReport;
use cdpsr::priors::{DenoiserHandle, DEFAULT_TV_AMPLITUDE};
use cdpsr::propagation::OpticalConfig;
use cdpsr::solver::{reconstruct_conv_psr, reconstruct_do_psr, ReconConfig};
use cdpsr::targets::builtin_target;

fn main() -> cdpsr::Result<()> {
    let n = 96;
    let geom = SamplingGeometry::from_detector(2, 1.4)?;
    let optics = OpticalConfig::new(0.532, 21_550.0, geom)?;
    let truth = builtin_target(n, n, geom.hr_pitch())?;
    let mut params = MaskParams::new(MaskKind::IidPhase, 30, n, n, geom.hr_pitch(), 7);
    params.feature_scale = 4;
    let masks = generate_mask_set(&params)?;
    let stack = add_gaussian_noise(&simulate_measurements(&truth, &masks, &optics)?, 5.0, 11)?;

    let cfg = ReconConfig {
        eta: 0.25,
        outer_iters: 60,
        ..ReconConfig::default()
    };
    let conv = reconstruct_conv_psr(&stack, &masks, &optics, &cfg, Some(&truth))?;
    let dotv = reconstruct_do_psr(&stack, &masks, &optics, &cfg, &DenoiserHandle::tv(DEFAULT_TV_AMPLITUDE), Some(&truth))?;

    for (name, r) in [("conv", &conv), ("do-tv", &dotv)] {
        let m = MetricsReport::evaluate(&truth, &r.field)?;
        println!(
            "{name:>6}: {} iterations, amplitude {:.2} dB / ssim {:.3}, phase {:.2} dB, {:.1}s",
            r.per_iteration.len(),
            m.psnr_amplitude,
            m.ssim_amplitude,
            m.psnr_phase,
            r.wall_time.as_secs_f64()
        );
    }
    Ok(())
}
