//! DO-PSR with a denoiser running as a separate process.
//!
//! Uses `tools/gaussian_blur.py` (needs python3 with numpy). Any executable that
//! follows the protocol in `cdpsr::priors::external` can be dropped in.
//!
//! cargo run --release --example external_denoiser

use std::path::Path;

use cdpsr::field::SamplingGeometry;
use cdpsr::forward::{add_gaussian_noise, generate_mask_set, simulate_measurements, MaskKind, MaskParams};
use cdpsr::metrics::complex_psnr;
use cdpsr::priors::{DenoiserHandle, ExternalSpec};
use cdpsr::propagation::OpticalConfig;
use cdpsr::solver::{reconstruct_conv_psr, reconstruct_do_psr, ReconConfig};
use cdpsr::targets::builtin_target;

fn main() -> cdpsr::Result<()> {
    let tool = Path::new(env!("CARGO_MANIFEST_DIR")).join("tools/gaussian_blur.py");
    let workdir = tempfile::tempdir()?;
    let spec = ExternalSpec::new(&tool, workdir.path());

    let n = 64;
    let geom = SamplingGeometry::from_detector(2, 1.4)?;
    let optics = OpticalConfig::new(0.532, 21_550.0, geom)?;
    let truth = builtin_target(n, n, geom.hr_pitch())?;
    let masks = generate_mask_set(&MaskParams::new(MaskKind::IidPhase, 20, n, n, geom.hr_pitch(), 3))?;
    let stack = add_gaussian_noise(&simulate_measurements(&truth, &masks, &optics)?, 5.0, 4)?;
    let cfg = ReconConfig {
        eta: 0.25,
        outer_iters: 20,
        ..ReconConfig::default()
    };

    let conv = reconstruct_conv_psr(&stack, &masks, &optics, &cfg, Some(&truth))?;
    let ext = reconstruct_do_psr(&stack, &masks, &optics, &cfg, &DenoiserHandle::external(spec, 0.6), Some(&truth))?;
    let (c, _) = complex_psnr(&truth, &conv.field)?;
    let (e, _) = complex_psnr(&truth, &ext.field)?;
    println!("conv {c:.2} dB, external gaussian blur {e:.2} dB ({:.1}s)", ext.wall_time.as_secs_f64());
    Ok(())
}
