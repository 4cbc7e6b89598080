//! Writes the built-in target pair and the segmentation fixtures as PNGs
//! into `fixtures/`.
//!
//! cargo run --release --example export_targets

use std::path::Path;

use cdpsr::io::{save_png, BitDepth, PngScaling};
use cdpsr::segment::fixtures;
use cdpsr::targets::{amplitude_image, phase_image, phase_to_level};

fn main() -> cdpsr::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir)?;
    let (w, h) = (256, 256);
    save_png(&amplitude_image(w, h, 1.0), &dir.join("target_amplitude.png"), PngScaling::Unit, BitDepth::Sixteen)?;
    let phase = phase_image(w, h, 1.0).map(phase_to_level);
    save_png(&phase, &dir.join("target_phase.png"), PngScaling::Unit, BitDepth::Sixteen)?;
    for (name, img) in [
        ("seventy_disks", fixtures::seventy_disks()),
        ("two_overlapping", fixtures::two_overlapping()),
        ("interior_and_border", fixtures::interior_and_border()),
    ] {
        save_png(&img, &dir.join(format!("{name}.png")), PngScaling::Unit, BitDepth::Eight)?;
    }
    println!("wrote {}", dir.display());
    Ok(())
}
