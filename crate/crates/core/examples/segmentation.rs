//! Watershed cell counting on synthetic disk images.
//!
//! cargo run --release --example segmentation -- [OUT_DIR]

use std::path::PathBuf;

use cdpsr::segment::{count_cells, fixtures, watershed_segment, Threshold, DEFAULT_MIN_DISTANCE};

fn main() -> cdpsr::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/segmentation".into()));
    std::fs::create_dir_all(&out)?;
    let cases = [
        ("seventy_disks", fixtures::seventy_disks()),
        ("two_overlapping", fixtures::two_overlapping()),
        ("interior_and_border", fixtures::interior_and_border()),
    ];
    for (name, img) in cases {
        let labels = watershed_segment(&img, Threshold::Otsu, DEFAULT_MIN_DISTANCE)?;
        println!(
            "{name:>20}: {} labels, {} away from the border",
            count_cells(&labels, false),
            count_cells(&labels, true)
        );
        labels.save_preview_png(&out.join(format!("{name}.png")))?;
    }
    Ok(())
}
