//! Generates both mask families and writes them to disk.
//!
//! cargo run --release --example masks -- [OUT_DIR]

use std::path::PathBuf;

use cdpsr::forward::{generate_mask_set, MaskKind, MaskParams};
use cdpsr::store::{load_masks, save_masks};

fn main() -> cdpsr::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/masks".into()));
    for kind in [MaskKind::IidPhase, MaskKind::ShiftedDiffuser] {
        let mut params = MaskParams::new(kind, 9, 64, 64, 0.7, 42);
        params.feature_scale = 4;
        let set = generate_mask_set(&params)?;
        let dir = out.join(kind.as_str());
        save_masks(&set, &dir)?;
        assert_eq!(load_masks(&dir)?, set);
        let m = &set.masks()[0];
        let unit = m.data().iter().all(|c| (c.norm() - 1.0).abs() < 1e-12);
        println!(
            "{:>16}: {} masks, phase-only={unit}, offsets={:?} -> {}",
            kind.as_str(),
            set.len(),
            &set.shift_offsets[..set.shift_offsets.len().min(3)],
            dir.display()
        );
    }
    Ok(())
}
