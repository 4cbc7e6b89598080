//! Directory layouts for measurement stacks and mask sets.
//!
//! A stack directory holds `stack.txt` (frame count and noise record) and
//! `frame_NNN.f64` dumps. A mask directory holds `masks.txt` (generation
//! parameters and offsets) and `mask_NNN.f64` dumps.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::forward::{MaskKind, MaskParams, MaskSet, MeasurementStack, Noise};
use crate::io::{load_complex, load_real, save_complex, save_real};
use crate::kv::KvRecord;
use crate::solver::{IterationRecord, ReconResult};

pub const STACK_RECORD: &str = "stack.txt";
pub const MASK_RECORD: &str = "masks.txt";
pub const RESULT_FIELD: &str = "field.f64";
pub const RESULT_RECORD: &str = "result.txt";
pub const ITERATION_LOG: &str = "iterations.csv";
pub const ITERATION_LOG_HEADER: &str = "iteration,residual,psnr_amplitude,psnr_phase,elapsed_seconds";

pub fn frame_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("frame_{index:03}.f64"))
}

pub fn mask_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("mask_{index:03}.f64"))
}

pub fn noise_to_kv(noise: &Noise, rec: &mut KvRecord) {
    rec.set("noise.kind", noise.kind_str());
    match *noise {
        Noise::None => {}
        Noise::Poisson { photon_level, seed } => {
            rec.set("noise.photon_level", photon_level).set("noise.seed", seed);
        }
        Noise::Gaussian { snr_db, seed, clamped } => {
            rec.set("noise.snr_db", snr_db)
                .set("noise.seed", seed)
                .set("noise.clamped", clamped);
        }
    }
}

pub fn noise_from_kv(rec: &KvRecord) -> Result<Noise> {
    match rec.require("noise.kind")? {
        "none" => Ok(Noise::None),
        "poisson" => Ok(Noise::Poisson {
            photon_level: rec.parse_value("noise.photon_level")?,
            seed: rec.parse_value("noise.seed")?,
        }),
        "gaussian" => Ok(Noise::Gaussian {
            snr_db: rec.parse_value("noise.snr_db")?,
            seed: rec.parse_value("noise.seed")?,
            clamped: rec.parse_or("noise.clamped", false)?,
        }),
        other => Err(Error::Parse {
            origin: rec.origin().to_string(),
            msg: format!("unknown noise kind `{other}`"),
        }),
    }
}

pub fn save_stack(stack: &MeasurementStack, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut rec = KvRecord::new();
    rec.set("format", "cdpsr-stack").set("version", 1).set("frames", stack.len());
    noise_to_kv(&stack.noise(), &mut rec);
    for (i, f) in stack.frames().iter().enumerate() {
        save_real(f, &frame_path(dir, i))?;
    }
    rec.write(&dir.join(STACK_RECORD))
}

pub fn load_stack(dir: &Path) -> Result<MeasurementStack> {
    let rec = KvRecord::read(&dir.join(STACK_RECORD))?;
    let n: usize = rec.parse_value("frames")?;
    let frames = (0..n)
        .map(|i| load_real(&frame_path(dir, i)))
        .collect::<Result<Vec<_>>>()?;
    MeasurementStack::new(frames, noise_from_kv(&rec)?)
}

fn format_offsets(offsets: &[(usize, usize)]) -> String {
    offsets
        .iter()
        .map(|(x, y)| format!("{x},{y}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_offsets(text: &str, origin: &str) -> Result<Vec<(usize, usize)>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(';')
        .map(|pair| {
            let bad = || Error::Parse {
                origin: origin.to_string(),
                msg: format!("bad offset `{pair}`"),
            };
            let (x, y) = pair.split_once(',').ok_or_else(bad)?;
            Ok((x.trim().parse().map_err(|_| bad())?, y.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

pub fn mask_params_to_kv(p: &MaskParams, rec: &mut KvRecord, prefix: &str) {
    rec.set(&format!("{prefix}kind"), p.kind.as_str())
        .set(&format!("{prefix}count"), p.count)
        .set(&format!("{prefix}seed"), p.seed)
        .set(&format!("{prefix}feature_scale"), p.feature_scale)
        .set(&format!("{prefix}phase_excursion"), p.phase_excursion)
        .set(&format!("{prefix}shift_step"), p.shift_step);
}

pub fn save_masks(set: &MaskSet, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let p = &set.params;
    let mut rec = KvRecord::new();
    rec.set("format", "cdpsr-masks")
        .set("version", 1)
        .set("width", p.width)
        .set("height", p.height)
        .set("pitch", p.pitch);
    mask_params_to_kv(p, &mut rec, "");
    rec.set("offsets", format_offsets(&set.shift_offsets));
    for (i, m) in set.masks().iter().enumerate() {
        save_complex(m, &mask_path(dir, i))?;
    }
    rec.write(&dir.join(MASK_RECORD))
}

pub fn load_masks(dir: &Path) -> Result<MaskSet> {
    let rec = KvRecord::read(&dir.join(MASK_RECORD))?;
    let kind: MaskKind = rec.require("kind")?.parse()?;
    let mut params = MaskParams::new(
        kind,
        rec.parse_value("count")?,
        rec.parse_value("width")?,
        rec.parse_value("height")?,
        rec.parse_value("pitch")?,
        rec.parse_value("seed")?,
    );
    params.feature_scale = rec.parse_value("feature_scale")?;
    params.phase_excursion = rec.parse_value("phase_excursion")?;
    params.shift_step = rec.parse_value("shift_step")?;
    let offsets = parse_offsets(rec.get("offsets").unwrap_or(""), rec.origin())?;
    let masks = (0..params.count)
        .map(|i| load_complex(&mask_path(dir, i)))
        .collect::<Result<Vec<_>>>()?;
    MaskSet::from_masks(params, offsets, masks)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Per-iteration CSV. Elapsed times are left blank unless `timing` is set,
/// so the log is reproducible.
pub fn iteration_log(records: &[IterationRecord], timing: bool) -> String {
    let mut out = format!("{ITERATION_LOG_HEADER}\n");
    for r in records {
        let elapsed = if timing {
            format!("{:.3}", r.elapsed.as_secs_f64())
        } else {
            String::new()
        };
        out += &format!(
            "{},{:.9e},{},{},{elapsed}\n",
            r.iteration,
            r.residual,
            opt(r.psnr_amplitude),
            opt(r.psnr_phase)
        );
    }
    out
}

/// Writes the final field, a summary record and the iteration log into `dir`.
pub fn save_result(result: &ReconResult, algo: &str, dir: &Path, timing: bool) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    save_complex(&result.field, &dir.join(RESULT_FIELD))?;
    let mut rec = KvRecord::new();
    rec.set("format", "cdpsr-result")
        .set("version", 1)
        .set("algo", algo)
        .set("iterations", result.per_iteration.len())
        .set("converged", result.converged);
    if let Some(last) = result.per_iteration.last() {
        rec.set("final_residual", format!("{:.9e}", last.residual));
    }
    if timing {
        rec.set("wall_seconds", format!("{:.3}", result.wall_time.as_secs_f64()));
    }
    rec.write(&dir.join(RESULT_RECORD))?;
    std::fs::write(dir.join(ITERATION_LOG), iteration_log(&result.per_iteration, timing))?;
    Ok(())
}

/// Loads the field written by [`save_result`]; `path` may be the directory
/// or the dump itself.
pub fn load_result_field(path: &Path) -> Result<ComplexField> {
    if path.is_dir() {
        load_complex(&path.join(RESULT_FIELD))
    } else {
        load_complex(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SamplingGeometry;
    use crate::forward::{add_gaussian_noise, generate_mask_set, simulate_measurements};
    use crate::propagation::OpticalConfig;
    use crate::targets::builtin_target;

    #[test]
    fn stack_and_masks_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let geom = SamplingGeometry::from_detector(2, 1.4).unwrap();
        let optics = OpticalConfig::new(0.532, 800.0, geom).unwrap();
        let mut p = MaskParams::new(MaskKind::ShiftedDiffuser, 4, 16, 16, geom.hr_pitch(), 9);
        p.feature_scale = 2;
        let masks = generate_mask_set(&p).unwrap();
        let truth = builtin_target(16, 16, geom.hr_pitch()).unwrap();
        let stack = add_gaussian_noise(&simulate_measurements(&truth, &masks, &optics).unwrap(), 12.5, 3).unwrap();
        save_stack(&stack, &dir.path().join("s")).unwrap();
        save_masks(&masks, &dir.path().join("m")).unwrap();
        assert_eq!(load_stack(&dir.path().join("s")).unwrap(), stack);
        assert_eq!(load_masks(&dir.path().join("m")).unwrap(), masks);
    }

    #[test]
    fn offsets_text() {
        let o = vec![(0, 0), (2, 4)];
        assert_eq!(parse_offsets(&format_offsets(&o), "t").unwrap(), o);
        assert!(parse_offsets("1;2", "t").is_err());
        assert!(parse_offsets("", "t").unwrap().is_empty());
    }
}
