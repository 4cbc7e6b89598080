//! Raw float dumps with key-value sidecars, and grayscale PNG previews.
//!
//! A dump `name.f64` holds little-endian `f64` samples in row-major order;
//! complex dumps interleave `re, im`. The sidecar `name.meta` records width,
//! height, pitch and whether the samples are complex.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use image::{ImageBuffer, Luma};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, RealImage};
use crate::kv::KvRecord;

pub const DUMP_FORMAT: &str = "cdpsr-dump";
pub const DUMP_VERSION: u32 = 1;

/// Path of the sidecar metadata for a dump path.
pub fn meta_path(dump: &Path) -> PathBuf {
    dump.with_extension("meta")
}

pub fn write_f64_raw(path: &Path, values: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn read_f64_raw(path: &Path) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse {
            origin: path.display().to_string(),
            msg: format!("{} bytes is not a whole number of f64 samples", bytes.len()),
        });
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

fn write_meta(dump: &Path, width: usize, height: usize, pitch: f64, complex: bool) -> Result<()> {
    let mut rec = KvRecord::new();
    rec.set("format", DUMP_FORMAT)
        .set("version", DUMP_VERSION)
        .set("width", width)
        .set("height", height)
        .set("pitch", pitch)
        .set("kind", if complex { "complex" } else { "real" })
        .set("layout", "row-major")
        .set("endian", "little");
    rec.write(&meta_path(dump))
}

struct DumpMeta {
    width: usize,
    height: usize,
    pitch: f64,
    complex: bool,
}

fn read_meta(dump: &Path) -> Result<DumpMeta> {
    let rec = KvRecord::read(&meta_path(dump))?;
    if rec.require("format")? != DUMP_FORMAT {
        return Err(Error::Parse {
            origin: rec.origin().to_string(),
            msg: "not a field dump sidecar".into(),
        });
    }
    let complex = match rec.require("kind")? {
        "complex" => true,
        "real" => false,
        other => {
            return Err(Error::Parse {
                origin: rec.origin().to_string(),
                msg: format!("unknown kind `{other}`"),
            })
        }
    };
    Ok(DumpMeta {
        width: rec.parse_value("width")?,
        height: rec.parse_value("height")?,
        pitch: rec.parse_value("pitch")?,
        complex,
    })
}

/// Whether the dump at `path` holds a complex field.
pub fn is_complex_dump(path: &Path) -> Result<bool> {
    Ok(read_meta(path)?.complex)
}

pub fn save_complex(field: &ComplexField, path: &Path) -> Result<()> {
    let flat: Vec<f64> = field.data().iter().flat_map(|c| [c.re, c.im]).collect();
    write_f64_raw(path, &flat)?;
    write_meta(path, field.width(), field.height(), field.pitch(), true)
}

pub fn load_complex(path: &Path) -> Result<ComplexField> {
    let meta = read_meta(path)?;
    if !meta.complex {
        return Err(Error::Parse {
            origin: path.display().to_string(),
            msg: "expected a complex dump".into(),
        });
    }
    let raw = read_f64_raw(path)?;
    let data = raw
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    ComplexField::new(meta.width, meta.height, meta.pitch, data)
}

pub fn save_real(img: &RealImage, path: &Path) -> Result<()> {
    write_f64_raw(path, img.data())?;
    write_meta(path, img.width(), img.height(), img.pitch(), false)
}

pub fn load_real(path: &Path) -> Result<RealImage> {
    let meta = read_meta(path)?;
    if meta.complex {
        return Err(Error::Parse {
            origin: path.display().to_string(),
            msg: "expected a real dump".into(),
        });
    }
    RealImage::new(meta.width, meta.height, meta.pitch, read_f64_raw(path)?)
}

/// How real samples are mapped to gray levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PngScaling {
    /// Linear map of `[min, max]` onto the full gray range.
    MinMax,
    /// Wrap to `[−π, π)` and map that interval onto the gray range.
    Phase,
    /// Samples are already levels; clamp to `[0, 1]`.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

/// Wraps an angle to `[−π, π)`.
pub fn wrap_phase(p: f64) -> f64 {
    let w = (p + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

/// Gray levels in `[0, 1]` for `img` under `scaling`.
pub fn normalized_levels(img: &RealImage, scaling: PngScaling) -> Vec<f64> {
    match scaling {
        PngScaling::MinMax => {
            let (lo, hi) = (img.min(), img.max());
            let span = hi - lo;
            img.data()
                .iter()
                .map(|&v| if span > 0.0 { (v - lo) / span } else { 0.0 })
                .collect()
        }
        PngScaling::Phase => img
            .data()
            .iter()
            .map(|&v| (wrap_phase(v) + PI) / (2.0 * PI))
            .collect(),
        PngScaling::Unit => img.data().iter().map(|v| v.clamp(0.0, 1.0)).collect(),
    }
}

pub fn save_png(img: &RealImage, path: &Path, scaling: PngScaling, depth: BitDepth) -> Result<()> {
    let levels = normalized_levels(img, scaling);
    let (w, h) = (img.width() as u32, img.height() as u32);
    match depth {
        BitDepth::Eight => {
            let px: Vec<u8> = levels.iter().map(|&l| (l * 255.0).round() as u8).collect();
            let buf: ImageBuffer<Luma<u8>, _> =
                ImageBuffer::from_raw(w, h, px).expect("buffer sized to image");
            buf.save(path)?;
        }
        BitDepth::Sixteen => {
            let px: Vec<u16> = levels.iter().map(|&l| (l * 65535.0).round() as u16).collect();
            let buf: ImageBuffer<Luma<u16>, _> =
                ImageBuffer::from_raw(w, h, px).expect("buffer sized to image");
            buf.save(path)?;
        }
    }
    Ok(())
}

/// Loads a grayscale PNG (8 or 16 bit) as samples in `[0, 1]`.
pub fn load_png_gray(path: &Path, pitch: f64) -> Result<RealImage> {
    let img = image::open(path)?.into_luma16();
    let (w, h) = img.dimensions();
    let data = img.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect();
    RealImage::new(w as usize, h as usize, pitch, data)
}
