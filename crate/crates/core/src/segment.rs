//! Cell segmentation: binarize, fill holes, distance transform, marker-driven
//! watershed, then count labels (optionally dropping those on the border).

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::path::Path;

use image::{ImageBuffer, Luma, Rgb};

use crate::error::{Error, Result};
use crate::field::RealImage;

pub const DEFAULT_MIN_DISTANCE: usize = 7;
const OTSU_BINS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Otsu,
    /// Foreground is `value > t`.
    Fixed(f64),
}

impl std::str::FromStr for Threshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "otsu" {
            return Ok(Threshold::Otsu);
        }
        s.parse::<f64>()
            .ok()
            .filter(|t| t.is_finite())
            .map(Threshold::Fixed)
            .ok_or_else(|| Error::config(format!("threshold must be `otsu` or a number, got `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    count: usize,
}

impl LabelMap {
    /// Relabels `raw` so nonzero labels become `1..=count` in row-major order
    /// of first appearance.
    pub fn from_raw(width: usize, height: usize, raw: &[u32]) -> Result<Self> {
        if raw.len() != width * height {
            return Err(Error::shape(format!(
                "{} labels for a {width}x{height} grid",
                raw.len()
            )));
        }
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|&l| {
                if l == 0 {
                    0
                } else {
                    let next = map.len() as u32 + 1;
                    *map.entry(l).or_insert(next)
                }
            })
            .collect();
        Ok(Self {
            width,
            height,
            labels,
            count: map.len(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.width + col]
    }

    /// Labels with at least one pixel on the image border.
    pub fn border_labels(&self) -> Vec<bool> {
        let mut touches = vec![false; self.count + 1];
        let (w, h) = (self.width, self.height);
        for c in 0..w {
            touches[self.labels[c] as usize] = true;
            touches[self.labels[(h - 1) * w + c] as usize] = true;
        }
        for r in 0..h {
            touches[self.labels[r * w] as usize] = true;
            touches[self.labels[r * w + w - 1] as usize] = true;
        }
        touches[0] = false;
        touches
    }

    /// Labels as a 16-bit grayscale PNG (pixel value = label).
    pub fn save_png(&self, path: &Path) -> Result<()> {
        if self.count > u16::MAX as usize {
            return Err(Error::invalid(format!("{} labels do not fit 16 bits", self.count)));
        }
        let px: Vec<u16> = self.labels.iter().map(|&l| l as u16).collect();
        let buf: ImageBuffer<Luma<u16>, _> =
            ImageBuffer::from_raw(self.width as u32, self.height as u32, px).expect("sized buffer");
        buf.save(path)?;
        Ok(())
    }

    /// Color preview: background black, labels on a fixed hashed palette.
    pub fn save_preview_png(&self, path: &Path) -> Result<()> {
        let px: Vec<u8> = self.labels.iter().flat_map(|&l| label_color(l)).collect();
        let buf: ImageBuffer<Rgb<u8>, _> =
            ImageBuffer::from_raw(self.width as u32, self.height as u32, px).expect("sized buffer");
        buf.save(path)?;
        Ok(())
    }
}

fn label_color(l: u32) -> [u8; 3] {
    if l == 0 {
        return [0, 0, 0];
    }
    let h = l.wrapping_mul(2_654_435_761);
    [64 + (h >> 24) as u8 % 192, 64 + (h >> 16) as u8 % 192, 64 + (h >> 8) as u8 % 192]
}

/// Otsu threshold over 256 bins spanning `[min, max]`. Returns the upper edge
/// of the last background bin; a constant image yields its value.
pub fn otsu_threshold(img: &RealImage) -> f64 {
    let (lo, hi) = (img.min(), img.max());
    if !(hi > lo) {
        return lo;
    }
    let scale = OTSU_BINS as f64 / (hi - lo);
    let mut hist = [0u64; OTSU_BINS];
    for &v in img.data() {
        hist[(((v - lo) * scale) as usize).min(OTSU_BINS - 1)] += 1;
    }
    let total = img.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let (mut best, mut best_k) = (-1.0, 0);
    for (k, &c) in hist.iter().enumerate().take(OTSU_BINS - 1) {
        w0 += c as f64;
        sum0 += k as f64 * c as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if between > best {
            best = between;
            best_k = k;
        }
    }
    lo + (best_k + 1) as f64 / scale
}

pub fn binarize(img: &RealImage, threshold: Threshold) -> Vec<bool> {
    let t = match threshold {
        Threshold::Otsu => otsu_threshold(img),
        Threshold::Fixed(t) => t,
    };
    img.data().iter().map(|&v| v > t).collect()
}

/// Sets background pixels not 4-connected to the border to foreground.
pub fn fill_holes(mask: &[bool], width: usize, height: usize) -> Vec<bool> {
    let mut outside = vec![false; mask.len()];
    let mut queue = VecDeque::new();
    let seed = |i: usize, outside: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
        if !mask[i] && !outside[i] {
            outside[i] = true;
            queue.push_back(i);
        }
    };
    for c in 0..width {
        seed(c, &mut outside, &mut queue);
        seed((height - 1) * width + c, &mut outside, &mut queue);
    }
    for r in 0..height {
        seed(r * width, &mut outside, &mut queue);
        seed(r * width + width - 1, &mut outside, &mut queue);
    }
    while let Some(i) = queue.pop_front() {
        let (r, c) = (i / width, i % width);
        for j in neighbors4(r, c, width, height) {
            seed(j, &mut outside, &mut queue);
        }
    }
    outside.iter().map(|&o| !o).collect()
}

fn neighbors4(r: usize, c: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let up = (r > 0).then(|| (r - 1) * w + c);
    let down = (r + 1 < h).then(|| (r + 1) * w + c);
    let left = (c > 0).then(|| r * w + c - 1);
    let right = (c + 1 < w).then(|| r * w + c + 1);
    [up, down, left, right].into_iter().flatten()
}

fn neighbors8(r: usize, c: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    (-1i64..=1).flat_map(move |dr| {
        (-1i64..=1).filter_map(move |dc| {
            let (rr, cc) = (r as i64 + dr, c as i64 + dc);
            ((dr, dc) != (0, 0) && rr >= 0 && cc >= 0 && (rr as usize) < h && (cc as usize) < w)
                .then(|| rr as usize * w + cc as usize)
        })
    })
}

/// 1-D squared distance transform of a sampled function (lower envelope of
/// parabolas).
fn edt_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut sites = (0..n).filter(|&q| f[q].is_finite());
    let Some(first) = sites.next() else {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    };
    let mut v = vec![first];
    let mut z = vec![f64::NEG_INFINITY, f64::INFINITY];
    let meet = |q: usize, p: usize| {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64))
    };
    for q in sites {
        let mut s = meet(q, *v.last().unwrap());
        // z[0] is −∞, so the envelope never empties
        while s <= z[v.len() - 1] {
            v.pop();
            z.pop();
            s = meet(q, *v.last().unwrap());
        }
        *z.last_mut().unwrap() = s;
        v.push(q);
        z.push(f64::INFINITY);
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact Euclidean distance from each foreground pixel to the nearest
/// background pixel; background is 0. Pixels outside the image count as
/// foreground, so an all-foreground image is at infinite distance.
pub fn distance_transform(mask: &[bool], width: usize, height: usize) -> Vec<f64> {
    let mut g = vec![0.0; mask.len()];
    let mut col = vec![0.0; height];
    let mut tmp = vec![0.0; height];
    for c in 0..width {
        for r in 0..height {
            col[r] = if mask[r * width + c] { f64::INFINITY } else { 0.0 };
        }
        edt_1d(&col, &mut tmp);
        for r in 0..height {
            g[r * width + c] = tmp[r];
        }
    }
    let mut out = vec![0.0; mask.len()];
    let mut row_out = vec![0.0; width];
    for r in 0..height {
        edt_1d(&g[r * width..(r + 1) * width], &mut row_out);
        for c in 0..width {
            out[r * width + c] = row_out[c].sqrt();
        }
    }
    out
}

/// Local maxima of `dist` inside the foreground, taken in descending order
/// (ties row-major) and suppressed within Chebyshev radius `min_distance` of
/// an already accepted marker.
pub fn find_markers(dist: &[f64], mask: &[bool], width: usize, height: usize, min_distance: usize) -> Vec<usize> {
    let md = min_distance as i64;
    let is_peak = |i: usize| {
        let (r, c) = ((i / width) as i64, (i % width) as i64);
        let d = dist[i];
        for rr in (r - md).max(0)..=(r + md).min(height as i64 - 1) {
            for cc in (c - md).max(0)..=(c + md).min(width as i64 - 1) {
                if dist[rr as usize * width + cc as usize] > d {
                    return false;
                }
            }
        }
        true
    };
    let mut cands: Vec<usize> = (0..mask.len()).filter(|&i| mask[i] && is_peak(i)).collect();
    cands.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(a.cmp(&b)));
    let mut taken: Vec<usize> = Vec::new();
    for i in cands {
        let (r, c) = ((i / width) as i64, (i % width) as i64);
        let close = taken.iter().any(|&j| {
            let (rj, cj) = ((j / width) as i64, (j % width) as i64);
            (r - rj).abs() <= md && (c - cj).abs() <= md
        });
        if !close {
            taken.push(i);
        }
    }
    taken
}

/// Priority-flood watershed of `-dist` from `markers`, restricted to `mask`.
/// Foreground components without a marker get labels of their own.
fn watershed(dist: &[f64], mask: &[bool], markers: &[usize], width: usize, height: usize) -> Vec<u32> {
    let mut labels = vec![0u32; mask.len()];
    let mut heap = BinaryHeap::new();
    let key = |i: usize| Reverse(ordered(-dist[i]));
    for (k, &m) in markers.iter().enumerate() {
        labels[m] = k as u32 + 1;
        heap.push((key(m), Reverse(m)));
    }
    let mut next = markers.len() as u32 + 1;
    loop {
        while let Some((_, Reverse(i))) = heap.pop() {
            let (r, c) = (i / width, i % width);
            for j in neighbors8(r, c, width, height) {
                if mask[j] && labels[j] == 0 {
                    labels[j] = labels[i];
                    heap.push((key(j), Reverse(j)));
                }
            }
        }
        match (0..mask.len()).find(|&i| mask[i] && labels[i] == 0) {
            Some(i) => {
                labels[i] = next;
                next += 1;
                heap.push((key(i), Reverse(i)));
            }
            None => break,
        }
    }
    labels
}

/// Total order on finite f64 for heap keys.
fn ordered(x: f64) -> i64 {
    let b = x.to_bits() as i64;
    b ^ (((b >> 63) as u64) >> 1) as i64
}

/// Full pipeline: binarize, fill holes, distance transform, markers,
/// watershed.
pub fn watershed_segment(img: &RealImage, threshold: Threshold, min_distance: usize) -> Result<LabelMap> {
    let (w, h) = (img.width(), img.height());
    let mask = fill_holes(&binarize(img, threshold), w, h);
    let dist = distance_transform(&mask, w, h);
    let markers = find_markers(&dist, &mask, w, h, min_distance);
    LabelMap::from_raw(w, h, &watershed(&dist, &mask, &markers, w, h))
}

/// Number of labels, optionally ignoring those touching the border.
pub fn count_cells(labels: &LabelMap, exclude_margin: bool) -> usize {
    if !exclude_margin {
        return labels.count();
    }
    labels.border_labels().iter().skip(1).filter(|&&t| !t).count()
}

/// Binary disk fixtures used in tests and examples.
pub mod fixtures {
    use crate::field::RealImage;

    /// Image with value 1 inside any of `disks` (`(cx, cy, r)`), 0 elsewhere.
    pub fn disks(width: usize, height: usize, disks: &[(f64, f64, f64)]) -> RealImage {
        let data = (0..height)
            .flat_map(|r| (0..width).map(move |c| (r as f64, c as f64)))
            .map(|(y, x)| {
                let inside = disks
                    .iter()
                    .any(|&(cx, cy, rad)| (x - cx).powi(2) + (y - cy).powi(2) <= rad * rad);
                if inside {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        RealImage::from_parts(width, height, 1.0, data)
    }

    /// 70 separated interior disks on a 10×7 lattice with varied radii.
    pub fn seventy_disks() -> RealImage {
        let mut d = Vec::new();
        for j in 0..7 {
            for i in 0..10 {
                let r = 6.0 + ((i * 3 + j * 5) % 4) as f64;
                let jitter = ((i * 7 + j * 3) % 5) as f64 - 2.0;
                d.push((18.0 + 26.0 * i as f64 + jitter, 18.0 + 26.0 * j as f64 - jitter, r));
            }
        }
        disks(270, 200, &d)
    }

    /// Two overlapping disks of radius 10 whose centers are 15 px apart.
    pub fn two_overlapping() -> RealImage {
        disks(64, 48, &[(24.5, 24.0, 10.0), (39.5, 24.0, 10.0)])
    }

    /// Three interior disks and two disks cut by the image border.
    pub fn interior_and_border() -> RealImage {
        disks(
            120,
            90,
            &[(30.0, 30.0, 9.0), (70.0, 45.0, 10.0), (40.0, 65.0, 8.0), (2.0, 50.0, 8.0), (100.0, 86.0, 9.0)],
        )
    }
}
