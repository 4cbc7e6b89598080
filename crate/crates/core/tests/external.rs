use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::time::Duration;

use cdpsr::field::RealImage;
use cdpsr::priors::{denoise_complex, external_denoise, DenoiserHandle, ExternalSpec};
use cdpsr::targets::builtin_target;
use cdpsr::Error;

fn script(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, format!("#!/bin/sh\n{body}\n")).unwrap();
    std::fs::set_permissions(&p, std::fs::Permissions::from_mode(0o755)).unwrap();
    p
}

fn ramp(w: usize, h: usize) -> RealImage {
    let data = (0..w * h).map(|i| ((i * 37 % 101) as f64 / 101.0).sin() + 0.01 * i as f64).collect();
    RealImage::new(w, h, 0.5, data).unwrap()
}

fn workdir_is_empty(dir: &Path) -> bool {
    std::fs::read_dir(dir).unwrap().next().is_none()
}

#[test]
fn copy_through_is_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let work = tmp.path().join("work");
    std::fs::create_dir(&work).unwrap();
    let exe = script(tmp.path(), "copy.sh", "cp in.f64 out.f64");
    let img = ramp(13, 7);
    let out = external_denoise(&img, &ExternalSpec::new(&exe, &work), 0.3).unwrap();
    assert_eq!(out, img);
    assert!(workdir_is_empty(&work));

    // complex path: amplitude and phase each go through the adapter
    let u = builtin_target(16, 12, 0.7).unwrap();
    let h = DenoiserHandle::external(ExternalSpec::new(&exe, &work), 0.3);
    let v = denoise_complex(&u, &h, 0).unwrap();
    assert!(u.max_abs_diff(&v).unwrap() < 1e-12);
}

fn python_with_numpy() -> bool {
    std::process::Command::new("python3")
        .args(["-c", "import numpy"])
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

/// Separable Gaussian, kernel radius ceil(3σ), replicated borders.
fn gaussian_oracle(img: &RealImage, sigma: f64) -> Vec<f64> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let r = (3.0 * sigma).ceil().max(1.0) as i64;
    let mut k: Vec<f64> = (-r..=r).map(|t| (-(t * t) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    let at = |d: &[f64], x: i64, y: i64| d[(y.clamp(0, h - 1) * w + x.clamp(0, w - 1)) as usize];
    let src = img.data();
    let mut tmp = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            tmp[(y * w + x) as usize] = (-r..=r).map(|t| k[(t + r) as usize] * at(src, x + t, y)).sum();
        }
    }
    let mut out = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            out[(y * w + x) as usize] = (-r..=r).map(|t| k[(t + r) as usize] * at(&tmp, x, y + t)).sum();
        }
    }
    out
}

#[test]
fn gaussian_tool_matches_convolution_oracle() {
    if !python_with_numpy() {
        eprintln!("skipping: python3 with numpy not available");
        return;
    }
    let tool = Path::new(env!("CARGO_MANIFEST_DIR")).join("tools/gaussian_blur.py");
    let work = tempfile::tempdir().unwrap();
    let img = ramp(23, 17);
    for sigma in [0.6, 1.5] {
        let out = external_denoise(&img, &ExternalSpec::new(&tool, work.path()), sigma).unwrap();
        let want = gaussian_oracle(&img, sigma);
        let err = out.data().iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "sigma {sigma}: max error {err}");
    }
    let same = external_denoise(&img, &ExternalSpec::new(&tool, work.path()), 0.0).unwrap();
    assert_eq!(same, img);
    assert!(workdir_is_empty(work.path()));
}

#[test]
fn missing_executable_leaves_nothing_behind() {
    let tmp = tempfile::tempdir().unwrap();
    let work = tmp.path().join("work");
    std::fs::create_dir(&work).unwrap();
    let spec = ExternalSpec::new(tmp.path().join("no-such-denoiser"), &work);
    let err = external_denoise(&ramp(4, 4), &spec, 1.0).unwrap_err();
    assert!(matches!(err, Error::DenoiserMissing(_)), "{err}");
    assert!(workdir_is_empty(&work));
}

#[test]
fn failures_are_reported_and_cleaned_up() {
    let tmp = tempfile::tempdir().unwrap();
    let work = tmp.path().join("work");
    std::fs::create_dir(&work).unwrap();
    let img = ramp(5, 4);

    let fail = script(tmp.path(), "fail.sh", "echo broken >&2\nexit 3");
    match external_denoise(&img, &ExternalSpec::new(&fail, &work), 1.0).unwrap_err() {
        Error::DenoiserFailed { code, stderr } => {
            assert_eq!(code, Some(3));
            assert_eq!(stderr.trim(), "broken");
        }
        other => panic!("unexpected {other}"),
    }
    assert!(workdir_is_empty(&work));

    let short = script(tmp.path(), "short.sh", "head -c 16 in.f64 > out.f64");
    match external_denoise(&img, &ExternalSpec::new(&short, &work), 1.0).unwrap_err() {
        Error::DenoiserShape { expected, got } => assert_eq!((expected, got), (20, 2)),
        other => panic!("unexpected {other}"),
    }
    let silent = script(tmp.path(), "silent.sh", "exit 0");
    assert!(matches!(
        external_denoise(&img, &ExternalSpec::new(&silent, &work), 1.0),
        Err(Error::DenoiserShape { got: 0, .. })
    ));

    let slow = script(tmp.path(), "slow.sh", "sleep 5");
    let mut spec = ExternalSpec::new(&slow, &work);
    spec.timeout = Duration::from_millis(200);
    assert!(matches!(external_denoise(&img, &spec, 1.0), Err(Error::DenoiserTimeout(_))));
    assert!(workdir_is_empty(&work));
}

#[test]
fn request_record_carries_strength() {
    let tmp = tempfile::tempdir().unwrap();
    let work = tmp.path().join("work");
    std::fs::create_dir(&work).unwrap();
    let log = tmp.path().join("seen.txt");
    let exe = script(
        tmp.path(),
        "spy.sh",
        &format!("cat req.txt >> {}\ncp in.f64 out.f64", log.display()),
    );
    external_denoise(&ramp(3, 2), &ExternalSpec::new(&exe, &work), 0.25).unwrap();
    let seen = std::fs::read_to_string(&log).unwrap();
    for line in ["width = 3", "height = 2", "strength = 0.25", "version = 1"] {
        assert!(seen.contains(line), "{seen}");
    }
}
