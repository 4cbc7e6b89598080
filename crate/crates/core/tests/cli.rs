use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = "\
target.width = 32
target.height = 32
masks.count = 4
masks.seed = 5
noise.kind = gaussian
noise.snr_db = 10
solver.iters = 5
solver.checkpoint_every = 2
";

fn cdpsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdpsr")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = cdpsr(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn small_config(dir: &Path) -> PathBuf {
    let p = dir.join("c.txt");
    std::fs::write(&p, SMALL).unwrap();
    p
}

#[test]
fn simulate_reconstruct_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let sim = dir.path().join("sim");
    let stdout = ok(&["simulate", "--config", s(&cfg), "--out", s(&sim)]);
    assert!(stdout.starts_with("frames=4 "), "{stdout}");
    for f in ["truth.f64", "truth.meta", "config.txt", "stack/stack.txt", "masks/masks.txt", "amplitude.png"] {
        assert!(sim.join(f).exists(), "missing {f}");
    }

    let rec = dir.path().join("rec");
    let stdout = ok(&["reconstruct", "--algo", "do-tv", "--input", s(&sim), "--out", s(&rec)]);
    assert!(stdout.starts_with("algo=do-tv iterations=5 "), "{stdout}");
    for f in ["field.f64", "result.txt", "iterations.csv", "checkpoints/iter_0002.f64", "checkpoints/iter_0004.f64"] {
        assert!(rec.join(f).exists(), "missing {f}");
    }
    let log = std::fs::read_to_string(rec.join("iterations.csv")).unwrap();
    assert_eq!(log.lines().count(), 6);
    assert!(log.starts_with("iteration,residual,"));

    let stdout = ok(&["evaluate", "--field", s(&rec), "--truth", s(&sim.join("truth.f64"))]);
    assert!(stdout.contains("psnr_amplitude = "), "{stdout}");
    assert!(stdout.contains("ssim_phase = "), "{stdout}");
}

#[test]
fn threads_do_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let sim = dir.path().join("sim");
    ok(&["simulate", "--config", s(&cfg), "--out", s(&sim), "--seed", "9"]);
    let mut fields = Vec::new();
    for t in ["1", "4"] {
        let out = dir.path().join(format!("rec{t}"));
        ok(&["reconstruct", "--algo", "conv", "--input", s(&sim), "--out", s(&out), "--threads", t]);
        fields.push(std::fs::read(out.join("field.f64")).unwrap());
    }
    assert_eq!(fields[0], fields[1]);
}

#[test]
fn segment_counts_fixture_disks() {
    assert_eq!(ok(&["segment", "--image", s(&fixture("seventy_disks.png"))]).trim(), "count=70");
    assert_eq!(ok(&["segment", "--image", s(&fixture("interior_and_border.png"))]).trim(), "count=3");
    let all = ok(&["segment", "--image", s(&fixture("interior_and_border.png")), "--keep-border"]);
    assert_eq!(all.trim(), "count=5");
}

#[test]
fn bench_and_masks() {
    let dir = tempfile::tempdir().unwrap();
    let smoke = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/smoke.txt");
    let out = dir.path().join("bench");
    let stdout = ok(&["bench", "--config", s(&smoke), "--out", s(&out)]);
    assert!(stdout.starts_with(cdpsr::bench::CSV_HEADER));
    assert_eq!(stdout.lines().count(), 1 + 4 * 2);
    assert_eq!(std::fs::read_to_string(out.join("results.csv")).unwrap(), stdout);

    let masks = dir.path().join("masks");
    let stdout = ok(&["masks", "--config", s(&small_config(dir.path())), "--out", s(&masks)]);
    assert!(stdout.starts_with("masks=4 "), "{stdout}");
    assert!(masks.join("masks.txt").exists());
}

#[test]
fn bad_input_fails_with_message() {
    let out = cdpsr(&["simulate", "--no-such-flag"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = cdpsr(&["frobnicate"]);
    assert!(!out.status.success());

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.txt");
    std::fs::write(&cfg, "optics.thta = 2\n").unwrap();
    let out = cdpsr(&["simulate", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("optics.thta"));
}
