//! File-based adapter for denoisers running in a separate process.
//!
//! Protocol, version 1. In the working directory the adapter writes
//!
//! * `in.f64`: the input grid, little-endian `f64`, row-major;
//! * `req.txt`: `width`, `height`, `strength` and `version = 1` as
//!   `key = value` lines;
//!
//! then runs the executable with the working directory as its current
//! directory. On exit status 0 the executable must have written `out.f64`
//! with exactly `width × height` samples. All three files are removed when
//! the call returns.

use std::collections::HashMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::field::RealImage;
use crate::io::{read_f64_raw, write_f64_raw};
use crate::kv::KvRecord;

pub const PROTOCOL_VERSION: u32 = 1;
pub const REQUEST_INPUT: &str = "in.f64";
pub const REQUEST_RECORD: &str = "req.txt";
pub const RESPONSE_OUTPUT: &str = "out.f64";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

/// How to invoke an external denoiser.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSpec {
    pub executable: PathBuf,
    pub args: Vec<String>,
    pub workdir: PathBuf,
    pub timeout: Duration,
}

impl ExternalSpec {
    pub fn new(executable: impl Into<PathBuf>, workdir: impl Into<PathBuf>) -> Self {
        Self {
            executable: executable.into(),
            args: Vec::new(),
            workdir: workdir.into(),
            timeout: DEFAULT_TIMEOUT,
        }
    }
}

/// One in-flight request per working directory.
fn workdir_lock(dir: &Path) -> Arc<Mutex<()>> {
    static LOCKS: OnceLock<Mutex<HashMap<PathBuf, Arc<Mutex<()>>>>> = OnceLock::new();
    let key = dir.canonicalize().unwrap_or_else(|_| dir.to_path_buf());
    LOCKS
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .entry(key)
        .or_default()
        .clone()
}

struct Cleanup<'a>(&'a Path);

impl Drop for Cleanup<'_> {
    fn drop(&mut self) {
        for name in [REQUEST_INPUT, REQUEST_RECORD, RESPONSE_OUTPUT] {
            let _ = std::fs::remove_file(self.0.join(name));
        }
    }
}

/// Runs the external denoiser on `img` with the given strength hint.
pub fn external_denoise(img: &RealImage, spec: &ExternalSpec, strength: f64) -> Result<RealImage> {
    if !spec.executable.is_file() {
        return Err(Error::DenoiserMissing(spec.executable.clone()));
    }
    if !spec.workdir.is_dir() {
        return Err(Error::config(format!(
            "denoiser working directory {} does not exist",
            spec.workdir.display()
        )));
    }
    let lock = workdir_lock(&spec.workdir);
    let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
    let _cleanup = Cleanup(&spec.workdir);

    let _ = std::fs::remove_file(spec.workdir.join(RESPONSE_OUTPUT));
    write_f64_raw(&spec.workdir.join(REQUEST_INPUT), img.data())?;
    let mut req = KvRecord::new();
    req.set("width", img.width())
        .set("height", img.height())
        .set("strength", strength)
        .set("version", PROTOCOL_VERSION);
    req.write(&spec.workdir.join(REQUEST_RECORD))?;

    let mut child = Command::new(&spec.executable)
        .args(&spec.args)
        .current_dir(&spec.workdir)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()?;
    let mut stderr_pipe = child.stderr.take().expect("stderr piped");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr_pipe.read_to_string(&mut s);
        s
    });

    let start = Instant::now();
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if start.elapsed() >= spec.timeout {
            let _ = child.kill();
            let _ = child.wait();
            // Grandchildren may still hold stderr open; don't wait for them.
            drop(reader);
            return Err(Error::DenoiserTimeout(spec.timeout));
        }
        std::thread::sleep(Duration::from_millis(2));
    };
    let stderr = reader.join().unwrap_or_default();
    if !status.success() {
        return Err(Error::DenoiserFailed {
            code: status.code(),
            stderr,
        });
    }
    let out = read_f64_raw(&spec.workdir.join(RESPONSE_OUTPUT)).map_err(|e| match e {
        Error::Io(_) => Error::DenoiserShape {
            expected: img.len(),
            got: 0,
        },
        other => other,
    })?;
    if out.len() != img.len() {
        return Err(Error::DenoiserShape {
            expected: img.len(),
            got: out.len(),
        });
    }
    img.with_data(out)
}
