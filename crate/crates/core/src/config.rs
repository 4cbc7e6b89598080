//! Experiment configuration as a flat `section.key = value` record.
//!
//! Every key has a default, so an empty file is a valid config. Unknown keys
//! are rejected. Relative paths are resolved against the config file's
//! directory when loading; saving writes every key, so load → save → load is
//! the identity.

use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::error::{Error, Result};
use crate::field::SamplingGeometry;
use crate::forward::{MaskKind, MaskParams, Noise};
use crate::kv::KvRecord;
use crate::priors::{DenoiserHandle, ExternalSpec, Schedule, DEFAULT_PHASE_RATIO, DEFAULT_TV_AMPLITUDE, DEFAULT_TV_ITERS};
use crate::propagation::OpticalConfig;
use crate::segment::{Threshold, DEFAULT_MIN_DISTANCE};
use crate::solver::{Init, Ordering, PatchUpdate, ReconConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum TargetSource {
    /// The procedural amplitude/phase pair from [`crate::targets`].
    Builtin { width: usize, height: usize },
    /// Gray PNGs: amplitude levels as is, phase levels mapped to `[−π/2, π/2]`.
    Png { amplitude: PathBuf, phase: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    Conv,
    DoTv,
    DoExt,
}

impl Algo {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algo::Conv => "conv",
            Algo::DoTv => "do-tv",
            Algo::DoExt => "do-ext",
        }
    }
}

impl std::str::FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conv" => Ok(Algo::Conv),
            "do-tv" => Ok(Algo::DoTv),
            "do-ext" => Ok(Algo::DoExt),
            other => Err(Error::config(format!("unknown algorithm `{other}` (conv, do-tv, do-ext)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    None,
    Poisson,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub photon_level: f64,
    pub snr_db: f64,
    pub seed: u64,
    pub clamped: bool,
}

impl NoiseSpec {
    pub fn to_noise(&self) -> Noise {
        match self.kind {
            NoiseKind::None => Noise::None,
            NoiseKind::Poisson => Noise::Poisson {
                photon_level: self.photon_level,
                seed: self.seed,
            },
            NoiseKind::Gaussian => Noise::Gaussian {
                snr_db: self.snr_db,
                seed: self.seed,
                clamped: self.clamped,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskSpec {
    pub kind: MaskKind,
    pub count: usize,
    pub seed: u64,
    pub feature_scale: usize,
    pub phase_excursion: f64,
    pub shift_step: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiserSpec {
    pub strength: f64,
    pub phase_ratio: f64,
    pub schedule: Schedule,
    pub tv_iters: usize,
    pub external: Option<ExternalSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsToggles {
    pub ssim: bool,
    /// Segment the reconstructed amplitude and report a cell count.
    pub segment: bool,
    pub threshold: Threshold,
    pub min_distance: usize,
    pub exclude_margin: bool,
    pub reference_count: Option<usize>,
}

/// Values swept by the bench; an empty list means "use the base value".
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sweep {
    pub theta: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub masks: Vec<usize>,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub target: TargetSource,
    pub wavelength: f64,
    pub distance: f64,
    pub detector_pitch: f64,
    pub theta: usize,
    pub padded: bool,
    pub masks: MaskSpec,
    pub noise: NoiseSpec,
    pub solver: ReconConfig,
    /// Dump the iterate every this many iterations; 0 disables checkpoints.
    pub checkpoint_every: usize,
    pub denoiser: DenoiserSpec,
    pub algorithms: Vec<Algo>,
    pub sweep: Sweep,
    pub output_dir: PathBuf,
    pub metrics: MetricsToggles,
    /// Write wall times into reports. Off by default so reports are
    /// reproducible byte for byte.
    pub timing: bool,
    pub previews: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let base = MaskParams::new(MaskKind::IidPhase, 30, 1, 1, 1.0, 1);
        Self {
            target: TargetSource::Builtin { width: 128, height: 128 },
            wavelength: 0.532,
            distance: 21_550.0,
            detector_pitch: 1.4,
            theta: 2,
            padded: false,
            masks: MaskSpec {
                kind: base.kind,
                count: base.count,
                seed: 1,
                feature_scale: base.feature_scale,
                phase_excursion: base.phase_excursion,
                shift_step: base.shift_step,
            },
            noise: NoiseSpec {
                kind: NoiseKind::None,
                photon_level: 1000.0,
                snr_db: 10.0,
                seed: 2,
                clamped: false,
            },
            solver: ReconConfig::default(),
            checkpoint_every: 0,
            denoiser: DenoiserSpec {
                strength: DEFAULT_TV_AMPLITUDE,
                phase_ratio: DEFAULT_PHASE_RATIO,
                schedule: Schedule::Constant,
                tv_iters: DEFAULT_TV_ITERS,
                external: None,
            },
            algorithms: vec![Algo::Conv, Algo::DoTv],
            sweep: Sweep {
                workers: 1,
                ..Sweep::default()
            },
            output_dir: PathBuf::from("out"),
            metrics: MetricsToggles {
                ssim: true,
                segment: false,
                threshold: Threshold::Otsu,
                min_distance: DEFAULT_MIN_DISTANCE,
                exclude_margin: true,
                reference_count: None,
            },
            timing: false,
            previews: true,
        }
    }
}

const KEYS: &[&str] = &[
    "target.source",
    "target.width",
    "target.height",
    "target.amplitude",
    "target.phase",
    "optics.wavelength",
    "optics.distance",
    "optics.detector_pitch",
    "optics.theta",
    "optics.padded",
    "masks.kind",
    "masks.count",
    "masks.seed",
    "masks.feature_scale",
    "masks.phase_excursion",
    "masks.shift_step",
    "noise.kind",
    "noise.photon_level",
    "noise.snr_db",
    "noise.seed",
    "noise.clamped",
    "solver.eta",
    "solver.beta",
    "solver.iters",
    "solver.init",
    "solver.seed",
    "solver.epsilon",
    "solver.tol",
    "solver.ordering",
    "solver.patch_update",
    "solver.checkpoint_every",
    "denoiser.strength",
    "denoiser.phase_ratio",
    "denoiser.schedule",
    "denoiser.tv_iters",
    "denoiser.external.exe",
    "denoiser.external.args",
    "denoiser.external.workdir",
    "denoiser.external.timeout_s",
    "run.algorithms",
    "sweep.theta",
    "sweep.snr_db",
    "sweep.masks",
    "sweep.workers",
    "output.dir",
    "metrics.ssim",
    "metrics.segment",
    "metrics.threshold",
    "metrics.min_distance",
    "metrics.exclude_margin",
    "metrics.reference_count",
    "report.timing",
    "report.previews",
];

fn schedule_to_string(s: &Schedule) -> String {
    match s {
        Schedule::Constant => "constant".into(),
        Schedule::Geometric(r) => format!("geometric:{r}"),
        Schedule::List(v) => format!("list:{}", join(v)),
    }
}

fn parse_schedule(s: &str) -> Result<Schedule> {
    let bad = || Error::config(format!("bad schedule `{s}` (constant, geometric:R, list:A,B,..)"));
    if s == "constant" {
        return Ok(Schedule::Constant);
    }
    if let Some(r) = s.strip_prefix("geometric:") {
        return r.trim().parse().map(Schedule::Geometric).map_err(|_| bad());
    }
    if let Some(l) = s.strip_prefix("list:") {
        return parse_list(l).map(Schedule::List).map_err(|_| bad());
    }
    Err(bad())
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Error::config(format!("bad list item `{}`", x.trim())))
        })
        .collect()
}

fn threshold_to_string(t: &Threshold) -> String {
    match t {
        Threshold::Otsu => "otsu".into(),
        Threshold::Fixed(v) => v.to_string(),
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let rec = KvRecord::read(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let cfg = Self::from_kv(&rec, base)?;
        cfg.check_files()?;
        Ok(cfg)
    }

    /// Parses a record; relative paths are joined onto `base`.
    pub fn from_kv(rec: &KvRecord, base: &Path) -> Result<Self> {
        if let Some(k) = rec.keys().find(|k| !KEYS.contains(k)) {
            return Err(Error::Parse {
                origin: rec.origin().to_string(),
                msg: format!("unknown key `{k}`"),
            });
        }
        let d = Self::default();
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        let str_or = |k: &str, default: &str| rec.get(k).unwrap_or(default).to_string();
        let list_or = |k: &str, default: String| rec.get(k).map(str::to_string).unwrap_or(default);

        let target = match rec.get("target.source").unwrap_or("builtin") {
            "builtin" => {
                let (w, h) = match d.target {
                    TargetSource::Builtin { width, height } => (width, height),
                    _ => unreachable!(),
                };
                TargetSource::Builtin {
                    width: rec.parse_or("target.width", w)?,
                    height: rec.parse_or("target.height", h)?,
                }
            }
            "png" => TargetSource::Png {
                amplitude: resolve(rec.require("target.amplitude")?),
                phase: resolve(rec.require("target.phase")?),
            },
            other => return Err(Error::config(format!("unknown target source `{other}`"))),
        };

        let kind: MaskKind = str_or("masks.kind", d.masks.kind.as_str()).parse()?;
        let default_scale = MaskParams::new(kind, 1, 1, 1, 1.0, 0).feature_scale;
        let masks = MaskSpec {
            kind,
            count: rec.parse_or("masks.count", d.masks.count)?,
            seed: rec.parse_or("masks.seed", d.masks.seed)?,
            feature_scale: rec.parse_or("masks.feature_scale", default_scale)?,
            phase_excursion: rec.parse_or("masks.phase_excursion", d.masks.phase_excursion)?,
            shift_step: rec.parse_or("masks.shift_step", d.masks.shift_step)?,
        };

        let noise = NoiseSpec {
            kind: match rec.get("noise.kind").unwrap_or("none") {
                "none" => NoiseKind::None,
                "poisson" => NoiseKind::Poisson,
                "gaussian" => NoiseKind::Gaussian,
                other => return Err(Error::config(format!("unknown noise kind `{other}`"))),
            },
            photon_level: rec.parse_or("noise.photon_level", d.noise.photon_level)?,
            snr_db: rec.parse_or("noise.snr_db", d.noise.snr_db)?,
            seed: rec.parse_or("noise.seed", d.noise.seed)?,
            clamped: rec.parse_or("noise.clamped", d.noise.clamped)?,
        };

        let ds = &d.solver;
        let solver = ReconConfig {
            eta: rec.parse_or("solver.eta", ds.eta)?,
            beta: rec.parse_or("solver.beta", ds.beta)?,
            outer_iters: rec.parse_or("solver.iters", ds.outer_iters)?,
            init: str_or("solver.init", ds.init.as_str()).parse::<Init>()?,
            rng_seed: rec.parse_or("solver.seed", ds.rng_seed)?,
            epsilon: rec.parse_or("solver.epsilon", ds.epsilon)?,
            convergence_tol: rec.parse_or("solver.tol", ds.convergence_tol)?,
            ordering: str_or("solver.ordering", ds.ordering.as_str()).parse::<Ordering>()?,
            patch_update: str_or("solver.patch_update", ds.patch_update.as_str()).parse::<PatchUpdate>()?,
        };

        let external = match rec.get("denoiser.external.exe") {
            Some(exe) => {
                let mut spec = ExternalSpec::new(
                    resolve(exe),
                    resolve(rec.get("denoiser.external.workdir").unwrap_or("denoiser-work")),
                );
                spec.args = rec
                    .get("denoiser.external.args")
                    .map(|a| a.split_whitespace().map(str::to_string).collect())
                    .unwrap_or_default();
                let secs: f64 = rec.parse_or("denoiser.external.timeout_s", spec.timeout.as_secs_f64())?;
                if !(secs > 0.0 && secs.is_finite()) {
                    return Err(Error::config("denoiser.external.timeout_s must be positive"));
                }
                spec.timeout = Duration::from_secs_f64(secs);
                Some(spec)
            }
            None => None,
        };
        let denoiser = DenoiserSpec {
            strength: rec.parse_or("denoiser.strength", d.denoiser.strength)?,
            phase_ratio: rec.parse_or("denoiser.phase_ratio", d.denoiser.phase_ratio)?,
            schedule: parse_schedule(&str_or("denoiser.schedule", "constant"))?,
            tv_iters: rec.parse_or("denoiser.tv_iters", d.denoiser.tv_iters)?,
            external,
        };

        let algorithms = parse_list::<String>(&list_or("run.algorithms", "conv,do-tv".into()))?
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<Algo>>>()?;

        let sweep = Sweep {
            theta: parse_list(&list_or("sweep.theta", String::new()))?,
            snr_db: parse_list(&list_or("sweep.snr_db", String::new()))?,
            masks: parse_list(&list_or("sweep.masks", String::new()))?,
            workers: rec.parse_or("sweep.workers", d.sweep.workers)?,
        };

        let dm = &d.metrics;
        let metrics = MetricsToggles {
            ssim: rec.parse_or("metrics.ssim", dm.ssim)?,
            segment: rec.parse_or("metrics.segment", dm.segment)?,
            threshold: str_or("metrics.threshold", "otsu").parse()?,
            min_distance: rec.parse_or("metrics.min_distance", dm.min_distance)?,
            exclude_margin: rec.parse_or("metrics.exclude_margin", dm.exclude_margin)?,
            reference_count: match rec.get("metrics.reference_count") {
                None | Some("") => None,
                Some(_) => Some(rec.parse_value("metrics.reference_count")?),
            },
        };

        let cfg = Self {
            target,
            wavelength: rec.parse_or("optics.wavelength", d.wavelength)?,
            distance: rec.parse_or("optics.distance", d.distance)?,
            detector_pitch: rec.parse_or("optics.detector_pitch", d.detector_pitch)?,
            theta: rec.parse_or("optics.theta", d.theta)?,
            padded: rec.parse_or("optics.padded", d.padded)?,
            masks,
            noise,
            solver,
            checkpoint_every: rec.parse_or("solver.checkpoint_every", d.checkpoint_every)?,
            denoiser,
            algorithms,
            sweep,
            output_dir: resolve(&str_or("output.dir", "out")),
            metrics,
            timing: rec.parse_or("report.timing", d.timing)?,
            previews: rec.parse_or("report.previews", d.previews)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_kv(&self) -> KvRecord {
        let mut r = KvRecord::new();
        match &self.target {
            TargetSource::Builtin { width, height } => {
                r.set("target.source", "builtin")
                    .set("target.width", width)
                    .set("target.height", height);
            }
            TargetSource::Png { amplitude, phase } => {
                r.set("target.source", "png")
                    .set("target.amplitude", amplitude.display())
                    .set("target.phase", phase.display());
            }
        }
        r.set("optics.wavelength", self.wavelength)
            .set("optics.distance", self.distance)
            .set("optics.detector_pitch", self.detector_pitch)
            .set("optics.theta", self.theta)
            .set("optics.padded", self.padded);
        let m = &self.masks;
        r.set("masks.kind", m.kind.as_str())
            .set("masks.count", m.count)
            .set("masks.seed", m.seed)
            .set("masks.feature_scale", m.feature_scale)
            .set("masks.phase_excursion", m.phase_excursion)
            .set("masks.shift_step", m.shift_step);
        let n = &self.noise;
        r.set(
            "noise.kind",
            match n.kind {
                NoiseKind::None => "none",
                NoiseKind::Poisson => "poisson",
                NoiseKind::Gaussian => "gaussian",
            },
        )
        .set("noise.photon_level", n.photon_level)
        .set("noise.snr_db", n.snr_db)
        .set("noise.seed", n.seed)
        .set("noise.clamped", n.clamped);
        let s = &self.solver;
        r.set("solver.eta", s.eta)
            .set("solver.beta", s.beta)
            .set("solver.iters", s.outer_iters)
            .set("solver.init", s.init.as_str())
            .set("solver.seed", s.rng_seed)
            .set("solver.epsilon", s.epsilon)
            .set("solver.tol", s.convergence_tol)
            .set("solver.ordering", s.ordering.as_str())
            .set("solver.patch_update", s.patch_update.as_str())
            .set("solver.checkpoint_every", self.checkpoint_every);
        let dn = &self.denoiser;
        r.set("denoiser.strength", dn.strength)
            .set("denoiser.phase_ratio", dn.phase_ratio)
            .set("denoiser.schedule", schedule_to_string(&dn.schedule))
            .set("denoiser.tv_iters", dn.tv_iters);
        if let Some(e) = &dn.external {
            r.set("denoiser.external.exe", e.executable.display())
                .set("denoiser.external.args", e.args.join(" "))
                .set("denoiser.external.workdir", e.workdir.display())
                .set("denoiser.external.timeout_s", e.timeout.as_secs_f64());
        }
        r.set(
            "run.algorithms",
            self.algorithms.iter().map(Algo::as_str).collect::<Vec<_>>().join(","),
        );
        r.set("sweep.theta", join(&self.sweep.theta))
            .set("sweep.snr_db", join(&self.sweep.snr_db))
            .set("sweep.masks", join(&self.sweep.masks))
            .set("sweep.workers", self.sweep.workers);
        r.set("output.dir", self.output_dir.display());
        let mt = &self.metrics;
        r.set("metrics.ssim", mt.ssim)
            .set("metrics.segment", mt.segment)
            .set("metrics.threshold", threshold_to_string(&mt.threshold))
            .set("metrics.min_distance", mt.min_distance)
            .set("metrics.exclude_margin", mt.exclude_margin)
            .set(
                "metrics.reference_count",
                mt.reference_count.map(|c| c.to_string()).unwrap_or_default(),
            );
        r.set("report.timing", self.timing).set("report.previews", self.previews);
        r
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_kv().write(path)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.solver.outer_iters == 0 {
            return Err(Error::config("solver.iters must be >= 1"));
        }
        self.denoiser_for(Algo::DoTv)?.validate()?;
        if self.masks.count == 0 {
            return Err(Error::config("masks.count must be >= 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("run.algorithms is empty"));
        }
        if self.algorithms.contains(&Algo::DoExt) && self.denoiser.external.is_none() {
            return Err(Error::config("do-ext needs denoiser.external.exe"));
        }
        if let TargetSource::Builtin { width, height } = self.target {
            if width < 2 || height < 2 {
                return Err(Error::config("target must be at least 2x2"));
            }
        }
        if self.sweep.workers == 0 {
            return Err(Error::config("sweep.workers must be >= 1"));
        }
        for &t in self.sweep.theta.iter().chain([&self.theta]) {
            SamplingGeometry::from_detector(t, self.detector_pitch)?;
        }
        self.optics_for(self.theta)?;
        Ok(())
    }

    /// Checks that every referenced input file exists.
    pub fn check_files(&self) -> Result<()> {
        let mut files = Vec::new();
        if let TargetSource::Png { amplitude, phase } = &self.target {
            files.push(amplitude);
            files.push(phase);
        }
        if let Some(e) = &self.denoiser.external {
            files.push(&e.executable);
        }
        for f in files {
            if !f.is_file() {
                return Err(Error::config(format!("referenced file {} does not exist", f.display())));
            }
        }
        Ok(())
    }

    /// Derives all seeds from one value: masks `n`, noise `n+1`, solver `n+2`.
    pub fn reseed(&mut self, n: u64) {
        self.masks.seed = n;
        self.noise.seed = n.wrapping_add(1);
        self.solver.rng_seed = n.wrapping_add(2);
    }

    pub fn optics_for(&self, theta: usize) -> Result<OpticalConfig> {
        let geom = SamplingGeometry::from_detector(theta, self.detector_pitch)?;
        Ok(OpticalConfig::new(self.wavelength, self.distance, geom)?.with_padding(self.padded))
    }

    pub fn mask_params(&self, count: usize, width: usize, height: usize, hr_pitch: f64) -> MaskParams {
        let m = &self.masks;
        let mut p = MaskParams::new(m.kind, count, width, height, hr_pitch, m.seed);
        p.feature_scale = m.feature_scale;
        p.phase_excursion = m.phase_excursion;
        p.shift_step = m.shift_step;
        p
    }

    /// Prior for `algo`. For `do-ext` this creates the working directory.
    pub fn denoiser_for(&self, algo: Algo) -> Result<DenoiserHandle> {
        let d = &self.denoiser;
        let handle = match algo {
            Algo::Conv => return Ok(DenoiserHandle::identity()),
            Algo::DoTv => DenoiserHandle::tv(d.strength),
            Algo::DoExt => {
                let spec = d
                    .external
                    .clone()
                    .ok_or_else(|| Error::config("do-ext needs denoiser.external.exe"))?;
                std::fs::create_dir_all(&spec.workdir)?;
                DenoiserHandle::external(spec, d.strength)
            }
        };
        let mut handle = handle.with_schedule(d.schedule.clone()).with_phase_ratio(d.phase_ratio);
        handle.tv_iters = d.tv_iters;
        Ok(handle)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_record_gives_defaults() {
        let c = ExperimentConfig::from_kv(&KvRecord::new(), Path::new("")).unwrap();
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn round_trip_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let exe = dir.path().join("den.sh");
        std::fs::write(&exe, "#!/bin/sh\n").unwrap();
        let text = "\
optics.theta = 4
masks.kind = shifted-diffuser
masks.count = 16
noise.kind = gaussian
noise.snr_db = 2.5
solver.init = flat
solver.ordering = parallel-average
denoiser.schedule = list:1,0.5,0.25
denoiser.external.exe = den.sh
denoiser.external.args = --fast -q
run.algorithms = conv,do-tv,do-ext
sweep.theta = 2,4
sweep.snr_db = 2,10
metrics.threshold = 0.3
metrics.reference_count = 70
report.timing = true
";
        let p1 = dir.path().join("a.txt");
        std::fs::write(&p1, text).unwrap();
        let a = ExperimentConfig::load(&p1).unwrap();
        assert_eq!(a.theta, 4);
        assert_eq!(a.denoiser.external.as_ref().unwrap().executable, exe);
        let p2 = dir.path().join("b.txt");
        a.save(&p2).unwrap();
        let b = ExperimentConfig::load(&p2).unwrap();
        assert_eq!(a, b);
        let p3 = dir.path().join("c.txt");
        b.save(&p3).unwrap();
        assert_eq!(std::fs::read(&p2).unwrap(), std::fs::read(&p3).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        let parse = |t: &str| ExperimentConfig::from_kv(&KvRecord::parse(t, "t").unwrap(), Path::new(""));
        assert!(parse("optics.thetta = 2").is_err());
        assert!(parse("solver.eta = 3").is_err());
        assert!(parse("run.algorithms = do-ext").is_err());
        assert!(parse("denoiser.schedule = sometimes").is_err());
        assert!(parse("sweep.theta = 2,x").is_err());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.txt");
        std::fs::write(&p, "target.source = png\ntarget.amplitude = a.png\ntarget.phase = p.png\n").unwrap();
        assert!(matches!(ExperimentConfig::load(&p), Err(Error::Config(_))));
    }

    #[test]
    fn reseed_separates_streams() {
        let mut c = ExperimentConfig::default();
        c.reseed(40);
        assert_eq!((c.masks.seed, c.noise.seed, c.solver.rng_seed), (40, 41, 42));
    }
}
