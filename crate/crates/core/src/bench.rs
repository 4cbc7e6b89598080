//! Experiment runner: simulate → noise → reconstruct → metrics → analysis,
//! over a sweep of cells.
//!
//! Output layout under the config's output directory:
//!
//! ```text
//! results.csv                 one row per (cell, algorithm)
//! config.txt                  the resolved config
//! FAILED                      only when some cell failed
//! cell_000/truth.f64
//! cell_000/stack/...          see crate::store
//! cell_000/conv/field.f64, result.txt, iterations.csv, metrics.txt,
//!              amplitude.png, phase.png, checkpoints/iter_0010.f64, ...
//! ```

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::config::{Algo, ExperimentConfig, NoiseKind, NoiseSpec, TargetSource};
use crate::error::{Error, Result};
use crate::field::{ComplexField, SamplingGeometry};
use crate::forward::{
    add_gaussian_noise, add_gaussian_noise_clamped, add_poisson_noise, generate_mask_set, simulate_measurements,
    MeasurementStack,
};
use crate::io::{save_complex, save_png, BitDepth, PngScaling};
use crate::metrics::MetricsReport;
use crate::segment::{count_cells, watershed_segment};
use crate::solver::{reconstruct_observed, ReconResult};
use crate::store::{save_result, save_stack};
use crate::targets::{builtin_target, load_png_pair};

pub const RESULTS_CSV: &str = "results.csv";
pub const CSV_HEADER: &str =
    "algo,theta,noise_kind,noise_param,masks,iters,psnr_amp_db,psnr_phase_db,ssim_amp,ssim_phase,cell_count,seconds";
pub const FAILED_MARKER: &str = "FAILED";

/// One point of the sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub theta: usize,
    pub noise: NoiseSpec,
    pub masks: usize,
}

impl Cell {
    pub fn dir_name(&self) -> String {
        format!("cell_{:03}", self.index)
    }

    fn noise_param(&self) -> String {
        match self.noise.kind {
            NoiseKind::None => String::new(),
            NoiseKind::Poisson => self.noise.photon_level.to_string(),
            NoiseKind::Gaussian => self.noise.snr_db.to_string(),
        }
    }
}

/// Cells in sweep order: θ outermost, then SNR, then mask count.
pub fn sweep_cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let or_base = |v: &[usize], base: usize| if v.is_empty() { vec![base] } else { v.to_vec() };
    let thetas = or_base(&cfg.sweep.theta, cfg.theta);
    let counts = or_base(&cfg.sweep.masks, cfg.masks.count);
    let noises: Vec<NoiseSpec> = if cfg.sweep.snr_db.is_empty() {
        vec![cfg.noise.clone()]
    } else {
        cfg.sweep
            .snr_db
            .iter()
            .map(|&snr_db| NoiseSpec {
                kind: NoiseKind::Gaussian,
                snr_db,
                ..cfg.noise.clone()
            })
            .collect()
    };
    let mut cells = Vec::new();
    for &theta in &thetas {
        for noise in &noises {
            for &masks in &counts {
                cells.push(Cell {
                    index: cells.len(),
                    theta,
                    noise: noise.clone(),
                    masks,
                });
            }
        }
    }
    cells
}

/// Result of one algorithm on one cell.
#[derive(Debug, Clone)]
pub struct Row {
    pub algo: Algo,
    pub cell: Cell,
    pub result: ReconResult,
    pub report: MetricsReport,
}

impl Row {
    pub fn csv_line(&self, cfg: &ExperimentConfig) -> String {
        let r = &self.report;
        let (ssim_amp, ssim_phase) = if cfg.metrics.ssim {
            (format!("{:.6}", r.ssim_amplitude), format!("{:.6}", r.ssim_phase))
        } else {
            Default::default()
        };
        let seconds = if cfg.timing {
            format!("{:.3}", self.result.wall_time.as_secs_f64())
        } else {
            String::new()
        };
        format!(
            "{},{},{},{},{},{},{:.6},{:.6},{ssim_amp},{ssim_phase},{},{seconds}",
            self.algo.as_str(),
            self.cell.theta,
            match self.cell.noise.kind {
                NoiseKind::None => "none",
                NoiseKind::Poisson => "poisson",
                NoiseKind::Gaussian => "gaussian",
            },
            self.cell.noise_param(),
            self.cell.masks,
            self.result.per_iteration.len(),
            r.psnr_amplitude,
            r.psnr_phase,
            r.cell_count.map(|c| c.to_string()).unwrap_or_default(),
        )
    }
}

#[derive(Debug)]
pub struct BenchReport {
    pub rows: Vec<Row>,
    pub csv: String,
    pub output_dir: PathBuf,
}

impl BenchReport {
    pub fn row(&self, algo: Algo, cell_index: usize) -> Option<&Row> {
        self.rows.iter().find(|r| r.algo == algo && r.cell.index == cell_index)
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

/// Ground truth on a grid of pitch `pitch`.
pub fn load_target(cfg: &ExperimentConfig, pitch: f64) -> Result<ComplexField> {
    match &cfg.target {
        TargetSource::Builtin { width, height } => builtin_target(*width, *height, pitch),
        TargetSource::Png { amplitude, phase } => load_png_pair(amplitude, phase, pitch),
    }
}

pub fn apply_noise(stack: &MeasurementStack, noise: &NoiseSpec) -> Result<MeasurementStack> {
    match noise.kind {
        NoiseKind::None => Ok(stack.clone()),
        NoiseKind::Poisson => add_poisson_noise(stack, noise.photon_level, noise.seed),
        NoiseKind::Gaussian if noise.clamped => add_gaussian_noise_clamped(stack, noise.snr_db, noise.seed),
        NoiseKind::Gaussian => add_gaussian_noise(stack, noise.snr_db, noise.seed),
    }
}

/// Amplitude and phase previews of a field.
pub fn save_previews(field: &ComplexField, dir: &Path) -> Result<()> {
    save_png(&field.amplitude(), &dir.join("amplitude.png"), PngScaling::MinMax, BitDepth::Eight)?;
    save_png(&field.phase(), &dir.join("phase.png"), PngScaling::Phase, BitDepth::Eight)
}

/// Runs every configured algorithm on one cell, writing into `dir`.
pub fn run_cell(cfg: &ExperimentConfig, cell: &Cell, dir: &Path) -> Result<Vec<Row>> {
    stage("setup", std::fs::create_dir_all(dir).map_err(Error::from))?;
    let optics = stage("setup", cfg.optics_for(cell.theta))?;
    let geom = optics.geometry;
    let truth = stage("target", load_target(cfg, geom.hr_pitch()))?;
    stage("target", SamplingGeometry::lr_dims(&geom, truth.width(), truth.height()).map(drop))?;
    stage("target", save_complex(&truth, &dir.join("truth.f64")))?;
    let params = cfg.mask_params(cell.masks, truth.width(), truth.height(), geom.hr_pitch());
    let masks = stage("masks", generate_mask_set(&params))?;
    let clean = stage("simulate", simulate_measurements(&truth, &masks, &optics))?;
    let stack = stage("noise", apply_noise(&clean, &cell.noise))?;
    stage("noise", save_stack(&stack, &dir.join("stack")))?;

    let mut rows = Vec::new();
    for &algo in &cfg.algorithms {
        let adir = dir.join(algo.as_str());
        let denoiser = stage("reconstruct", cfg.denoiser_for(algo))?;
        let every = cfg.checkpoint_every;
        let ckdir = adir.join("checkpoints");
        if every > 0 {
            stage("reconstruct", std::fs::create_dir_all(&ckdir).map_err(Error::from))?;
        }
        let mut observer = |rec: &crate::solver::IterationRecord, v: &ComplexField| {
            if every > 0 && rec.iteration.is_multiple_of(every) {
                save_complex(v, &ckdir.join(format!("iter_{:04}.f64", rec.iteration)))?;
            }
            Ok(())
        };
        let result = stage(
            "reconstruct",
            reconstruct_observed(&stack, &masks, &optics, &cfg.solver, &denoiser, Some(&truth), &mut observer),
        )?;
        stage("reconstruct", save_result(&result, algo.as_str(), &adir, cfg.timing))?;

        let mut report = stage("metrics", MetricsReport::evaluate(&truth, &result.field))?;
        if cfg.metrics.segment {
            let m = &cfg.metrics;
            let labels = stage(
                "analysis",
                watershed_segment(&result.field.amplitude(), m.threshold, m.min_distance),
            )?;
            stage("analysis", labels.save_png(&adir.join("labels.png")))?;
            stage("analysis", labels.save_preview_png(&adir.join("labels_preview.png")))?;
            report = report.with_count(count_cells(&labels, m.exclude_margin), m.reference_count);
        }
        stage("metrics", report.to_kv().write(&adir.join("metrics.txt")))?;
        if cfg.previews {
            stage("report", save_previews(&result.field, &adir))?;
        }
        rows.push(Row {
            algo,
            cell: cell.clone(),
            result,
            report,
        });
    }
    Ok(rows)
}

/// Runs the whole sweep. Cells run on a pool of `sweep.workers` threads;
/// rows are ordered by cell index then algorithm order, whatever the pool
/// width. Failed cells leave a `FAILED` marker in their directory and in the
/// output root; the CSV still lists the cells that completed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let out = cfg.output_dir.clone();
    std::fs::create_dir_all(&out)?;
    let _ = std::fs::remove_file(out.join(FAILED_MARKER));
    cfg.save(&out.join("config.txt"))?;
    let cells = sweep_cells(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.sweep.workers)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    let started = Instant::now();
    let outcomes: Vec<(Cell, Result<Vec<Row>>)> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let dir = out.join(cell.dir_name());
                let _ = std::fs::remove_file(dir.join(FAILED_MARKER));
                let r = run_cell(cfg, cell, &dir);
                if let Err(e) = &r {
                    let _ = std::fs::write(dir.join(FAILED_MARKER), format!("{e}\n"));
                }
                (cell.clone(), r)
            })
            .collect()
    });

    let mut csv = format!("{CSV_HEADER}\n");
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (cell, outcome) in outcomes {
        match outcome {
            Ok(r) => rows.extend(r),
            Err(e) => failures.push((cell, e)),
        }
    }
    for row in &rows {
        csv += &row.csv_line(cfg);
        csv.push('\n');
    }
    std::fs::write(out.join(RESULTS_CSV), &csv)?;
    if let Some((cell, err)) = failures.into_iter().next() {
        std::fs::write(out.join(FAILED_MARKER), format!("{}: {err}\n", cell.dir_name()))?;
        return Err(err);
    }
    if cfg.timing {
        std::fs::write(out.join("timing.txt"), format!("{:.3}\n", started.elapsed().as_secs_f64()))?;
    }
    Ok(BenchReport {
        rows,
        csv,
        output_dir: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::MaskKind;
    use crate::priors::{DenoiserKind, ExternalSpec};

    fn smoke(dir: &Path) -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.target = TargetSource::Builtin { width: 16, height: 16 };
        c.theta = 1;
        c.masks.count = 2;
        c.solver.outer_iters = 2;
        c.algorithms = vec![Algo::Conv];
        c.output_dir = dir.to_path_buf();
        c.checkpoint_every = 1;
        c
    }

    #[test]
    fn smoke_run_writes_declared_files() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_experiment(&smoke(dir.path())).unwrap();
        assert_eq!(report.rows.len(), 1);
        let a = dir.path().join("cell_000/conv");
        for f in [
            "field.f64",
            "field.meta",
            "result.txt",
            "iterations.csv",
            "metrics.txt",
            "amplitude.png",
            "phase.png",
            "checkpoints/iter_0001.f64",
            "checkpoints/iter_0002.f64",
        ] {
            assert!(a.join(f).is_file(), "missing {f}");
        }
        assert!(dir.path().join("cell_000/stack/stack.txt").is_file());
        assert!(!dir.path().join(FAILED_MARKER).exists());
        let csv = std::fs::read_to_string(dir.path().join(RESULTS_CSV)).unwrap();
        assert!(csv.starts_with(CSV_HEADER));
        assert!(csv.lines().nth(1).unwrap().starts_with("conv,1,none,,2,2,"));
        let log = std::fs::read_to_string(a.join("iterations.csv")).unwrap();
        assert_eq!(log.lines().count(), 3);
    }

    #[test]
    fn sweep_cardinality() {
        let mut c = ExperimentConfig::default();
        c.sweep.theta = vec![2, 3, 4];
        c.sweep.snr_db = vec![2.0, 10.0, 20.0];
        let cells = sweep_cells(&c);
        assert_eq!(cells.len(), 9);
        assert_eq!(cells.iter().map(|c| c.index).collect::<Vec<_>>(), (0..9).collect::<Vec<_>>());
        assert!(cells.iter().all(|c| c.noise.kind == NoiseKind::Gaussian));
        assert_eq!((cells[4].theta, cells[4].noise.snr_db), (3, 10.0));
    }

    #[test]
    fn stage_failure_leaves_marker() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = smoke(dir.path());
        c.masks.kind = MaskKind::IidPhase;
        c.algorithms = vec![Algo::Conv, Algo::DoExt];
        c.denoiser.external = Some(ExternalSpec::new(dir.path().join("nope"), dir.path().join("w")));
        assert!(matches!(c.denoiser_for(Algo::DoExt).unwrap().kind, DenoiserKind::External(_)));
        let err = run_experiment(&c).unwrap_err();
        assert!(err.to_string().starts_with("stage `reconstruct` failed"), "{err}");
        assert!(dir.path().join(FAILED_MARKER).is_file());
        assert!(dir.path().join("cell_000").join(FAILED_MARKER).is_file());
        // the conv run finished before the failure and is kept
        assert!(dir.path().join("cell_000/conv/field.f64").is_file());
    }
}
