//! Command-line front end. The `cdpsr` binary is a thin wrapper around [`run`].

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{apply_noise, load_target, run_experiment, save_previews, RESULTS_CSV};
use crate::config::{Algo, ExperimentConfig};
use crate::error::{Error, Result};
use crate::field::{ComplexField, RealImage};
use crate::forward::{generate_mask_set, simulate_measurements};
use crate::io::{is_complex_dump, load_complex, load_png_gray, load_real, save_complex};
use crate::metrics::MetricsReport;
use crate::segment::{count_cells, watershed_segment, Threshold};
use crate::solver::reconstruct_observed;
use crate::store::{load_masks, load_result_field, load_stack, save_masks, save_result, save_stack};

#[derive(Parser, Debug)]
#[command(name = "cdpsr", version, about = "Complex-domain pixel super-resolution toolkit")]
struct Cli {
    /// Experiment config (flat `section.key = value` file).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base seed for masks, noise and solver initialization.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; affects wall time only.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a measurement stack from the configured target and masks.
    Simulate,
    /// Reconstruct a field from a directory written by `simulate`.
    Reconstruct(ReconstructArgs),
    /// Compare a reconstructed field with ground truth.
    Evaluate(EvaluateArgs),
    /// Watershed segmentation of an image; prints `count=N`.
    Segment(SegmentArgs),
    /// Run the configured sweep and write results.csv.
    Bench,
    /// Generate and save the configured mask set.
    Masks,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgoArg {
    Conv,
    DoTv,
    DoExt,
}

impl From<AlgoArg> for Algo {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Conv => Algo::Conv,
            AlgoArg::DoTv => Algo::DoTv,
            AlgoArg::DoExt => Algo::DoExt,
        }
    }
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(long, value_enum)]
    algo: AlgoArg,
    /// Directory written by `simulate`.
    #[arg(long, value_name = "DIR")]
    input: PathBuf,
    /// Override solver.iters.
    #[arg(long)]
    iters: Option<usize>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Reconstructed field: a complex dump or a result directory.
    #[arg(long, value_name = "PATH")]
    field: PathBuf,
    /// Ground-truth complex dump.
    #[arg(long, value_name = "PATH")]
    truth: PathBuf,
    /// Also segment the amplitude and report a cell count.
    #[arg(long)]
    segment: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Channel {
    Amplitude,
    Phase,
}

#[derive(Args, Debug)]
struct SegmentArgs {
    /// Gray PNG, or a real or complex dump.
    #[arg(long, value_name = "PATH")]
    image: PathBuf,
    /// Channel to segment when the input is a complex dump.
    #[arg(long, value_enum, default_value = "amplitude")]
    channel: Channel,
    /// `otsu` or a fixed level.
    #[arg(long)]
    threshold: Option<Threshold>,
    #[arg(long)]
    min_distance: Option<usize>,
    /// Count objects touching the border too.
    #[arg(long)]
    keep_border: bool,
}

/// Parses `argv` and runs the command; returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.reseed(s);
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::config("--threads must be >= 1"));
        }
        cfg.sweep.workers = t;
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Simulate => simulate(&cfg),
        Command::Reconstruct(a) => reconstruct(&cfg, &cli, a),
        Command::Evaluate(a) => evaluate(&cfg, a, cli.out.is_some()),
        Command::Segment(a) => segment(&cfg, a, cli.out.is_some()),
        Command::Bench => bench(&cfg),
        Command::Masks => masks(&cfg),
    })
}

fn simulate(cfg: &ExperimentConfig) -> Result<()> {
    let out = &cfg.output_dir;
    std::fs::create_dir_all(out)?;
    let optics = cfg.optics_for(cfg.theta)?;
    let pitch = optics.geometry.hr_pitch();
    let truth = load_target(cfg, pitch).map_err(|e| e.in_stage("target"))?;
    let masks = generate_mask_set(&cfg.mask_params(cfg.masks.count, truth.width(), truth.height(), pitch))
        .map_err(|e| e.in_stage("masks"))?;
    let clean = simulate_measurements(&truth, &masks, &optics).map_err(|e| e.in_stage("simulate"))?;
    let stack = apply_noise(&clean, &cfg.noise).map_err(|e| e.in_stage("noise"))?;
    save_complex(&truth, &out.join("truth.f64"))?;
    save_stack(&stack, &out.join("stack"))?;
    save_masks(&masks, &out.join("masks"))?;
    cfg.save(&out.join("config.txt"))?;
    if cfg.previews {
        save_previews(&truth, out)?;
    }
    println!("frames={} dir={}", stack.len(), out.display());
    Ok(())
}

fn reconstruct(cfg: &ExperimentConfig, cli: &Cli, a: &ReconstructArgs) -> Result<()> {
    // Without --config, use the config the simulation was run with.
    let mut cfg = match (&cli.config, a.input.join("config.txt")) {
        (None, p) if p.is_file() => {
            let mut c = ExperimentConfig::load(&p)?;
            if let Some(s) = cli.seed {
                c.reseed(s);
            }
            c.output_dir = cfg.output_dir.clone();
            c.sweep.workers = cfg.sweep.workers;
            c
        }
        _ => cfg.clone(),
    };
    if let Some(n) = a.iters {
        cfg.solver.outer_iters = n;
    }
    cfg.validate()?;
    let algo = Algo::from(a.algo);
    let stack = load_stack(&a.input.join("stack")).map_err(|e| e.in_stage("load"))?;
    let masks = load_masks(&a.input.join("masks")).map_err(|e| e.in_stage("load"))?;
    let truth_path = a.input.join("truth.f64");
    let truth = if truth_path.is_file() {
        Some(load_complex(&truth_path)?)
    } else {
        None
    };
    let optics = cfg.optics_for(cfg.theta)?;
    let denoiser = cfg.denoiser_for(algo)?;
    let out = &cfg.output_dir;
    let ckdir = out.join("checkpoints");
    let every = cfg.checkpoint_every;
    if every > 0 {
        std::fs::create_dir_all(&ckdir)?;
    }
    let result = reconstruct_observed(
        &stack,
        &masks,
        &optics,
        &cfg.solver,
        &denoiser,
        truth.as_ref(),
        &mut |rec, v| {
            if every > 0 && rec.iteration.is_multiple_of(every) {
                save_complex(v, &ckdir.join(format!("iter_{:04}.f64", rec.iteration)))?;
            }
            Ok(())
        },
    )
    .map_err(|e| e.in_stage("reconstruct"))?;
    save_result(&result, algo.as_str(), out, cfg.timing)?;
    if cfg.previews {
        save_previews(&result.field, out)?;
    }
    let last = result.per_iteration.last();
    print!(
        "algo={} iterations={} residual={:.6e}",
        algo.as_str(),
        result.per_iteration.len(),
        last.map_or(f64::NAN, |r| r.residual)
    );
    if let Some(r) = last.filter(|r| r.psnr_amplitude.is_some()) {
        print!(
            " psnr_amplitude={:.3} psnr_phase={:.3}",
            r.psnr_amplitude.unwrap_or_default(),
            r.psnr_phase.unwrap_or_default()
        );
    }
    println!();
    Ok(())
}

/// `write` is set when `--out` was given.
fn evaluate(cfg: &ExperimentConfig, a: &EvaluateArgs, write: bool) -> Result<()> {
    let field = load_result_field(&a.field)?;
    let truth = load_complex(&a.truth)?;
    let mut report = MetricsReport::evaluate(&truth, &field)?;
    if a.segment {
        let m = &cfg.metrics;
        let labels = watershed_segment(&field.amplitude(), m.threshold, m.min_distance)?;
        report = report.with_count(count_cells(&labels, m.exclude_margin), m.reference_count);
    }
    let rec = report.to_kv();
    if write {
        std::fs::create_dir_all(&cfg.output_dir)?;
        rec.write(&cfg.output_dir.join("metrics.txt"))?;
    }
    print!("{rec}");
    Ok(())
}

fn load_segment_input(path: &Path, channel: Channel) -> Result<RealImage> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
        return load_png_gray(path, 1.0);
    }
    if is_complex_dump(path)? {
        let f: ComplexField = load_complex(path)?;
        Ok(match channel {
            Channel::Amplitude => f.amplitude(),
            Channel::Phase => f.phase(),
        })
    } else {
        load_real(path)
    }
}

fn segment(cfg: &ExperimentConfig, a: &SegmentArgs, write: bool) -> Result<()> {
    let img = load_segment_input(&a.image, a.channel)?;
    let m = &cfg.metrics;
    let labels = watershed_segment(
        &img,
        a.threshold.unwrap_or(m.threshold),
        a.min_distance.unwrap_or(m.min_distance),
    )?;
    let exclude = m.exclude_margin && !a.keep_border;
    let count = count_cells(&labels, exclude);
    if write {
        std::fs::create_dir_all(&cfg.output_dir)?;
        labels.save_png(&cfg.output_dir.join("labels.png"))?;
        labels.save_preview_png(&cfg.output_dir.join("labels_preview.png"))?;
    }
    println!("count={count}");
    Ok(())
}

fn bench(cfg: &ExperimentConfig) -> Result<()> {
    let report = run_experiment(cfg)?;
    print!("{}", report.csv);
    eprintln!("wrote {}", report.output_dir.join(RESULTS_CSV).display());
    Ok(())
}

fn masks(cfg: &ExperimentConfig) -> Result<()> {
    let optics = cfg.optics_for(cfg.theta)?;
    let (w, h) = match load_target(cfg, optics.geometry.hr_pitch()) {
        Ok(t) => (t.width(), t.height()),
        Err(e) => return Err(e.in_stage("target")),
    };
    let set = generate_mask_set(&cfg.mask_params(cfg.masks.count, w, h, optics.geometry.hr_pitch()))?;
    save_masks(&set, &cfg.output_dir)?;
    println!("masks={} dir={}", set.len(), cfg.output_dir.display());
    Ok(())
}
