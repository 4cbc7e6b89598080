//! A small θ × SNR sweep through the experiment runner.
//!
//! cargo run --release --example bench_sweep -- [OUT_DIR]

use std::path::PathBuf;

use cdpsr::bench::run_experiment;
use cdpsr::config::{Algo, ExperimentConfig, TargetSource};

fn main() -> cdpsr::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.output_dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/bench".into()));
    cfg.target = TargetSource::Builtin { width: 48, height: 48 };
    cfg.masks.count = 12;
    cfg.solver.outer_iters = 20;
    cfg.solver.eta = 0.25;
    cfg.algorithms = vec![Algo::Conv, Algo::DoTv];
    cfg.sweep.theta = vec![2, 3, 4];
    cfg.sweep.snr_db = vec![2.0, 10.0, 20.0];
    cfg.timing = true;

    let report = run_experiment(&cfg)?;
    print!("{}", report.csv);
    println!("outputs in {}", report.output_dir.display());
    Ok(())
}
