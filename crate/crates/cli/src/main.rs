use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rkpinn::experiments::{run_experiment, uniform_time_baseline, ExperimentConfig, ExperimentSummary};
use rkpinn::maxreg::verify_mr_suite;

#[derive(Parser)]
#[command(
    name = "rkpinn",
    version,
    about = "Runge-Kutta PINN experiments and maximal-regularity checks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train every scheme listed in the config and write CSV diagnostics.
    Run { config: PathBuf },
    /// Train only the uniform-in-time baseline.
    Baseline { config: PathBuf },
    /// Randomized maximal-regularity suite; CSV report on stdout unless --out.
    Maxreg {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print_summary(cfg: &ExperimentConfig, s: &ExperimentSummary) {
    println!(
        "{:<10} {:>12} {:>12} {:>12} {:>12}",
        "scheme", "final_loss", "drift", "max_misfit", "extra"
    );
    for r in &s.results {
        let extra = r
            .rel_l2
            .or(r.smoothing_tv)
            .map_or("-".to_string(), |v| format!("{v:.4e}"));
        println!(
            "{:<10} {:>12.4e} {:>12.4e} {:>12.4e} {:>12}",
            r.label, r.final_loss, r.drift, r.max_misfit, extra
        );
    }
    println!("outputs in {}", cfg.outputs.display());
}

fn load(path: &PathBuf) -> Result<ExperimentConfig> {
    ExperimentConfig::from_file(path).with_context(|| format!("reading config {}", path.display()))
}

fn main() -> Result<ExitCode> {
    match Cli::parse().cmd {
        Cmd::Run { config } => {
            let cfg = load(&config)?;
            let s = run_experiment(&cfg)?;
            print_summary(&cfg, &s);
        }
        Cmd::Baseline { config } => {
            let cfg = load(&config)?;
            let s = uniform_time_baseline(&cfg)?;
            print_summary(&cfg, &s);
        }
        Cmd::Maxreg { trials, seed, tol, out } => {
            let report = verify_mr_suite(seed, trials, tol)?;
            match &out {
                Some(p) => {
                    let mut w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
                    report.write_csv(&mut w)?;
                    w.flush()?;
                }
                None => report.write_csv(io::stdout().lock())?,
            }
            let failed = report.failures().count();
            eprintln!("{} rows, {failed} failures", report.rows.len());
            if failed > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
