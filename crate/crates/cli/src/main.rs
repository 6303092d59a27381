// Copyright 2026 The vmsched Authors.
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use vmsched::metrics::{read_series_csv, read_summary_csv, write_series_csv, write_summary_csv};
use vmsched::plot::{emit_comparison_plot, emit_evolution_plot};
use vmsched::runner::{compare, run_preset, TRAINING_HOURS};
use vmsched::train::train;
use vmsched::{ExperimentConfig, Preset, SweepGrid};

#[derive(Parser)]
#[command(name = "vmsched", version, about = "Deadline-aware VM scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one preset on one workload.
    Run {
        #[arg(long)]
        preset: String,
        /// Configuration file; built-in calibrated defaults if omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Workload volume in job-hours; the configured value if omitted.
        #[arg(long)]
        hours: Option<f64>,
        #[arg(long, env = "VMSCHED_OUT")]
        out: PathBuf,
    },
    /// Calibrate parameters over a grid of candidate values.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Grid file; the built-in grid if omitted.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = TRAINING_HOURS)]
        hours: f64,
        #[arg(long, env = "VMSCHED_OUT")]
        out: PathBuf,
    },
    /// Run all five presets over a list of seeds.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated seeds or inclusive ranges, e.g. `1,2,5-8`.
        #[arg(long, default_value = "1,2,3,4,5")]
        seeds: String,
        #[arg(long)]
        hours: Option<f64>,
        #[arg(long, env = "VMSCHED_OUT")]
        out: PathBuf,
    },
    /// Redraw charts from the CSV files in a previous output directory.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, env = "VMSCHED_OUT")]
        out: PathBuf,
    },
}

fn load_config(path: Option<&Path>, hours: Option<f64>) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(h) = hours {
        cfg.apply("workload.total_hours", &h.to_string())?;
    }
    Ok(cfg)
}

fn out_dir(out: &Path) -> Result<&Path> {
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    Ok(out)
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || format!("invalid seed list entry `{part}`");
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse().with_context(bad)?, b.trim().parse().with_context(bad)?);
                if a > b {
                    bail!(bad());
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().with_context(bad)?),
        }
    }
    if seeds.is_empty() {
        bail!("seed list is empty");
    }
    Ok(seeds)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { preset, config, seed, hours, out } => {
            let preset: Preset = preset.parse()?;
            let cfg = load_config(config.as_deref(), hours)?;
            let report = run_preset(&cfg, preset, seed)?;
            let out = out_dir(&out)?;
            write_summary_csv(std::slice::from_ref(&report), &out.join("summary.csv"))?;
            write_series_csv(&report, &out.join("timeseries.csv"))?;
            emit_evolution_plot(&report, &out.join(format!("evolution_{preset}.svg")))?;
            let c = report.counts;
            println!(
                "{preset} seed {seed}: success {:.3} miss {:.3} (completed {}, missed {}, killed {}, rejected {})",
                report.success_rate, report.deadline_miss_rate, c.completed, c.missed, c.killed, c.rejected
            );
        }
        Command::Train { config, grid, hours, out } => {
            let cfg = load_config(config.as_deref(), Some(hours))?;
            let grid = match grid {
                Some(p) => SweepGrid::from_file(&p)?,
                None => SweepGrid::default(),
            };
            let calibrated = train(&cfg, &grid)?;
            let out = out_dir(&out)?;
            calibrated.write_csv(&out.join("calibration.csv"))?;
            // Steady runs read this back with --config.
            let mut steady = calibrated.config.clone();
            steady.workload.total_hours = ExperimentConfig::default().workload.total_hours;
            let cfg_path = out.join("calibrated.cfg");
            std::fs::write(&cfg_path, steady.to_config_string())
                .with_context(|| format!("cannot write {}", cfg_path.display()))?;
            for (k, v) in &calibrated.values {
                println!("{k} = {v}");
            }
        }
        Command::Compare { config, seeds, hours, out } => {
            let seeds = parse_seeds(&seeds)?;
            let cfg = load_config(config.as_deref(), hours)?;
            let reports = compare(&cfg, &Preset::ALL, &seeds)?;
            let out = out_dir(&out)?;
            write_summary_csv(&reports, &out.join("summary.csv"))?;
            emit_comparison_plot(&reports, &out.join("comparison.svg"))?;
            for r in reports.iter().filter(|r| r.seed == seeds[0]) {
                emit_evolution_plot(r, &out.join(format!("evolution_{}.svg", r.preset)))?;
            }
            for p in Preset::ALL {
                let rs: Vec<_> = reports.iter().filter(|r| r.preset == p.name()).collect();
                let n = rs.len() as f64;
                let s = rs.iter().map(|r| r.success_rate).sum::<f64>() / n;
                let m = rs.iter().map(|r| r.deadline_miss_rate).sum::<f64>() / n;
                println!("{p}: success {s:.3} miss {m:.3}");
            }
        }
        Command::Plot { input, out } => {
            let rows = read_summary_csv(&input.join("summary.csv"))?;
            if rows.is_empty() {
                bail!("{} has no rows", input.join("summary.csv").display());
            }
            let reports: Vec<_> = rows.iter().map(|r| r.to_report()).collect();
            let out = out_dir(&out)?;
            emit_comparison_plot(&reports, &out.join("comparison.svg"))?;
            let series = input.join("timeseries.csv");
            if let ([row], true) = (rows.as_slice(), series.exists()) {
                let (xs, fs) = read_series_csv(&series)?;
                let report = vmsched::RunReport { threshold_series: xs, failure_series: fs, ..row.to_report() };
                emit_evolution_plot(&report, &out.join(format!("evolution_{}.svg", row.preset)))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let parts: Vec<&str> = msg
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("vmsched: error: {}", parts.join(" ").trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("vmsched: error: {msg}");
            ExitCode::FAILURE
        }
    }
}
