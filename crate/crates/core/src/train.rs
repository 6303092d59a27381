// Copyright 2026 The vmsched Authors.
// SPDX-License-Identifier: Apache-2.0

//! Training-phase grid search.
//!
//! A grid file lists candidate values per configuration key:
//!
//! ```text
//! overhead.static.cpu_bound = 1.01, 1.03, 1.05
//! controller.failure_target = 0.15, 0.2, 0.25
//! controller.window_size = 25, 50, 100
//! train.preset = alg_4
//! train.static_target = 0.42
//! ```
//!
//! Training has up to two stages. `overhead.static.*` axes are searched first
//! on alg_2, for the point whose success rate is closest to
//! `train.static_target`. The remaining axes are then searched on
//! `train.preset` for the highest success rate. Ties go to the lower miss rate,
//! then to the earlier point (the last axis varies fastest).
//!
//! When the tuned preset is adaptive and the grid does not list
//! `controller.fixed_x`, the fixed threshold used by alg_3 is set to the
//! time-averaged threshold of the winning adaptive run, to two decimals.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::metrics::time_average;
use crate::num::{clamp, Scalar};
use crate::policy::ControllerKind;
use crate::preset::Preset;
use crate::runner::run_preset;

const STATIC_PREFIX: &str = "overhead.static.";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid<T> {
    /// `(key, candidates)` in file order.
    pub axes: Vec<(String, Vec<String>)>,
    pub preset: Preset,
    pub static_target: T,
}

impl<T: Scalar> Default for SweepGrid<T> {
    /// The grid used to produce the shipped calibration.
    fn default() -> Self {
        let axis = |k: &str, vs: &[&str]| (k.to_string(), vs.iter().map(|v| v.to_string()).collect());
        SweepGrid {
            axes: vec![
                axis("overhead.static.cpu_bound", &["1.01", "1.03", "1.05"]),
                axis("overhead.static.mem_bound", &["1.10", "1.15", "1.20"]),
                axis("controller.delta_x", &["0.005", "0.01", "0.02"]),
                axis("controller.failure_target", &["0.15", "0.2", "0.25"]),
                axis("controller.window_size", &["25", "50", "100"]),
            ],
            preset: Preset::Alg4,
            static_target: T::lit(0.42),
        }
    }
}

impl<T: Scalar> SweepGrid<T> {
    pub fn parse_str(text: &str, origin: &Path) -> Result<Self> {
        let mut grid = SweepGrid { axes: Vec::new(), ..Self::default() };
        let probe = ExperimentConfig::<T>::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| Error::Parse { path: origin.into(), line: i + 1, reason };
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(format!("expected `key = v1, v2, ...`, found `{line}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "train.preset" => grid.preset = value.parse().map_err(|e: Error| err(e.to_string()))?,
                "train.static_target" => {
                    grid.static_target = value
                        .parse::<f64>()
                        .ok()
                        .filter(|v| (0.0..=1.0).contains(v))
                        .map(T::lit)
                        .ok_or_else(|| err(format!("train.static_target: `{value}` is not in [0, 1]")))?
                }
                _ => {
                    let values: Vec<String> =
                        value.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
                    if values.is_empty() {
                        return Err(err(format!("{key}: no candidate values")));
                    }
                    if grid.axes.iter().any(|(k, _)| k == key) {
                        return Err(err(format!("{key}: listed twice")));
                    }
                    for v in &values {
                        probe.clone().apply(key, v).map_err(|e| err(e.to_string()))?;
                    }
                    grid.axes.push((key.to_string(), values));
                }
            }
        }
        Ok(grid)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text, path)
    }

    /// Renders a grid file that parses back to `self`.
    pub fn to_grid_string(&self) -> String {
        let mut out = String::new();
        for (k, vs) in &self.axes {
            let _ = writeln!(out, "{k} = {}", vs.join(", "));
        }
        let _ = writeln!(out, "train.preset = {}", self.preset);
        let _ = writeln!(out, "train.static_target = {}", self.static_target.as_f64());
        out
    }
}

pub type Assignment = Vec<(String, String)>;

/// Cartesian product of `axes`, last axis fastest.
pub fn grid_points(axes: &[(String, Vec<String>)]) -> Vec<Assignment> {
    let mut points = vec![Vec::new()];
    for (key, values) in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((key.clone(), v.clone()));
                    q
                })
            })
            .collect();
    }
    points
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Objective<T> {
    Maximize,
    /// Success rate as close as possible to the target.
    Match(T),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResult<T> {
    pub assignment: Assignment,
    pub success_rate: T,
    pub deadline_miss_rate: T,
}

fn with<T: Scalar>(base: &ExperimentConfig<T>, assignment: &Assignment) -> Result<ExperimentConfig<T>> {
    let mut cfg = base.clone();
    for (k, v) in assignment {
        cfg.apply(k, v)?;
    }
    Ok(cfg)
}

/// Evaluates every point on `preset` and returns the index of the best one
/// under `objective`, alongside all results in grid order.
pub fn sweep<T: Scalar>(
    base: &ExperimentConfig<T>,
    preset: Preset,
    points: &[Assignment],
    objective: Objective<T>,
) -> Result<(usize, Vec<PointResult<T>>)> {
    if points.is_empty() {
        return Err(Error::config("grid", "no grid points"));
    }
    let results: Vec<PointResult<T>> = points
        .par_iter()
        .map(|a| {
            let r = run_preset(&with(base, a)?, preset, base.seed)?;
            Ok(PointResult {
                assignment: a.clone(),
                success_rate: r.success_rate,
                deadline_miss_rate: r.deadline_miss_rate,
            })
        })
        .collect::<Result<_>>()?;
    Ok((best_index(&results, objective), results))
}

fn best_index<T: Scalar>(results: &[PointResult<T>], objective: Objective<T>) -> usize {
    let score = |r: &PointResult<T>| match objective {
        Objective::Maximize => r.success_rate,
        Objective::Match(target) => -(r.success_rate - target).abs(),
    };
    let mut best = 0;
    for (i, r) in results.iter().enumerate().skip(1) {
        let (s, b) = (score(r), score(&results[best]));
        if s > b || (s == b && r.deadline_miss_rate < results[best].deadline_miss_rate) {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibratedParams<T> {
    /// The base configuration with every chosen value applied.
    pub config: ExperimentConfig<T>,
    /// Chosen values, in grid order, then `controller.fixed_x` if derived.
    pub values: Assignment,
    /// Every evaluated point, static stage first.
    pub results: Vec<PointResult<T>>,
}

impl<T: Scalar> CalibratedParams<T> {
    /// `calibration.csv`: `parameter,value`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("parameter,value\n");
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k},{v}");
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Runs both training stages on `base`, which should already carry the
/// training workload length.
pub fn train<T: Scalar>(base: &ExperimentConfig<T>, grid: &SweepGrid<T>) -> Result<CalibratedParams<T>> {
    if grid.axes.is_empty() {
        return Err(Error::config("grid", "training grid lists no parameters"));
    }
    let (static_axes, other_axes): (Vec<_>, Vec<_>) =
        grid.axes.iter().cloned().partition(|(k, _)| k.starts_with(STATIC_PREFIX));

    let mut config = base.clone();
    let mut values = Assignment::new();
    let mut results = Vec::new();
    for (axes, preset, objective) in [
        (static_axes, Preset::Alg2, Objective::Match(grid.static_target)),
        (other_axes, grid.preset, Objective::Maximize),
    ] {
        if axes.is_empty() {
            continue;
        }
        let (best, rs) = sweep(&config, preset, &grid_points(&axes), objective)?;
        config = with(&config, &rs[best].assignment)?;
        values.extend(rs[best].assignment.iter().cloned());
        results.extend(rs);
    }

    let derive_x = grid.preset.controller_kind() == ControllerKind::Adaptive
        && !grid.axes.iter().any(|(k, _)| k == "controller.fixed_x");
    if derive_x {
        let run = run_preset(&config, grid.preset, config.seed)?;
        let c = &config.controller;
        let mean = time_average(&run.threshold_series, T::zero()).unwrap_or(c.initial_x);
        let x = clamp((mean * T::lit(100.0)).round() / T::lit(100.0), c.x_min, c.x_max);
        let text = format!("{}", x.as_f64());
        config.apply("controller.fixed_x", &text)?;
        values.push(("controller.fixed_x".into(), text));
    }
    Ok(CalibratedParams { config, values, results })
}
