// Copyright 2026 The vmsched Authors.
// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration files.
//!
//! The format is flat `key = value` lines with dotted section prefixes.
//! `#` starts a comment, blank lines are ignored, and every key has a default,
//! so an empty file is a valid configuration.
//!
//! ```text
//! seed = 7
//! workload.total_hours = 10000
//! overhead.static.io_bound = 1.30
//! controller.delta_x = 0.01
//! engine.kill_running = true
//! ```

use std::path::Path;

use crate::engine::FailureCounting;
use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::policy::ControllerParams;
use crate::workload::{ClassMap, WorkloadClass, WorkloadSpec};

/// Shared parameters from which every preset's run is derived.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig<T> {
    pub seed: u64,
    pub workload: WorkloadSpec<T>,
    /// Per-class slowdown without overhead management.
    pub static_multiplier: ClassMap<T>,
    /// Per-class slowdown of a lone managed VM, before contention.
    pub dynamic_multiplier: ClassMap<T>,
    pub contention_coeff: T,
    /// Shared controller bounds, step, target and window.
    pub controller: ControllerParams<T>,
    /// Fixed threshold used by alg_3.
    pub fixed_x: T,
    pub scheduler_period: T,
    pub kill_running: bool,
    pub requeue_rejected: bool,
    pub failure_counting: FailureCounting,
    pub cpu_capacity: T,
    pub mem_capacity: T,
}

/// Untrained static multipliers, the starting point of calibration.
pub fn uncalibrated_static<T: Scalar>() -> ClassMap<T> {
    ClassMap::new(T::lit(1.05), T::lit(1.15), T::lit(1.30))
}

impl<T: Scalar> Default for ExperimentConfig<T> {
    /// The calibrated configuration: training the default grid on a
    /// 10,000-hour seed-0 workload chooses exactly these static multipliers,
    /// controller step, target and window, and fixed threshold.
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            workload: WorkloadSpec::default(),
            static_multiplier: ClassMap::new(T::lit(1.01), T::lit(1.10), T::lit(1.30)),
            dynamic_multiplier: ClassMap::new(T::lit(1.0), T::lit(1.0), T::lit(1.0)),
            contention_coeff: T::lit(0.12),
            controller: ControllerParams {
                delta_x: T::lit(0.005),
                failure_target: T::lit(0.15),
                window_size: 100,
                ..ControllerParams::default()
            },
            fixed_x: T::lit(0.29),
            scheduler_period: T::lit(0.1),
            kill_running: true,
            requeue_rejected: false,
            failure_counting: FailureCounting::Both,
            cpu_capacity: T::lit(4.0),
            mem_capacity: T::lit(8.0),
        }
    }
}

fn num<T: Scalar>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(T::lit)
        .ok_or_else(|| Error::config(key, format!("`{value}` is not a finite number")))
}

fn int<I: std::str::FromStr>(key: &str, value: &str) -> Result<I> {
    value.parse().map_err(|_| Error::config(key, format!("`{value}` is not a nonnegative integer")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::config(key, format!("`{value}` is not true/false"))),
    }
}

fn class_key(key: &str, prefix: &str) -> Option<WorkloadClass> {
    key.strip_prefix(prefix)?.parse().ok()
}

impl<T: Scalar> ExperimentConfig<T> {
    /// Sets one key. Unknown keys are an error naming the key.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let w = &mut self.workload;
        let c = &mut self.controller;
        match key {
            "seed" => self.seed = int(key, value)?,
            "node.cpu" => self.cpu_capacity = num(key, value)?,
            "node.mem" => self.mem_capacity = num(key, value)?,
            "workload.total_hours" => w.total_hours = num(key, value)?,
            "workload.duration_min" => w.duration_range.0 = num(key, value)?,
            "workload.duration_max" => w.duration_range.1 = num(key, value)?,
            "workload.deadline_slack" => w.deadline_slack = num(key, value)?,
            "workload.arrival_gap" => w.arrival_gap = num(key, value)?,
            "workload.cpu_low" => w.demand.cpu_levels.0 = num(key, value)?,
            "workload.cpu_high" => w.demand.cpu_levels.1 = num(key, value)?,
            "workload.mem_low" => w.demand.mem_levels.0 = num(key, value)?,
            "workload.mem_high" => w.demand.mem_levels.1 = num(key, value)?,
            "overhead.contention_coeff" => self.contention_coeff = num(key, value)?,
            "controller.delta_x" => c.delta_x = num(key, value)?,
            "controller.failure_target" => c.failure_target = num(key, value)?,
            "controller.window_size" => c.window_size = int(key, value)?,
            "controller.x_min" => c.x_min = num(key, value)?,
            "controller.x_max" => c.x_max = num(key, value)?,
            "controller.fixed_x" => self.fixed_x = num(key, value)?,
            "controller.unsigned_step" => c.unsigned_step = flag(key, value)?,
            "engine.scheduler_period" => self.scheduler_period = num(key, value)?,
            "engine.kill_running" => self.kill_running = flag(key, value)?,
            "engine.requeue_rejected" => self.requeue_rejected = flag(key, value)?,
            "engine.failure_counting" => self.failure_counting = value.parse()?,
            _ => {
                let targets: [(&str, &mut ClassMap<T>); 5] = [
                    ("workload.class_mix.", &mut w.class_mix),
                    ("workload.high_cpu_prob.", &mut w.demand.high_cpu_prob),
                    ("workload.high_mem_prob.", &mut w.demand.high_mem_prob),
                    ("overhead.static.", &mut self.static_multiplier),
                    ("overhead.dynamic.", &mut self.dynamic_multiplier),
                ];
                for (prefix, map) in targets {
                    if let Some(class) = class_key(key, prefix) {
                        map[class] = num(key, value)?;
                        return Ok(());
                    }
                }
                return Err(Error::config(key, "unknown configuration key"));
            }
        }
        Ok(())
    }

    pub fn parse_str(text: &str, origin: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: origin.into(),
                    line: i + 1,
                    reason: format!("expected `key = value`, found `{line}`"),
                });
            };
            cfg.apply(key.trim(), value.trim()).map_err(|e| Error::Parse {
                path: origin.into(),
                line: i + 1,
                reason: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text, path)
    }

    /// Every key with its current value, in canonical order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let w = &self.workload;
        let c = &self.controller;
        let f = |v: T| format!("{}", v.as_f64());
        let mut out = vec![
            ("seed".to_string(), self.seed.to_string()),
            ("node.cpu".into(), f(self.cpu_capacity)),
            ("node.mem".into(), f(self.mem_capacity)),
            ("workload.total_hours".into(), f(w.total_hours)),
            ("workload.duration_min".into(), f(w.duration_range.0)),
            ("workload.duration_max".into(), f(w.duration_range.1)),
            ("workload.deadline_slack".into(), f(w.deadline_slack)),
            ("workload.arrival_gap".into(), f(w.arrival_gap)),
            ("workload.cpu_low".into(), f(w.demand.cpu_levels.0)),
            ("workload.cpu_high".into(), f(w.demand.cpu_levels.1)),
            ("workload.mem_low".into(), f(w.demand.mem_levels.0)),
            ("workload.mem_high".into(), f(w.demand.mem_levels.1)),
        ];
        let maps: [(&str, &ClassMap<T>); 5] = [
            ("workload.class_mix.", &w.class_mix),
            ("workload.high_cpu_prob.", &w.demand.high_cpu_prob),
            ("workload.high_mem_prob.", &w.demand.high_mem_prob),
            ("overhead.static.", &self.static_multiplier),
            ("overhead.dynamic.", &self.dynamic_multiplier),
        ];
        for (prefix, map) in maps {
            for (class, v) in map.iter() {
                out.push((format!("{prefix}{class}"), f(v)));
            }
        }
        out.extend([
            ("overhead.contention_coeff".into(), f(self.contention_coeff)),
            ("controller.delta_x".into(), f(c.delta_x)),
            ("controller.failure_target".into(), f(c.failure_target)),
            ("controller.window_size".into(), c.window_size.to_string()),
            ("controller.x_min".into(), f(c.x_min)),
            ("controller.x_max".into(), f(c.x_max)),
            ("controller.fixed_x".into(), f(self.fixed_x)),
            ("controller.unsigned_step".into(), c.unsigned_step.to_string()),
            ("engine.scheduler_period".into(), f(self.scheduler_period)),
            ("engine.kill_running".into(), self.kill_running.to_string()),
            ("engine.requeue_rejected".into(), self.requeue_rejected.to_string()),
            ("engine.failure_counting".into(), self.failure_counting.to_string()),
        ]);
        out
    }

    /// Renders a file that parses back to `self`.
    pub fn to_config_string(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
