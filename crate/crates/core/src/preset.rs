// Copyright 2026 The vmsched Authors.
// SPDX-License-Identifier: Apache-2.0

//! The five experiment configurations.

use std::fmt;
use std::str::FromStr;

use crate::config::ExperimentConfig;
use crate::engine::SimConfig;
use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::overhead::{OverheadMode, OverheadModel};
use crate::policy::{ControllerKind, ControllerParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    /// Physical baseline.
    Alg1,
    /// Virtual, static overhead, no threshold management.
    Alg2,
    /// Virtual, dynamic overhead, fixed trained threshold.
    Alg3,
    /// Virtual, dynamic overhead, adaptive threshold.
    Alg4,
    /// Virtual, dynamic overhead, statistical threshold.
    Alg5,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Alg1, Preset::Alg2, Preset::Alg3, Preset::Alg4, Preset::Alg5];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Alg1 => "alg_1",
            Preset::Alg2 => "alg_2",
            Preset::Alg3 => "alg_3",
            Preset::Alg4 => "alg_4",
            Preset::Alg5 => "alg_5",
        }
    }

    pub fn overhead_mode(self) -> OverheadMode {
        match self {
            Preset::Alg1 => OverheadMode::Physical,
            Preset::Alg2 => OverheadMode::Static,
            _ => OverheadMode::Dynamic,
        }
    }

    pub fn controller_kind(self) -> ControllerKind {
        match self {
            Preset::Alg1 | Preset::Alg2 | Preset::Alg3 => ControllerKind::Fixed,
            Preset::Alg4 => ControllerKind::Adaptive,
            Preset::Alg5 => ControllerKind::Statistical,
        }
    }

    /// Single-run configuration for this preset under `exp`.
    ///
    /// alg_1 and alg_2 pin the threshold at `x_max`, alg_3 at the trained
    /// `controller.fixed_x`; alg_4 and alg_5 start at `x_max` and move.
    pub fn sim_config<T: Scalar>(self, exp: &ExperimentConfig<T>) -> SimConfig<T> {
        let mode = self.overhead_mode();
        let overhead = match mode {
            OverheadMode::Physical => OverheadModel::physical(),
            OverheadMode::Static => {
                OverheadModel { mode, base_multiplier: exp.static_multiplier, contention_coeff: T::zero() }
            }
            OverheadMode::Dynamic => {
                OverheadModel { mode, base_multiplier: exp.dynamic_multiplier, contention_coeff: exp.contention_coeff }
            }
        };
        let initial_x = match self {
            Preset::Alg3 => exp.fixed_x,
            _ => exp.controller.x_max,
        };
        SimConfig {
            seed: exp.seed,
            workload: exp.workload.clone(),
            overhead,
            controller: ControllerParams { kind: self.controller_kind(), initial_x, ..exp.controller.clone() },
            scheduler_period: exp.scheduler_period,
            preset: Some(self),
            kill_running: exp.kill_running,
            requeue_rejected: exp.requeue_rejected,
            failure_counting: exp.failure_counting,
            cpu_capacity: exp.cpu_capacity,
            mem_capacity: exp.mem_capacity,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}
